#pragma once

#include <cstddef>
#include <string>
#include <string_view>

namespace dragoman::utf8 {

// Code points above the Unicode range, used as private symbols by the models.
inline constexpr char32_t kBoundary = 0x110000;
inline constexpr char32_t kUnknown = 0x110001;

bool is_valid(std::string_view text) noexcept;

/// Decodes UTF-8; throws Error(MalformedLine) on invalid input.
std::u32string decode(std::string_view text);
std::string encode(std::u32string_view text);
void append(std::string& out, char32_t cp);

/// Number of code points; assumes valid UTF-8.
std::size_t length(std::string_view text) noexcept;

/// Unicode whitespace as understood by Python's str.isspace().
bool is_space(char32_t cp) noexcept;

std::string_view trim(std::string_view text) noexcept;
std::string_view rtrim(std::string_view text) noexcept;
std::u32string_view trim(std::u32string_view text) noexcept;
std::u32string_view rtrim(std::u32string_view text) noexcept;

/// True when the text holds nothing but whitespace.
bool is_blank(std::string_view text) noexcept;

}  // namespace dragoman::utf8
