#include "dragoman/utf8.hpp"

#include "dragoman/error.hpp"

namespace dragoman::utf8 {
namespace {

// Returns the decoded code point and advances pos, or returns npos-like
// sentinel 0xFFFFFFFF on malformed input.
constexpr char32_t kInvalid = 0xFFFFFFFF;

char32_t next(std::string_view s, std::size_t& pos) noexcept {
  const auto b0 = static_cast<unsigned char>(s[pos]);
  if (b0 < 0x80) {
    ++pos;
    return b0;
  }
  std::size_t extra;
  char32_t cp;
  char32_t min;
  if ((b0 & 0xE0) == 0xC0) {
    extra = 1; cp = b0 & 0x1F; min = 0x80;
  } else if ((b0 & 0xF0) == 0xE0) {
    extra = 2; cp = b0 & 0x0F; min = 0x800;
  } else if ((b0 & 0xF8) == 0xF0) {
    extra = 3; cp = b0 & 0x07; min = 0x10000;
  } else {
    return kInvalid;
  }
  if (pos + extra >= s.size()) return kInvalid;
  for (std::size_t i = 1; i <= extra; ++i) {
    const auto b = static_cast<unsigned char>(s[pos + i]);
    if ((b & 0xC0) != 0x80) return kInvalid;
    cp = (cp << 6) | (b & 0x3F);
  }
  if (cp < min || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) return kInvalid;
  pos += extra + 1;
  return cp;
}

}  // namespace

bool is_valid(std::string_view text) noexcept {
  std::size_t pos = 0;
  while (pos < text.size()) {
    if (next(text, pos) == kInvalid) return false;
  }
  return true;
}

std::u32string decode(std::string_view text) {
  std::u32string out;
  out.reserve(text.size());
  std::size_t pos = 0;
  while (pos < text.size()) {
    const char32_t cp = next(text, pos);
    if (cp == kInvalid) {
      throw Error(ErrorCode::MalformedLine,
                  "invalid UTF-8 at byte offset " + std::to_string(pos));
    }
    out.push_back(cp);
  }
  return out;
}

void append(std::string& out, char32_t cp) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

std::string encode(std::u32string_view text) {
  std::string out;
  out.reserve(text.size());
  for (char32_t cp : text) append(out, cp);
  return out;
}

std::size_t length(std::string_view text) noexcept {
  std::size_t n = 0;
  for (char c : text) {
    if ((static_cast<unsigned char>(c) & 0xC0) != 0x80) ++n;
  }
  return n;
}

bool is_space(char32_t cp) noexcept {
  switch (cp) {
    case 0x09: case 0x0A: case 0x0B: case 0x0C: case 0x0D:
    case 0x1C: case 0x1D: case 0x1E: case 0x1F: case 0x20:
    case 0x85: case 0xA0: case 0x1680:
    case 0x2028: case 0x2029: case 0x202F: case 0x205F: case 0x3000:
      return true;
    default:
      return cp >= 0x2000 && cp <= 0x200A;
  }
}

std::u32string_view trim(std::u32string_view text) noexcept {
  std::size_t b = 0;
  std::size_t e = text.size();
  while (b < e && is_space(text[b])) ++b;
  while (e > b && is_space(text[e - 1])) --e;
  return text.substr(b, e - b);
}

std::u32string_view rtrim(std::u32string_view text) noexcept {
  std::size_t e = text.size();
  while (e > 0 && is_space(text[e - 1])) --e;
  return text.substr(0, e);
}

namespace {

// Byte length of the whitespace code point ending at `end`, or 0.
std::size_t trailing_space_bytes(std::string_view s, std::size_t end) noexcept {
  std::size_t start = end;
  do {
    --start;
  } while (start > 0 && (static_cast<unsigned char>(s[start]) & 0xC0) == 0x80);
  std::size_t pos = start;
  const char32_t cp = next(s, pos);
  if (cp == kInvalid || pos != end || !is_space(cp)) return 0;
  return end - start;
}

}  // namespace

std::string_view rtrim(std::string_view text) noexcept {
  std::size_t e = text.size();
  while (e > 0) {
    const std::size_t n = trailing_space_bytes(text, e);
    if (n == 0) break;
    e -= n;
  }
  return text.substr(0, e);
}

std::string_view trim(std::string_view text) noexcept {
  text = rtrim(text);
  std::size_t b = 0;
  while (b < text.size()) {
    std::size_t pos = b;
    const char32_t cp = next(text, pos);
    if (cp == kInvalid || !is_space(cp)) break;
    b = pos;
  }
  return text.substr(b);
}

bool is_blank(std::string_view text) noexcept { return trim(text).empty(); }

}  // namespace dragoman::utf8
