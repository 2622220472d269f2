#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace dragoman {

inline constexpr std::string_view kInstOpen = "[INST]";
inline constexpr std::string_view kInstClose = "[/INST]";

struct Demonstration {
  std::string source;
  std::string target;
};

/// Half-open [start, end) in Unicode code points.
struct Span {
  std::size_t start = 0;
  std::size_t end = 0;

  bool operator==(const Span&) const = default;
};

/// A training string plus the spans excluded from the loss.
struct MaskedExample {
  std::string text;
  std::vector<Span> mask_spans;  // sorted, disjoint
};

/// `[INST] {source} [/INST] {target}` with the instruction prefix, including
/// the space before the target, masked. An empty target gives the inference
/// prefix. Throws Error(EmptySource).
MaskedExample format_pair(std::string_view source, std::string_view target);

/// Concatenation of the unmasked code points.
std::string strip_masked(const MaskedExample& example);

/// Demonstrations one per line, then `[INST] {query} [/INST]`.
/// Throws Error(EmptyQuery), or Error(EmptySource) for a demonstration
/// without a source, or Error(InvalidArgument) for one without a target.
std::string build_fewshot(std::span<const Demonstration> demos, std::string_view query);

/// The last `window` history pairs, in document order, as demonstrations.
std::string contextual_prompt(std::span<const Demonstration> history, std::size_t window,
                              std::string_view query);

/// Cosine between character n-gram count vectors; 0 if either is empty.
/// Strings shorter than n contribute themselves as a single gram.
double char_ngram_cosine(std::string_view a, std::string_view b, std::size_t n = 3);

using Similarity = std::function<double(std::string_view, std::string_view)>;

/// The n pool entries whose sources are most similar to the query, ordered
/// least to most similar so the best sits next to the query. Equal
/// similarities rank the lower pool index as more similar.
/// Throws Error(PoolTooSmall).
std::vector<Demonstration> select_demos(std::span<const Demonstration> pool,
                                        std::string_view query, std::size_t n,
                                        const Similarity& similarity = {});

}  // namespace dragoman
