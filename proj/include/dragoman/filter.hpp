#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>

#include "dragoman/corpus.hpp"
#include "dragoman/langid.hpp"

namespace dragoman {

enum class OutputOrder { Input, SimilarityAscending };

/// Declarative Phase-1 filter configuration. Thresholds on scores are strict
/// (bpc_sum < max, sim > min, len_diff < max); per-side length bounds are
/// inclusive.
struct FilterSpec {
  std::optional<LangRequirement> require_langs;
  std::optional<double> max_bpc_sum;
  std::optional<double> min_similarity;
  std::optional<std::int64_t> max_len_diff;
  std::optional<std::int64_t> min_len;
  std::optional<std::int64_t> max_len;
  OutputOrder output_order = OutputOrder::Input;

  /// Throws Error(InvalidSpec) when no criterion is set or values are out of range.
  void validate() const;
  bool operator==(const FilterSpec&) const = default;
};

enum class Criterion { Lang, Bpc, Sim, Len, LenDiff };
using CriterionOrder = std::array<Criterion, 5>;
inline constexpr CriterionOrder kDefaultCriterionOrder = {
    Criterion::Lang, Criterion::Bpc, Criterion::Sim, Criterion::Len, Criterion::LenDiff};

std::string_view criterion_name(Criterion c) noexcept;

struct FilterReport {
  std::size_t input_count = 0;
  std::size_t kept_count = 0;
  std::map<std::string, std::size_t> rejected_by_cause;
  FilterSpec spec;

  std::string to_json() const;
  std::string to_text() const;
};

struct LengthStats {
  std::int64_t len_src = 0;
  std::int64_t len_tgt = 0;
  std::int64_t len_diff = 0;
};

/// Character (code point) lengths of both sides.
LengthStats length_stats(const SentencePair& pair);

/// Adds len_src, len_tgt and len_diff to every record.
Corpus annotate_lengths(Corpus corpus, unsigned workers = 1);

/// Keeps a record iff it passes every active criterion; rejections are
/// attributed to the first failing criterion in `order`. Flagged records are
/// rejected under their flag. Throws Error(MissingScore) before filtering if
/// any unflagged record lacks a score one of the configured criteria reads.
std::pair<Corpus, FilterReport> apply_filters(Corpus corpus, const FilterSpec& spec,
                                              const CriterionOrder& order = kDefaultCriterionOrder);

/// Named threshold sets: paracrawl_1m, paracrawl_3m, paracrawl_8m.
FilterSpec preset(std::string_view name);

/// Flat `key = value` form; see README for the keys.
std::string serialize_spec(const FilterSpec& spec);
FilterSpec parse_spec(std::string_view text);
FilterSpec load_spec(const std::filesystem::path& path);

}  // namespace dragoman
