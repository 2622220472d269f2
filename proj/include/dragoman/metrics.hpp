#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace dragoman {

/// A detokenized hypothesis with one or more references.
struct EvalPair {
  std::string hypothesis;
  std::vector<std::string> references;
};

/// mteval-v13a tokenization as applied before BLEU: trailing whitespace is
/// stripped, entity and line-break normalization applied, ASCII punctuation
/// padded (periods and commas stay attached between digits, dashes split only
/// after a digit), then split on whitespace. Case is preserved.
std::vector<std::string> tokenize_13a(std::string_view text);

inline constexpr int kBleuOrder = 4;

/// Sufficient statistics; summing them over segments gives corpus statistics.
struct BleuStats {
  std::uint64_t hyp_len = 0;
  std::uint64_t ref_len = 0;
  std::array<std::uint64_t, kBleuOrder> correct{};
  std::array<std::uint64_t, kBleuOrder> total{};

  BleuStats& operator+=(const BleuStats& other);
};

struct BleuScore {
  double score = 0.0;  // [0, 100]
  std::array<double, kBleuOrder> precisions{};  // fractions in [0, 1]
  double brevity_penalty = 0.0;
  std::uint64_t hyp_len = 0;
  std::uint64_t ref_len = 0;
  std::array<std::uint64_t, kBleuOrder> correct{};
  std::array<std::uint64_t, kBleuOrder> total{};
};

enum class BleuSmoothing { None, Exp };

/// Clipped n-gram matches against the per-n-gram maximum over references;
/// reference length is the closest to the hypothesis (ties to the shorter).
BleuStats bleu_stats(const EvalPair& pair);

/// With effective_order, orders beyond the last one with any hypothesis
/// n-grams are dropped from the geometric mean. Exp smoothing replaces the
/// j-th zero precision by 1 / (2^j * total).
BleuScore bleu_from_stats(const BleuStats& stats, BleuSmoothing smoothing,
                          bool effective_order);

/// Corpus BLEU-4. Unsmoothed by default. Throws Error(EmptyCorpus).
BleuScore corpus_bleu(std::span<const EvalPair> pairs,
                      BleuSmoothing smoothing = BleuSmoothing::None);

/// Sentence BLEU-4 with effective order; exp smoothing by default.
BleuScore sentence_bleu_score(const EvalPair& pair, BleuSmoothing smoothing = BleuSmoothing::Exp);
double sentence_bleu(const EvalPair& pair, BleuSmoothing smoothing = BleuSmoothing::Exp);

struct ChrfConfig {
  int char_order = 6;
  int word_order = 0;  // 2 gives chrF++
  double beta = 2.0;
};

inline constexpr ChrfConfig kChrf{};
inline constexpr ChrfConfig kChrfPlusPlus{6, 2, 2.0};

/// Per-order [hyp, ref, match] counts: character orders first, then word orders.
struct ChrfStats {
  std::vector<std::array<std::uint64_t, 3>> orders;

  ChrfStats& operator+=(const ChrfStats& other);
};

/// Statistics against the reference giving the best sentence F-score.
ChrfStats chrf_stats(const EvalPair& pair, const ChrfConfig& config = kChrf);
double chrf_from_stats(const ChrfStats& stats, const ChrfConfig& config = kChrf);

/// Corpus chrF / chrF++ from summed statistics. Throws Error(EmptyCorpus).
double chrf(std::span<const EvalPair> pairs, const ChrfConfig& config = kChrf);
double sentence_chrf(const EvalPair& pair, const ChrfConfig& config = kChrf);

/// Builds line-aligned pairs; throws Error(LineCountMismatch).
std::vector<EvalPair> make_eval_pairs(std::span<const std::string> hypotheses,
                                      std::span<const std::vector<std::string>> reference_streams);

}  // namespace dragoman
