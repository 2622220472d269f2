#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "dragoman/corpus.hpp"

namespace dragoman {

enum class Smoothing : std::uint8_t { AddK = 0, WittenBell = 1 };

struct LmConfig {
  int order = 5;
  Smoothing smoothing = Smoothing::WittenBell;
  double k = 1.0;  // add-k only
};

/// Character n-gram language model over Unicode code points.
///
/// Every text is preceded by order-1 boundary symbols; no end symbol is
/// predicted. Characters unseen in training map to a single unknown symbol,
/// so next-character distributions range over the training alphabet plus one.
/// All probabilities are reported in log base 2.
///
/// add_k:        P(w|h) = (c(h,w) + k) / (c(h) + k V')
/// witten_bell:  P(w|h) = (c(h,w) + T(h) P(w|h')) / (c(h) + T(h)), recursing to
///               a uniform 1/V' below unigrams; unseen contexts back off.
class CharNGramLM {
 public:
  static CharNGramLM train(std::span<const std::string> texts, const LmConfig& config = {});

  int order() const { return config_.order; }
  const LmConfig& config() const { return config_; }
  /// Training alphabet in code point order, followed by utf8::kUnknown.
  std::vector<char32_t> prediction_vocab() const;
  std::size_t vocab_size() const { return alphabet_.size() + 1; }

  /// P(next | context). Only the last order-1 symbols of the context matter;
  /// shorter contexts are left-padded with the boundary symbol. Context may
  /// contain utf8::kBoundary and any code point.
  double prob(std::u32string_view context, char32_t next) const;

  /// Total log2 probability of the text. Throws Error(EmptyText) for "".
  double log_prob(std::string_view text) const;
  /// -log_prob / number of code points.
  double bits_per_char(std::string_view text) const;

  void save(std::ostream& out) const;
  void save(const std::filesystem::path& path) const;
  static CharNGramLM load(std::istream& in);
  static CharNGramLM load(const std::filesystem::path& path);

  /// Dense-id n-gram key; exposed for the streaming scorer.
  using Key = std::u16string;

 private:
  friend class StreamingScorer;

  struct ContextStats {
    std::uint64_t total = 0;
    std::uint32_t types = 0;
  };

  std::uint16_t symbol_id(char32_t cp) const;
  double prob_ids(const Key& history, std::uint16_t next) const;
  double witten_bell(const Key& history, std::size_t len, std::uint16_t next) const;
  void rebuild_contexts();

  LmConfig config_;
  std::vector<char32_t> alphabet_;                    // sorted; id = index + 2
  std::unordered_map<char32_t, std::uint16_t> ids_;
  std::vector<std::unordered_map<Key, std::uint64_t>> ngrams_;    // [m-1]: m-grams
  std::vector<std::unordered_map<Key, ContextStats>> contexts_;  // [m-1]: (m-1)-gram histories
};

/// Incremental scorer; feeding a text one code point at a time yields the same
/// total as CharNGramLM::log_prob on the whole text.
class StreamingScorer {
 public:
  explicit StreamingScorer(const CharNGramLM& model);
  /// Returns log2 P(cp | history) and advances.
  double feed(char32_t cp);
  double total() const { return total_; }
  std::size_t count() const { return count_; }

 private:
  const CharNGramLM* model_;
  CharNGramLM::Key history_;
  double total_ = 0.0;
  std::size_t count_ = 0;
};

/// Adds bpc_src, bpc_tgt and bpc_sum. Records with a blank side are flagged
/// "empty" and left unscored.
Corpus bpc_sum_annotate(Corpus corpus, const CharNGramLM& source_model,
                        const CharNGramLM& target_model, unsigned workers = 1);

}  // namespace dragoman
