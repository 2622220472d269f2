#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "dragoman/corpus.hpp"

namespace dragoman {

/// Character n-gram frequency profile for one language. Immutable once built.
///
/// Stored frequencies are unsmoothed relative frequencies (they sum to one
/// over the observed n-grams). Scoring applies add-one smoothing with one
/// extra slot reserved for every unseen n-gram:
///   P(g) = (c(g) + 1) / (N + V + 1)
/// where N is the total n-gram count and V the number of distinct n-grams.
class LangProfile {
 public:
  static constexpr int kDefaultOrder = 3;
  static constexpr std::size_t kMaxChars = 1000;

  static LangProfile train(std::span<const std::string> texts, std::string language,
                           int order = kDefaultOrder);

  const std::string& language() const { return language_; }
  int ngram_order() const { return order_; }
  std::uint64_t total_count() const { return total_; }
  std::size_t alphabet_size() const { return alphabet_size_; }
  std::size_t distinct_ngrams() const { return counts_.size(); }

  /// Natural-log relative frequency of each observed n-gram (UTF-8 keys).
  std::map<std::string, double> log_freqs() const;

  std::uint64_t count(const std::u32string& gram) const;
  bool seen(const std::u32string& gram) const { return counts_.contains(gram); }
  /// Smoothed natural-log probability; finite for any n-gram.
  double log_prob(const std::u32string& gram) const;

  void save(std::ostream& out) const;
  void save(const std::filesystem::path& path) const;
  static LangProfile load(std::istream& in);
  static LangProfile load(const std::filesystem::path& path);

 private:
  std::string language_;
  int order_ = kDefaultOrder;
  std::uint64_t total_ = 0;
  std::size_t alphabet_size_ = 0;
  std::unordered_map<std::u32string, std::uint64_t> counts_;
};

/// N-grams the classifier extracts from `text`: at most the first
/// LangProfile::kMaxChars code points after trimming surrounding whitespace.
/// A text shorter than the order yields a single n-gram holding all of it.
std::vector<std::u32string> classifier_ngrams(std::string_view text, int order);

struct Classification {
  std::string label;
  /// Gap between the two highest softmax probabilities, in [0, 1].
  double confidence = 0.0;
  /// Length-normalized log-likelihood per profile, in profile order.
  std::vector<std::pair<std::string, double>> scores;
  /// Softmax of `scores`, in profile order.
  std::vector<double> probabilities;
  /// N-grams seen by at least one profile. Zero means no evidence, in which
  /// case confidence is 0.
  std::size_t informative_ngrams = 0;
};

/// Throws Error(EmptyText) for blank text and Error(InvalidArgument) for
/// fewer than two profiles or profiles of different orders.
Classification classify(std::string_view text, std::span<const LangProfile> profiles);

/// Probability of `label` minus the best competing probability: equals the
/// confidence when `label` wins, negative when it loses.
double label_margin(const Classification& c, std::string_view label);

struct LangRequirement {
  std::string source_label = "en";
  std::string target_label = "uk";
  double min_conf = 0.5;

  bool operator==(const LangRequirement&) const = default;
};

/// Adds lang_src_conf / lang_tgt_conf (signed margins toward the required
/// labels). Records with a blank side are flagged "empty".
Corpus annotate_lang(Corpus corpus, std::span<const LangProfile> profiles,
                     const LangRequirement& req, unsigned workers = 1);

struct LangFilterReport {
  std::size_t input_count = 0;
  std::size_t kept_count = 0;
  std::map<std::string, std::size_t> rejected_by_cause;  // empty, source_lang, target_lang
};

/// Keeps records whose source classifies as the source label and target as
/// the target label, each with confidence >= min_conf.
std::pair<Corpus, LangFilterReport> lang_filter(Corpus corpus,
                                                std::span<const LangProfile> profiles,
                                                const LangRequirement& req,
                                                unsigned workers = 1);

}  // namespace dragoman
