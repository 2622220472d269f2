#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace dragoman {

using RecordId = std::uint64_t;

struct SentencePair {
  RecordId id = 0;
  std::string source;
  std::string target;
};

namespace keys {
inline constexpr std::string_view kLangSrcConf = "lang_src_conf";
inline constexpr std::string_view kLangTgtConf = "lang_tgt_conf";
inline constexpr std::string_view kBpcSrc = "bpc_src";
inline constexpr std::string_view kBpcTgt = "bpc_tgt";
inline constexpr std::string_view kBpcSum = "bpc_sum";
inline constexpr std::string_view kSim = "sim";
inline constexpr std::string_view kLenSrc = "len_src";
inline constexpr std::string_view kLenTgt = "len_tgt";
inline constexpr std::string_view kLenDiff = "len_diff";
inline constexpr std::string_view kLogprob = "logprob";
}  // namespace keys

/// Named real-valued scores attached to one record. Values are always finite.
class ScoreSet {
 public:
  std::optional<double> get(std::string_view key) const;
  bool has(std::string_view key) const { return entries_.find(key) != entries_.end(); }
  /// Throws Error(NonFiniteScore) for NaN or infinity.
  void set(std::string_view key, double value);
  const std::map<std::string, double, std::less<>>& entries() const { return entries_; }
  bool empty() const { return entries_.empty(); }

 private:
  std::map<std::string, double, std::less<>> entries_;
};

/// One corpus row. A non-empty `flag` marks a record that an annotation stage
/// could not score (the flag names the cause); filters reject it under that
/// cause.
struct Record {
  SentencePair pair;
  ScoreSet scores;
  std::string flag;

  RecordId id() const { return pair.id; }
};

struct Corpus {
  std::vector<Record> records;

  std::size_t size() const { return records.size(); }
  bool empty() const { return records.empty(); }
  auto begin() const { return records.begin(); }
  auto end() const { return records.end(); }

  static Corpus from_pairs(std::vector<SentencePair> pairs);
};

enum class CorpusFormat { Tsv, MosesPair };
enum class ParseMode { Strict, Lenient };

struct ReadReport {
  std::size_t lines = 0;
  std::size_t malformed = 0;
  std::vector<std::size_t> malformed_lines;  // 1-based
};

/// `id<TAB>source<TAB>target` per line.
Corpus read_tsv(std::istream& in, ParseMode mode = ParseMode::Strict,
                ReadReport* report = nullptr);
Corpus read_tsv(const std::filesystem::path& path, ParseMode mode = ParseMode::Strict,
                ReadReport* report = nullptr);

/// Two line-aligned files; ids are 0-based line numbers.
Corpus read_moses_pair(std::istream& source, std::istream& target,
                       ParseMode mode = ParseMode::Strict, ReadReport* report = nullptr);
Corpus read_moses_pair(const std::filesystem::path& source,
                       const std::filesystem::path& target,
                       ParseMode mode = ParseMode::Strict, ReadReport* report = nullptr);

/// tsv takes one path, moses-pair takes two.
Corpus read_corpus(std::span<const std::filesystem::path> paths, CorpusFormat format,
                   ParseMode mode = ParseMode::Strict, ReadReport* report = nullptr);

void write_tsv(const Corpus& corpus, std::ostream& out);
void write_tsv(const Corpus& corpus, const std::filesystem::path& path);

/// One JSON object per record: {"id":<id>,"scores":{<key>:<value>,...}}.
/// Throws Error(MissingScore) before writing anything if a key is absent.
std::size_t write_scores(const Corpus& corpus, std::span<const std::string> keys,
                         std::ostream& out);
std::size_t write_scores(const Corpus& corpus, std::span<const std::string> keys,
                         const std::filesystem::path& path);

struct ScoreMergeReport {
  std::size_t rows = 0;
  std::size_t attached = 0;
  std::vector<RecordId> unknown_ids;  // in the sidecar, not in the corpus
  std::vector<RecordId> missing_ids;  // in the corpus, not in the sidecar
};

/// Merges a score sidecar into the corpus by id. Existing keys are
/// overwritten. Duplicate ids and non-finite values reject the whole file.
Corpus read_scores(Corpus corpus, std::istream& in, ScoreMergeReport* report = nullptr);
Corpus read_scores(Corpus corpus, const std::filesystem::path& path,
                   ScoreMergeReport* report = nullptr);

std::vector<std::string> read_lines(const std::filesystem::path& path);

}  // namespace dragoman
