#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "dragoman/char_lm.hpp"
#include "dragoman/corpus.hpp"

namespace dragoman {

/// Balanced pseudorandom assignment of record ids to k folds.
class FoldPlan {
 public:
  FoldPlan() = default;
  FoldPlan(int k, std::unordered_map<RecordId, int> assignment);

  int k() const { return k_; }
  /// Throws Error(InvalidArgument) for ids the plan does not cover.
  int fold_of(RecordId id) const;
  bool covers(RecordId id) const { return assignment_.contains(id); }
  std::vector<std::size_t> fold_sizes() const;
  const std::unordered_map<RecordId, int>& assignment() const { return assignment_; }

 private:
  int k_ = 0;
  std::unordered_map<RecordId, int> assignment_;
};

/// Shuffles the corpus order with a seeded Mersenne Twister (portable
/// Fisher-Yates) and deals records round-robin, so fold sizes differ by at
/// most one. Throws Error(CorpusTooSmall) when the corpus has fewer than k
/// records.
FoldPlan make_folds(const Corpus& corpus, int k = 5, std::uint64_t seed = 0);

enum class ScoredSide { Source, Target, Concatenated };

struct CrossvalConfig {
  ScoredSide side = ScoredSide::Concatenated;
  LmConfig lm{};
  /// Divide the total log probability by the scored character count.
  bool per_char = false;
  std::string separator = "\t";
  unsigned workers = 1;
};

/// Instrumentation filled by crossval_score: which ids trained each fold
/// model and which model scored each id.
struct CrossvalAudit {
  std::vector<std::vector<RecordId>> training_ids;  // [fold model]
  std::vector<std::pair<RecordId, int>> scored_by;  // (record, fold model)
};

std::string scored_text(const SentencePair& pair, const CrossvalConfig& config);

/// Trains k models, model i on every fold except i, and stores in `logprob`
/// the log2 probability of each record under the model that did not see it.
/// Records whose scored text is blank are flagged "empty".
Corpus crossval_score(Corpus corpus, const FoldPlan& plan, const CrossvalConfig& config = {},
                      CrossvalAudit* audit = nullptr);

enum class ThresholdMode { PerFold, Global, TwoSigma };

struct Cutoffs {
  ThresholdMode mode = ThresholdMode::PerFold;
  double q = 100.0;
  /// Surprisal cutoff per group (one group per fold, or a single group).
  std::vector<double> values;
  /// Nearest-rank retention count per group; empty for TwoSigma.
  std::vector<std::size_t> ranks;
};

/// ceil(q/100 * n) for q in (0, 100].
std::size_t nearest_rank(std::size_t n, double q);

/// Cutoffs over surprisal (-logprob) groups. PerFold and TwoSigma produce one
/// value per group; Global pools all groups. TwoSigma uses mean + 2 standard
/// deviations (population) per group and ignores q.
Cutoffs percentile_threshold(std::span<const std::vector<double>> surprisal_groups, double q,
                             ThresholdMode mode);

struct Manifest {
  std::string label;
  ThresholdMode mode = ThresholdMode::PerFold;
  std::optional<double> q;
  Cutoffs cutoffs;
  std::vector<RecordId> retained_ids;  // ascending
  std::vector<RecordId> removed_ids;   // ascending
};

struct Selection {
  Corpus retained;  // input order
  Manifest manifest;
};

/// Retains the q% least surprising records. Under PerFold/Global exactly the
/// nearest-rank count of each group is kept, ties at the cutoff broken by
/// ascending id; TwoSigma keeps every record at or below its fold's cutoff.
/// Flagged records are always removed. Throws Error(MissingScore) if an
/// unflagged record lacks logprob.
Selection select(const Corpus& corpus, const FoldPlan& plan, double q, ThresholdMode mode);

struct SweepRow {
  std::string label;
  std::size_t retained = 0;
  std::size_t removed = 0;
};

struct SelectionSweep {
  std::size_t corpus_size = 0;
  std::vector<SweepRow> rows;
  std::vector<Manifest> manifests;

  /// threshold / examples / dev_bleu / devtest_bleu; BLEU columns left blank.
  std::string to_tsv() const;
};

SelectionSweep sweep(const Corpus& corpus, const FoldPlan& plan,
                     std::span<const double> percentiles, ThresholdMode mode,
                     bool include_two_sigma);

/// Writes retained_<label>.txt, removed_<label>.txt and summary_<label>.json.
void write_manifest(const Manifest& manifest, const std::filesystem::path& dir);

std::string mode_name(ThresholdMode mode);

}  // namespace dragoman
