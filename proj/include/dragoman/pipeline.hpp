#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dragoman/char_lm.hpp"
#include "dragoman/corpus.hpp"
#include "dragoman/filter.hpp"
#include "dragoman/kfold.hpp"
#include "dragoman/metrics.hpp"
#include "dragoman/oracle.hpp"

namespace dragoman {

/// Settings for one pipeline run, read from a flat `key = value` file.
/// Filter criteria may be given inline with the keys of parse_spec, through
/// `filter_spec = <path>`, or by `preset = <name>`.
struct PipelineConfig {
  std::vector<std::filesystem::path> inputs;
  CorpusFormat format = CorpusFormat::Tsv;
  ParseMode parse_mode = ParseMode::Strict;
  std::vector<std::filesystem::path> score_sidecars;

  std::optional<std::string> preset;
  std::optional<std::filesystem::path> filter_spec_path;
  std::optional<FilterSpec> inline_spec;
  std::vector<std::filesystem::path> langid_profiles;
  std::optional<std::filesystem::path> source_lm;
  std::optional<std::filesystem::path> target_lm;

  int k = 5;
  std::uint64_t seed = 0;
  LmConfig lm{};
  ScoredSide side = ScoredSide::Concatenated;
  bool per_char = false;
  std::vector<double> percentiles{20, 40, 50, 60, 70, 80};
  ThresholdMode mode = ThresholdMode::PerFold;
  bool two_sigma = true;
  /// Take logprob from the sidecars instead of training fold models.
  bool external_logprob = false;

  std::filesystem::path output_dir = ".";
  unsigned workers = 1;

  /// Throws Error(InvalidSpec) for missing inputs or paths that do not exist.
  void validate() const;
};

PipelineConfig parse_config(std::string_view text);
PipelineConfig load_config(const std::filesystem::path& path);

/// The filter stage's spec. Exactly one of preset, filter_spec and inline
/// criteria must be present; otherwise Error(InvalidSpec).
FilterSpec resolve_filter_spec(const PipelineConfig& config);

/// Reads the corpus, computes inline annotations (lengths always; language
/// and BPC when profiles or models are configured), merges the sidecars and
/// filters. Writes kept.tsv, scores.jsonl, report.json and report.txt.
FilterReport cmd_filter(const PipelineConfig& config);

/// Folds, held-out scoring and the percentile sweep. Writes folds.tsv,
/// scores.jsonl, sweep.tsv and manifests/.
SelectionSweep cmd_select(const PipelineConfig& config);

struct EvalReport {
  std::size_t segments = 0;
  std::optional<BleuScore> bleu;
  std::optional<double> chrf;
  std::optional<double> chrfpp;

  std::string to_json() const;
  std::string to_text() const;
};

/// Metrics are any of "bleu", "chrf", "chrf++". Throws Error(LineCountMismatch).
EvalReport cmd_eval(const std::filesystem::path& hypotheses,
                    std::span<const std::filesystem::path> references,
                    std::span<const std::string> metrics);

/// Reference line i belongs to n-best id i. With an output directory, writes
/// sweep.tsv and selection.jsonl (the selection at the largest width).
BeamSweep cmd_oracle(const std::filesystem::path& nbest, const std::filesystem::path& references,
                     std::span<const std::size_t> widths, unsigned workers = 1,
                     const std::optional<std::filesystem::path>& output_dir = std::nullopt);

}  // namespace dragoman
