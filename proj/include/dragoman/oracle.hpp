#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "dragoman/corpus.hpp"

namespace dragoman {

struct Hypothesis {
  std::string text;
  double model_score = 0.0;

  bool operator==(const Hypothesis&) const = default;
};

/// Decoder output for one source sentence, hypotheses in decoder order.
struct NBestList {
  RecordId id = 0;
  std::string source;
  std::vector<Hypothesis> hypotheses;

  bool operator==(const NBestList&) const = default;
};

/// JSON lines: {"id":..,"source":..,"hypotheses":[{"text":..,"score":..},..]}.
/// Errors: MalformedLine, DuplicateId, EmptyHypotheses, NonFiniteScore.
std::vector<NBestList> read_nbest(std::istream& in);
std::vector<NBestList> read_nbest(const std::filesystem::path& path);
void write_nbest(std::span<const NBestList> lists, std::ostream& out);
void write_nbest(std::span<const NBestList> lists, const std::filesystem::path& path);

using References = std::map<RecordId, std::string>;

/// Line i of a plain reference file is the reference for id i.
References references_from_lines(std::span<const std::string> lines);

/// Scores a hypothesis against a reference; higher is better.
using SentenceMetric = std::function<double(const std::string& hypothesis,
                                            const std::string& reference)>;

/// Sentence BLEU with exp smoothing.
SentenceMetric default_sentence_metric();

struct OracleChoice {
  RecordId id = 0;
  std::size_t oracle_index = 0;
  double oracle_metric = 0.0;
  std::size_t baseline_index = 0;  // model-score argmax, ties to the lower rank
  double baseline_metric = 0.0;
  std::size_t considered = 0;      // hypotheses inside the width
};

struct OracleResult {
  std::vector<OracleChoice> choices;  // in list order
  double oracle_bleu = 0.0;
  double baseline_bleu = 0.0;
};

/// Picks, per list, the hypothesis maximizing the metric against its
/// reference among the first `width` hypotheses (0 means all). Ties go to the
/// lower decoder rank. Corpus scores are unsmoothed corpus BLEU of the picks.
/// Errors: MissingReference, EmptyCorpus.
OracleResult oracle_select(std::span<const NBestList> lists, const References& references,
                           const SentenceMetric& metric = default_sentence_metric(),
                           std::size_t width = 0, unsigned workers = 1);

struct BeamSweepRow {
  std::size_t width = 0;
  double oracle_bleu = 0.0;
  double baseline_bleu = 0.0;
  std::size_t short_lists = 0;  // lists with fewer hypotheses than the width
};

struct BeamSweep {
  std::vector<BeamSweepRow> rows;
  std::vector<OracleResult> results;  // parallel to rows

  /// Header `width\toracle_bleu\tbaseline_bleu\tshort_lists`.
  std::string to_tsv() const;
};

/// One oracle pass per width; widths must be positive.
BeamSweep beam_width_sweep(std::span<const NBestList> lists, const References& references,
                           std::span<const std::size_t> widths,
                           const SentenceMetric& metric = default_sentence_metric(),
                           unsigned workers = 1);

/// Per-id JSON lines {"id","oracle_index","oracle_text","oracle_metric",
/// "baseline_index","baseline_metric"}.
void write_selection_manifest(std::span<const NBestList> lists, const OracleResult& result,
                              std::ostream& out);

}  // namespace dragoman
