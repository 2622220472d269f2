#include "dragoman/oracle.hpp"

#include <cmath>
#include <fstream>
#include <json.hpp>
#include <sstream>
#include <unordered_set>

#include "dragoman/error.hpp"
#include "dragoman/metrics.hpp"
#include "dragoman/parallel.hpp"
#include "dragoman/utf8.hpp"

namespace dragoman {

using nlohmann::ordered_json;

namespace {

std::string fmt(double v) {
  std::ostringstream os;
  os.setf(std::ios::fixed);
  os.precision(4);
  os << v;
  return os.str();
}

NBestList parse_list(const std::string& line, std::size_t line_no) {
  const auto where = "n-best line " + std::to_string(line_no);
  ordered_json row;
  try {
    row = ordered_json::parse(line);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::MalformedLine, where + ": " + e.what());
  }
  if (!row.is_object() || !row.contains("id") || !row["id"].is_number_unsigned() ||
      !row.contains("hypotheses") || !row["hypotheses"].is_array()) {
    throw Error(ErrorCode::MalformedLine, where + ": expected {\"id\":..,\"hypotheses\":[..]}");
  }
  NBestList list;
  list.id = row["id"].get<RecordId>();
  if (row.contains("source")) {
    if (!row["source"].is_string()) throw Error(ErrorCode::MalformedLine, where + ": bad source");
    list.source = row["source"].get<std::string>();
  }
  if (row["hypotheses"].empty()) {
    throw Error(ErrorCode::EmptyHypotheses, where + ": id " + std::to_string(list.id) +
                                                " has no hypotheses");
  }
  for (const auto& h : row["hypotheses"]) {
    if (!h.is_object() || !h.contains("text") || !h["text"].is_string() ||
        !h.contains("score") || !h["score"].is_number()) {
      throw Error(ErrorCode::MalformedLine, where + ": expected {\"text\":..,\"score\":..}");
    }
    const double score = h["score"].get<double>();
    if (!std::isfinite(score)) {
      throw Error(ErrorCode::NonFiniteScore, where + ": non-finite model score");
    }
    list.hypotheses.push_back({h["text"].get<std::string>(), score});
  }
  return list;
}

std::size_t argmax_model(const NBestList& list, std::size_t considered) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < considered; ++i) {
    if (list.hypotheses[i].model_score > list.hypotheses[best].model_score) best = i;
  }
  return best;
}

}  // namespace

std::vector<NBestList> read_nbest(std::istream& in) {
  std::vector<NBestList> lists;
  std::unordered_set<RecordId> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (utf8::is_blank(line)) continue;
    auto list = parse_list(line, line_no);
    if (!seen.insert(list.id).second) {
      throw Error(ErrorCode::DuplicateId,
                  "n-best line " + std::to_string(line_no) + ": duplicate id " +
                      std::to_string(list.id));
    }
    lists.push_back(std::move(list));
  }
  return lists;
}

std::vector<NBestList> read_nbest(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  return read_nbest(in);
}

void write_nbest(std::span<const NBestList> lists, std::ostream& out) {
  for (const auto& list : lists) {
    ordered_json row;
    row["id"] = list.id;
    row["source"] = list.source;
    auto hyps = ordered_json::array();
    for (const auto& h : list.hypotheses) {
      ordered_json o;
      o["text"] = h.text;
      o["score"] = h.model_score;
      hyps.push_back(std::move(o));
    }
    row["hypotheses"] = std::move(hyps);
    out << row.dump() << '\n';
  }
}

void write_nbest(std::span<const NBestList> lists, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  write_nbest(lists, out);
}

References references_from_lines(std::span<const std::string> lines) {
  References refs;
  for (std::size_t i = 0; i < lines.size(); ++i) refs.emplace(i, lines[i]);
  return refs;
}

SentenceMetric default_sentence_metric() {
  return [](const std::string& hyp, const std::string& ref) {
    return sentence_bleu(EvalPair{hyp, {ref}}, BleuSmoothing::Exp);
  };
}

OracleResult oracle_select(std::span<const NBestList> lists, const References& references,
                           const SentenceMetric& metric, std::size_t width, unsigned workers) {
  if (lists.empty()) throw Error(ErrorCode::EmptyCorpus, "no n-best lists");
  std::vector<const std::string*> refs(lists.size());
  for (std::size_t i = 0; i < lists.size(); ++i) {
    const auto it = references.find(lists[i].id);
    if (it == references.end()) {
      throw Error(ErrorCode::MissingReference,
                  "no reference for id " + std::to_string(lists[i].id));
    }
    if (lists[i].hypotheses.empty()) {
      throw Error(ErrorCode::EmptyHypotheses,
                  "id " + std::to_string(lists[i].id) + " has no hypotheses");
    }
    refs[i] = &it->second;
  }

  OracleResult result;
  result.choices.resize(lists.size());
  parallel_for(lists.size(), workers, [&](std::size_t i) {
    const auto& list = lists[i];
    auto& c = result.choices[i];
    c.id = list.id;
    c.considered = width == 0 ? list.hypotheses.size() : std::min(width, list.hypotheses.size());
    for (std::size_t h = 0; h < c.considered; ++h) {
      const double m = metric(list.hypotheses[h].text, *refs[i]);
      if (h == 0 || m > c.oracle_metric) {
        c.oracle_metric = m;
        c.oracle_index = h;
      }
    }
    c.baseline_index = argmax_model(list, c.considered);
    c.baseline_metric = c.baseline_index == c.oracle_index
                            ? c.oracle_metric
                            : metric(list.hypotheses[c.baseline_index].text, *refs[i]);
  });

  std::vector<EvalPair> oracle_pairs;
  std::vector<EvalPair> baseline_pairs;
  for (std::size_t i = 0; i < lists.size(); ++i) {
    const auto& c = result.choices[i];
    oracle_pairs.push_back({lists[i].hypotheses[c.oracle_index].text, {*refs[i]}});
    baseline_pairs.push_back({lists[i].hypotheses[c.baseline_index].text, {*refs[i]}});
  }
  result.oracle_bleu = corpus_bleu(oracle_pairs).score;
  result.baseline_bleu = corpus_bleu(baseline_pairs).score;
  return result;
}

BeamSweep beam_width_sweep(std::span<const NBestList> lists, const References& references,
                           std::span<const std::size_t> widths, const SentenceMetric& metric,
                           unsigned workers) {
  BeamSweep sweep;
  for (const auto w : widths) {
    if (w == 0) throw Error(ErrorCode::InvalidArgument, "beam widths must be positive");
  }
  for (const auto w : widths) {
    auto result = oracle_select(lists, references, metric, w, workers);
    BeamSweepRow row;
    row.width = w;
    row.oracle_bleu = result.oracle_bleu;
    row.baseline_bleu = result.baseline_bleu;
    for (const auto& l : lists) {
      if (l.hypotheses.size() < w) ++row.short_lists;
    }
    sweep.rows.push_back(row);
    sweep.results.push_back(std::move(result));
  }
  return sweep;
}

std::string BeamSweep::to_tsv() const {
  std::string out = "width\toracle_bleu\tbaseline_bleu\tshort_lists\n";
  for (const auto& r : rows) {
    out += std::to_string(r.width) + '\t' + fmt(r.oracle_bleu) + '\t' + fmt(r.baseline_bleu) +
           '\t' + std::to_string(r.short_lists) + '\n';
  }
  return out;
}

void write_selection_manifest(std::span<const NBestList> lists, const OracleResult& result,
                              std::ostream& out) {
  if (lists.size() != result.choices.size()) {
    throw Error(ErrorCode::InvalidArgument, "oracle result does not match the n-best lists");
  }
  for (std::size_t i = 0; i < lists.size(); ++i) {
    const auto& c = result.choices[i];
    ordered_json row;
    row["id"] = c.id;
    row["oracle_index"] = c.oracle_index;
    row["oracle_text"] = lists[i].hypotheses[c.oracle_index].text;
    row["oracle_metric"] = c.oracle_metric;
    row["baseline_index"] = c.baseline_index;
    row["baseline_metric"] = c.baseline_metric;
    out << row.dump() << '\n';
  }
}

}  // namespace dragoman
