#include "dragoman/pipeline.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <json.hpp>
#include <set>
#include <sstream>

#include "dragoman/error.hpp"
#include "dragoman/langid.hpp"

namespace dragoman {
namespace fs = std::filesystem;

namespace {

std::string_view strip(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(std::string_view value) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (pos <= value.size()) {
    const auto comma = value.find(',', pos);
    const auto item = strip(value.substr(pos, comma == std::string_view::npos ? std::string_view::npos
                                                                              : comma - pos));
    if (!item.empty()) out.emplace_back(item);
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  return out;
}

[[noreturn]] void bad(std::string_view key, std::string_view value) {
  throw Error(ErrorCode::InvalidSpec,
              "invalid value for " + std::string(key) + ": '" + std::string(value) + "'");
}

double to_double(std::string_view key, std::string_view value) {
  double v = 0.0;
  const auto [p, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
  if (ec != std::errc{} || p != value.data() + value.size()) bad(key, value);
  return v;
}

template <typename Int>
Int to_int(std::string_view key, std::string_view value) {
  Int v = 0;
  const auto [p, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
  if (ec != std::errc{} || p != value.data() + value.size()) bad(key, value);
  return v;
}

bool to_bool(std::string_view key, std::string_view value) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  bad(key, value);
}

bool is_filter_key(std::string_view key) {
  static constexpr std::string_view kKeys[] = {"require_langs", "max_bpc_sum", "min_similarity",
                                               "max_len_diff",  "min_len",     "max_len",
                                               "output_order"};
  return std::find(std::begin(kKeys), std::end(kKeys), key) != std::end(kKeys);
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  return out;
}

void write_text(const fs::path& path, const std::string& text) {
  auto out = open_out(path);
  out << text;
}

Corpus load_inputs(const PipelineConfig& config) {
  auto corpus = read_corpus(config.inputs, config.format, config.parse_mode);
  for (const auto& sidecar : config.score_sidecars) {
    corpus = read_scores(std::move(corpus), sidecar);
  }
  return corpus;
}

// Keys carried by every record, so write_scores never meets a gap.
std::vector<std::string> common_keys(const Corpus& corpus) {
  if (corpus.empty()) return {};
  std::vector<std::string> keys;
  for (const auto& [k, _] : corpus.records.front().scores.entries()) {
    const bool everywhere = std::all_of(corpus.begin(), corpus.end(),
                                        [&](const Record& r) { return r.scores.has(k); });
    if (everywhere) keys.push_back(k);
  }
  return keys;
}

}  // namespace

void PipelineConfig::validate() const {
  if (inputs.empty()) throw Error(ErrorCode::InvalidSpec, "no input corpus configured");
  if (format == CorpusFormat::Tsv && inputs.size() != 1) {
    throw Error(ErrorCode::InvalidSpec, "tsv input takes exactly one path");
  }
  if (format == CorpusFormat::MosesPair && inputs.size() != 2) {
    throw Error(ErrorCode::InvalidSpec, "moses input takes a source and a target path");
  }
  auto require = [](const fs::path& p) {
    if (!fs::exists(p)) throw Error(ErrorCode::InvalidSpec, "path does not exist: " + p.string());
  };
  for (const auto& p : inputs) require(p);
  for (const auto& p : score_sidecars) require(p);
  for (const auto& p : langid_profiles) require(p);
  if (filter_spec_path) require(*filter_spec_path);
  if (source_lm) require(*source_lm);
  if (target_lm) require(*target_lm);
  if (source_lm.has_value() != target_lm.has_value()) {
    throw Error(ErrorCode::InvalidSpec, "source_lm and target_lm must be given together");
  }
  if (k < 2) throw Error(ErrorCode::InvalidSpec, "k must be at least 2");
  for (double q : percentiles) {
    if (!(q > 0.0 && q <= 100.0)) throw Error(ErrorCode::InvalidSpec, "percentiles lie in (0, 100]");
  }
}

PipelineConfig parse_config(std::string_view text) {
  PipelineConfig c;
  std::string spec_text;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    const auto view = strip(line);
    if (view.empty() || view.front() == '#' || view.front() == ';' || view.front() == '[') continue;
    const auto eq = view.find('=');
    if (eq == std::string_view::npos) {
      throw Error(ErrorCode::InvalidSpec, "expected key = value: " + std::string(view));
    }
    const auto key = strip(view.substr(0, eq));
    const auto value = strip(view.substr(eq + 1));

    if (is_filter_key(key)) {
      spec_text.append(view).push_back('\n');
    } else if (key == "input") {
      c.inputs.clear();
      for (auto& p : split_list(value)) c.inputs.emplace_back(p);
    } else if (key == "format") {
      if (value == "tsv") c.format = CorpusFormat::Tsv;
      else if (value == "moses") c.format = CorpusFormat::MosesPair;
      else bad(key, value);
    } else if (key == "parse_mode") {
      if (value == "strict") c.parse_mode = ParseMode::Strict;
      else if (value == "lenient") c.parse_mode = ParseMode::Lenient;
      else bad(key, value);
    } else if (key == "scores") {
      c.score_sidecars.clear();
      for (auto& p : split_list(value)) c.score_sidecars.emplace_back(p);
    } else if (key == "preset") {
      c.preset = std::string(value);
    } else if (key == "filter_spec") {
      c.filter_spec_path = fs::path(std::string(value));
    } else if (key == "langid_profiles") {
      c.langid_profiles.clear();
      for (auto& p : split_list(value)) c.langid_profiles.emplace_back(p);
    } else if (key == "source_lm") {
      c.source_lm = fs::path(std::string(value));
    } else if (key == "target_lm") {
      c.target_lm = fs::path(std::string(value));
    } else if (key == "k") {
      c.k = to_int<int>(key, value);
    } else if (key == "seed") {
      c.seed = to_int<std::uint64_t>(key, value);
    } else if (key == "lm_order") {
      c.lm.order = to_int<int>(key, value);
    } else if (key == "lm_smoothing") {
      if (value == "witten_bell") c.lm.smoothing = Smoothing::WittenBell;
      else if (value == "add_k") c.lm.smoothing = Smoothing::AddK;
      else bad(key, value);
    } else if (key == "lm_k") {
      c.lm.k = to_double(key, value);
    } else if (key == "side") {
      if (value == "source") c.side = ScoredSide::Source;
      else if (value == "target") c.side = ScoredSide::Target;
      else if (value == "concatenated") c.side = ScoredSide::Concatenated;
      else bad(key, value);
    } else if (key == "per_char") {
      c.per_char = to_bool(key, value);
    } else if (key == "percentiles") {
      c.percentiles.clear();
      for (auto& p : split_list(value)) c.percentiles.push_back(to_double(key, p));
    } else if (key == "mode") {
      if (value == "per_fold") c.mode = ThresholdMode::PerFold;
      else if (value == "global") c.mode = ThresholdMode::Global;
      else bad(key, value);
    } else if (key == "two_sigma") {
      c.two_sigma = to_bool(key, value);
    } else if (key == "external_logprob") {
      c.external_logprob = to_bool(key, value);
    } else if (key == "output_dir") {
      c.output_dir = fs::path(std::string(value));
    } else if (key == "workers") {
      c.workers = to_int<unsigned>(key, value);
    } else {
      throw Error(ErrorCode::InvalidSpec, "unknown config key " + std::string(key));
    }
  }
  if (!spec_text.empty()) c.inline_spec = parse_spec(spec_text);
  return c;
}

PipelineConfig load_config(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

FilterSpec resolve_filter_spec(const PipelineConfig& config) {
  const int sources = int(config.preset.has_value()) + int(config.filter_spec_path.has_value()) +
                      int(config.inline_spec.has_value());
  if (sources != 1) {
    throw Error(ErrorCode::InvalidSpec,
                sources == 0 ? "no filter criteria: set a preset, a filter_spec file or inline keys"
                             : "set exactly one of preset, filter_spec and inline filter keys");
  }
  FilterSpec spec = config.preset            ? preset(*config.preset)
                    : config.filter_spec_path ? load_spec(*config.filter_spec_path)
                                              : *config.inline_spec;
  spec.validate();
  return spec;
}

FilterReport cmd_filter(const PipelineConfig& config) {
  const auto spec = resolve_filter_spec(config);
  config.validate();

  auto corpus = read_corpus(config.inputs, config.format, config.parse_mode);
  if (!config.langid_profiles.empty()) {
    std::vector<LangProfile> profiles;
    for (const auto& p : config.langid_profiles) profiles.push_back(LangProfile::load(p));
    corpus = annotate_lang(std::move(corpus), profiles, spec.require_langs.value_or(LangRequirement{}),
                           config.workers);
  }
  if (config.source_lm) {
    const auto src = CharNGramLM::load(*config.source_lm);
    const auto tgt = CharNGramLM::load(*config.target_lm);
    corpus = bpc_sum_annotate(std::move(corpus), src, tgt, config.workers);
  }
  corpus = annotate_lengths(std::move(corpus), config.workers);
  for (const auto& sidecar : config.score_sidecars) {
    corpus = read_scores(std::move(corpus), sidecar);
  }

  auto [kept, report] = apply_filters(std::move(corpus), spec);

  fs::create_directories(config.output_dir);
  write_tsv(kept, config.output_dir / "kept.tsv");
  write_scores(kept, common_keys(kept), config.output_dir / "scores.jsonl");
  write_text(config.output_dir / "report.json", report.to_json() + "\n");
  write_text(config.output_dir / "report.txt", report.to_text());
  return report;
}

SelectionSweep cmd_select(const PipelineConfig& config) {
  config.validate();
  auto corpus = load_inputs(config);
  const auto plan = make_folds(corpus, config.k, config.seed);
  if (!config.external_logprob) {
    CrossvalConfig cv;
    cv.side = config.side;
    cv.lm = config.lm;
    cv.per_char = config.per_char;
    cv.workers = config.workers;
    corpus = crossval_score(std::move(corpus), plan, cv);
  }
  auto result = sweep(corpus, plan, config.percentiles, config.mode, config.two_sigma);

  fs::create_directories(config.output_dir);
  {
    std::vector<std::pair<RecordId, int>> folds(plan.assignment().begin(), plan.assignment().end());
    std::sort(folds.begin(), folds.end());
    auto out = open_out(config.output_dir / "folds.tsv");
    out << "id\tfold\n";
    for (const auto& [id, f] : folds) out << id << '\t' << f << '\n';
  }
  Corpus scored;
  for (const auto& r : corpus.records) {
    if (r.flag.empty() && r.scores.has(keys::kLogprob)) scored.records.push_back(r);
  }
  const std::string logprob_key(keys::kLogprob);
  write_scores(scored, std::span<const std::string>(&logprob_key, 1),
               config.output_dir / "scores.jsonl");
  write_text(config.output_dir / "sweep.tsv", result.to_tsv());
  for (const auto& m : result.manifests) write_manifest(m, config.output_dir / "manifests");
  return result;
}

std::string EvalReport::to_json() const {
  nlohmann::ordered_json j;
  j["segments"] = segments;
  if (bleu) {
    nlohmann::ordered_json b;
    b["score"] = bleu->score;
    b["precisions"] = bleu->precisions;
    b["brevity_penalty"] = bleu->brevity_penalty;
    b["hyp_len"] = bleu->hyp_len;
    b["ref_len"] = bleu->ref_len;
    j["bleu"] = std::move(b);
  }
  if (chrf) j["chrf"] = *chrf;
  if (chrfpp) j["chrf++"] = *chrfpp;
  return j.dump();
}

std::string EvalReport::to_text() const {
  std::ostringstream os;
  os.setf(std::ios::fixed);
  os.precision(2);
  if (bleu) {
    os << "BLEU = " << bleu->score << ' ';
    for (int n = 0; n < kBleuOrder; ++n) {
      os << (n ? "/" : "") << bleu->precisions[n] * 100.0;
    }
    os.precision(3);
    os << " (BP = " << bleu->brevity_penalty << " hyp_len = " << bleu->hyp_len
       << " ref_len = " << bleu->ref_len << ")\n";
    os.precision(2);
  }
  if (chrf) os << "chrF2 = " << *chrf << '\n';
  if (chrfpp) os << "chrF2++ = " << *chrfpp << '\n';
  return os.str();
}

EvalReport cmd_eval(const fs::path& hypotheses, std::span<const fs::path> references,
                    std::span<const std::string> metrics) {
  const auto hyps = read_lines(hypotheses);
  std::vector<std::vector<std::string>> refs;
  for (const auto& r : references) refs.push_back(read_lines(r));
  const auto pairs = make_eval_pairs(hyps, refs);

  EvalReport report;
  report.segments = pairs.size();
  for (const auto& m : metrics) {
    if (m == "bleu") report.bleu = corpus_bleu(pairs);
    else if (m == "chrf") report.chrf = chrf(pairs, kChrf);
    else if (m == "chrf++") report.chrfpp = chrf(pairs, kChrfPlusPlus);
    else throw Error(ErrorCode::InvalidArgument, "unknown metric " + m);
  }
  return report;
}

BeamSweep cmd_oracle(const fs::path& nbest, const fs::path& references,
                     std::span<const std::size_t> widths, unsigned workers,
                     const std::optional<fs::path>& output_dir) {
  const auto lists = read_nbest(nbest);
  const auto refs = references_from_lines(read_lines(references));
  auto result = beam_width_sweep(lists, refs, widths, default_sentence_metric(), workers);
  if (output_dir) {
    fs::create_directories(*output_dir);
    write_text(*output_dir / "sweep.tsv", result.to_tsv());
    if (!result.rows.empty()) {
      const auto widest = std::max_element(result.rows.begin(), result.rows.end(),
                                           [](const auto& a, const auto& b) { return a.width < b.width; });
      auto out = open_out(*output_dir / "selection.jsonl");
      write_selection_manifest(lists, result.results[widest - result.rows.begin()], out);
    }
  }
  return result;
}

}  // namespace dragoman
