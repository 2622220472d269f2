// Command-line front end: one subcommand per pipeline stage.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "dragoman/char_lm.hpp"
#include "dragoman/error.hpp"
#include "dragoman/langid.hpp"
#include "dragoman/pipeline.hpp"
#include "dragoman/prompt.hpp"
#include "dragoman/utf8.hpp"

namespace fs = std::filesystem;
using namespace dragoman;

namespace {

struct Globals {
  unsigned workers = 0;  // 0 keeps the config value
  std::optional<std::uint64_t> seed;
  bool strict = false;
  std::optional<fs::path> config;
};

// Settings shared by filter and select: a config file, then flag overrides.
struct RunFlags {
  std::vector<fs::path> inputs;
  std::string format;
  std::vector<fs::path> scores;
  std::optional<fs::path> out;
};

void add_run_flags(CLI::App& cmd, RunFlags& f) {
  cmd.add_option("--input", f.inputs, "corpus path (tsv) or source and target paths (moses)");
  cmd.add_option("--format", f.format, "tsv or moses")->check(CLI::IsMember({"tsv", "moses"}));
  cmd.add_option("--scores", f.scores, "JSON-lines score sidecar; repeatable");
  cmd.add_option("--out", f.out, "output directory");
}

PipelineConfig base_config(const Globals& g, const RunFlags& f) {
  PipelineConfig c = g.config ? load_config(*g.config) : PipelineConfig{};
  if (!f.inputs.empty()) c.inputs = f.inputs;
  if (f.format == "tsv") c.format = CorpusFormat::Tsv;
  if (f.format == "moses") c.format = CorpusFormat::MosesPair;
  if (!f.scores.empty()) c.score_sidecars = f.scores;
  if (f.out) c.output_dir = *f.out;
  if (g.workers != 0) c.workers = g.workers;
  if (g.seed) c.seed = *g.seed;
  if (g.strict) c.parse_mode = ParseMode::Strict;
  return c;
}

std::vector<std::string> read_all_lines(const std::optional<fs::path>& path) {
  if (path) return read_lines(*path);
  std::vector<std::string> lines;
  for (std::string line; std::getline(std::cin, line);) lines.push_back(std::move(line));
  return lines;
}

std::vector<Demonstration> read_pool(const fs::path& path) {
  std::vector<Demonstration> pool;
  for (const auto& r : read_tsv(path)) pool.push_back({r.pair.source, r.pair.target});
  return pool;
}

int fail(const std::string& name, const std::string& message) {
  nlohmann::json j{{"error", name}, {"message", message}};
  std::cerr << j.dump() << '\n';
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bitext filtering, data selection and translation evaluation"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--workers", g.workers, "worker threads")->check(CLI::PositiveNumber);
  app.add_option("--seed", g.seed, "random seed");
  app.add_flag("--strict", g.strict, "reject malformed input lines");
  app.add_option("--config", g.config, "key = value run configuration")->check(CLI::ExistingFile);

  // filter
  auto* filter = app.add_subcommand("filter", "heuristic bitext filtering");
  RunFlags filter_flags;
  add_run_flags(*filter, filter_flags);
  std::optional<std::string> filter_preset;
  std::optional<fs::path> filter_spec;
  std::vector<fs::path> filter_profiles;
  std::vector<fs::path> filter_lms;
  filter->add_option("--preset", filter_preset, "named filter preset");
  filter->add_option("--spec", filter_spec, "filter spec file")->check(CLI::ExistingFile);
  filter->add_option("--langid", filter_profiles, "language profiles; repeatable");
  filter->add_option("--lm", filter_lms, "source and target character models")->expected(2);

  // select
  auto* select = app.add_subcommand("select", "k-fold perplexity data selection");
  RunFlags select_flags;
  add_run_flags(*select, select_flags);
  std::optional<int> select_k;
  std::optional<int> select_order;
  std::vector<double> select_percentiles;
  std::string select_mode;
  bool select_external = false;
  select->add_option("--k", select_k, "number of folds");
  select->add_option("--lm-order", select_order, "character model order");
  select->add_option("--percentiles", select_percentiles, "comma-separated percentiles")->delimiter(',');
  select->add_option("--mode", select_mode, "per_fold or global")->check(CLI::IsMember({"per_fold", "global"}));
  select->add_flag("--external-logprob", select_external, "use logprob from the sidecars");

  // eval
  auto* eval = app.add_subcommand("eval", "corpus BLEU, chrF and chrF++");
  fs::path eval_hyp;
  std::vector<fs::path> eval_refs;
  std::vector<std::string> eval_metrics{"bleu", "chrf", "chrf++"};
  bool eval_json = false;
  eval->add_option("--hyp", eval_hyp, "hypothesis lines")->required()->check(CLI::ExistingFile);
  eval->add_option("--ref", eval_refs, "reference lines; repeatable")->required()->check(CLI::ExistingFile);
  eval->add_option("--metrics", eval_metrics, "bleu,chrf,chrf++")->delimiter(',');
  eval->add_flag("--json", eval_json, "print JSON");

  // oracle
  auto* oracle = app.add_subcommand("oracle", "oracle rescoring of n-best lists");
  fs::path oracle_nbest;
  fs::path oracle_ref;
  std::vector<std::size_t> oracle_widths;
  std::optional<fs::path> oracle_out;
  oracle->add_option("--nbest", oracle_nbest, "n-best JSON lines")->required()->check(CLI::ExistingFile);
  oracle->add_option("--ref", oracle_ref, "reference lines, line i for id i")->required()->check(CLI::ExistingFile);
  oracle->add_option("--widths", oracle_widths, "comma-separated beam widths")->required()->delimiter(',');
  oracle->add_option("--out", oracle_out, "directory for sweep.tsv and selection.jsonl");

  // prompt
  auto* prompt = app.add_subcommand("prompt", "few-shot prompts and masked training strings");
  prompt->require_subcommand(1);
  auto* fewshot = prompt->add_subcommand("fewshot", "one prompt per query line");
  std::optional<fs::path> fs_queries;
  std::optional<fs::path> fs_pool;
  std::size_t fs_shots = 2;
  std::string fs_strategy = "first";
  bool fs_jsonl = false;
  fewshot->add_option("--queries", fs_queries, "query sources, one per line (stdin if absent)");
  fewshot->add_option("--demos", fs_pool, "demonstration pool (tsv)")->check(CLI::ExistingFile);
  fewshot->add_option("--shots", fs_shots, "demonstrations per prompt");
  fewshot->add_option("--strategy", fs_strategy, "first, similar or context (demo row i precedes query i)")
      ->check(CLI::IsMember({"first", "similar", "context"}));
  fewshot->add_flag("--jsonl", fs_jsonl, "emit {id, prompt, mask_spans} lines");
  auto* train_fmt = prompt->add_subcommand("train", "masked training strings from a corpus");
  fs::path train_input;
  train_fmt->add_option("--input", train_input, "tsv corpus")->required()->check(CLI::ExistingFile);

  // lm
  auto* lm = app.add_subcommand("lm", "character n-gram language models");
  lm->require_subcommand(1);
  auto* lm_train = lm->add_subcommand("train", "train a model on text lines");
  std::optional<fs::path> lm_input;
  fs::path lm_out;
  LmConfig lm_cfg;
  std::string lm_smoothing = "witten_bell";
  lm_train->add_option("--input", lm_input, "training lines (stdin if absent)");
  lm_train->add_option("--out", lm_out, "model path")->required();
  lm_train->add_option("--order", lm_cfg.order, "n-gram order");
  lm_train->add_option("--smoothing", lm_smoothing, "witten_bell or add_k")
      ->check(CLI::IsMember({"witten_bell", "add_k"}));
  lm_train->add_option("--k", lm_cfg.k, "add-k constant");
  auto* lm_score = lm->add_subcommand("score", "bits per character per line");
  fs::path lm_model;
  std::optional<fs::path> lm_score_input;
  lm_score->add_option("--model", lm_model, "model path")->required()->check(CLI::ExistingFile);
  lm_score->add_option("--input", lm_score_input, "text lines (stdin if absent)");

  // langid
  auto* langid = app.add_subcommand("langid", "character n-gram language identification");
  langid->require_subcommand(1);
  auto* li_train = langid->add_subcommand("train", "build a language profile");
  std::optional<fs::path> li_input;
  std::string li_lang;
  int li_order = LangProfile::kDefaultOrder;
  fs::path li_out;
  li_train->add_option("--input", li_input, "training lines (stdin if absent)");
  li_train->add_option("--lang", li_lang, "language label")->required();
  li_train->add_option("--order", li_order, "n-gram order");
  li_train->add_option("--out", li_out, "profile path")->required();
  auto* li_classify = langid->add_subcommand("classify", "label and confidence per line");
  std::vector<fs::path> li_profiles;
  std::optional<fs::path> li_classify_input;
  li_classify->add_option("--profiles", li_profiles, "two or more profiles")->required()->delimiter(',');
  li_classify->add_option("--input", li_classify_input, "text lines (stdin if absent)");

  auto* version = app.add_subcommand("version", "print the version");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*filter) {
      auto c = base_config(g, filter_flags);
      if (filter_preset) c.preset = filter_preset;
      if (filter_spec) c.filter_spec_path = filter_spec;
      if (!filter_profiles.empty()) c.langid_profiles = filter_profiles;
      if (filter_lms.size() == 2) {
        c.source_lm = filter_lms[0];
        c.target_lm = filter_lms[1];
      }
      std::cout << cmd_filter(c).to_text();
    } else if (*select) {
      auto c = base_config(g, select_flags);
      if (select_k) c.k = *select_k;
      if (select_order) c.lm.order = *select_order;
      if (!select_percentiles.empty()) c.percentiles = select_percentiles;
      if (select_mode == "global") c.mode = ThresholdMode::Global;
      if (select_mode == "per_fold") c.mode = ThresholdMode::PerFold;
      if (select_external) c.external_logprob = true;
      std::cout << cmd_select(c).to_tsv();
    } else if (*eval) {
      const auto report = cmd_eval(eval_hyp, eval_refs, eval_metrics);
      std::cout << (eval_json ? report.to_json() + "\n" : report.to_text());
    } else if (*oracle) {
      std::cout << cmd_oracle(oracle_nbest, oracle_ref, oracle_widths, g.workers ? g.workers : 1, oracle_out)
                       .to_tsv();
    } else if (*fewshot) {
      const auto queries = read_all_lines(fs_queries);
      const auto pool = fs_pool ? read_pool(*fs_pool) : std::vector<Demonstration>{};
      std::vector<Demonstration> history;
      for (std::size_t i = 0; i < queries.size(); ++i) {
        std::string text;
        if (fs_strategy == "context") {
          text = contextual_prompt(history, fs_shots, queries[i]);
        } else if (fs_strategy == "similar") {
          text = build_fewshot(select_demos(pool, queries[i], fs_shots), queries[i]);
        } else {
          if (pool.size() < fs_shots) throw Error(ErrorCode::PoolTooSmall, "pool smaller than --shots");
          text = build_fewshot(std::span(pool).first(fs_shots), queries[i]);
        }
        // The context strategy reuses the pool as the running document history.
        if (fs_strategy == "context" && i < pool.size()) history.push_back(pool[i]);
        if (fs_jsonl) {
          nlohmann::json j{{"id", i}, {"prompt", text}, {"mask_spans", {{0, utf8::length(text)}}}};
          std::cout << j.dump() << '\n';
        } else {
          std::cout << text << "\n\n";
        }
      }
    } else if (*train_fmt) {
      for (const auto& r : read_tsv(train_input, g.strict ? ParseMode::Strict : ParseMode::Lenient)) {
        const auto ex = format_pair(r.pair.source, r.pair.target);
        auto spans = nlohmann::json::array();
        for (const auto& s : ex.mask_spans) spans.push_back({s.start, s.end});
        nlohmann::json j{{"id", r.id()}, {"prompt", ex.text}, {"mask_spans", spans}};
        std::cout << j.dump() << '\n';
      }
    } else if (*lm_train) {
      lm_cfg.smoothing = lm_smoothing == "add_k" ? Smoothing::AddK : Smoothing::WittenBell;
      const auto lines = read_all_lines(lm_input);
      CharNGramLM::train(lines, lm_cfg).save(lm_out);
    } else if (*lm_score) {
      const auto model = CharNGramLM::load(lm_model);
      for (const auto& line : read_all_lines(lm_score_input)) {
        std::printf("%.6f\n", model.bits_per_char(line));
      }
    } else if (*li_train) {
      const auto lines = read_all_lines(li_input);
      LangProfile::train(lines, li_lang, li_order).save(li_out);
    } else if (*li_classify) {
      std::vector<LangProfile> profiles;
      for (const auto& p : li_profiles) profiles.push_back(LangProfile::load(p));
      for (const auto& line : read_all_lines(li_classify_input)) {
        const auto c = classify(line, profiles);
        std::printf("%s\t%.6f\n", c.label.c_str(), c.confidence);
      }
    } else if (*version) {
      std::cout << "dragoman " << DRAGOMAN_VERSION << '\n';
    }
  } catch (const Error& e) {
    return fail(std::string(error_name(e.code())), e.what());
  } catch (const std::exception& e) {
    return fail("Internal", e.what());
  }
  return 0;
}
