// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fail.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <json.hpp>
#include <map>
#include <string>
#include <vector>

#include "dragoman/char_lm.hpp"
#include "dragoman/error.hpp"
#include "dragoman/filter.hpp"
#include "dragoman/kfold.hpp"
#include "dragoman/metrics.hpp"
#include "dragoman/oracle.hpp"
#include "dragoman/pipeline.hpp"
#include "dragoman/prompt.hpp"
#include "dragoman/utf8.hpp"
#include "synth.hpp"

using namespace dragoman;
namespace fs = std::filesystem;

namespace {

const std::string kData = DRAGOMAN_TEST_DATA;

struct Outcome {
  bool pass = false;
  std::string detail;
};

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::string format(const char* fmt, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, fmt, v);
  return buf;
}

std::map<std::string, std::string> dir_contents(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (e.is_regular_file()) out[fs::relative(e.path(), dir).string()] = synth::read_file(e.path());
  }
  return out;
}

std::vector<RecordId> sorted_ids(const Corpus& c) {
  std::vector<RecordId> ids;
  for (const auto& r : c) ids.push_back(r.id());
  std::sort(ids.begin(), ids.end());
  return ids;
}

Outcome metric_equivalence() {
  std::ifstream in(kData + "/metrics/golden.json");
  const auto g = nlohmann::json::parse(in);
  const Stopwatch clock;
  const auto hyps = read_lines(kData + "/metrics/hyp.txt");
  const auto refs = read_lines(kData + "/metrics/ref.txt");
  const std::vector<std::vector<std::string>> streams{refs};
  const auto pairs = make_eval_pairs(hyps, streams);

  double worst = 0.0;
  auto check = [&](double got, double want) { worst = std::max(worst, std::abs(got - want)); };
  check(corpus_bleu(pairs).score, g["corpus_bleu"]["score"]);
  check(corpus_bleu(pairs, BleuSmoothing::Exp).score, g["corpus_bleu_exp"]["score"]);
  check(chrf(pairs, kChrf), g["corpus_chrf"]);
  check(chrf(pairs, kChrfPlusPlus), g["corpus_chrfpp"]);
  std::size_t identity = 0;
  bool identity_ok = true;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const double sb = sentence_bleu(pairs[i]);
    check(sb, g["sentence_bleu"][i]);
    check(sentence_chrf(pairs[i], kChrf), g["sentence_chrf"][i]);
    check(sentence_chrf(pairs[i], kChrfPlusPlus), g["sentence_chrfpp"][i]);
    if (hyps[i] == refs[i]) {
      ++identity;
      identity_ok &= format("%.2f", sb) == "100.00";
    }
  }
  const std::vector<std::vector<std::string>> self{hyps};
  const auto same = make_eval_pairs(hyps, self);
  identity_ok &= format("%.2f", corpus_bleu(same).score) == "100.00";
  const double secs = clock.seconds();
  return {worst <= 0.01 && identity_ok && identity > 0 && secs < 1.0,
          "max |diff| " + format("%.2e", worst) + ", " + std::to_string(identity) +
              " identity pairs at 100.00: " + (identity_ok ? "yes" : "no") + ", " +
              format("%.3f", secs) + " s"};
}

Outcome retention_arithmetic() {
  const auto dir = synth::temp_dir("acceptance_retention");
  PipelineConfig c;
  c.inputs = {synth::write_short_corpus(dir, 29000, 2024)};
  c.k = 5;
  c.seed = 1;
  c.output_dir = dir / "out";
  const Stopwatch clock;
  const auto result = cmd_select(c);
  const double secs = clock.seconds();

  const std::vector<std::size_t> want{5800, 11600, 14500, 17400, 20300, 23200};
  bool counts = result.manifests.size() >= want.size();
  std::string got;
  for (std::size_t i = 0; i < want.size() && counts; ++i) {
    counts &= result.manifests[i].retained_ids.size() == want[i];
    got += (i ? "," : "") + std::to_string(result.manifests[i].retained_ids.size());
  }
  bool nested = true;
  for (std::size_t i = 1; i < want.size() && counts; ++i) {
    const auto& a = result.manifests[i - 1].retained_ids;
    const auto& b = result.manifests[i].retained_ids;
    nested &= std::includes(b.begin(), b.end(), a.begin(), a.end());
  }
  return {counts && nested && secs < 10.0, "retained {" + got + "}, nested: " + (nested ? "yes" : "no") +
                                               ", " + format("%.2f", secs) + " s"};
}

Outcome held_out_guarantee() {
  synth::Rng rng(33);
  std::size_t corpora = 0;
  std::size_t violations = 0;
  std::size_t scored = 0;
  for (int k : {2, 5}) {
    for (int t = 0; t < 10; ++t) {
      std::vector<SentencePair> pairs;
      const auto n = synth::uniform(rng, 20, 400);
      RecordId id = synth::uniform(rng, 0, 1000);
      for (std::uint64_t i = 0; i < n; ++i) {
        pairs.push_back({id, synth::short_sentence(rng), synth::short_sentence(rng)});
        id += synth::uniform(rng, 1, 5);
      }
      const auto corpus = Corpus::from_pairs(pairs);
      const auto plan = make_folds(corpus, k, rng());
      CrossvalAudit audit;
      CrossvalConfig cfg;
      cfg.lm.order = 3;
      cfg.workers = t % 2 ? 4 : 1;
      crossval_score(corpus, plan, cfg, &audit);
      for (const auto& [rid, model] : audit.scored_by) {
        const auto& train = audit.training_ids.at(static_cast<std::size_t>(model));
        violations += std::find(train.begin(), train.end(), rid) != train.end();
      }
      scored += audit.scored_by.size();
      violations += audit.scored_by.size() != corpus.size();
      ++corpora;
    }
  }
  return {violations == 0, std::to_string(corpora) + " corpora, " + std::to_string(scored) +
                               " scored records, " + std::to_string(violations) + " seen-by-scorer"};
}

Outcome noise_removal() {
  const auto dir = synth::temp_dir("acceptance_noise");
  const auto fx = synth::make_filter_fixture(dir / "fixture", 1000, 100, 404);
  const Stopwatch clock;
  cmd_filter(synth::filter_config(fx, "paracrawl_8m", dir / "out"));
  const double secs = clock.seconds();
  const auto kept = read_tsv(dir / "out" / "kept.tsv");
  std::size_t injected_kept = 0;
  std::map<std::string, std::size_t> kept_by_kind;
  for (const auto& r : kept) {
    if (fx.injected.contains(r.id())) {
      ++injected_kept;
      ++kept_by_kind[fx.injection_kind.at(r.id())];
    }
  }
  const std::size_t clean = fx.size - fx.injected.size();
  const std::size_t clean_rejected = clean - (kept.size() - injected_kept);
  const double inj_rate = 1.0 - double(injected_kept) / double(fx.injected.size());
  const double clean_rate = double(clean_rejected) / double(clean);
  std::string leaks;
  for (const auto& [kind, n] : kept_by_kind) leaks += " " + kind + "=" + std::to_string(n);
  return {inj_rate >= 0.90 && clean_rate <= 0.05 && secs < 5.0,
          "injections rejected " + format("%.1f%%", 100 * inj_rate) + ", clean rejected " +
              format("%.1f%%", 100 * clean_rate) + ", " + format("%.2f", secs) + " s" +
              (leaks.empty() ? "" : ", kept injections:" + leaks)};
}

Outcome filter_algebra() {
  synth::Rng rng(505);
  constexpr int kCases = 1000;
  int idem = 0, mono = 0, order_ok = 0;
  for (int t = 0; t < kCases; ++t) {
    const auto corpus = synth::random_scored_corpus(rng, 40);
    const auto spec = synth::random_spec(rng);
    const auto once = apply_filters(corpus, spec).first;
    const auto twice = apply_filters(once, spec).first;
    idem += sorted_ids(once) == sorted_ids(twice);

    const auto base = sorted_ids(once);
    bool superset = true;
    for (const auto& loose : synth::loosened(spec, rng)) {
      const auto wider = sorted_ids(apply_filters(corpus, loose).first);
      superset &= std::includes(wider.begin(), wider.end(), base.begin(), base.end());
    }
    mono += superset;

    auto order = kDefaultCriterionOrder;
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[synth::uniform(rng, 0, i - 1)]);
    order_ok += sorted_ids(apply_filters(corpus, spec, order).first) == base;
  }
  return {idem == kCases && mono == kCases && order_ok == kCases,
          "idempotent " + std::to_string(idem) + "/" + std::to_string(kCases) + ", monotone " +
              std::to_string(mono) + "/" + std::to_string(kCases) + ", order-independent " +
              std::to_string(order_ok) + "/" + std::to_string(kCases)};
}

Outcome bpc_and_normalization() {
  const std::u32string hex = U"0123456789abcdef";
  const std::vector<std::string> balanced{utf8::encode(hex)};
  const auto uniform = CharNGramLM::train(balanced, {1, Smoothing::AddK, 1e-12});
  synth::Rng rng(606);
  bool bpc_ok = true;
  std::string shown;
  for (int i = 0; i < 100; ++i) {
    const auto text = utf8::encode(synth::random_text(rng, hex, synth::uniform(rng, 1, 300)));
    const auto s = format("%.6f", uniform.bits_per_char(text));
    if (i == 0) shown = s;
    bpc_ok &= s == "4.000000";
  }

  const auto corpus = synth::ukrainian_corpus(300, 607);
  const auto lm = CharNGramLM::train(corpus, {5, Smoothing::WittenBell, 1.0});
  const auto vocab = lm.prediction_vocab();
  const std::u32string noise = U"абвгґдеєжзиіїйклмнопрстуфхцчшщьюя .,xyz漢";
  double worst = 0.0;
  for (int i = 0; i < 10000; ++i) {
    std::u32string ctx;
    if (i % 2 == 0) {
      const auto d = utf8::decode(corpus[synth::uniform(rng, 0, corpus.size() - 1)]);
      ctx = d.substr(0, synth::uniform(rng, 0, d.size()));
    } else {
      ctx = synth::random_text(rng, noise, synth::uniform(rng, 0, 8));
    }
    double sum = 0.0;
    for (char32_t c : vocab) sum += lm.prob(ctx, c);
    worst = std::max(worst, std::abs(sum - 1.0));
  }
  return {bpc_ok && worst <= 1e-9,
          "BPC " + shown + " on 100 texts (all equal: " + (bpc_ok ? "yes" : "no") +
              "), max |sum-1| over 10000 contexts " + format("%.1e", worst)};
}

Outcome oracle_properties() {
  synth::Rng rng(707);
  const std::vector<std::size_t> widths{1, 2, 3, 4, 6, 8};
  constexpr int kSets = 100;
  int hundred = 0, monotone = 0, above = 0;
  double worst_dip = 0.0;
  for (int t = 0; t < kSets; ++t) {
    References refs;
    auto lists = synth::random_nbest(rng, 40, 8, refs);
    const auto sw = beam_width_sweep(lists, refs, widths);
    bool mono = true;
    for (std::size_t i = 1; i < sw.rows.size(); ++i) {
      const double dip = sw.rows[i - 1].oracle_bleu - sw.rows[i].oracle_bleu;
      if (dip > 0) {
        mono = false;
        worst_dip = std::max(worst_dip, dip);
      }
    }
    monotone += mono;
    above += std::all_of(sw.rows.begin(), sw.rows.end(),
                         [](const BeamSweepRow& r) { return r.oracle_bleu >= r.baseline_bleu; });

    for (auto& l : lists) {
      const auto pos = synth::uniform(rng, 0, l.hypotheses.size());
      l.hypotheses.insert(l.hypotheses.begin() + static_cast<std::ptrdiff_t>(pos), {refs.at(l.id), -99.0});
    }
    hundred += std::abs(oracle_select(lists, refs).oracle_bleu - 100.0) < 1e-9;
  }
  return {hundred == kSets && monotone == kSets && above == kSets,
          "reference-present 100: " + std::to_string(hundred) + "/" + std::to_string(kSets) +
              ", prefix-monotone: " + std::to_string(monotone) + "/" + std::to_string(kSets) +
              (worst_dip > 0 ? " (largest dip " + format("%.4f", worst_dip) + " BLEU)" : "") +
              ", oracle >= baseline: " + std::to_string(above) + "/" + std::to_string(kSets)};
}

Outcome prompt_exactness() {
  const std::vector<Demonstration> demos{
      {"They are planning to host a party next weekend.", "Вони планують провести вечірку наступного вікенду."},
      {"I enjoy swimming in the ocean and feeling the salty breeze.",
       "Мені подобається плавати в океані та відчувати солоний вітер."}};
  const std::string query = "Where is the nearest train station?";
  const std::string want =
      "[INST] They are planning to host a party next weekend. [/INST] Вони планують провести вечірку "
      "наступного вікенду.\n[INST] I enjoy swimming in the ocean and feeling the salty breeze. [/INST] "
      "Мені подобається плавати в океані та відчувати солоний вітер.\n[INST] " +
      query + " [/INST]";
  const bool exact = build_fewshot(demos, query) == want;
  synth::Rng rng(808);
  int identity = 0;
  for (int i = 0; i < 1000; ++i) {
    const auto d = synth::random_demo(rng);
    identity += strip_masked(format_pair(d.source, d.target)) == d.target;
  }
  return {exact && identity == 1000, std::string("two-shot prompt byte-exact: ") + (exact ? "yes" : "no") +
                                         ", mask-strip identity " + std::to_string(identity) + "/1000"};
}

Outcome determinism() {
  const auto dir = synth::temp_dir("acceptance_determinism");
  const auto fx = synth::make_filter_fixture(dir / "fixture", 1000, 100, 909);
  const auto corpus = synth::write_short_corpus(dir / "short", 3000, 910);
  std::vector<std::map<std::string, std::string>> filter_runs;
  std::vector<std::map<std::string, std::string>> select_runs;
  int run = 0;
  for (unsigned workers : {1u, 1u, 4u, 4u}) {
    const auto fout = dir / ("filter" + std::to_string(run));
    cmd_filter(synth::filter_config(fx, "paracrawl_3m", fout, workers));
    filter_runs.push_back(dir_contents(fout));

    PipelineConfig c;
    c.inputs = {corpus};
    c.seed = 11;
    c.workers = workers;
    c.output_dir = dir / ("select" + std::to_string(run));
    cmd_select(c);
    select_runs.push_back(dir_contents(c.output_dir));
    ++run;
  }
  auto all_equal = [](const auto& runs) {
    return std::all_of(runs.begin(), runs.end(), [&](const auto& r) { return r == runs.front(); });
  };
  const bool f = all_equal(filter_runs);
  const bool s = all_equal(select_runs);
  return {f && s, std::string("filter outputs identical: ") + (f ? "yes" : "no") + " (" +
                      std::to_string(filter_runs.front().size()) + " files), select outputs identical: " +
                      (s ? "yes" : "no") + " (" + std::to_string(select_runs.front().size()) +
                      " files), workers {1,4} x 2 runs"};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"metric oracle equivalence", metric_equivalence},
      {"retention arithmetic", retention_arithmetic},
      {"held-out scoring", held_out_guarantee},
      {"noise removal", noise_removal},
      {"filter algebra", filter_algebra},
      {"BPC and normalization", bpc_and_normalization},
      {"oracle properties", oracle_properties},
      {"prompt byte-exactness", prompt_exactness},
      {"determinism", determinism},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    failures += !o.pass;
    std::printf("%s %zu %s: %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(), o.detail.c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
