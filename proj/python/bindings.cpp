// Python module `dragoman._core`.

#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <map>
#include <string>
#include <vector>

#include "dragoman/char_lm.hpp"
#include "dragoman/error.hpp"
#include "dragoman/kfold.hpp"
#include "dragoman/langid.hpp"
#include "dragoman/metrics.hpp"
#include "dragoman/oracle.hpp"
#include "dragoman/pipeline.hpp"
#include "dragoman/prompt.hpp"

namespace py = pybind11;
using namespace dragoman;

namespace {

using Streams = std::vector<std::vector<std::string>>;
using PairList = std::vector<std::pair<std::string, std::string>>;

std::vector<EvalPair> eval_pairs(const std::vector<std::string>& hyps, const Streams& refs) {
  return make_eval_pairs(hyps, refs);
}

BleuSmoothing smoothing_of(const std::string& name) {
  if (name == "none") return BleuSmoothing::None;
  if (name == "exp") return BleuSmoothing::Exp;
  throw Error(ErrorCode::InvalidArgument, "smoothing is 'none' or 'exp'");
}

py::dict bleu_dict(const BleuScore& s) {
  py::dict d;
  d["score"] = s.score;
  d["precisions"] = std::vector<double>(s.precisions.begin(), s.precisions.end());
  d["brevity_penalty"] = s.brevity_penalty;
  d["hyp_len"] = s.hyp_len;
  d["ref_len"] = s.ref_len;
  return d;
}

std::vector<Demonstration> demos_of(const PairList& pairs) {
  std::vector<Demonstration> out;
  for (const auto& [s, t] : pairs) out.push_back({s, t});
  return out;
}

PairList pairs_of(const std::vector<Demonstration>& demos) {
  PairList out;
  for (const auto& d : demos) out.emplace_back(d.source, d.target);
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Bitext filtering, data selection and translation evaluation";

  static py::exception<Error> error(m, "DragomanError");
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      const auto args = py::make_tuple(std::string(error_name(e.code())), e.what());
      PyErr_SetObject(error.ptr(), args.ptr());
    }
  });

  // metrics
  m.def("tokenize_13a", &tokenize_13a, py::arg("text"));
  m.def(
      "corpus_bleu",
      [](const std::vector<std::string>& hyps, const Streams& refs, const std::string& smoothing) {
        return bleu_dict(corpus_bleu(eval_pairs(hyps, refs), smoothing_of(smoothing)));
      },
      py::arg("hypotheses"), py::arg("references"), py::arg("smoothing") = "none",
      "Corpus BLEU; `references` is a list of reference streams.");
  m.def(
      "sentence_bleu",
      [](const std::string& hyp, const std::vector<std::string>& refs, const std::string& smoothing) {
        return sentence_bleu({hyp, refs}, smoothing_of(smoothing));
      },
      py::arg("hypothesis"), py::arg("references"), py::arg("smoothing") = "exp");
  m.def(
      "corpus_chrf",
      [](const std::vector<std::string>& hyps, const Streams& refs, int char_order, int word_order,
         double beta) { return chrf(eval_pairs(hyps, refs), {char_order, word_order, beta}); },
      py::arg("hypotheses"), py::arg("references"), py::arg("char_order") = 6, py::arg("word_order") = 0,
      py::arg("beta") = 2.0);
  m.def(
      "sentence_chrf",
      [](const std::string& hyp, const std::vector<std::string>& refs, int char_order, int word_order,
         double beta) { return sentence_chrf({hyp, refs}, {char_order, word_order, beta}); },
      py::arg("hypothesis"), py::arg("references"), py::arg("char_order") = 6, py::arg("word_order") = 0,
      py::arg("beta") = 2.0);

  // langid
  py::class_<LangProfile>(m, "LangProfile")
      .def_static(
          "train",
          [](const std::vector<std::string>& texts, std::string language, int order) {
            return LangProfile::train(texts, std::move(language), order);
          },
          py::arg("texts"), py::arg("language"), py::arg("order") = LangProfile::kDefaultOrder)
      .def_static("load", py::overload_cast<const std::filesystem::path&>(&LangProfile::load))
      .def("save", py::overload_cast<const std::filesystem::path&>(&LangProfile::save, py::const_))
      .def_property_readonly("language", &LangProfile::language)
      .def_property_readonly("order", &LangProfile::ngram_order);
  m.def(
      "classify",
      [](const std::string& text, const std::vector<LangProfile>& profiles) {
        const auto c = classify(text, profiles);
        py::dict d;
        d["label"] = c.label;
        d["confidence"] = c.confidence;
        std::map<std::string, double> probs;
        for (std::size_t i = 0; i < c.scores.size(); ++i) probs[c.scores[i].first] = c.probabilities[i];
        d["probabilities"] = probs;
        return d;
      },
      py::arg("text"), py::arg("profiles"));

  // char-lm
  py::class_<CharNGramLM>(m, "CharNGramLM")
      .def_static(
          "train",
          [](const std::vector<std::string>& texts, int order, const std::string& smoothing, double k) {
            LmConfig cfg{order, Smoothing::WittenBell, k};
            if (smoothing == "add_k") cfg.smoothing = Smoothing::AddK;
            else if (smoothing != "witten_bell") throw Error(ErrorCode::InvalidArgument, "unknown smoothing");
            return CharNGramLM::train(texts, cfg);
          },
          py::arg("texts"), py::arg("order") = 5, py::arg("smoothing") = "witten_bell", py::arg("k") = 1.0)
      .def_static("load", py::overload_cast<const std::filesystem::path&>(&CharNGramLM::load))
      .def("save", py::overload_cast<const std::filesystem::path&>(&CharNGramLM::save, py::const_))
      .def_property_readonly("order", &CharNGramLM::order)
      .def("log_prob", &CharNGramLM::log_prob, py::arg("text"), "Total log2 probability.")
      .def("bits_per_char", &CharNGramLM::bits_per_char, py::arg("text"))
      .def(
          "prob",
          [](const CharNGramLM& lm, const std::u32string& context, const std::u32string& next) {
            if (next.size() != 1) throw Error(ErrorCode::InvalidArgument, "next must be one character");
            return lm.prob(context, next[0]);
          },
          py::arg("context"), py::arg("next"));

  // k-fold selection
  m.def("nearest_rank", &nearest_rank, py::arg("n"), py::arg("q"));
  m.def(
      "fold_assignment",
      [](const std::vector<RecordId>& ids, int k, std::uint64_t seed) {
        std::vector<SentencePair> pairs;
        for (auto id : ids) pairs.push_back({id, "x", "x"});
        const auto plan = make_folds(Corpus::from_pairs(pairs), k, seed);
        std::map<RecordId, int> out(plan.assignment().begin(), plan.assignment().end());
        return out;
      },
      py::arg("ids"), py::arg("k") = 5, py::arg("seed") = 0);

  // prompts
  m.def(
      "format_pair",
      [](const std::string& source, const std::string& target) {
        const auto ex = format_pair(source, target);
        std::vector<std::pair<std::size_t, std::size_t>> spans;
        for (const auto& s : ex.mask_spans) spans.emplace_back(s.start, s.end);
        return std::make_pair(ex.text, spans);
      },
      py::arg("source"), py::arg("target") = "", "Returns (text, mask_spans) in code points.");
  m.def(
      "strip_masked",
      [](const std::string& text, const std::vector<std::pair<std::size_t, std::size_t>>& spans) {
        MaskedExample ex{text, {}};
        for (const auto& [a, b] : spans) ex.mask_spans.push_back({a, b});
        return strip_masked(ex);
      },
      py::arg("text"), py::arg("mask_spans"));
  m.def(
      "build_fewshot", [](const PairList& demos, const std::string& query) { return build_fewshot(demos_of(demos), query); },
      py::arg("demos"), py::arg("query"));
  m.def(
      "contextual_prompt",
      [](const PairList& history, std::size_t window, const std::string& query) {
        return contextual_prompt(demos_of(history), window, query);
      },
      py::arg("history"), py::arg("window"), py::arg("query"));
  m.def("char_ngram_cosine", &char_ngram_cosine, py::arg("a"), py::arg("b"), py::arg("n") = 3);
  m.def(
      "select_demos",
      [](const PairList& pool, const std::string& query, std::size_t n) {
        return pairs_of(select_demos(demos_of(pool), query, n));
      },
      py::arg("pool"), py::arg("query"), py::arg("n"));

  // pipeline commands
  m.def(
      "run_filter",
      [](const std::string& config_text) {
        py::gil_scoped_release release;
        return cmd_filter(parse_config(config_text)).to_json();
      },
      py::arg("config"), "Runs the filter stage from config text; returns the report as JSON text.");
  m.def(
      "run_select",
      [](const std::string& config_text) {
        py::gil_scoped_release release;
        return cmd_select(parse_config(config_text)).to_tsv();
      },
      py::arg("config"), "Runs the selection stage from config text; returns the sweep table.");
  m.def(
      "evaluate",
      [](const std::filesystem::path& hyp, const std::vector<std::filesystem::path>& refs,
         const std::vector<std::string>& metrics) { return cmd_eval(hyp, refs, metrics).to_json(); },
      py::arg("hypotheses"), py::arg("references"),
      py::arg("metrics") = std::vector<std::string>{"bleu", "chrf", "chrf++"});
  m.def(
      "oracle_sweep",
      [](const std::filesystem::path& nbest, const std::filesystem::path& refs,
         const std::vector<std::size_t>& widths, unsigned workers) {
        return cmd_oracle(nbest, refs, widths, workers).to_tsv();
      },
      py::arg("nbest"), py::arg("references"), py::arg("widths"), py::arg("workers") = 1);
}
