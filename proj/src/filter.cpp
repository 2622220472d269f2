#include "dragoman/filter.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "dragoman/error.hpp"
#include "dragoman/parallel.hpp"
#include "dragoman/utf8.hpp"

namespace dragoman {

std::string_view criterion_name(Criterion c) noexcept {
  switch (c) {
    case Criterion::Lang: return "lang";
    case Criterion::Bpc: return "bpc";
    case Criterion::Sim: return "sim";
    case Criterion::Len: return "len";
    case Criterion::LenDiff: return "len_diff";
  }
  return "?";
}

void FilterSpec::validate() const {
  if (!require_langs && !max_bpc_sum && !min_similarity && !max_len_diff && !min_len &&
      !max_len) {
    throw Error(ErrorCode::InvalidSpec, "filter spec sets no criterion");
  }
  if (require_langs) {
    const auto& r = *require_langs;
    if (r.source_label.empty() || r.target_label.empty()) {
      throw Error(ErrorCode::InvalidSpec, "language labels must be non-empty");
    }
    if (!(r.min_conf >= 0.0 && r.min_conf <= 1.0)) {
      throw Error(ErrorCode::InvalidSpec, "min_conf must lie in [0, 1]");
    }
  }
  if (max_bpc_sum && !std::isfinite(*max_bpc_sum)) {
    throw Error(ErrorCode::InvalidSpec, "max_bpc_sum must be finite");
  }
  if (min_similarity && !(*min_similarity >= -1.0 && *min_similarity <= 1.0)) {
    throw Error(ErrorCode::InvalidSpec, "min_similarity must lie in [-1, 1]");
  }
  if (min_len && max_len && *min_len > *max_len) {
    throw Error(ErrorCode::InvalidSpec, "min_len exceeds max_len");
  }
}

LengthStats length_stats(const SentencePair& pair) {
  LengthStats s;
  s.len_src = static_cast<std::int64_t>(utf8::length(pair.source));
  s.len_tgt = static_cast<std::int64_t>(utf8::length(pair.target));
  s.len_diff = s.len_src > s.len_tgt ? s.len_src - s.len_tgt : s.len_tgt - s.len_src;
  return s;
}

Corpus annotate_lengths(Corpus corpus, unsigned workers) {
  parallel_for(corpus.size(), workers, [&](std::size_t i) {
    auto& r = corpus.records[i];
    const auto s = length_stats(r.pair);
    r.scores.set(keys::kLenSrc, static_cast<double>(s.len_src));
    r.scores.set(keys::kLenTgt, static_cast<double>(s.len_tgt));
    r.scores.set(keys::kLenDiff, static_cast<double>(s.len_diff));
  });
  return corpus;
}

namespace {

bool active(const FilterSpec& spec, Criterion c) {
  switch (c) {
    case Criterion::Lang: return spec.require_langs.has_value();
    case Criterion::Bpc: return spec.max_bpc_sum.has_value();
    case Criterion::Sim: return spec.min_similarity.has_value();
    case Criterion::Len: return spec.min_len.has_value() || spec.max_len.has_value();
    case Criterion::LenDiff: return spec.max_len_diff.has_value();
  }
  return false;
}

std::vector<std::string_view> required_keys(const FilterSpec& spec) {
  std::vector<std::string_view> out;
  if (spec.require_langs) {
    out.push_back(keys::kLangSrcConf);
    out.push_back(keys::kLangTgtConf);
  }
  if (spec.max_bpc_sum) out.push_back(keys::kBpcSum);
  if (spec.min_similarity || spec.output_order == OutputOrder::SimilarityAscending) {
    out.push_back(keys::kSim);
  }
  return out;
}

bool passes(const Record& r, const FilterSpec& spec, Criterion c) {
  switch (c) {
    case Criterion::Lang: {
      const double min_conf = spec.require_langs->min_conf;
      const double src = *r.scores.get(keys::kLangSrcConf);
      const double tgt = *r.scores.get(keys::kLangTgtConf);
      return src > 0.0 && src >= min_conf && tgt > 0.0 && tgt >= min_conf;
    }
    case Criterion::Bpc:
      return *r.scores.get(keys::kBpcSum) < *spec.max_bpc_sum;
    case Criterion::Sim:
      return *r.scores.get(keys::kSim) > *spec.min_similarity;
    case Criterion::Len: {
      const auto s = length_stats(r.pair);
      for (auto len : {s.len_src, s.len_tgt}) {
        if (spec.min_len && len < *spec.min_len) return false;
        if (spec.max_len && len > *spec.max_len) return false;
      }
      return true;
    }
    case Criterion::LenDiff:
      return length_stats(r.pair).len_diff < *spec.max_len_diff;
  }
  return false;
}

}  // namespace

std::pair<Corpus, FilterReport> apply_filters(Corpus corpus, const FilterSpec& spec,
                                              const CriterionOrder& order) {
  spec.validate();
  const auto needed = required_keys(spec);
  for (const auto& r : corpus) {
    if (!r.flag.empty()) continue;
    for (auto key : needed) {
      if (!r.scores.has(key)) {
        throw Error(ErrorCode::MissingScore, "record " + std::to_string(r.id()) +
                                                 " has no score '" + std::string(key) + "'");
      }
    }
  }

  FilterReport report;
  report.spec = spec;
  report.input_count = corpus.size();
  Corpus kept;
  for (auto& r : corpus.records) {
    std::string cause;
    if (!r.flag.empty()) {
      cause = r.flag;
    } else {
      for (Criterion c : order) {
        if (active(spec, c) && !passes(r, spec, c)) {
          cause = criterion_name(c);
          break;
        }
      }
    }
    if (cause.empty()) {
      kept.records.push_back(std::move(r));
    } else {
      ++report.rejected_by_cause[cause];
    }
  }
  if (spec.output_order == OutputOrder::SimilarityAscending) {
    std::sort(kept.records.begin(), kept.records.end(), [](const Record& a, const Record& b) {
      const double sa = *a.scores.get(keys::kSim);
      const double sb = *b.scores.get(keys::kSim);
      if (sa != sb) return sa < sb;
      return a.id() < b.id();
    });
  }
  report.kept_count = kept.size();
  return {std::move(kept), std::move(report)};
}

FilterSpec preset(std::string_view name) {
  FilterSpec spec;
  spec.require_langs = LangRequirement{};
  spec.max_len_diff = 50;
  if (name == "paracrawl_1m") {
    spec.max_bpc_sum = 3.33;
    spec.min_similarity = 0.91;
    spec.output_order = OutputOrder::Input;
  } else if (name == "paracrawl_3m") {
    spec.max_bpc_sum = 3.25;
    spec.min_similarity = 0.85;
    spec.output_order = OutputOrder::SimilarityAscending;
  } else if (name == "paracrawl_8m") {
    spec.max_bpc_sum = 5.0;
    spec.min_similarity = 0.5;
    spec.output_order = OutputOrder::SimilarityAscending;
  } else {
    throw Error(ErrorCode::UnknownPreset, "unknown preset '" + std::string(name) + "'");
  }
  return spec;
}

namespace {

std::string fmt(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string_view order_name(OutputOrder o) {
  return o == OutputOrder::Input ? "input" : "similarity_ascending";
}

nlohmann::ordered_json spec_json(const FilterSpec& spec) {
  nlohmann::ordered_json j = nlohmann::ordered_json::object();
  if (spec.require_langs) {
    j["require_langs"] = {{"source", spec.require_langs->source_label},
                          {"target", spec.require_langs->target_label},
                          {"min_conf", spec.require_langs->min_conf}};
  }
  if (spec.max_bpc_sum) j["max_bpc_sum"] = *spec.max_bpc_sum;
  if (spec.min_similarity) j["min_similarity"] = *spec.min_similarity;
  if (spec.max_len_diff) j["max_len_diff"] = *spec.max_len_diff;
  if (spec.min_len) j["min_len"] = *spec.min_len;
  if (spec.max_len) j["max_len"] = *spec.max_len;
  j["output_order"] = order_name(spec.output_order);
  return j;
}

}  // namespace

std::string FilterReport::to_json() const {
  nlohmann::ordered_json j;
  j["input_count"] = input_count;
  j["kept_count"] = kept_count;
  j["rejected_by_cause"] = nlohmann::ordered_json::object();
  for (const auto& [cause, n] : rejected_by_cause) j["rejected_by_cause"][cause] = n;
  j["spec"] = spec_json(spec);
  return j.dump(2) + "\n";
}

std::string FilterReport::to_text() const {
  std::ostringstream out;
  out << "input:  " << input_count << '\n' << "kept:   " << kept_count << '\n';
  for (const auto& [cause, n] : rejected_by_cause) {
    out << "rejected[" << cause << "]: " << n << '\n';
  }
  out << "spec:\n" << serialize_spec(spec);
  return out.str();
}

std::string serialize_spec(const FilterSpec& spec) {
  std::ostringstream out;
  if (spec.require_langs) {
    out << "require_langs = " << spec.require_langs->source_label << ','
        << spec.require_langs->target_label << ',' << fmt(spec.require_langs->min_conf) << '\n';
  }
  if (spec.max_bpc_sum) out << "max_bpc_sum = " << fmt(*spec.max_bpc_sum) << '\n';
  if (spec.min_similarity) out << "min_similarity = " << fmt(*spec.min_similarity) << '\n';
  if (spec.max_len_diff) out << "max_len_diff = " << *spec.max_len_diff << '\n';
  if (spec.min_len) out << "min_len = " << *spec.min_len << '\n';
  if (spec.max_len) out << "max_len = " << *spec.max_len << '\n';
  out << "output_order = " << order_name(spec.output_order) << '\n';
  return out.str();
}

namespace {

std::string_view strip(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
  return s;
}

double to_double(std::string_view key, std::string_view v) {
  double out = 0;
  const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc() || res.ptr != v.data() + v.size()) {
    throw Error(ErrorCode::InvalidSpec, "bad number for " + std::string(key));
  }
  return out;
}

std::int64_t to_int(std::string_view key, std::string_view v) {
  std::int64_t out = 0;
  const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc() || res.ptr != v.data() + v.size()) {
    throw Error(ErrorCode::InvalidSpec, "bad integer for " + std::string(key));
  }
  return out;
}

}  // namespace

FilterSpec parse_spec(std::string_view text) {
  FilterSpec spec;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    auto view = strip(line);
    if (view.empty() || view.front() == '#' || view.front() == ';' || view.front() == '[') {
      continue;
    }
    const auto eq = view.find('=');
    if (eq == std::string_view::npos) {
      throw Error(ErrorCode::InvalidSpec, "expected key = value: " + std::string(view));
    }
    const auto key = strip(view.substr(0, eq));
    const auto value = strip(view.substr(eq + 1));
    if (key == "require_langs") {
      LangRequirement req;
      const auto c1 = value.find(',');
      const auto c2 = c1 == std::string_view::npos ? c1 : value.find(',', c1 + 1);
      if (c1 == std::string_view::npos) {
        throw Error(ErrorCode::InvalidSpec, "require_langs = src,tgt[,min_conf]");
      }
      req.source_label = strip(value.substr(0, c1));
      req.target_label = strip(value.substr(c1 + 1, c2 == std::string_view::npos
                                                         ? std::string_view::npos
                                                         : c2 - c1 - 1));
      if (c2 != std::string_view::npos) req.min_conf = to_double(key, strip(value.substr(c2 + 1)));
      spec.require_langs = req;
    } else if (key == "max_bpc_sum") {
      spec.max_bpc_sum = to_double(key, value);
    } else if (key == "min_similarity") {
      spec.min_similarity = to_double(key, value);
    } else if (key == "max_len_diff") {
      spec.max_len_diff = to_int(key, value);
    } else if (key == "min_len") {
      spec.min_len = to_int(key, value);
    } else if (key == "max_len") {
      spec.max_len = to_int(key, value);
    } else if (key == "output_order") {
      if (value == "input") {
        spec.output_order = OutputOrder::Input;
      } else if (value == "similarity_ascending") {
        spec.output_order = OutputOrder::SimilarityAscending;
      } else {
        throw Error(ErrorCode::InvalidSpec, "unknown output_order " + std::string(value));
      }
    } else {
      throw Error(ErrorCode::InvalidSpec, "unknown filter key " + std::string(key));
    }
  }
  spec.validate();
  return spec;
}

FilterSpec load_spec(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_spec(buf.str());
}

}  // namespace dragoman
