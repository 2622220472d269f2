#include "dragoman/langid.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>
#include <unordered_set>

#include "dragoman/error.hpp"
#include "dragoman/parallel.hpp"
#include "dragoman/utf8.hpp"

namespace dragoman {
namespace {

constexpr std::string_view kMagic = "LANGPROFILE";
constexpr std::string_view kVersion = "v1";
// Metadata rows start with "\#", which the n-gram escaping never produces.
constexpr std::string_view kTotalKey = "\\#total";
constexpr std::string_view kAlphabetKey = "\\#alphabet";

std::string escape(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '\\': out += "\\\\"; break;
      case '\t': out += "\\t"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

std::string unescape(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] != '\\') {
      out.push_back(s[i]);
      continue;
    }
    if (++i == s.size()) throw Error(ErrorCode::BadModelFile, "dangling escape in profile");
    switch (s[i]) {
      case '\\': out.push_back('\\'); break;
      case 't': out.push_back('\t'); break;
      case 'n': out.push_back('\n'); break;
      case 'r': out.push_back('\r'); break;
      default: throw Error(ErrorCode::BadModelFile, "bad escape in profile");
    }
  }
  return out;
}

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

double parse_double(std::string_view s) {
  double v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw Error(ErrorCode::BadModelFile, "bad number in profile: " + std::string(s));
  }
  return v;
}

}  // namespace

std::vector<std::u32string> classifier_ngrams(std::string_view text, int order) {
  const auto decoded = utf8::decode(text);
  auto view = utf8::trim(std::u32string_view(decoded));
  view = view.substr(0, std::min(view.size(), LangProfile::kMaxChars));
  std::vector<std::u32string> grams;
  if (view.empty()) return grams;
  const auto n = static_cast<std::size_t>(order);
  if (view.size() < n) {
    grams.emplace_back(view);
    return grams;
  }
  grams.reserve(view.size() - n + 1);
  for (std::size_t i = 0; i + n <= view.size(); ++i) grams.emplace_back(view.substr(i, n));
  return grams;
}

LangProfile LangProfile::train(std::span<const std::string> texts, std::string language,
                               int order) {
  if (order < 1) throw Error(ErrorCode::InvalidArgument, "profile order must be >= 1");
  if (language.empty() || language.find_first_of(" \t\n") != std::string::npos) {
    throw Error(ErrorCode::InvalidArgument, "language label must be a non-empty word");
  }
  LangProfile p;
  p.language_ = std::move(language);
  p.order_ = order;
  std::unordered_set<char32_t> alphabet;
  for (const auto& text : texts) {
    const auto decoded = utf8::decode(text);
    if (decoded.size() < static_cast<std::size_t>(order)) continue;
    for (char32_t c : decoded) alphabet.insert(c);
    for (std::size_t i = 0; i + order <= decoded.size(); ++i) {
      ++p.counts_[decoded.substr(i, order)];
      ++p.total_;
    }
  }
  if (p.total_ == 0) {
    throw Error(ErrorCode::EmptyTrainingSet,
                "no text of at least " + std::to_string(order) + " characters");
  }
  p.alphabet_size_ = alphabet.size();
  return p;
}

std::map<std::string, double> LangProfile::log_freqs() const {
  std::map<std::string, double> out;
  const double total = static_cast<double>(total_);
  for (const auto& [gram, c] : counts_) {
    out.emplace(utf8::encode(gram), std::log(static_cast<double>(c) / total));
  }
  return out;
}

std::uint64_t LangProfile::count(const std::u32string& gram) const {
  const auto it = counts_.find(gram);
  return it == counts_.end() ? 0 : it->second;
}

double LangProfile::log_prob(const std::u32string& gram) const {
  const double denom = static_cast<double>(total_ + counts_.size() + 1);
  return std::log(static_cast<double>(count(gram) + 1) / denom);
}

void LangProfile::save(std::ostream& out) const {
  out << kMagic << ' ' << kVersion << ' ' << language_ << ' ' << order_ << '\n';
  out << kTotalKey << '\t' << total_ << '\n';
  out << kAlphabetKey << '\t' << alphabet_size_ << '\n';
  for (const auto& [gram, lf] : log_freqs()) {
    out << escape(gram) << '\t' << format_double(lf) << '\n';
  }
}

void LangProfile::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  save(out);
}

LangProfile LangProfile::load(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::BadModelFile, "empty profile file");
  std::istringstream header(line);
  std::string magic, version;
  LangProfile p;
  header >> magic >> version >> p.language_ >> p.order_;
  if (!header || magic != kMagic) throw Error(ErrorCode::BadModelFile, "not a language profile");
  if (version != kVersion) {
    throw Error(ErrorCode::BadModelFile, "unsupported profile version " + version);
  }
  if (p.order_ < 1) throw Error(ErrorCode::BadModelFile, "bad profile order");

  std::vector<std::pair<std::u32string, double>> freqs;
  bool have_total = false;
  while (std::getline(in, line)) {
    const auto tab = line.rfind('\t');
    if (tab == std::string::npos) throw Error(ErrorCode::BadModelFile, "bad profile row");
    const std::string_view key(line.data(), tab);
    const std::string_view value(line.data() + tab + 1, line.size() - tab - 1);
    if (key == kTotalKey) {
      p.total_ = static_cast<std::uint64_t>(parse_double(value));
      have_total = true;
    } else if (key == kAlphabetKey) {
      p.alphabet_size_ = static_cast<std::size_t>(parse_double(value));
    } else {
      freqs.emplace_back(utf8::decode(unescape(key)), parse_double(value));
    }
  }
  if (!have_total || p.total_ == 0) throw Error(ErrorCode::BadModelFile, "profile lacks total");
  const double total = static_cast<double>(p.total_);
  for (auto& [gram, lf] : freqs) {
    p.counts_.emplace(std::move(gram), static_cast<std::uint64_t>(std::llround(std::exp(lf) * total)));
  }
  return p;
}

LangProfile LangProfile::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  return load(in);
}

Classification classify(std::string_view text, std::span<const LangProfile> profiles) {
  if (profiles.size() < 2) {
    throw Error(ErrorCode::InvalidArgument, "classification needs at least two profiles");
  }
  const int order = profiles.front().ngram_order();
  for (const auto& p : profiles) {
    if (p.ngram_order() != order) {
      throw Error(ErrorCode::InvalidArgument, "profiles must share one n-gram order");
    }
  }
  const auto grams = classifier_ngrams(text, order);
  if (grams.empty()) throw Error(ErrorCode::EmptyText, "cannot classify blank text");

  Classification out;
  std::vector<double> sums(profiles.size(), 0.0);
  for (const auto& g : grams) {
    const bool informative =
        std::any_of(profiles.begin(), profiles.end(), [&](const auto& p) { return p.seen(g); });
    if (!informative) continue;
    ++out.informative_ngrams;
    for (std::size_t i = 0; i < profiles.size(); ++i) sums[i] += profiles[i].log_prob(g);
  }
  static const std::u32string kUnseen;
  for (std::size_t i = 0; i < profiles.size(); ++i) {
    const double score = out.informative_ngrams == 0
                             ? profiles[i].log_prob(kUnseen)
                             : sums[i] / static_cast<double>(out.informative_ngrams);
    out.scores.emplace_back(profiles[i].language(), score);
  }

  std::size_t best = 0;
  for (std::size_t i = 1; i < out.scores.size(); ++i) {
    if (out.scores[i].second > out.scores[best].second) best = i;
  }
  out.label = out.scores[best].first;

  const double top = out.scores[best].second;
  double z = 0.0;
  for (const auto& [_, s] : out.scores) z += std::exp(s - top);
  for (const auto& [_, s] : out.scores) out.probabilities.push_back(std::exp(s - top) / z);

  if (out.informative_ngrams == 0) {
    out.confidence = 0.0;
  } else {
    double second = 0.0;
    for (std::size_t i = 0; i < out.probabilities.size(); ++i) {
      if (i != best) second = std::max(second, out.probabilities[i]);
    }
    out.confidence = std::clamp(out.probabilities[best] - second, 0.0, 1.0);
  }
  return out;
}

double label_margin(const Classification& c, std::string_view label) {
  if (c.informative_ngrams == 0) return 0.0;
  double own = -1.0;
  double other = 0.0;
  for (std::size_t i = 0; i < c.scores.size(); ++i) {
    if (c.scores[i].first == label) {
      own = std::max(own, c.probabilities[i]);
    } else {
      other = std::max(other, c.probabilities[i]);
    }
  }
  if (own < 0.0) return -1.0;  // label has no profile
  return own - other;
}

Corpus annotate_lang(Corpus corpus, std::span<const LangProfile> profiles,
                     const LangRequirement& req, unsigned workers) {
  parallel_for(corpus.size(), workers, [&](std::size_t i) {
    auto& r = corpus.records[i];
    if (utf8::is_blank(r.pair.source) || utf8::is_blank(r.pair.target)) {
      if (r.flag.empty()) r.flag = "empty";
      return;
    }
    const auto src = classify(r.pair.source, profiles);
    const auto tgt = classify(r.pair.target, profiles);
    r.scores.set(keys::kLangSrcConf, label_margin(src, req.source_label));
    r.scores.set(keys::kLangTgtConf, label_margin(tgt, req.target_label));
  });
  return corpus;
}

namespace {

// Matches the language criterion used by the filter pipeline.
bool passes(double margin, double min_conf) { return margin > 0.0 && margin >= min_conf; }

}  // namespace

std::pair<Corpus, LangFilterReport> lang_filter(Corpus corpus,
                                                std::span<const LangProfile> profiles,
                                                const LangRequirement& req, unsigned workers) {
  if (!(req.min_conf >= 0.0 && req.min_conf <= 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "min_conf must lie in [0, 1]");
  }
  corpus = annotate_lang(std::move(corpus), profiles, req, workers);
  LangFilterReport report;
  report.input_count = corpus.size();
  Corpus kept;
  for (auto& r : corpus.records) {
    std::string cause;
    if (!r.flag.empty()) {
      cause = r.flag;
    } else if (!passes(*r.scores.get(keys::kLangSrcConf), req.min_conf)) {
      cause = "source_lang";
    } else if (!passes(*r.scores.get(keys::kLangTgtConf), req.min_conf)) {
      cause = "target_lang";
    }
    if (cause.empty()) {
      kept.records.push_back(std::move(r));
    } else {
      ++report.rejected_by_cause[cause];
    }
  }
  report.kept_count = kept.size();
  return {std::move(kept), std::move(report)};
}

}  // namespace dragoman
