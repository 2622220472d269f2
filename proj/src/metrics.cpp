#include "dragoman/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <unordered_map>

#include "dragoman/error.hpp"
#include "dragoman/utf8.hpp"

namespace dragoman {
namespace {

void replace_all(std::u32string& s, std::u32string_view from, std::u32string_view to) {
  std::u32string out;
  out.reserve(s.size());
  std::size_t pos = 0;
  while (true) {
    const auto hit = s.find(from, pos);
    if (hit == std::u32string::npos) break;
    out.append(s, pos, hit - pos);
    out.append(to);
    pos = hit + from.size();
  }
  out.append(s, pos, std::u32string::npos);
  s = std::move(out);
}

bool is_digit(char32_t c) { return c >= U'0' && c <= U'9'; }

bool is_padded_punct(char32_t c) {
  return (c >= 0x7B && c <= 0x7E) || (c >= 0x5B && c <= 0x60) || (c >= 0x20 && c <= 0x26) ||
         (c >= 0x28 && c <= 0x2B) || (c >= 0x3A && c <= 0x40) || c == U'/';
}

bool is_period_comma(char32_t c) { return c == U'.' || c == U','; }

// Single left-to-right pass of a two-character rule, matching re.sub's
// non-overlapping scan.
template <typename Match, typename Emit>
std::u32string pair_pass(const std::u32string& s, Match match, Emit emit) {
  std::u32string out;
  out.reserve(s.size() + s.size() / 2);
  std::size_t i = 0;
  while (i < s.size()) {
    if (i + 1 < s.size() && match(s[i], s[i + 1])) {
      emit(out, s[i], s[i + 1]);
      i += 2;
    } else {
      out.push_back(s[i]);
      ++i;
    }
  }
  return out;
}

std::vector<std::u32string> split_ws(std::u32string_view s) {
  std::vector<std::u32string> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && utf8::is_space(s[i])) ++i;
    const std::size_t b = i;
    while (i < s.size() && !utf8::is_space(s[i])) ++i;
    if (i > b) out.emplace_back(s.substr(b, i - b));
  }
  return out;
}

}  // namespace

std::vector<std::string> tokenize_13a(std::string_view text) {
  auto decoded = utf8::decode(text);
  std::u32string line(utf8::rtrim(std::u32string_view(decoded)));
  replace_all(line, U"<skipped>", U"");
  replace_all(line, U"-\n", U"");
  replace_all(line, U"\n", U" ");
  if (line.find(U'&') != std::u32string::npos) {
    replace_all(line, U"&quot;", U"\"");
    replace_all(line, U"&amp;", U"&");
    replace_all(line, U"&lt;", U"<");
    replace_all(line, U"&gt;", U">");
  }

  std::u32string padded;
  padded.reserve(line.size() * 2 + 2);
  padded.push_back(U' ');
  for (char32_t c : line) {
    if (is_padded_punct(c)) {
      padded.push_back(U' ');
      padded.push_back(c);
      padded.push_back(U' ');
    } else {
      padded.push_back(c);
    }
  }
  padded.push_back(U' ');

  // period/comma unless preceded by a digit
  padded = pair_pass(
      padded, [](char32_t a, char32_t b) { return !is_digit(a) && is_period_comma(b); },
      [](std::u32string& o, char32_t a, char32_t b) {
        o.push_back(a);
        o.push_back(U' ');
        o.push_back(b);
        o.push_back(U' ');
      });
  // period/comma unless followed by a digit
  padded = pair_pass(
      padded, [](char32_t a, char32_t b) { return is_period_comma(a) && !is_digit(b); },
      [](std::u32string& o, char32_t a, char32_t b) {
        o.push_back(U' ');
        o.push_back(a);
        o.push_back(U' ');
        o.push_back(b);
      });
  // dash after a digit
  padded = pair_pass(
      padded, [](char32_t a, char32_t b) { return is_digit(a) && b == U'-'; },
      [](std::u32string& o, char32_t a, char32_t b) {
        o.push_back(a);
        o.push_back(U' ');
        o.push_back(b);
        o.push_back(U' ');
      });

  std::vector<std::string> tokens;
  for (const auto& t : split_ws(padded)) tokens.push_back(utf8::encode(t));
  return tokens;
}

BleuStats& BleuStats::operator+=(const BleuStats& other) {
  hyp_len += other.hyp_len;
  ref_len += other.ref_len;
  for (int n = 0; n < kBleuOrder; ++n) {
    correct[n] += other.correct[n];
    total[n] += other.total[n];
  }
  return *this;
}

namespace {

using NgramCounts = std::unordered_map<std::string, std::uint64_t>;

// All n-grams of orders 1..4, keyed by order-prefixed joined tokens.
NgramCounts word_ngrams(const std::vector<std::string>& tokens) {
  NgramCounts counts;
  for (int n = 1; n <= kBleuOrder; ++n) {
    for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
      std::string key(1, static_cast<char>('0' + n));
      for (int j = 0; j < n; ++j) {
        key.push_back(' ');
        key += tokens[i + j];
      }
      ++counts[key];
    }
  }
  return counts;
}

}  // namespace

BleuStats bleu_stats(const EvalPair& pair) {
  if (pair.references.empty()) {
    throw Error(ErrorCode::InvalidArgument, "evaluation pair has no reference");
  }
  const auto hyp = tokenize_13a(pair.hypothesis);
  NgramCounts max_ref;
  std::vector<std::uint64_t> ref_lens;
  for (const auto& ref : pair.references) {
    const auto tokens = tokenize_13a(ref);
    ref_lens.push_back(tokens.size());
    for (const auto& [gram, c] : word_ngrams(tokens)) {
      auto& slot = max_ref[gram];
      slot = std::max(slot, c);
    }
  }

  BleuStats s;
  s.hyp_len = hyp.size();
  std::uint64_t closest_diff = 0;
  bool first = true;
  for (auto len : ref_lens) {
    const auto diff = len > s.hyp_len ? len - s.hyp_len : s.hyp_len - len;
    if (first || diff < closest_diff || (diff == closest_diff && len < s.ref_len)) {
      closest_diff = diff;
      s.ref_len = len;
      first = false;
    }
  }
  for (const auto& [gram, c] : word_ngrams(hyp)) {
    const int n = gram[0] - '0';
    s.total[n - 1] += c;
    const auto it = max_ref.find(gram);
    if (it != max_ref.end()) s.correct[n - 1] += std::min(c, it->second);
  }
  return s;
}

BleuScore bleu_from_stats(const BleuStats& stats, BleuSmoothing smoothing,
                          bool effective_order) {
  BleuScore out;
  out.hyp_len = stats.hyp_len;
  out.ref_len = stats.ref_len;
  out.correct = stats.correct;
  out.total = stats.total;
  out.brevity_penalty = 1.0;
  if (stats.hyp_len < stats.ref_len) {
    out.brevity_penalty =
        stats.hyp_len > 0
            ? std::exp(1.0 - static_cast<double>(stats.ref_len) / static_cast<double>(stats.hyp_len))
            : 0.0;
  }
  if (std::all_of(stats.correct.begin(), stats.correct.end(), [](auto c) { return c == 0; })) {
    return out;
  }

  // Precisions in percent, as the reference scorer computes them.
  std::array<double, kBleuOrder> pct{};
  double smooth = 1.0;
  int eff_order = kBleuOrder;
  for (int n = 1; n <= kBleuOrder; ++n) {
    const auto total = stats.total[n - 1];
    if (total == 0) break;
    if (effective_order) eff_order = n;
    const auto correct = stats.correct[n - 1];
    if (correct == 0) {
      if (smoothing == BleuSmoothing::Exp) {
        smooth *= 2.0;
        pct[n - 1] = 100.0 / (smooth * static_cast<double>(total));
      }
    } else {
      pct[n - 1] = 100.0 * static_cast<double>(correct) / static_cast<double>(total);
    }
  }
  for (int n = 0; n < kBleuOrder; ++n) out.precisions[n] = pct[n] / 100.0;

  double log_sum = 0.0;
  for (int n = 0; n < eff_order; ++n) {
    if (pct[n] <= 0.0) return out;  // zero precision annihilates the geometric mean
    log_sum += std::log(pct[n]);
  }
  out.score = out.brevity_penalty * std::exp(log_sum / eff_order);
  return out;
}

BleuScore corpus_bleu(std::span<const EvalPair> pairs, BleuSmoothing smoothing) {
  if (pairs.empty()) throw Error(ErrorCode::EmptyCorpus, "corpus BLEU of an empty corpus");
  BleuStats total;
  for (const auto& p : pairs) total += bleu_stats(p);
  return bleu_from_stats(total, smoothing, false);
}

BleuScore sentence_bleu_score(const EvalPair& pair, BleuSmoothing smoothing) {
  return bleu_from_stats(bleu_stats(pair), smoothing, true);
}

double sentence_bleu(const EvalPair& pair, BleuSmoothing smoothing) {
  return sentence_bleu_score(pair, smoothing).score;
}

ChrfStats& ChrfStats::operator+=(const ChrfStats& other) {
  if (orders.empty()) orders.resize(other.orders.size());
  if (orders.size() != other.orders.size()) {
    throw Error(ErrorCode::InvalidArgument, "chrF statistics of different orders");
  }
  for (std::size_t i = 0; i < orders.size(); ++i) {
    for (int j = 0; j < 3; ++j) orders[i][j] += other.orders[i][j];
  }
  return *this;
}

namespace {

using Counter = std::map<std::u32string, std::uint64_t>;

bool is_ascii_punct(char32_t c) {
  return (c >= 0x21 && c <= 0x2F) || (c >= 0x3A && c <= 0x40) || (c >= 0x5B && c <= 0x60) ||
         (c >= 0x7B && c <= 0x7E);
}

std::vector<Counter> char_and_word_ngrams(std::string_view text, const ChrfConfig& config) {
  const auto decoded = utf8::decode(text);
  const auto words = split_ws(decoded);
  std::u32string joined;
  for (const auto& w : words) joined += w;

  std::vector<Counter> out;
  for (int n = 1; n <= config.char_order; ++n) {
    Counter c;
    for (std::size_t i = 0; i + n <= joined.size(); ++i) ++c[joined.substr(i, n)];
    out.push_back(std::move(c));
  }
  if (config.word_order > 0) {
    // Split one leading or trailing ASCII punctuation mark off each word.
    std::vector<std::u32string> tokens;
    for (const auto& w : words) {
      if (w.size() == 1) {
        tokens.push_back(w);
      } else if (is_ascii_punct(w.back())) {
        tokens.push_back(w.substr(0, w.size() - 1));
        tokens.push_back(w.substr(w.size() - 1));
      } else if (is_ascii_punct(w.front())) {
        tokens.push_back(w.substr(0, 1));
        tokens.push_back(w.substr(1));
      } else {
        tokens.push_back(w);
      }
    }
    for (int n = 1; n <= config.word_order; ++n) {
      Counter c;
      for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
        std::u32string key = tokens[i];
        for (int j = 1; j < n; ++j) {
          key.push_back(U' ');
          key += tokens[i + j];
        }
        ++c[key];
      }
      out.push_back(std::move(c));
    }
  }
  return out;
}

ChrfStats match_stats(const std::vector<Counter>& hyp, const std::vector<Counter>& ref) {
  ChrfStats s;
  s.orders.resize(hyp.size());
  for (std::size_t i = 0; i < hyp.size(); ++i) {
    std::uint64_t hyp_count = 0;
    std::uint64_t match = 0;
    for (const auto& [gram, c] : hyp[i]) {
      hyp_count += c;
      const auto it = ref[i].find(gram);
      if (it != ref[i].end()) match += std::min(c, it->second);
    }
    std::uint64_t ref_count = 0;
    for (const auto& [_, c] : ref[i]) ref_count += c;
    s.orders[i] = {ref[i].empty() ? 0 : hyp_count, ref_count, match};
  }
  return s;
}

}  // namespace

double chrf_from_stats(const ChrfStats& stats, const ChrfConfig& config) {
  const double factor = config.beta * config.beta;
  double avg_prec = 0.0;
  double avg_rec = 0.0;
  int effective = 0;
  for (const auto& [n_hyp, n_ref, n_match] : stats.orders) {
    if (n_hyp > 0 && n_ref > 0) {
      avg_prec += static_cast<double>(n_match) / static_cast<double>(n_hyp);
      avg_rec += static_cast<double>(n_match) / static_cast<double>(n_ref);
      ++effective;
    }
  }
  if (effective == 0) return 0.0;
  avg_prec /= effective;
  avg_rec /= effective;
  if (avg_prec + avg_rec == 0.0) return 0.0;
  return 100.0 * (1.0 + factor) * avg_prec * avg_rec / (factor * avg_prec + avg_rec);
}

ChrfStats chrf_stats(const EvalPair& pair, const ChrfConfig& config) {
  if (pair.references.empty()) {
    throw Error(ErrorCode::InvalidArgument, "evaluation pair has no reference");
  }
  const auto hyp = char_and_word_ngrams(pair.hypothesis, config);
  ChrfStats best;
  double best_f = -1.0;
  for (const auto& ref : pair.references) {
    auto s = match_stats(hyp, char_and_word_ngrams(ref, config));
    const double f = chrf_from_stats(s, config);
    if (f > best_f) {
      best_f = f;
      best = std::move(s);
    }
  }
  return best;
}

double chrf(std::span<const EvalPair> pairs, const ChrfConfig& config) {
  if (pairs.empty()) throw Error(ErrorCode::EmptyCorpus, "chrF of an empty corpus");
  ChrfStats total;
  for (const auto& p : pairs) total += chrf_stats(p, config);
  return chrf_from_stats(total, config);
}

double sentence_chrf(const EvalPair& pair, const ChrfConfig& config) {
  return chrf_from_stats(chrf_stats(pair, config), config);
}

std::vector<EvalPair> make_eval_pairs(std::span<const std::string> hypotheses,
                                      std::span<const std::vector<std::string>> reference_streams) {
  if (reference_streams.empty()) {
    throw Error(ErrorCode::InvalidArgument, "at least one reference stream is required");
  }
  for (const auto& refs : reference_streams) {
    if (refs.size() != hypotheses.size()) {
      throw Error(ErrorCode::LineCountMismatch,
                  "hypotheses have " + std::to_string(hypotheses.size()) +
                      " lines, references have " + std::to_string(refs.size()));
    }
  }
  std::vector<EvalPair> pairs(hypotheses.size());
  for (std::size_t i = 0; i < hypotheses.size(); ++i) {
    pairs[i].hypothesis = hypotheses[i];
    for (const auto& refs : reference_streams) pairs[i].references.push_back(refs[i]);
  }
  return pairs;
}

}  // namespace dragoman
