#include "dragoman/prompt.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "dragoman/error.hpp"
#include "dragoman/utf8.hpp"

namespace dragoman {

MaskedExample format_pair(std::string_view source, std::string_view target) {
  if (utf8::is_blank(source)) throw Error(ErrorCode::EmptySource, "source text is empty");
  MaskedExample ex;
  ex.text.reserve(source.size() + target.size() + kInstOpen.size() + kInstClose.size() + 3);
  ex.text.append(kInstOpen).append(" ").append(source).append(" ").append(kInstClose).append(" ");
  ex.mask_spans.push_back({0, utf8::length(ex.text)});
  ex.text.append(target);
  return ex;
}

std::string strip_masked(const MaskedExample& example) {
  const auto cps = utf8::decode(example.text);
  std::u32string kept;
  std::size_t pos = 0;
  for (const auto& span : example.mask_spans) {
    const auto start = std::min(span.start, cps.size());
    if (start > pos) kept.append(cps, pos, start - pos);
    pos = std::max(pos, std::min(span.end, cps.size()));
  }
  if (pos < cps.size()) kept.append(cps, pos, std::u32string::npos);
  return utf8::encode(kept);
}

std::string build_fewshot(std::span<const Demonstration> demos, std::string_view query) {
  if (utf8::is_blank(query)) throw Error(ErrorCode::EmptyQuery, "query source is empty");
  std::string out;
  for (const auto& d : demos) {
    if (d.target.empty()) {
      throw Error(ErrorCode::InvalidArgument, "demonstration has an empty target");
    }
    out += format_pair(d.source, d.target).text;
    out += '\n';
  }
  auto tail = format_pair(query, "").text;
  tail.pop_back();  // the completion point has no trailing space
  return out + tail;
}

std::string contextual_prompt(std::span<const Demonstration> history, std::size_t window,
                              std::string_view query) {
  const auto take = std::min(window, history.size());
  return build_fewshot(history.subspan(history.size() - take), query);
}

namespace {

std::map<std::u32string, double> gram_counts(std::string_view text, std::size_t n) {
  const auto cps = utf8::decode(text);
  std::map<std::u32string, double> counts;
  if (cps.empty()) return counts;
  if (cps.size() < n) {
    counts[cps] = 1.0;
    return counts;
  }
  for (std::size_t i = 0; i + n <= cps.size(); ++i) counts[cps.substr(i, n)] += 1.0;
  return counts;
}

double norm(const std::map<std::u32string, double>& v) {
  double s = 0.0;
  for (const auto& [_, c] : v) s += c * c;
  return std::sqrt(s);
}

}  // namespace

double char_ngram_cosine(std::string_view a, std::string_view b, std::size_t n) {
  if (n == 0) throw Error(ErrorCode::InvalidArgument, "n-gram order must be positive");
  const auto va = gram_counts(a, n);
  const auto vb = gram_counts(b, n);
  if (va.empty() || vb.empty()) return 0.0;
  double dot = 0.0;
  for (const auto& [g, c] : va) {
    const auto it = vb.find(g);
    if (it != vb.end()) dot += c * it->second;
  }
  return dot / (norm(va) * norm(vb));
}

std::vector<Demonstration> select_demos(std::span<const Demonstration> pool,
                                        std::string_view query, std::size_t n,
                                        const Similarity& similarity) {
  if (pool.size() < n) {
    throw Error(ErrorCode::PoolTooSmall, "pool has " + std::to_string(pool.size()) +
                                             " demonstrations, " + std::to_string(n) +
                                             " requested");
  }
  std::vector<double> sims(pool.size());
  for (std::size_t i = 0; i < pool.size(); ++i) {
    sims[i] = similarity ? similarity(pool[i].source, query)
                         : char_ngram_cosine(pool[i].source, query);
  }
  std::vector<std::size_t> order(pool.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return sims[a] > sims[b]; });
  std::vector<Demonstration> out;
  out.reserve(n);
  for (std::size_t k = n; k-- > 0;) out.push_back(pool[order[k]]);
  return out;
}

}  // namespace dragoman
