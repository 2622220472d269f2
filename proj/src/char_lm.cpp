#include "dragoman/char_lm.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <set>

#include "dragoman/error.hpp"
#include "dragoman/parallel.hpp"
#include "dragoman/utf8.hpp"

namespace dragoman {
namespace {

constexpr std::uint16_t kBoundaryId = 0;
constexpr std::uint16_t kUnknownId = 1;
constexpr char kMagic[4] = {'C', 'L', 'M', '1'};
constexpr std::uint32_t kFormatVersion = 1;
constexpr std::size_t kMaxAlphabet = std::numeric_limits<std::uint16_t>::max() - 2;

template <typename T>
void put(std::ostream& out, T value) {
  static_assert(std::is_integral_v<T> || std::is_floating_point_v<T>);
  unsigned char buf[sizeof(T)];
  std::memcpy(buf, &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(buf, buf + sizeof(T));
  out.write(reinterpret_cast<const char*>(buf), sizeof(T));
}

template <typename T>
T get(std::istream& in) {
  unsigned char buf[sizeof(T)];
  if (!in.read(reinterpret_cast<char*>(buf), sizeof(T))) {
    throw Error(ErrorCode::BadModelFile, "truncated language model file");
  }
  if constexpr (std::endian::native == std::endian::big) std::reverse(buf, buf + sizeof(T));
  T value;
  std::memcpy(&value, buf, sizeof(T));
  return value;
}

void validate(const LmConfig& config) {
  if (config.order < 1) throw Error(ErrorCode::InvalidArgument, "LM order must be >= 1");
  if (config.smoothing == Smoothing::AddK && !(config.k > 0.0 && std::isfinite(config.k))) {
    throw Error(ErrorCode::InvalidArgument, "add-k smoothing needs a positive finite k");
  }
}

}  // namespace

CharNGramLM CharNGramLM::train(std::span<const std::string> texts, const LmConfig& config) {
  validate(config);
  std::vector<std::u32string> decoded;
  decoded.reserve(texts.size());
  std::set<char32_t> alphabet;
  for (const auto& t : texts) {
    auto d = utf8::decode(t);
    if (d.empty()) continue;
    alphabet.insert(d.begin(), d.end());
    decoded.push_back(std::move(d));
  }
  if (decoded.empty()) throw Error(ErrorCode::EmptyTrainingSet, "no non-empty training text");
  if (alphabet.size() > kMaxAlphabet) {
    throw Error(ErrorCode::InvalidArgument, "alphabet exceeds 65533 symbols");
  }

  CharNGramLM lm;
  lm.config_ = config;
  lm.alphabet_.assign(alphabet.begin(), alphabet.end());
  for (std::size_t i = 0; i < lm.alphabet_.size(); ++i) {
    lm.ids_.emplace(lm.alphabet_[i], static_cast<std::uint16_t>(i + 2));
  }
  const auto order = static_cast<std::size_t>(config.order);
  lm.ngrams_.resize(order);

  Key seq;
  for (const auto& text : decoded) {
    seq.assign(order - 1, kBoundaryId);
    for (char32_t c : text) seq.push_back(lm.ids_.at(c));
    for (std::size_t i = order - 1; i < seq.size(); ++i) {
      for (std::size_t m = 1; m <= order; ++m) {
        ++lm.ngrams_[m - 1][seq.substr(i + 1 - m, m)];
      }
    }
  }
  lm.rebuild_contexts();
  return lm;
}

void CharNGramLM::rebuild_contexts() {
  contexts_.assign(ngrams_.size(), {});
  for (std::size_t m = 1; m <= ngrams_.size(); ++m) {
    for (const auto& [gram, c] : ngrams_[m - 1]) {
      auto& stats = contexts_[m - 1][gram.substr(0, m - 1)];
      stats.total += c;
      stats.types += 1;
    }
  }
}

std::vector<char32_t> CharNGramLM::prediction_vocab() const {
  auto v = alphabet_;
  v.push_back(utf8::kUnknown);
  return v;
}

std::uint16_t CharNGramLM::symbol_id(char32_t cp) const {
  if (cp == utf8::kBoundary) return kBoundaryId;
  const auto it = ids_.find(cp);
  return it == ids_.end() ? kUnknownId : it->second;
}

double CharNGramLM::witten_bell(const Key& history, std::size_t len, std::uint16_t next) const {
  // `len` trailing symbols of `history` form the context of an (len+1)-gram.
  if (len + 1 > ngrams_.size()) len = ngrams_.size() - 1;
  const double lower = len == 0 ? 1.0 / static_cast<double>(vocab_size())
                                : witten_bell(history, len - 1, next);
  const Key ctx = history.substr(history.size() - len);
  const auto& table = contexts_[len];
  const auto it = table.find(ctx);
  if (len == 0) {
    // Unigram level: the empty context always exists after training.
    const auto& stats = it->second;
    Key gram(1, next);
    const auto g = ngrams_[0].find(gram);
    const double c = g == ngrams_[0].end() ? 0.0 : static_cast<double>(g->second);
    return (c + stats.types * lower) / (static_cast<double>(stats.total) + stats.types);
  }
  if (it == table.end()) return lower;
  Key gram = ctx;
  gram.push_back(next);
  const auto g = ngrams_[len].find(gram);
  const double c = g == ngrams_[len].end() ? 0.0 : static_cast<double>(g->second);
  const auto& stats = it->second;
  return (c + stats.types * lower) / (static_cast<double>(stats.total) + stats.types);
}

double CharNGramLM::prob_ids(const Key& history, std::uint16_t next) const {
  const std::size_t ctx_len = ngrams_.size() - 1;
  if (config_.smoothing == Smoothing::WittenBell) return witten_bell(history, ctx_len, next);

  const Key ctx = history.substr(history.size() - ctx_len);
  const double v = static_cast<double>(vocab_size());
  const auto& table = contexts_[ctx_len];
  const auto it = table.find(ctx);
  const double total = it == table.end() ? 0.0 : static_cast<double>(it->second.total);
  double c = 0.0;
  if (it != table.end()) {
    Key gram = ctx;
    gram.push_back(next);
    const auto g = ngrams_[ctx_len].find(gram);
    if (g != ngrams_[ctx_len].end()) c = static_cast<double>(g->second);
  }
  return (c + config_.k) / (total + config_.k * v);
}

double CharNGramLM::prob(std::u32string_view context, char32_t next) const {
  const std::size_t ctx_len = ngrams_.size() - 1;
  Key history(ctx_len, kBoundaryId);
  const std::size_t take = std::min(ctx_len, context.size());
  for (std::size_t i = 0; i < take; ++i) {
    history[ctx_len - take + i] = symbol_id(context[context.size() - take + i]);
  }
  return prob_ids(history, symbol_id(next));
}

double CharNGramLM::log_prob(std::string_view text) const {
  const auto decoded = utf8::decode(text);
  if (decoded.empty()) throw Error(ErrorCode::EmptyText, "cannot score empty text");
  const std::size_t ctx_len = ngrams_.size() - 1;
  Key seq(ctx_len, kBoundaryId);
  for (char32_t c : decoded) seq.push_back(symbol_id(c));
  double total = 0.0;
  Key history;
  for (std::size_t i = ctx_len; i < seq.size(); ++i) {
    history.assign(seq, i - ctx_len, ctx_len);
    total += std::log2(prob_ids(history, seq[i]));
  }
  return total;
}

double CharNGramLM::bits_per_char(std::string_view text) const {
  const double lp = log_prob(text);
  return -lp / static_cast<double>(utf8::length(text));
}

void CharNGramLM::save(std::ostream& out) const {
  out.write(kMagic, sizeof kMagic);
  put<std::uint32_t>(out, kFormatVersion);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(config_.order));
  put<std::uint8_t>(out, static_cast<std::uint8_t>(config_.smoothing));
  put<double>(out, config_.k);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(alphabet_.size()));
  for (char32_t c : alphabet_) put<std::uint32_t>(out, static_cast<std::uint32_t>(c));
  for (std::size_t m = 1; m <= ngrams_.size(); ++m) {
    std::vector<std::pair<Key, std::uint64_t>> rows(ngrams_[m - 1].begin(), ngrams_[m - 1].end());
    std::sort(rows.begin(), rows.end());
    put<std::uint64_t>(out, rows.size());
    for (const auto& [gram, c] : rows) {
      for (char16_t s : gram) put<std::uint16_t>(out, static_cast<std::uint16_t>(s));
      put<std::uint64_t>(out, c);
    }
  }
}

void CharNGramLM::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  save(out);
}

CharNGramLM CharNGramLM::load(std::istream& in) {
  char magic[4];
  if (!in.read(magic, sizeof magic) || std::memcmp(magic, kMagic, sizeof magic) != 0) {
    throw Error(ErrorCode::BadModelFile, "not a character LM file (bad magic)");
  }
  if (const auto v = get<std::uint32_t>(in); v != kFormatVersion) {
    throw Error(ErrorCode::BadModelFile, "unsupported LM format version " + std::to_string(v));
  }
  CharNGramLM lm;
  lm.config_.order = static_cast<int>(get<std::uint32_t>(in));
  const auto tag = get<std::uint8_t>(in);
  if (tag > 1) throw Error(ErrorCode::BadModelFile, "unknown smoothing tag");
  lm.config_.smoothing = static_cast<Smoothing>(tag);
  lm.config_.k = get<double>(in);
  if (lm.config_.order < 1 || lm.config_.order > 64) {
    throw Error(ErrorCode::BadModelFile, "bad LM order");
  }
  const auto n = get<std::uint32_t>(in);
  if (n > kMaxAlphabet) throw Error(ErrorCode::BadModelFile, "bad alphabet size");
  for (std::uint32_t i = 0; i < n; ++i) {
    const auto c = static_cast<char32_t>(get<std::uint32_t>(in));
    lm.alphabet_.push_back(c);
    lm.ids_.emplace(c, static_cast<std::uint16_t>(i + 2));
  }
  lm.ngrams_.resize(static_cast<std::size_t>(lm.config_.order));
  for (std::size_t m = 1; m <= lm.ngrams_.size(); ++m) {
    const auto rows = get<std::uint64_t>(in);
    for (std::uint64_t r = 0; r < rows; ++r) {
      Key gram(m, 0);
      for (auto& s : gram) {
        s = static_cast<char16_t>(get<std::uint16_t>(in));
        if (s >= n + 2) throw Error(ErrorCode::BadModelFile, "symbol id out of range");
      }
      const auto c = get<std::uint64_t>(in);
      if (c == 0) throw Error(ErrorCode::BadModelFile, "zero count in LM file");
      lm.ngrams_[m - 1].emplace(std::move(gram), c);
    }
  }
  if (lm.ngrams_[0].empty()) throw Error(ErrorCode::BadModelFile, "LM has no unigrams");
  lm.rebuild_contexts();
  return lm;
}

CharNGramLM CharNGramLM::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  return load(in);
}

StreamingScorer::StreamingScorer(const CharNGramLM& model)
    : model_(&model), history_(static_cast<std::size_t>(model.order() - 1), kBoundaryId) {}

double StreamingScorer::feed(char32_t cp) {
  const auto id = model_->symbol_id(cp);
  const double lp = std::log2(model_->prob_ids(history_, id));
  total_ += lp;
  ++count_;
  if (!history_.empty()) {
    history_.erase(history_.begin());
    history_.push_back(id);
  }
  return lp;
}

Corpus bpc_sum_annotate(Corpus corpus, const CharNGramLM& source_model,
                        const CharNGramLM& target_model, unsigned workers) {
  parallel_for(corpus.size(), workers, [&](std::size_t i) {
    auto& r = corpus.records[i];
    if (utf8::is_blank(r.pair.source) || utf8::is_blank(r.pair.target)) {
      if (r.flag.empty()) r.flag = "empty";
      return;
    }
    const double src = source_model.bits_per_char(r.pair.source);
    const double tgt = target_model.bits_per_char(r.pair.target);
    r.scores.set(keys::kBpcSrc, src);
    r.scores.set(keys::kBpcTgt, tgt);
    r.scores.set(keys::kBpcSum, src + tgt);
  });
  return corpus;
}

}  // namespace dragoman
