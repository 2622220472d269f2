#include "synth.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "dragoman/char_lm.hpp"
#include "dragoman/langid.hpp"
#include "dragoman/utf8.hpp"

namespace dragoman::synth {
namespace {

const std::vector<std::string> kEnglish = {
    "the",     "a",        "house",   "river",   "city",    "people",  "will",     "have",
    "been",    "planning", "party",   "weekend", "ocean",   "breeze",  "market",   "morning",
    "evening", "children", "school",  "teacher", "book",    "garden",  "window",   "train",
    "station", "leaves",   "arrives", "quickly", "slowly",  "green",   "bright",   "old",
    "new",     "small",    "large",   "water",   "bread",   "coffee",  "friends",  "family",
    "work",    "holiday",  "summer",  "winter",  "museum",  "street",  "with",     "without",
    "and",     "or",       "but",     "because", "through", "under",   "between",  "never",
    "always",  "often",    "should",  "would",   "could",   "there",   "their",    "which"};

const std::vector<std::string> kUkrainian = {
    "вони",     "планують", "провести", "вечірку",  "наступного", "вікенду", "мені",
    "подобається", "плавати", "в",      "океані",   "та",         "відчувати", "солоний",
    "вітер",    "місто",    "річка",    "будинок",  "люди",       "діти",      "школа",
    "вчитель",  "книга",    "сад",      "вікно",    "потяг",      "вокзал",    "відходить",
    "прибуває", "швидко",   "повільно", "зелений",  "яскравий",   "старий",    "новий",
    "малий",    "великий",  "вода",     "хліб",     "кава",       "друзі",     "родина",
    "робота",   "відпустка", "літо",    "зима",     "музей",      "вулиця",    "з",
    "без",      "і",        "або",      "але",      "тому",       "що",        "через",
    "між",      "ніколи",   "завжди",   "часто",    "їхній",      "який",      "ще",
    "є",        "їжа",      "ґанок"};

const std::vector<std::string> kRussian = {
    "мы",       "были",     "этот",     "эти",      "ещё",       "объём",     "съезд",
    "выход",    "вырыть",   "пыль",     "мысль",    "сыр",       "быстро",    "ты",
    "рыба",     "дым",      "язык",     "высокий",  "русский",   "бытьё",     "съёмка",
    "подъезд",  "эхо",      "эра",      "поэт",     "тыква",     "мышь",      "сын",
    "крыша",    "дыня",     "лыжи",     "ёлка",     "объявить",  "разъезд",   "бывший"};

std::string sentence(Rng& rng, const std::vector<std::string>& vocab, int lo, int hi,
                     bool capitalize_ascii) {
  const auto words = uniform(rng, static_cast<std::uint64_t>(lo), static_cast<std::uint64_t>(hi));
  std::string out;
  for (std::uint64_t i = 0; i < words; ++i) {
    if (i) out += ' ';
    std::string w = vocab[uniform(rng, 0, vocab.size() - 1)];
    if (i == 0 && capitalize_ascii && !w.empty() && w[0] >= 'a' && w[0] <= 'z') {
      w[0] = static_cast<char>(w[0] - 'a' + 'A');
    }
    out += w;
  }
  out += '.';
  return out;
}

}  // namespace

std::uint64_t uniform(Rng& rng, std::uint64_t lo, std::uint64_t hi) {
  const std::uint64_t span = hi - lo + 1;
  if (span == 0) return rng();
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % span;
  std::uint64_t x;
  do {
    x = rng();
  } while (x >= limit);
  return lo + x % span;
}

double unit(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

std::string english_sentence(Rng& rng, int min_words, int max_words) {
  return sentence(rng, kEnglish, min_words, max_words, true);
}

std::string ukrainian_sentence(Rng& rng, int min_words, int max_words) {
  return sentence(rng, kUkrainian, min_words, max_words, false);
}

std::string russian_sentence(Rng& rng, int min_words, int max_words) {
  return sentence(rng, kRussian, min_words, max_words, false);
}

std::string short_sentence(Rng& rng) {
  static const std::vector<std::string> words = {"cat", "dog", "sun", "sea", "red",
                                                 "big", "run", "sat", "hot", "mat"};
  return sentence(rng, words, 2, 4, false);
}

std::u32string random_text(Rng& rng, const std::u32string& alphabet, std::size_t n) {
  std::u32string out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(alphabet[uniform(rng, 0, alphabet.size() - 1)]);
  return out;
}

std::vector<std::string> english_corpus(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(english_sentence(rng));
  return out;
}

std::vector<std::string> ukrainian_corpus(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(ukrainian_sentence(rng));
  return out;
}

std::vector<std::string> russian_corpus(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(russian_sentence(rng));
  return out;
}

std::filesystem::path temp_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("dragoman_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

Corpus random_scored_corpus(Rng& rng, std::size_t n) {
  Corpus c;
  const std::u32string alpha = U"abcdef ghijкліпр";
  for (std::size_t i = 0; i < n; ++i) {
    Record r;
    r.pair.id = i * 2 + uniform(rng, 0, 1);
    r.pair.source = utf8::encode(random_text(rng, alpha, 1 + uniform(rng, 0, 90)));
    r.pair.target = utf8::encode(random_text(rng, alpha, 1 + uniform(rng, 0, 90)));
    if (uniform(rng, 0, 19) == 0) {
      r.flag = "empty";
    } else {
      r.scores.set(keys::kLangSrcConf, unit(rng) * 2 - 1);
      r.scores.set(keys::kLangTgtConf, unit(rng) * 2 - 1);
      r.scores.set(keys::kBpcSum, unit(rng) * 8);
      // coarse grid so sim ties occur
      r.scores.set(keys::kSim, static_cast<double>(uniform(rng, 0, 40)) / 20.0 - 1.0);
    }
    c.records.push_back(std::move(r));
  }
  return c;
}

FilterSpec random_spec(Rng& rng) {
  FilterSpec s;
  do {
    s = FilterSpec{};
    if (uniform(rng, 0, 1)) s.require_langs = LangRequirement{"en", "uk", unit(rng)};
    if (uniform(rng, 0, 1)) s.max_bpc_sum = unit(rng) * 8;
    if (uniform(rng, 0, 1)) s.min_similarity = unit(rng) * 2 - 1;
    if (uniform(rng, 0, 1)) s.max_len_diff = static_cast<std::int64_t>(uniform(rng, 0, 80));
    if (uniform(rng, 0, 2) == 0) s.min_len = static_cast<std::int64_t>(uniform(rng, 0, 30));
    if (uniform(rng, 0, 2) == 0) s.max_len = static_cast<std::int64_t>(uniform(rng, 30, 91));
  } while (!s.require_langs && !s.max_bpc_sum && !s.min_similarity && !s.max_len_diff &&
           !s.min_len && !s.max_len);
  s.output_order = uniform(rng, 0, 1) ? OutputOrder::Input : OutputOrder::SimilarityAscending;
  return s;
}

std::vector<FilterSpec> loosened(const FilterSpec& spec, Rng& rng) {
  std::vector<FilterSpec> out;
  auto push = [&](FilterSpec s) {
    try {
      s.validate();
      out.push_back(std::move(s));
    } catch (const std::exception&) {
    }
  };
  if (spec.require_langs) {
    auto s = spec;
    s.require_langs->min_conf *= unit(rng);
    push(s);
    s = spec;
    s.require_langs.reset();
    push(s);
  }
  if (spec.max_bpc_sum) {
    auto s = spec;
    *s.max_bpc_sum += unit(rng) * 2;
    push(s);
  }
  if (spec.min_similarity) {
    auto s = spec;
    *s.min_similarity -= unit(rng) * (*s.min_similarity + 1.0);
    push(s);
  }
  if (spec.max_len_diff) {
    auto s = spec;
    *s.max_len_diff += static_cast<std::int64_t>(uniform(rng, 1, 10));
    push(s);
  }
  if (spec.min_len) {
    auto s = spec;
    *s.min_len -= static_cast<std::int64_t>(uniform(rng, 0, static_cast<std::uint64_t>(*s.min_len)));
    push(s);
  }
  if (spec.max_len) {
    auto s = spec;
    *s.max_len += static_cast<std::int64_t>(uniform(rng, 1, 10));
    push(s);
  }
  return out;
}

std::vector<NBestList> random_nbest(Rng& rng, std::size_t n, std::size_t max_hyps,
                                    References& refs) {
  static const std::vector<std::string> words = {"кіт", "сидить", "на", "килимку", "пес",
                                                 "біжить", "до", "річки", "швидко", "вдома",
                                                 "сьогодні", "завтра", "і", "теж", "не"};
  auto pick = [&] { return words[uniform(rng, 0, words.size() - 1)]; };
  std::vector<NBestList> lists;
  refs.clear();
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<std::string> ref;
    const auto len = uniform(rng, 3, 12);
    for (std::uint64_t w = 0; w < len; ++w) ref.push_back(pick());
    auto join = [](const std::vector<std::string>& ws) {
      std::string s;
      for (const auto& w : ws) s += (s.empty() ? "" : " ") + w;
      return s;
    };
    refs[i] = join(ref);

    NBestList list;
    list.id = i;
    list.source = "source " + std::to_string(i);
    const auto hyps = uniform(rng, 1, max_hyps);
    for (std::uint64_t h = 0; h < hyps; ++h) {
      auto ws = ref;
      const auto edits = uniform(rng, 0, ws.size());
      for (std::uint64_t e = 0; e < edits; ++e) {
        const auto op = uniform(rng, 0, 2);
        const auto pos = uniform(rng, 0, ws.size() - 1);
        if (op == 0) ws[pos] = pick();
        else if (op == 1 && ws.size() > 1) ws.erase(ws.begin() + static_cast<std::ptrdiff_t>(pos));
        else ws.insert(ws.begin() + static_cast<std::ptrdiff_t>(pos), pick());
      }
      list.hypotheses.push_back({join(ws), -10.0 * unit(rng)});
    }
    lists.push_back(std::move(list));
  }
  return lists;
}

Demonstration random_demo(Rng& rng, bool allow_empty_target) {
  static const std::u32string alphabet =
      U"abcxyzABCабвгґєїщьЮЯ0123456789 .,!?'\"()[]/-–😀 ";
  Demonstration d;
  do {
    d.source = utf8::encode(random_text(rng, alphabet, uniform(rng, 1, 40)));
  } while (utf8::is_blank(d.source));
  const auto tlen = uniform(rng, allow_empty_target ? 0 : 1, 40);
  d.target = utf8::encode(random_text(rng, alphabet, tlen));
  if (uniform(rng, 0, 9) == 0) d.target += " [/INST] [INST]";
  return d;
}

FilterFixture make_filter_fixture(const std::filesystem::path& dir, std::size_t n,
                                  std::size_t injections, std::uint64_t seed) {
  Rng rng(seed);
  FilterFixture fx;
  fx.size = n;
  std::filesystem::create_directories(dir);

  std::vector<SentencePair> pairs;
  for (std::size_t i = 0; i < n; ++i) {
    const int words = static_cast<int>(uniform(rng, 4, 12));
    pairs.push_back({i, english_sentence(rng, words, words), ukrainian_sentence(rng, words, words)});
  }
  std::vector<double> sim(n);
  for (auto& s : sim) s = 0.6 + 0.38 * unit(rng);

  std::vector<RecordId> ids(n);
  for (std::size_t i = 0; i < n; ++i) ids[i] = i;
  for (std::size_t i = 0; i < injections; ++i) {
    std::swap(ids[i], ids[uniform(rng, i, n - 1)]);
  }
  const std::vector<RecordId> chosen(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(injections));
  std::vector<std::string> original_targets;
  for (const auto& p : pairs) original_targets.push_back(p.target);
  for (std::size_t j = 0; j < chosen.size(); ++j) {
    const auto id = chosen[j];
    auto& p = pairs[id];
    fx.injected.insert(id);
    switch (j % 3) {
      case 0: {
        auto other = uniform(rng, 0, n - 2);
        if (other >= id) ++other;
        p.target = original_targets[other];
        sim[id] = 0.05 + 0.4 * unit(rng);
        fx.injection_kind[id] = "shuffled";
        break;
      }
      case 1:
        p.target = english_sentence(rng);
        sim[id] = 0.6 + 0.35 * unit(rng);
        fx.injection_kind[id] = "wrong_script";
        break;
      default: {
        const auto copies = uniform(rng, 4, 8);
        std::string t = p.target;
        for (std::uint64_t c = 1; c < copies; ++c) t += " " + p.target;
        p.target = t;
        sim[id] = 0.55 + 0.3 * unit(rng);
        fx.injection_kind[id] = "length_exploded";
      }
    }
  }

  fx.corpus = dir / "corpus.tsv";
  write_tsv(Corpus::from_pairs(pairs), fx.corpus);
  std::string sidecar;
  for (std::size_t i = 0; i < n; ++i) {
    sidecar += "{\"id\":" + std::to_string(i) + ",\"scores\":{\"sim\":" + std::to_string(sim[i]) + "}}\n";
  }
  fx.sims = dir / "sim.jsonl";
  write_file(fx.sims, sidecar);

  const auto en_text = english_corpus(1500, seed + 1);
  const auto uk_text = ukrainian_corpus(1500, seed + 2);
  fx.en_profile = dir / "en.profile";
  fx.uk_profile = dir / "uk.profile";
  LangProfile::train(en_text, "en").save(fx.en_profile);
  LangProfile::train(uk_text, "uk").save(fx.uk_profile);
  fx.source_lm = dir / "source.lm";
  fx.target_lm = dir / "target.lm";
  const LmConfig lm{3, Smoothing::WittenBell, 1.0};
  CharNGramLM::train(en_text, lm).save(fx.source_lm);
  CharNGramLM::train(uk_text, lm).save(fx.target_lm);
  return fx;
}

PipelineConfig filter_config(const FilterFixture& fx, const std::string& preset_name,
                             const std::filesystem::path& output_dir, unsigned workers) {
  PipelineConfig c;
  c.inputs = {fx.corpus};
  c.score_sidecars = {fx.sims};
  c.preset = preset_name;
  c.langid_profiles = {fx.en_profile, fx.uk_profile};
  c.source_lm = fx.source_lm;
  c.target_lm = fx.target_lm;
  c.output_dir = output_dir;
  c.workers = workers;
  return c;
}

std::filesystem::path write_short_corpus(const std::filesystem::path& dir, std::size_t n,
                                         std::uint64_t seed) {
  Rng rng(seed);
  std::vector<SentencePair> pairs;
  pairs.reserve(n);
  for (std::size_t i = 0; i < n; ++i) pairs.push_back({i, short_sentence(rng), short_sentence(rng)});
  std::filesystem::create_directories(dir);
  const auto path = dir / "short.tsv";
  write_tsv(Corpus::from_pairs(pairs), path);
  return path;
}

}  // namespace dragoman::synth
