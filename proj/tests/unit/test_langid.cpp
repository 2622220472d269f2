#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "dragoman/error.hpp"
#include "dragoman/langid.hpp"
#include "dragoman/utf8.hpp"
#include "synth.hpp"

using namespace dragoman;

namespace {

struct Profiles {
  std::vector<LangProfile> en_uk;
  std::vector<LangProfile> en_uk_ru;
};

const Profiles& profiles() {
  static const Profiles p = [] {
    Profiles out;
    const auto en = LangProfile::train(synth::english_corpus(100, 1), "en");
    const auto uk = LangProfile::train(synth::ukrainian_corpus(100, 2), "uk");
    const auto ru = LangProfile::train(synth::russian_corpus(100, 3), "ru");
    out.en_uk = {en, uk};
    out.en_uk_ru = {en, uk, ru};
    return out;
  }();
  return p;
}

}  // namespace

TEST(LangProfile, SingleSymbol) {
  const std::vector<std::string> texts{"aaaa"};
  const auto p = LangProfile::train(texts, "x", 1);
  const auto lf = p.log_freqs();
  ASSERT_EQ(lf.size(), 1u);
  EXPECT_EQ(lf.begin()->first, "a");
  EXPECT_EQ(lf.begin()->second, 0.0);
  EXPECT_EQ(p.alphabet_size(), 1u);
}

TEST(LangProfile, BigramCount) {
  const std::vector<std::string> texts{"ab"};
  const auto p = LangProfile::train(texts, "x", 2);
  EXPECT_EQ(p.count(U"ab"), 1u);
  EXPECT_EQ(p.distinct_ngrams(), 1u);
}

TEST(LangProfile, RelativeFrequenciesSumToOne) {
  for (int order : {1, 2, 3, 4}) {
    const auto p = LangProfile::train(synth::ukrainian_corpus(50, 9), "uk", order);
    double sum = 0.0;
    for (const auto& [_, lf] : p.log_freqs()) sum += std::exp(lf);
    EXPECT_NEAR(sum, 1.0, 1e-9) << order;
  }
}

TEST(LangProfile, SmoothedProbabilityIsAddOne) {
  const std::vector<std::string> texts{"abab"};
  const auto p = LangProfile::train(texts, "x", 2);
  // ab:2 ba:1, N=3, V=2
  EXPECT_DOUBLE_EQ(p.log_prob(U"ab"), std::log(3.0 / 6.0));
  EXPECT_DOUBLE_EQ(p.log_prob(U"zz"), std::log(1.0 / 6.0));
}

TEST(LangProfile, EmptyTrainingSet) {
  const std::vector<std::string> none;
  const std::vector<std::string> too_short{"ab", ""};
  for (const auto* t : {&none, &too_short}) {
    try {
      LangProfile::train(*t, "x", 3);
      FAIL();
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::EmptyTrainingSet);
    }
  }
}

TEST(LangProfile, SaveLoadRoundTrip) {
  const std::vector<std::string> texts{"tab\there", "new\nline", "back\\slash", "Кіт і пес"};
  const auto p = LangProfile::train(texts, "mix", 3);
  std::stringstream buf;
  p.save(buf);
  EXPECT_EQ(buf.str().rfind("LANGPROFILE v1 mix 3\n", 0), 0u);
  const auto q = LangProfile::load(buf);
  EXPECT_EQ(q.language(), "mix");
  EXPECT_EQ(q.ngram_order(), 3);
  EXPECT_EQ(q.total_count(), p.total_count());
  EXPECT_EQ(q.alphabet_size(), p.alphabet_size());
  EXPECT_EQ(q.log_freqs(), p.log_freqs());
  EXPECT_EQ(q.count(U"b\th"), 1u);
  EXPECT_EQ(q.count(U"w\nl"), 1u);
}

TEST(LangProfile, LoadRejectsGarbage) {
  std::istringstream in("NOT A PROFILE\n");
  try {
    LangProfile::load(in);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::BadModelFile);
  }
}

TEST(Classify, ScriptSeparationOnHeldOut) {
  const auto& ps = profiles().en_uk;
  for (const auto& s : synth::english_corpus(100, 101)) EXPECT_EQ(classify(s, ps).label, "en") << s;
  for (const auto& s : synth::ukrainian_corpus(100, 102)) EXPECT_EQ(classify(s, ps).label, "uk") << s;
}

TEST(Classify, FigureSentences) {
  const auto& ps = profiles().en_uk;
  const auto uk = classify("Вони планують провести вечірку", ps);
  EXPECT_EQ(uk.label, "uk");
  EXPECT_GE(uk.confidence, 0.5);
  const auto en = classify("They are planning to host a party next weekend.", ps);
  EXPECT_EQ(en.label, "en");
  EXPECT_GE(en.confidence, 0.5);
}

TEST(Classify, UnseenCharactersHaveNoConfidence) {
  const auto c = classify("漢字漢字漢字", profiles().en_uk);
  EXPECT_EQ(c.informative_ngrams, 0u);
  EXPECT_LT(c.confidence, 0.5);
  for (const auto& [_, s] : c.scores) EXPECT_TRUE(std::isfinite(s));
}

TEST(Classify, DeterministicAndTrailingWhitespaceInvariant) {
  const auto& ps = profiles().en_uk;
  const auto a = classify("Кава та хліб", ps);
  const auto b = classify("Кава та хліб  \t\n", ps);
  EXPECT_EQ(a.label, b.label);
  EXPECT_EQ(a.confidence, b.confidence);
  EXPECT_EQ(a.scores, b.scores);
  EXPECT_EQ(classify("Кава та хліб", ps).scores, a.scores);
}

TEST(Classify, ScoresFiniteAndConfidenceInRange) {
  synth::Rng rng(4);
  const std::u32string alphabet = U"abcxyzабвгґєїі !?.漢😀";
  for (int i = 0; i < 200; ++i) {
    const auto text = utf8::encode(synth::random_text(rng, alphabet, 1 + synth::uniform(rng, 0, 30)));
    if (utf8::is_blank(text)) continue;
    const auto c = classify(text, profiles().en_uk_ru);
    for (const auto& [_, s] : c.scores) EXPECT_TRUE(std::isfinite(s));
    EXPECT_GE(c.confidence, 0.0);
    EXPECT_LE(c.confidence, 1.0);
  }
}

TEST(Classify, Errors) {
  try {
    classify("   ", profiles().en_uk);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::EmptyText);
  }
  EXPECT_THROW(classify("text", std::span(profiles().en_uk).first(1)), Error);
}

TEST(Classify, LongTextUsesFirstThousandCharacters) {
  std::string text;
  while (utf8::length(text) < 1000) text += "вода і хліб ";
  text = utf8::encode(utf8::decode(text).substr(0, 1000));
  const auto base = classify(text, profiles().en_uk);
  const auto longer = classify(text + std::string(5000, 'q'), profiles().en_uk);
  EXPECT_EQ(base.scores, longer.scores);
}

TEST(LangFilter, KeepsConfidentPair) {
  auto c = Corpus::from_pairs({{0, "They are planning to host a party next weekend.",
                                "Вони планують провести вечірку наступного вікенду."}});
  const auto [kept, rep] = lang_filter(c, profiles().en_uk, {});
  EXPECT_EQ(kept.size(), 1u);
  EXPECT_GT(*kept.records[0].scores.get(keys::kLangSrcConf), 0.5);
  EXPECT_GT(*kept.records[0].scores.get(keys::kLangTgtConf), 0.5);
}

TEST(LangFilter, RussianLikeTargetRejected) {
  synth::Rng rng(77);
  std::vector<SentencePair> pairs;
  for (RecordId i = 0; i < 20; ++i) {
    pairs.push_back({i, synth::english_sentence(rng), synth::russian_sentence(rng)});
  }
  const auto [kept, rep] = lang_filter(Corpus::from_pairs(pairs), profiles().en_uk_ru, {});
  EXPECT_EQ(kept.size(), 0u);
  EXPECT_EQ(rep.rejected_by_cause.at("target_lang"), 20u);
}

TEST(LangFilter, EmptyTargetRejected) {
  Corpus c;
  c.records.push_back(Record{{0, "Hello there friend.", "  "}, {}, {}});
  const auto [kept, rep] = lang_filter(c, profiles().en_uk, {});
  EXPECT_TRUE(kept.empty());
  EXPECT_EQ(rep.rejected_by_cause.at("empty"), 1u);
}

TEST(LangFilter, Idempotent) {
  synth::Rng rng(8);
  std::vector<SentencePair> pairs;
  for (RecordId i = 0; i < 60; ++i) {
    const int kind = static_cast<int>(i % 3);
    pairs.push_back({i, kind == 1 ? synth::ukrainian_sentence(rng) : synth::english_sentence(rng),
                     kind == 2 ? synth::english_sentence(rng) : synth::ukrainian_sentence(rng)});
  }
  const auto [once, r1] = lang_filter(Corpus::from_pairs(pairs), profiles().en_uk, {});
  const auto [twice, r2] = lang_filter(once, profiles().en_uk, {});
  EXPECT_EQ(once.size(), 20u);
  ASSERT_EQ(twice.size(), once.size());
  for (std::size_t i = 0; i < once.size(); ++i) EXPECT_EQ(twice.records[i].id(), once.records[i].id());
}
