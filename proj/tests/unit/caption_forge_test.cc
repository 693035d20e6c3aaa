// Copyright 2026 The Rocoforge Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "rocoforge/caption_forge.h"

#include <gtest/gtest.h>

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "rocoforge/concept_registry.h"
#include "rocoforge/corpus.h"
#include "rocoforge/errors.h"
#include "rocoforge/io.h"
#include "support/fixtures.h"

namespace rocoforge {
namespace {

// Builds a corpus whose captions are `texts`, five per image.
Corpus CorpusFromTexts(const std::vector<std::string>& texts, const NounLexicon& lexicon) {
  std::vector<ImageRecord> images;
  std::vector<CaptionRecord> captions;
  for (std::size_t i = 0; i < texts.size(); ++i) {
    const std::string image_id = "img" + std::to_string(i / 5);
    if (i % 5 == 0) images.push_back({image_id, image_id + ".png", {}});
    CaptionRecord c;
    c.caption_id = "cap" + std::to_string(i);
    c.image_id = image_id;
    c.text = texts[i];
    c.tokens = Tokenize(texts[i]);
    c.noun_indices = TagNouns(c.tokens, lexicon);
    images.back().caption_ids.push_back(c.caption_id);
    captions.push_back(std::move(c));
  }
  return Corpus("test", std::move(images), std::move(captions));
}

std::size_t TokenDiff(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  if (a.size() != b.size()) return SIZE_MAX;
  std::size_t d = 0;
  for (std::size_t i = 0; i < a.size(); ++i) d += a[i] != b[i] ? 1 : 0;
  return d;
}

class ForgeTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    const auto dir = fixtures::SourceDataDir();
    registry_ = new ConceptRegistry(ConceptRegistry::Load(dir / "concept_groups.tsv"));
    synonyms_ = new SynonymSet(SynonymSet::Load(dir / "synonyms.tsv"));
    vocab_ = new Vocabulary(Vocabulary::Load(dir / "vocab.txt"));
    danger_ = new std::vector<std::string>(ReadDataLines(dir / "danger.txt"));
  }
  static void TearDownTestSuite() {
    delete registry_;
    delete synonyms_;
    delete vocab_;
    delete danger_;
  }

  ForgeResources res() const { return {registry_, synonyms_, vocab_, danger_}; }

  // Umbrella captions with the consensus source word on "umbrella".
  void UmbrellaSetup(std::size_t n) {
    std::vector<std::string> texts;
    for (std::size_t i = 0; i < n; ++i) {
      texts.push_back(i % 2 ? "a man holding an umbrella" : "a woman with a red umbrella");
    }
    corpus_ = CorpusFromTexts(texts, lexicon_);
    consensus_.clear();
    for (const auto& c : corpus_.captions()) {
      const auto it = std::find(c.tokens.begin(), c.tokens.end(), "umbrella");
      const auto idx = static_cast<std::size_t>(it - c.tokens.begin());
      consensus_.push_back(ConsensusSourceWord(
          c.caption_id, {{"m1", idx}, {"m2", idx}, {"m3", idx}, {"m4", idx}}, 0));
    }
  }

  static ConceptRegistry* registry_;
  static SynonymSet* synonyms_;
  static Vocabulary* vocab_;
  static std::vector<std::string>* danger_;
  NounLexicon lexicon_ = fixtures::SourceLexicon();
  Corpus corpus_;
  std::vector<ConsensusRecord> consensus_;
};

ConceptRegistry* ForgeTest::registry_ = nullptr;
SynonymSet* ForgeTest::synonyms_ = nullptr;
Vocabulary* ForgeTest::vocab_ = nullptr;
std::vector<std::string>* ForgeTest::danger_ = nullptr;

TEST(PolicyNames, RoundTrip) {
  for (const char* name : {"rand_voca", "same_concept", "diff_concept", "danger", "delete_random",
                           "delete_high_ei", "delete_low_ei", "multiword_2", "multiword_5"}) {
    const auto [p, k] = ParsePolicy(name);
    EXPECT_EQ(PolicyName(p, k), name);
  }
  EXPECT_THROW(ParsePolicy("multiword_6"), ValidationError);
  EXPECT_THROW(ParsePolicy("bogus"), ValidationError);
}

TEST(Substitute, ReplacesOneToken) {
  CaptionRecord c;
  c.tokens = Tokenize("a man holding an umbrella");
  EXPECT_EQ(Substitute(c, 4, "gun"), "a man holding an gun");
  const auto swapped = SubstituteTokens(c.tokens, 4, "gun");
  EXPECT_EQ(TokenDiff(swapped, c.tokens), 1u);
  EXPECT_EQ(SubstituteTokens(swapped, 4, "umbrella"), c.tokens);
  EXPECT_THROW(Substitute(c, 5, "gun"), IndexError);
  EXPECT_THROW(Substitute(c, 4, "Umbrella"), NoOpSubstitution);
  EXPECT_THROW(Substitute(c, 4, ""), ValidationError);
}

TEST(Vocabulary, KeepsLetterWordsOnly) {
  const Vocabulary v({"dog", "Cat", "t-shirt", "", "x2", "zebra"});
  EXPECT_EQ(v.words(), (std::vector<std::string>{"dog", "zebra"}));
}

TEST_F(ForgeTest, DangerTargetsFromList) {
  UmbrellaSetup(40);
  const ForgeResult r = GenSingleWordSet(corpus_, consensus_, CaptionPolicy::kDanger, res(), 3);
  ASSERT_EQ(r.entries.size(), 40u);
  std::set<std::string> targets;
  for (const auto& e : r.entries) {
    ASSERT_EQ(e.target_words.size(), 1u);
    EXPECT_NE(std::find(danger_->begin(), danger_->end(), e.target_words[0]), danger_->end());
    EXPECT_EQ(e.source_words, (std::vector<std::string>{"umbrella"}));
    EXPECT_EQ(CheckEntry(e, corpus_, registry_), "");
    targets.insert(e.target_words[0]);
  }
  EXPECT_GT(targets.size(), 3u);
}

TEST_F(ForgeTest, SameConceptNeverParasol) {
  UmbrellaSetup(200);
  const ForgeResult r =
      GenSingleWordSet(corpus_, consensus_, CaptionPolicy::kSameConcept, res(), 5);
  ASSERT_EQ(r.entries.size(), 200u);
  for (const auto& e : r.entries) {
    EXPECT_NE(e.target_words[0], "parasol");
    EXPECT_NE(e.target_words[0], "umbrella");
    EXPECT_EQ(registry_->GroupOf(e.target_words[0]), registry_->GroupOf("umbrella"));
    EXPECT_FALSE(e.fallback);
  }
}

TEST_F(ForgeTest, DiffConceptLeavesGroup) {
  UmbrellaSetup(100);
  const ForgeResult r =
      GenSingleWordSet(corpus_, consensus_, CaptionPolicy::kDiffConcept, res(), 5);
  for (const auto& e : r.entries) {
    const auto g = registry_->GroupOf(e.target_words[0]);
    ASSERT_TRUE(g.has_value());
    EXPECT_NE(g, registry_->GroupOf("umbrella"));
    EXPECT_EQ(CheckEntry(e, corpus_, registry_), "");
  }
}

TEST_F(ForgeTest, RandVocaDrawsFromVocabulary) {
  UmbrellaSetup(100);
  const ForgeResult r = GenSingleWordSet(corpus_, consensus_, CaptionPolicy::kRandVoca, res(), 9);
  std::set<std::string> vocab(vocab_->words().begin(), vocab_->words().end());
  for (const auto& e : r.entries) {
    const std::string& t = e.target_words[0];
    EXPECT_TRUE(vocab.count(t)) << t;
    EXPECT_FALSE(IsExcludedTarget("umbrella", t, *synonyms_)) << t;
    EXPECT_NE(registry_->GroupOf(t), registry_->GroupOf("umbrella")) << t;
    EXPECT_EQ(TokenDiff(Tokenize(e.text), corpus_.caption(e.orig_caption_id).tokens), 1u);
  }
}

TEST_F(ForgeTest, SameSeedSameBytesAcrossJobs) {
  const auto dir = fixtures::MakeTempDir("forge");
  const Corpus corpus = fixtures::MakeFixtureCorpus(dir, {.images = 20});
  std::vector<ConsensusRecord> consensus;
  for (const auto& c : corpus.captions()) {
    if (c.noun_indices.empty()) continue;
    const std::size_t idx = c.noun_indices.front();
    consensus.push_back(ConsensusSourceWord(c.caption_id, {{"m", idx}}, 0));
  }
  ForgeOptions serial, parallel;
  parallel.jobs = 4;
  for (auto policy : {CaptionPolicy::kRandVoca, CaptionPolicy::kSameConcept,
                      CaptionPolicy::kDiffConcept, CaptionPolicy::kDanger}) {
    const auto a = GenSingleWordSet(corpus, consensus, policy, res(), 42, serial);
    const auto b = GenSingleWordSet(corpus, consensus, policy, res(), 42, parallel);
    const auto c = GenSingleWordSet(corpus, consensus, policy, res(), 43, serial);
    EXPECT_EQ(SerializeCaptionManifest(a.entries), SerializeCaptionManifest(b.entries));
    EXPECT_NE(SerializeCaptionManifest(a.entries), SerializeCaptionManifest(c.entries));
    for (const auto& e : a.entries) EXPECT_EQ(CheckEntry(e, corpus, registry_), "") << e.text;
  }
  std::filesystem::remove_all(dir);
}

TEST_F(ForgeTest, StrictSkipsWhenPoolExhausted) {
  // A one-lemma group has no same-concept candidate.
  const ConceptRegistry tiny = ConceptRegistry::Parse("solo\tumbrella\n", {.strict = false});
  UmbrellaSetup(5);
  ForgeResources r = res();
  r.registry = &tiny;
  ForgeOptions strict;
  strict.strict = true;
  const auto skipped =
      GenSingleWordSet(corpus_, consensus_, CaptionPolicy::kSameConcept, r, 1, strict);
  EXPECT_EQ(skipped.entries.size(), 0u);
  EXPECT_EQ(skipped.skipped, 5u);
  const auto fallback = GenSingleWordSet(corpus_, consensus_, CaptionPolicy::kSameConcept, r, 1);
  EXPECT_EQ(fallback.entries.size(), 5u);
  EXPECT_EQ(fallback.fallbacks, 5u);
  for (const auto& e : fallback.entries) EXPECT_TRUE(e.fallback);
}

TEST_F(ForgeTest, DeletionRemovesOneToken) {
  const Corpus corpus =
      CorpusFromTexts({"a dog on a bench", "a cat on a couch near a window", "a bus on the street",
                       "a pizza on a table", "a man with a kite"},
                      lexicon_);
  const ForgeResult r = GenDeletionSet(corpus, CaptionPolicy::kDeleteRandom, {}, 7);
  ASSERT_EQ(r.entries.size(), 5u);
  for (const auto& e : r.entries) {
    const auto& orig = corpus.caption(e.orig_caption_id);
    EXPECT_EQ(Tokenize(e.text).size() + 1, orig.tokens.size());
    EXPECT_TRUE(e.target_words.empty());
    EXPECT_EQ(CheckEntry(e, corpus, nullptr), "");
  }
}

TEST_F(ForgeTest, RandomDeletionCoversAllNouns) {
  const Corpus corpus =
      CorpusFromTexts({"a cat on a couch near a window", "a cat on a couch near a window",
                       "a cat on a couch near a window", "a cat on a couch near a window",
                       "a cat on a couch near a window"},
                      lexicon_);
  const auto& nouns = corpus.captions()[0].noun_indices;
  std::set<std::size_t> deleted;
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    for (const auto& e : GenDeletionSet(corpus, CaptionPolicy::kDeleteRandom, {}, seed).entries) {
      deleted.insert(e.source_indices.at(0));
    }
  }
  EXPECT_EQ(deleted, std::set<std::size_t>(nouns.begin(), nouns.end()));
}

TEST_F(ForgeTest, LowEiDeletesChosenNoun) {
  const Corpus corpus =
      CorpusFromTexts({"a man holding an umbrella on the street", "a dog on a bench",
                       "a bus on the street", "a pizza on a table", "a man with a kite"},
                      lexicon_);
  std::map<std::string, std::size_t> chosen;
  for (const auto& c : corpus.captions()) chosen[c.caption_id] = c.noun_indices.back();
  const ForgeResult r = GenDeletionSet(corpus, CaptionPolicy::kDeleteLowEi, chosen, 1);
  ASSERT_EQ(r.entries.size(), 5u);
  for (const auto& e : r.entries) {
    EXPECT_EQ(e.source_indices.at(0), chosen.at(e.orig_caption_id));
  }
  EXPECT_EQ(r.entries[0].text, "a man holding an umbrella on the");
}

TEST_F(ForgeTest, MultiwordDiffAndSkip) {
  const Corpus corpus =
      CorpusFromTexts({"a man in a suit holding an umbrella on a street", "a dog on grass",
                       "a cat sleeping on a soft red couch", "two horses grazing in a green field",
                       "a kitchen with a stove and a sink"},
                      lexicon_);
  const ForgeResult two = GenMultiwordSet(corpus, 2, res(), 1);
  EXPECT_EQ(two.entries.size(), 5u);
  for (const auto& e : two.entries) {
    EXPECT_EQ(TokenDiff(Tokenize(e.text), corpus.caption(e.orig_caption_id).tokens), 2u);
    EXPECT_EQ(CheckEntry(e, corpus, registry_), "");
  }
  const ForgeResult five = GenMultiwordSet(corpus, 5, res(), 1);
  EXPECT_EQ(five.skipped, 1u);  // "a dog on grass" has only 4 tokens
  for (const auto& e : five.entries) EXPECT_NE(e.orig_caption_id, "cap1");

  std::set<std::string> manifests;
  for (std::uint64_t seed : {1, 2, 3}) {
    const auto a = SerializeCaptionManifest(GenMultiwordSet(corpus, 3, res(), seed).entries);
    EXPECT_EQ(a, SerializeCaptionManifest(GenMultiwordSet(corpus, 3, res(), seed).entries));
    manifests.insert(a);
  }
  EXPECT_EQ(manifests.size(), 3u);
}

TEST_F(ForgeTest, ManifestJsonRoundTrip) {
  UmbrellaSetup(10);
  const ForgeResult r = GenSingleWordSet(corpus_, consensus_, CaptionPolicy::kDanger, res(), 3);
  const std::string text = SerializeCaptionManifest(r.entries);
  EXPECT_EQ(ParseCaptionManifest(text), r.entries);
  EXPECT_THROW(ParseCaptionManifest("{\"new_caption_id\": 1}\n"), Error);
}

TEST_F(ForgeTest, CheckEntryCatchesTampering) {
  UmbrellaSetup(5);
  ForgeResult r = GenSingleWordSet(corpus_, consensus_, CaptionPolicy::kDanger, res(), 3);
  auto e = r.entries.front();
  e.text = corpus_.caption(e.orig_caption_id).text;
  EXPECT_NE(CheckEntry(e, corpus_, registry_), "");
}

}  // namespace
}  // namespace rocoforge
