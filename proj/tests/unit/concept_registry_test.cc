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

#include "rocoforge/concept_registry.h"

#include <gtest/gtest.h>

#include <map>
#include <string>

#include "rocoforge/errors.h"
#include "support/fixtures.h"

namespace rocoforge {
namespace {

class ShippedRegistry : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    registry_ = new ConceptRegistry(
        ConceptRegistry::Load(fixtures::SourceDataDir() / "concept_groups.tsv"));
    synonyms_ = new SynonymSet(SynonymSet::Load(fixtures::SourceDataDir() / "synonyms.tsv"));
  }
  static void TearDownTestSuite() {
    delete registry_;
    delete synonyms_;
  }
  static ConceptRegistry* registry_;
  static SynonymSet* synonyms_;
};

ConceptRegistry* ShippedRegistry::registry_ = nullptr;
SynonymSet* ShippedRegistry::synonyms_ = nullptr;

TEST_F(ShippedRegistry, MaterialContainsPaperExamples) {
  const ConceptGroup* material = registry_->group("material");
  ASSERT_NE(material, nullptr);
  for (const char* w : {"metal", "plastic", "wooden"}) {
    EXPECT_NE(std::find(material->lemmas.begin(), material->lemmas.end(), w),
              material->lemmas.end())
        << w;
  }
}

TEST_F(ShippedRegistry, AddedGroupSizes) {
  const std::map<std::string, std::size_t> want = {
      {"material", 32}, {"color", 28}, {"direction", 50}, {"vehicle_part", 12},
      {"shape", 15},    {"event", 11}, {"number", 14}};
  for (const auto& [id, n] : want) {
    const ConceptGroup* g = registry_->group(id);
    ASSERT_NE(g, nullptr) << id;
    EXPECT_EQ(g->lemmas.size(), n) << id;
  }
}

TEST_F(ShippedRegistry, GroupOfExamples) {
  EXPECT_EQ(registry_->GroupOf("wooden"), "material");
  EXPECT_EQ(registry_->GroupOf("white"), "color");
  EXPECT_EQ(registry_->GroupOf("zzzz"), std::nullopt);
}

TEST_F(ShippedRegistry, PluralFallsBackToSingular) {
  EXPECT_EQ(registry_->GroupOf("umbrellas"), registry_->GroupOf("umbrella"));
}

TEST_F(ShippedRegistry, EveryLemmaMapsToItsGroup) {
  std::size_t total = 0;
  for (const auto& g : registry_->groups()) {
    for (const auto& lemma : g.lemmas) {
      EXPECT_EQ(registry_->GroupOf(lemma), g.group_id) << lemma;
      ++total;
    }
  }
  EXPECT_EQ(total, registry_->lemma_count());
}

TEST_F(ShippedRegistry, SameConceptExcludesSource) {
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    Rng rng(seed);
    const std::string t = registry_->SampleSameConcept("white", rng, *synonyms_);
    EXPECT_NE(t, "white");
    EXPECT_EQ(registry_->GroupOf(t), "color");
  }
}

TEST_F(ShippedRegistry, SameConceptNeverSynonym) {
  ASSERT_TRUE(synonyms_->AreSynonyms("umbrella", "parasol"));
  ASSERT_EQ(registry_->GroupOf("parasol"), registry_->GroupOf("umbrella"));
  Rng rng(3);
  for (int i = 0; i < 5000; ++i) {
    const std::string t = registry_->SampleSameConcept("umbrella", rng, *synonyms_);
    ASSERT_NE(t, "parasol");
    ASSERT_NE(t, "umbrella");
  }
}

TEST_F(ShippedRegistry, DiffConceptNeverSourceGroup) {
  const auto own = registry_->GroupOf("umbrella");
  Rng rng(4);
  std::size_t food_or_animal = 0;
  for (int i = 0; i < 10000; ++i) {
    const std::string t = registry_->SampleDiffConcept("umbrella", rng, *synonyms_);
    const auto g = registry_->GroupOf(t);
    ASSERT_TRUE(g.has_value()) << t;
    ASSERT_NE(g, own) << t;
    if (g == "food" || g == "animal") ++food_or_animal;
  }
  EXPECT_GT(food_or_animal, 0u);
}

TEST(ConceptRegistry, UniformWithinSmallGroup) {
  const ConceptRegistry r = ConceptRegistry::Parse(
      "shape\tsquare\nshape\tcircle\nshape\ttriangle\nshape\toval\nshape\tstar\n",
      {.strict = false});
  Rng rng(99);
  std::map<std::string, int> counts;
  const int draws = 10000;
  for (int i = 0; i < draws; ++i) ++counts[r.SampleSameConcept("star", rng, SynonymSet())];
  ASSERT_EQ(counts.size(), 4u);
  for (const auto& [w, c] : counts) EXPECT_NEAR(c, draws / 4.0, draws / 4.0 * 0.05) << w;
}

TEST(ConceptRegistry, LenientSingleGroup) {
  const ConceptRegistry r = ConceptRegistry::Parse("color\tblack\n", {.strict = false});
  EXPECT_EQ(r.groups().size(), 1u);
  EXPECT_EQ(r.GroupOf("black"), "color");
}

TEST(ConceptRegistry, StrictRequiresAddedGroups) {
  EXPECT_THROW(ConceptRegistry::Parse("color\tblack\n", {.strict = true}), RegistryError);
}

TEST(ConceptRegistry, DuplicateLemmaFirstGroupWins) {
  const ConceptRegistry r = ConceptRegistry::Parse("a\tx\nb\tx\nb\ty\n", {.strict = false});
  EXPECT_EQ(r.GroupOf("x"), "a");
  EXPECT_EQ(r.lemma_count(), 2u);
}

TEST(ConceptRegistry, SamplingErrors) {
  const ConceptRegistry r = ConceptRegistry::Parse("solo\tonly\n", {.strict = false});
  Rng rng(1);
  EXPECT_THROW(r.SampleSameConcept("zzzz", rng, SynonymSet()), UnmappedWord);
  EXPECT_THROW(r.SampleSameConcept("only", rng, SynonymSet()), NoCandidate);
  EXPECT_THROW(r.SampleDiffConcept("only", rng, SynonymSet()), NoCandidate);
}

TEST(SynonymSet, Symmetric) {
  const SynonymSet s = SynonymSet::Parse("umbrella\tparasol\n# note\nsofa\tcouch\n");
  EXPECT_TRUE(s.AreSynonyms("parasol", "umbrella"));
  EXPECT_TRUE(s.AreSynonyms("couch", "sofa"));
  EXPECT_FALSE(s.AreSynonyms("couch", "umbrella"));
  EXPECT_EQ(s.size(), 2u);
}

TEST(IsExcludedTarget, SameWordPluralAndSynonym) {
  const SynonymSet s = SynonymSet::Parse("umbrella\tparasol\n");
  EXPECT_TRUE(IsExcludedTarget("umbrella", "umbrella", s));
  EXPECT_TRUE(IsExcludedTarget("umbrellas", "umbrella", s));
  EXPECT_TRUE(IsExcludedTarget("umbrella", "parasol", s));
  EXPECT_TRUE(IsExcludedTarget("umbrellas", "parasol", s));
  EXPECT_FALSE(IsExcludedTarget("umbrella", "gun", s));
}

}  // namespace
}  // namespace rocoforge
