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

#ifndef ROCOFORGE_CONCEPT_REGISTRY_H_
#define ROCOFORGE_CONCEPT_REGISTRY_H_

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "rocoforge/random.h"

namespace rocoforge {

struct ConceptGroup {
  std::string group_id;
  std::vector<std::string> lemmas;  // file order, unique
};

// Symmetric word-pair relation for meaning-preserving substitutions
// ("umbrella" <-> "parasol"). File format: word<TAB>word, '#' comments.
class SynonymSet {
 public:
  SynonymSet() = default;
  static SynonymSet Load(const std::filesystem::path& path);
  static SynonymSet Parse(std::string_view text);

  void Add(std::string_view a, std::string_view b);
  bool AreSynonyms(std::string_view a, std::string_view b) const;
  std::size_t size() const { return pairs_; }

 private:
  std::unordered_map<std::string, std::unordered_set<std::string>> links_;
  std::size_t pairs_ = 0;
};

// Minimum lemma counts of the added concept groups.
struct RequiredGroup {
  std::string_view group_id;
  std::size_t min_lemmas;
};
inline constexpr RequiredGroup kAddedGroups[] = {
    {"material", 32}, {"color", 28}, {"direction", 50}, {"vehicle_part", 12},
    {"shape", 15},    {"event", 11}, {"number", 14},
};

struct RegistryOptions {
  // Strict loading requires every kAddedGroups entry at its minimum count.
  bool strict = true;
};

class ConceptRegistry {
 public:
  ConceptRegistry() = default;

  // TSV: group_id<TAB>lemma per line, '#' comments. A lemma listed under two
  // groups stays with the first one (warning logged).
  static ConceptRegistry Load(const std::filesystem::path& path,
                              const RegistryOptions& options = {});
  static ConceptRegistry Parse(std::string_view text, const RegistryOptions& options = {});

  // Group of a lowercased word. Falls back to a singular form for simple
  // English plurals ("motorcycles" -> "motorcycle") when the word itself is
  // not a lemma.
  std::optional<std::string> GroupOf(std::string_view word) const;

  const ConceptGroup* group(std::string_view group_id) const;
  const std::vector<ConceptGroup>& groups() const { return groups_; }
  std::size_t lemma_count() const { return lemma_index_.size(); }

  // Uniform over the source's group minus the source and its synonyms.
  // Throws UnmappedWord / NoCandidate.
  std::string SampleSameConcept(std::string_view source, Rng& rng,
                                const SynonymSet& synonyms) const;

  // Uniform over every lemma outside the source's group, minus synonyms.
  std::string SampleDiffConcept(std::string_view source, Rng& rng,
                                const SynonymSet& synonyms) const;

 private:
  std::optional<std::size_t> GroupIndexOf(std::string_view word) const;

  std::vector<ConceptGroup> groups_;
  std::unordered_map<std::string, std::size_t> group_by_id_;
  std::unordered_map<std::string, std::size_t> lemma_index_;
  // All lemmas in (group order, file order); used for diff-concept draws.
  std::vector<std::pair<std::string, std::size_t>> all_lemmas_;
};

// True when `target` would not change the meaning of `source`: same word,
// a singular form of it, or a listed synonym of either.
bool IsExcludedTarget(std::string_view source, std::string_view target, const SynonymSet& synonyms);

// Candidate singular forms tried by GroupOf, most specific first.
std::vector<std::string> SingularCandidates(std::string_view word);

}  // namespace rocoforge

#endif  // ROCOFORGE_CONCEPT_REGISTRY_H_
