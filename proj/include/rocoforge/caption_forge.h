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

#ifndef ROCOFORGE_CAPTION_FORGE_H_
#define ROCOFORGE_CAPTION_FORGE_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "rocoforge/concept_registry.h"
#include "rocoforge/corpus.h"
#include "rocoforge/ei_scorer.h"
#include "rocoforge/random.h"

namespace rocoforge {

enum class CaptionPolicy {
  kRandVoca,
  kSameConcept,
  kDiffConcept,
  kDanger,
  kDeleteRandom,
  kDeleteHighEi,
  kDeleteLowEi,
  kMultiword,
};

inline constexpr int kMinMultiword = 2;
inline constexpr int kMaxMultiword = 5;

// Wire names: rand_voca, same_concept, diff_concept, danger, delete_random,
// delete_high_ei, delete_low_ei, multiword_<k>.
std::string PolicyName(CaptionPolicy policy, int k = 0);
std::pair<CaptionPolicy, int> ParsePolicy(std::string_view name);
bool IsDeletion(CaptionPolicy policy);

struct CaptionManifestEntry {
  std::string new_caption_id;
  std::string orig_caption_id;
  std::string image_id;
  CaptionPolicy policy = CaptionPolicy::kRandVoca;
  int k = 0;  // multiword only
  std::vector<std::size_t> source_indices;
  std::vector<std::string> source_words;
  std::vector<std::string> target_words;  // empty for deletions
  std::string text;
  std::uint64_t seed = 0;
  bool fallback = false;  // target drawn by rand_voca instead of `policy`

  bool operator==(const CaptionManifestEntry&) const = default;
};

// Lowercase words of English letters only; other lines are dropped on load.
class Vocabulary {
 public:
  Vocabulary() = default;
  explicit Vocabulary(std::vector<std::string> words);
  static Vocabulary Load(const std::filesystem::path& path);

  const std::vector<std::string>& words() const { return words_; }
  std::size_t size() const { return words_.size(); }

 private:
  std::vector<std::string> words_;
};

bool IsLetterWord(std::string_view word);

// Replaces token `idx`; the result is the single-space join of the tokens.
// Throws IndexError, NoOpSubstitution (same word, case-insensitive), and
// ValidationError for an empty target.
std::string Substitute(const CaptionRecord& caption, std::size_t idx, std::string_view target);
std::vector<std::string> SubstituteTokens(std::span<const std::string> tokens, std::size_t idx,
                                          std::string_view target);

struct ForgeResources {
  const ConceptRegistry* registry = nullptr;
  const SynonymSet* synonyms = nullptr;
  const Vocabulary* vocab = nullptr;
  const std::vector<std::string>* danger = nullptr;
};

struct ForgeOptions {
  // Strict: exhausted candidate pools skip the caption instead of falling
  // back to rand_voca.
  bool strict = false;
  int max_attempts = 100;
  int jobs = 1;
};

struct ForgeResult {
  std::vector<CaptionManifestEntry> entries;  // corpus caption order
  std::size_t skipped = 0;
  std::size_t fallbacks = 0;
};

// Rand-voca draw for one source word: uniform vocabulary word that is not
// the source, not a synonym of it, and not in the source's concept group when
// both are mapped. Returns empty after `max_attempts` rejections.
std::string DrawRandVoca(std::string_view source, Rng& rng, const ForgeResources& res,
                         int max_attempts);

// One forged caption per caption that has a consensus source word.
ForgeResult GenSingleWordSet(const Corpus& corpus, std::span<const ConsensusRecord> consensus,
                             CaptionPolicy policy, const ForgeResources& res, std::uint64_t seed,
                             const ForgeOptions& options = {});

// Deletes a noun. kDeleteRandom draws uniformly among the caption's nouns;
// the EI modes delete `chosen[caption_id]`.
ForgeResult GenDeletionSet(const Corpus& corpus, CaptionPolicy mode,
                           const std::map<std::string, std::size_t>& chosen, std::uint64_t seed,
                           const ForgeOptions& options = {});

// k distinct random positions (any word) replaced with rand_voca words.
ForgeResult GenMultiwordSet(const Corpus& corpus, int k, const ForgeResources& res,
                            std::uint64_t seed, const ForgeOptions& options = {});

// Checks an entry against its original caption: field consistency for the
// policy, and that re-tokenizing `text` differs from the original exactly at
// the declared positions. Returns an empty string when valid.
std::string CheckEntry(const CaptionManifestEntry& entry, const Corpus& corpus,
                       const ConceptRegistry* registry = nullptr);

std::string EntryToJson(const CaptionManifestEntry& entry);
CaptionManifestEntry EntryFromJson(std::string_view line);
std::string SerializeCaptionManifest(std::span<const CaptionManifestEntry> entries);
std::vector<CaptionManifestEntry> ParseCaptionManifest(std::string_view text);

}  // namespace rocoforge

#endif  // ROCOFORGE_CAPTION_FORGE_H_
