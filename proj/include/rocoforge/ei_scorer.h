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

#ifndef ROCOFORGE_EI_SCORER_H_
#define ROCOFORGE_EI_SCORER_H_

#include <array>
#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "rocoforge/corpus.h"
#include "rocoforge/embedding.h"
#include "rocoforge/random.h"

namespace rocoforge {

// Caption text with token `idx` removed, tokens rejoined by single spaces.
std::string LeaveOneOut(const CaptionRecord& caption, std::size_t idx);

// Embedding influence of a removed word:
//   1 - <full, without> / (|full| |without|)
// Lies in [0, 2]. Zero-norm inputs throw NumericalDegeneracy.
double EmbeddingInfluence(std::span<const float> full, std::span<const float> without);

// Single-word score through an embedder (two encodes).
double EiScore(Embedder& embedder, const CaptionRecord& caption, std::size_t idx);

enum class Extreme { kLowest, kHighest };

struct EiRecord {
  std::string caption_id;
  std::string model;
  std::map<std::size_t, double> word_scores;  // token index -> EI
  std::size_t lowest_noun_idx = 0;
  std::size_t highest_noun_idx = 0;
};

struct EiOptions {
  // Score every token instead of only the caption's nouns. Selection still
  // considers nouns only.
  bool full_heatmap = false;
};

// Scores a caption's nouns with one provider request holding the caption and
// each leave-one-out variant. Throws NoSourceWord when the caption has fewer
// than two tokens or no eligible noun.
EiRecord ScoreCaption(Embedder& embedder, const CaptionRecord& caption,
                      const EiOptions& options = {});

// argmin/argmax of scores over `nouns`; ties go to the smallest token index.
std::size_t ExtremeNoun(const std::map<std::size_t, double>& scores,
                        std::span<const std::size_t> nouns, Extreme mode);

std::size_t SelectExtremeNoun(Embedder& embedder, const CaptionRecord& caption, Extreme mode);

struct ConsensusRecord {
  std::string caption_id;
  std::map<std::string, std::size_t> per_model_choice;
  std::size_t consensus_idx = 0;
  int consensus_count = 0;
  bool tie_broken = false;
  std::uint64_t seed = 0;

  bool operator==(const ConsensusRecord&) const = default;
};

// Most frequent token index among the per-model choices. When several indices
// share the maximal multiplicity, one is drawn uniformly (ascending index
// order) from `rng`. Throws EmptyConsensus.
ConsensusRecord ConsensusSourceWord(const std::map<std::string, std::size_t>& choices, Rng& rng);

// Same, with the generator seeded from `seed` (recorded in the result).
ConsensusRecord ConsensusSourceWord(const std::string& caption_id,
                                    const std::map<std::string, std::size_t>& choices,
                                    std::uint64_t seed);

struct StatsReport {
  // frequency[k-1] = share of captions where k models agreed; k = 1..models.
  std::vector<double> consensus_frequency;
  // Source words by count, descending; ties alphabetical.
  std::vector<std::pair<std::string, std::size_t>> word_counts;
  std::size_t captions = 0;
};

StatsReport EiStatistics(std::span<const ConsensusRecord> records, const Corpus& corpus,
                         std::size_t model_count = 4);

std::string ConsensusHistogramCsv(const StatsReport& report);
std::string SourceWordCsv(const StatsReport& report);

struct EiRunResult {
  std::vector<EiRecord> records;        // caption-major, model order within
  std::vector<ConsensusRecord> lowest;  // one per scored caption
  std::vector<ConsensusRecord> highest;
  std::vector<std::string> skipped;  // caption ids without a source word
};

// Full two-stage procedure over a corpus: per-model lowest/highest EI noun,
// then cross-model consensus. Captions are scored concurrently; each
// caption's randomness derives from (seed, caption_id), so results do not
// depend on `jobs`.
EiRunResult RunEiStage(const Corpus& corpus, std::span<Embedder* const> models, std::uint64_t seed,
                       int jobs = 1, const EiOptions& options = {});

std::string EiRecordToJson(const EiRecord& record);
std::string ConsensusToJson(const ConsensusRecord& record);
ConsensusRecord ConsensusFromJson(std::string_view line);
std::vector<ConsensusRecord> ReadConsensusJsonl(std::string_view text);

}  // namespace rocoforge

#endif  // ROCOFORGE_EI_SCORER_H_
