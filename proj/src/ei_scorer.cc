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

#include "rocoforge/ei_scorer.h"

#include <algorithm>
#include <cmath>
#include <nlohmann/json.hpp>
#include <sstream>
#include <unordered_map>

#include "rocoforge/errors.h"
#include "rocoforge/hashing.h"
#include "rocoforge/io.h"
#include "rocoforge/logging.h"
#include "rocoforge/parallel.h"

namespace rocoforge {

using nlohmann::json;

std::string LeaveOneOut(const CaptionRecord& caption, std::size_t idx) {
  if (idx >= caption.tokens.size()) {
    throw IndexError("token index " + std::to_string(idx) + " out of range for caption " +
                     caption.caption_id);
  }
  std::vector<std::string> rest;
  rest.reserve(caption.tokens.size() - 1);
  for (std::size_t i = 0; i < caption.tokens.size(); ++i) {
    if (i != idx) rest.push_back(caption.tokens[i]);
  }
  return Detokenize(rest);
}

double EmbeddingInfluence(std::span<const float> full, std::span<const float> without) {
  if (full.size() != without.size()) throw ShapeError("EI inputs differ in length");
  double dot = 0.0, nf = 0.0, nw = 0.0;
  for (std::size_t i = 0; i < full.size(); ++i) {
    dot += static_cast<double>(full[i]) * without[i];
    nf += static_cast<double>(full[i]) * full[i];
    nw += static_cast<double>(without[i]) * without[i];
  }
  const double denom = std::sqrt(nf) * std::sqrt(nw);
  if (!(denom > 0.0) || !std::isfinite(denom)) {
    throw NumericalDegeneracy("zero-norm embedding in EI computation");
  }
  return 1.0 - dot / denom;
}

double EiScore(Embedder& embedder, const CaptionRecord& caption, std::size_t idx) {
  if (caption.tokens.size() < 2) {
    throw NoSourceWord("caption " + caption.caption_id + " has fewer than two words");
  }
  const std::vector<std::string> texts = {Detokenize(caption.tokens), LeaveOneOut(caption, idx)};
  const EmbeddingMatrix m = embedder.EmbedTexts(texts);
  return EmbeddingInfluence(m.row(0), m.row(1));
}

std::size_t ExtremeNoun(const std::map<std::size_t, double>& scores,
                        std::span<const std::size_t> nouns, Extreme mode) {
  if (nouns.empty()) throw NoSourceWord("no eligible noun");
  std::size_t best = nouns[0];
  double best_score = scores.at(best);
  for (std::size_t idx : nouns) {
    const double s = scores.at(idx);
    const bool better = mode == Extreme::kLowest ? s < best_score : s > best_score;
    if (better || (s == best_score && idx < best)) {
      best = idx;
      best_score = s;
    }
  }
  return best;
}

EiRecord ScoreCaption(Embedder& embedder, const CaptionRecord& caption, const EiOptions& options) {
  if (caption.tokens.size() < 2) {
    throw NoSourceWord("caption " + caption.caption_id + " has fewer than two words");
  }
  if (caption.noun_indices.empty()) {
    throw NoSourceWord("caption " + caption.caption_id + " has no eligible noun");
  }
  std::vector<std::size_t> scored;
  if (options.full_heatmap) {
    for (std::size_t i = 0; i < caption.tokens.size(); ++i) scored.push_back(i);
  } else {
    scored = caption.noun_indices;
  }
  std::vector<std::string> texts;
  texts.reserve(scored.size() + 1);
  texts.push_back(Detokenize(caption.tokens));
  for (std::size_t idx : scored) texts.push_back(LeaveOneOut(caption, idx));
  const EmbeddingMatrix m = embedder.EmbedTexts(texts);

  EiRecord rec;
  rec.caption_id = caption.caption_id;
  rec.model = embedder.id().name;
  for (std::size_t k = 0; k < scored.size(); ++k) {
    const double ei = EmbeddingInfluence(m.row(0), m.row(k + 1));
    if (!std::isfinite(ei)) throw NumericalDegeneracy("non-finite EI for " + caption.caption_id);
    rec.word_scores[scored[k]] = ei;
  }
  rec.lowest_noun_idx = ExtremeNoun(rec.word_scores, caption.noun_indices, Extreme::kLowest);
  rec.highest_noun_idx = ExtremeNoun(rec.word_scores, caption.noun_indices, Extreme::kHighest);
  return rec;
}

std::size_t SelectExtremeNoun(Embedder& embedder, const CaptionRecord& caption, Extreme mode) {
  const EiRecord rec = ScoreCaption(embedder, caption);
  return mode == Extreme::kLowest ? rec.lowest_noun_idx : rec.highest_noun_idx;
}

ConsensusRecord ConsensusSourceWord(const std::map<std::string, std::size_t>& choices, Rng& rng) {
  if (choices.empty()) throw EmptyConsensus("no model choices to form a consensus");
  std::map<std::size_t, int> counts;
  for (const auto& [model, idx] : choices) ++counts[idx];
  int best = 0;
  for (const auto& [idx, n] : counts) best = std::max(best, n);
  std::vector<std::size_t> tied;
  for (const auto& [idx, n] : counts) {
    if (n == best) tied.push_back(idx);
  }
  ConsensusRecord rec;
  rec.per_model_choice = choices;
  rec.consensus_count = best;
  rec.tie_broken = tied.size() > 1;
  rec.consensus_idx = rec.tie_broken ? tied[rng.UniformIndex(tied.size())] : tied[0];
  return rec;
}

ConsensusRecord ConsensusSourceWord(const std::string& caption_id,
                                    const std::map<std::string, std::size_t>& choices,
                                    std::uint64_t seed) {
  Rng rng(seed);
  ConsensusRecord rec = ConsensusSourceWord(choices, rng);
  rec.caption_id = caption_id;
  rec.seed = seed;
  return rec;
}

StatsReport EiStatistics(std::span<const ConsensusRecord> records, const Corpus& corpus,
                         std::size_t model_count) {
  StatsReport report;
  std::size_t buckets = model_count;
  for (const auto& r : records) buckets = std::max<std::size_t>(buckets, r.consensus_count);
  report.consensus_frequency.assign(buckets, 0.0);
  report.captions = records.size();
  if (records.empty()) return report;
  std::vector<std::size_t> hist(buckets, 0);
  std::unordered_map<std::string, std::size_t> words;
  for (const auto& r : records) {
    if (r.consensus_count >= 1) ++hist[static_cast<std::size_t>(r.consensus_count) - 1];
    const CaptionRecord& c = corpus.caption(r.caption_id);
    if (r.consensus_idx < c.tokens.size()) ++words[c.tokens[r.consensus_idx]];
  }
  for (std::size_t k = 0; k < buckets; ++k) {
    report.consensus_frequency[k] = static_cast<double>(hist[k]) / records.size();
  }
  report.word_counts.assign(words.begin(), words.end());
  std::sort(report.word_counts.begin(), report.word_counts.end(), [](const auto& a, const auto& b) {
    return a.second != b.second ? a.second > b.second : a.first < b.first;
  });
  return report;
}

std::string ConsensusHistogramCsv(const StatsReport& report) {
  std::ostringstream out;
  out << "bucket,frequency\n";
  out.setf(std::ios::fixed);
  out.precision(6);
  for (std::size_t k = 0; k < report.consensus_frequency.size(); ++k) {
    out << (k + 1) << ',' << report.consensus_frequency[k] << '\n';
  }
  return out.str();
}

std::string SourceWordCsv(const StatsReport& report) {
  std::ostringstream out;
  out << "word,count\n";
  for (const auto& [word, count] : report.word_counts) out << word << ',' << count << '\n';
  return out.str();
}

EiRunResult RunEiStage(const Corpus& corpus, std::span<Embedder* const> models, std::uint64_t seed,
                       int jobs, const EiOptions& options) {
  const auto& captions = corpus.captions();
  struct Slot {
    std::vector<EiRecord> records;
    bool skipped = false;
    ConsensusRecord lowest, highest;
  };
  std::vector<Slot> slots(captions.size());
  ParallelFor(captions.size(), jobs, [&](std::size_t i) {
    const CaptionRecord& c = captions[i];
    Slot& slot = slots[i];
    std::map<std::string, std::size_t> low, high;
    try {
      for (Embedder* model : models) {
        EiRecord rec = ScoreCaption(*model, c, options);
        low[rec.model] = rec.lowest_noun_idx;
        high[rec.model] = rec.highest_noun_idx;
        slot.records.push_back(std::move(rec));
      }
    } catch (const NoSourceWord&) {
      slot.skipped = true;
      slot.records.clear();
      return;
    }
    slot.lowest =
        ConsensusSourceWord(c.caption_id, low, DeriveSeed(seed, {c.caption_id, "lowest"}));
    slot.highest =
        ConsensusSourceWord(c.caption_id, high, DeriveSeed(seed, {c.caption_id, "highest"}));
  });
  EiRunResult result;
  for (std::size_t i = 0; i < slots.size(); ++i) {
    if (slots[i].skipped) {
      result.skipped.push_back(captions[i].caption_id);
      continue;
    }
    for (auto& r : slots[i].records) result.records.push_back(std::move(r));
    result.lowest.push_back(std::move(slots[i].lowest));
    result.highest.push_back(std::move(slots[i].highest));
  }
  if (!result.skipped.empty()) {
    LogInfo("EI: " + std::to_string(result.skipped.size()) + " captions without a source word");
  }
  return result;
}

std::string EiRecordToJson(const EiRecord& record) {
  json scores = json::object();
  for (const auto& [idx, v] : record.word_scores) scores[std::to_string(idx)] = v;
  json j = {{"caption_id", record.caption_id},
            {"model", record.model},
            {"word_scores", scores},
            {"lowest_noun_idx", record.lowest_noun_idx},
            {"highest_noun_idx", record.highest_noun_idx}};
  return j.dump();
}

std::string ConsensusToJson(const ConsensusRecord& record) {
  json j = {{"caption_id", record.caption_id},       {"per_model_choice", record.per_model_choice},
            {"consensus_idx", record.consensus_idx}, {"consensus_count", record.consensus_count},
            {"tie_broken", record.tie_broken},       {"seed", record.seed}};
  return j.dump();
}

ConsensusRecord ConsensusFromJson(std::string_view line) {
  try {
    const json j = json::parse(line);
    ConsensusRecord r;
    r.caption_id = j.at("caption_id").get<std::string>();
    r.per_model_choice = j.at("per_model_choice").get<std::map<std::string, std::size_t>>();
    r.consensus_idx = j.at("consensus_idx").get<std::size_t>();
    r.consensus_count = j.at("consensus_count").get<int>();
    r.tie_broken = j.at("tie_broken").get<bool>();
    r.seed = j.at("seed").get<std::uint64_t>();
    return r;
  } catch (const json::parse_error& err) {
    throw ParseError(std::string("malformed consensus record: ") + err.what(), err.byte);
  } catch (const json::exception& err) {
    throw ParseError(std::string("invalid consensus record: ") + err.what(), 0);
  }
}

std::vector<ConsensusRecord> ReadConsensusJsonl(std::string_view text) {
  std::vector<ConsensusRecord> out;
  for (const auto& line : SplitDataLines(text)) out.push_back(ConsensusFromJson(line));
  return out;
}

}  // namespace rocoforge
