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

#include <algorithm>
#include <cctype>
#include <nlohmann/json.hpp>
#include <optional>

#include "rocoforge/errors.h"
#include "rocoforge/hashing.h"
#include "rocoforge/io.h"
#include "rocoforge/logging.h"
#include "rocoforge/parallel.h"

namespace rocoforge {

using nlohmann::json;

namespace {

constexpr std::pair<CaptionPolicy, std::string_view> kPolicyNames[] = {
    {CaptionPolicy::kRandVoca, "rand_voca"},
    {CaptionPolicy::kSameConcept, "same_concept"},
    {CaptionPolicy::kDiffConcept, "diff_concept"},
    {CaptionPolicy::kDanger, "danger"},
    {CaptionPolicy::kDeleteRandom, "delete_random"},
    {CaptionPolicy::kDeleteHighEi, "delete_high_ei"},
    {CaptionPolicy::kDeleteLowEi, "delete_low_ei"},
};

bool EqualsIgnoreCase(std::string_view a, std::string_view b) {
  return a.size() == b.size() && std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
           return std::tolower(static_cast<unsigned char>(x)) ==
                  std::tolower(static_cast<unsigned char>(y));
         });
}

// Collects per-caption results in corpus order regardless of which worker
// produced them.
ForgeResult Assemble(std::vector<std::optional<CaptionManifestEntry>>& slots) {
  ForgeResult out;
  for (auto& slot : slots) {
    if (!slot) {
      ++out.skipped;
      continue;
    }
    if (slot->fallback) ++out.fallbacks;
    out.entries.push_back(std::move(*slot));
  }
  return out;
}

CaptionManifestEntry NewEntry(const CaptionRecord& c, CaptionPolicy policy, int k,
                              std::uint64_t global_seed, std::uint64_t entry_seed) {
  CaptionManifestEntry e;
  e.orig_caption_id = c.caption_id;
  e.image_id = c.image_id;
  e.policy = policy;
  e.k = k;
  e.seed = entry_seed;
  e.new_caption_id = c.caption_id + "#" + PolicyName(policy, k) + "#" + std::to_string(global_seed);
  return e;
}

}  // namespace

std::string PolicyName(CaptionPolicy policy, int k) {
  if (policy == CaptionPolicy::kMultiword) return "multiword_" + std::to_string(k);
  for (const auto& [p, name] : kPolicyNames) {
    if (p == policy) return std::string(name);
  }
  return "unknown";
}

std::pair<CaptionPolicy, int> ParsePolicy(std::string_view name) {
  for (const auto& [p, n] : kPolicyNames) {
    if (n == name) return {p, 0};
  }
  if (name.starts_with("multiword_")) {
    const std::string digits(name.substr(10));
    if (digits.size() == 1 && std::isdigit(static_cast<unsigned char>(digits[0]))) {
      const int k = digits[0] - '0';
      if (k >= kMinMultiword && k <= kMaxMultiword) return {CaptionPolicy::kMultiword, k};
    }
  }
  throw ValidationError("unknown caption policy '" + std::string(name) + "'");
}

bool IsDeletion(CaptionPolicy policy) {
  return policy == CaptionPolicy::kDeleteRandom || policy == CaptionPolicy::kDeleteHighEi ||
         policy == CaptionPolicy::kDeleteLowEi;
}

bool IsLetterWord(std::string_view word) {
  return !word.empty() &&
         std::all_of(word.begin(), word.end(), [](char c) { return c >= 'a' && c <= 'z'; });
}

Vocabulary::Vocabulary(std::vector<std::string> words) {
  std::size_t dropped = 0;
  for (auto& w : words) {
    if (IsLetterWord(w)) {
      words_.push_back(std::move(w));
    } else {
      ++dropped;
    }
  }
  if (dropped > 0) LogInfo("vocabulary: dropped " + std::to_string(dropped) + " non-letter words");
}

Vocabulary Vocabulary::Load(const std::filesystem::path& path) {
  return Vocabulary(ReadDataLines(path));
}

std::vector<std::string> SubstituteTokens(std::span<const std::string> tokens, std::size_t idx,
                                          std::string_view target) {
  if (idx >= tokens.size()) {
    throw IndexError("substitution index " + std::to_string(idx) + " out of range");
  }
  if (target.empty()) throw ValidationError("empty substitution target");
  if (EqualsIgnoreCase(tokens[idx], target)) {
    throw NoOpSubstitution("target '" + std::string(target) + "' equals the source word");
  }
  std::vector<std::string> out(tokens.begin(), tokens.end());
  out[idx] = std::string(target);
  return out;
}

std::string Substitute(const CaptionRecord& caption, std::size_t idx, std::string_view target) {
  return Detokenize(SubstituteTokens(caption.tokens, idx, target));
}

std::string DrawRandVoca(std::string_view source, Rng& rng, const ForgeResources& res,
                         int max_attempts) {
  const auto& words = res.vocab->words();
  if (words.empty()) return {};
  const auto source_group = res.registry->GroupOf(source);
  for (int attempt = 0; attempt < max_attempts; ++attempt) {
    const std::string& w = words[rng.UniformIndex(words.size())];
    if (IsExcludedTarget(source, w, *res.synonyms)) continue;
    if (source_group) {
      const auto target_group = res.registry->GroupOf(w);
      if (target_group && *target_group == *source_group) continue;
    }
    return w;
  }
  return {};
}

ForgeResult GenSingleWordSet(const Corpus& corpus, std::span<const ConsensusRecord> consensus,
                             CaptionPolicy policy, const ForgeResources& res, std::uint64_t seed,
                             const ForgeOptions& options) {
  if (IsDeletion(policy) || policy == CaptionPolicy::kMultiword) {
    throw ValidationError("not a single-word substitution policy: " + PolicyName(policy));
  }
  std::map<std::string, std::size_t> source_of;
  for (const auto& r : consensus) source_of[r.caption_id] = r.consensus_idx;
  const auto& captions = corpus.captions();
  const std::string policy_name = PolicyName(policy);
  std::vector<std::optional<CaptionManifestEntry>> slots(captions.size());

  ParallelFor(captions.size(), options.jobs, [&](std::size_t i) {
    const CaptionRecord& c = captions[i];
    auto it = source_of.find(c.caption_id);
    if (it == source_of.end() || it->second >= c.tokens.size()) return;
    const std::size_t idx = it->second;
    const std::string& source = c.tokens[idx];
    const std::uint64_t entry_seed = DeriveSeed(seed, {c.caption_id, policy_name});
    Rng rng(entry_seed);

    std::string target;
    bool fallback = false;
    switch (policy) {
      case CaptionPolicy::kRandVoca:
        target = DrawRandVoca(source, rng, res, options.max_attempts);
        break;
      case CaptionPolicy::kSameConcept:
      case CaptionPolicy::kDiffConcept:
        try {
          target = policy == CaptionPolicy::kSameConcept
                       ? res.registry->SampleSameConcept(source, rng, *res.synonyms)
                       : res.registry->SampleDiffConcept(source, rng, *res.synonyms);
        } catch (const UnmappedWord&) {
          fallback = true;
        } catch (const NoCandidate&) {
          if (options.strict) return;
          fallback = true;
        }
        break;
      case CaptionPolicy::kDanger: {
        const auto& danger = *res.danger;
        for (int a = 0; a < options.max_attempts && !danger.empty(); ++a) {
          const std::string& w = danger[rng.UniformIndex(danger.size())];
          if (!IsExcludedTarget(source, w, *res.synonyms)) {
            target = w;
            break;
          }
        }
        if (target.empty()) {
          if (options.strict) return;
          fallback = true;
        }
        break;
      }
      default:
        return;
    }
    if (fallback) target = DrawRandVoca(source, rng, res, options.max_attempts);
    if (target.empty()) return;

    CaptionManifestEntry e = NewEntry(c, policy, 0, seed, entry_seed);
    e.source_indices = {idx};
    e.source_words = {source};
    e.target_words = {target};
    e.text = Substitute(c, idx, target);
    e.fallback = fallback;
    slots[i] = std::move(e);
  });
  ForgeResult out = Assemble(slots);
  if (out.fallbacks > 0) {
    LogInfo(policy_name + ": " + std::to_string(out.fallbacks) +
            " captions fell back to rand_voca");
  }
  return out;
}

ForgeResult GenDeletionSet(const Corpus& corpus, CaptionPolicy mode,
                           const std::map<std::string, std::size_t>& chosen, std::uint64_t seed,
                           const ForgeOptions& options) {
  if (!IsDeletion(mode)) throw ValidationError("not a deletion policy: " + PolicyName(mode));
  const auto& captions = corpus.captions();
  const std::string policy_name = PolicyName(mode);
  std::vector<std::optional<CaptionManifestEntry>> slots(captions.size());

  ParallelFor(captions.size(), options.jobs, [&](std::size_t i) {
    const CaptionRecord& c = captions[i];
    if (c.tokens.size() < 2) return;
    const std::uint64_t entry_seed = DeriveSeed(seed, {c.caption_id, policy_name});
    std::size_t idx = 0;
    if (mode == CaptionPolicy::kDeleteRandom) {
      if (c.noun_indices.empty()) return;
      Rng rng(entry_seed);
      idx = c.noun_indices[rng.UniformIndex(c.noun_indices.size())];
    } else {
      auto it = chosen.find(c.caption_id);
      if (it == chosen.end() || it->second >= c.tokens.size()) return;
      idx = it->second;
    }
    CaptionManifestEntry e = NewEntry(c, mode, 0, seed, entry_seed);
    e.source_indices = {idx};
    e.source_words = {c.tokens[idx]};
    e.text = LeaveOneOut(c, idx);
    slots[i] = std::move(e);
  });
  return Assemble(slots);
}

ForgeResult GenMultiwordSet(const Corpus& corpus, int k, const ForgeResources& res,
                            std::uint64_t seed, const ForgeOptions& options) {
  if (k < kMinMultiword || k > kMaxMultiword) {
    throw ValidationError("multiword k must be in [2,5], got " + std::to_string(k));
  }
  const auto& captions = corpus.captions();
  const std::string policy_name = PolicyName(CaptionPolicy::kMultiword, k);
  std::vector<std::optional<CaptionManifestEntry>> slots(captions.size());

  ParallelFor(captions.size(), options.jobs, [&](std::size_t i) {
    const CaptionRecord& c = captions[i];
    const std::size_t n = c.tokens.size();
    if (n < static_cast<std::size_t>(k)) return;
    const std::uint64_t entry_seed = DeriveSeed(seed, {c.caption_id, policy_name});
    Rng rng(entry_seed);
    // Partial Fisher-Yates over positions.
    std::vector<std::size_t> positions(n);
    for (std::size_t p = 0; p < n; ++p) positions[p] = p;
    for (int j = 0; j < k; ++j) {
      const std::size_t pick = j + rng.UniformIndex(n - j);
      std::swap(positions[j], positions[pick]);
    }
    positions.resize(k);
    std::sort(positions.begin(), positions.end());

    CaptionManifestEntry e = NewEntry(c, CaptionPolicy::kMultiword, k, seed, entry_seed);
    std::vector<std::string> tokens = c.tokens;
    for (std::size_t pos : positions) {
      const std::string target = DrawRandVoca(c.tokens[pos], rng, res, options.max_attempts);
      if (target.empty()) return;
      e.source_indices.push_back(pos);
      e.source_words.push_back(c.tokens[pos]);
      e.target_words.push_back(target);
      tokens[pos] = target;
    }
    e.text = Detokenize(tokens);
    slots[i] = std::move(e);
  });
  return Assemble(slots);
}

std::string CheckEntry(const CaptionManifestEntry& e, const Corpus& corpus,
                       const ConceptRegistry* registry) {
  if (!corpus.has_caption(e.orig_caption_id)) return "unknown caption " + e.orig_caption_id;
  const CaptionRecord& c = corpus.caption(e.orig_caption_id);
  if (c.image_id != e.image_id) return "image id mismatch";
  const std::size_t n = e.source_indices.size();
  if (e.source_words.size() != n) return "source_words length mismatch";
  if (IsDeletion(e.policy)) {
    if (!e.target_words.empty()) return "deletion with targets";
    if (n != 1) return "deletion must remove one word";
  } else if (e.target_words.size() != n) {
    return "target_words length mismatch";
  }
  if (e.policy == CaptionPolicy::kMultiword) {
    if (e.k < kMinMultiword || e.k > kMaxMultiword || n != static_cast<std::size_t>(e.k)) {
      return "multiword k inconsistent";
    }
  } else if (!IsDeletion(e.policy) && n != 1) {
    return "single-word policy with " + std::to_string(n) + " positions";
  }
  for (std::size_t j = 0; j < n; ++j) {
    if (e.source_indices[j] >= c.tokens.size()) return "source index out of range";
    if (c.tokens[e.source_indices[j]] != e.source_words[j]) return "source word mismatch";
  }
  const auto retok = Tokenize(e.text);
  if (IsDeletion(e.policy)) {
    std::vector<std::string> expect = c.tokens;
    expect.erase(expect.begin() + static_cast<std::ptrdiff_t>(e.source_indices[0]));
    if (retok != expect) return "deletion text does not match";
  } else {
    if (retok.size() != c.tokens.size()) return "token count changed";
    std::size_t diffs = 0;
    for (std::size_t t = 0; t < retok.size(); ++t) {
      const auto pos = std::find(e.source_indices.begin(), e.source_indices.end(), t);
      if (pos != e.source_indices.end()) {
        const std::size_t j = static_cast<std::size_t>(pos - e.source_indices.begin());
        if (retok[t] != e.target_words[j]) return "target not at declared position";
        if (retok[t] == c.tokens[t]) return "declared position unchanged";
        ++diffs;
      } else if (retok[t] != c.tokens[t]) {
        return "undeclared change at token " + std::to_string(t);
      }
    }
    if (diffs != n) return "diff count mismatch";
    if (registry != nullptr && (e.policy == CaptionPolicy::kRandVoca ||
                                e.policy == CaptionPolicy::kMultiword || e.fallback)) {
      for (std::size_t j = 0; j < n; ++j) {
        if (!IsLetterWord(e.target_words[j])) return "rand_voca target not [a-z]+";
        const auto sg = registry->GroupOf(e.source_words[j]);
        const auto tg = registry->GroupOf(e.target_words[j]);
        if (sg && tg && *sg == *tg) return "rand_voca target shares source concept group";
      }
    }
  }
  if (e.text == Detokenize(c.tokens)) return "text equals original";
  return {};
}

std::string EntryToJson(const CaptionManifestEntry& e) {
  json j = {{"new_caption_id", e.new_caption_id},
            {"orig_caption_id", e.orig_caption_id},
            {"image_id", e.image_id},
            {"policy", PolicyName(e.policy, e.k)},
            {"source_indices", e.source_indices},
            {"source_words", e.source_words},
            {"target_words", e.target_words},
            {"text", e.text},
            {"seed", e.seed},
            {"fallback", e.fallback}};
  return j.dump();
}

CaptionManifestEntry EntryFromJson(std::string_view line) {
  try {
    const json j = json::parse(line);
    CaptionManifestEntry e;
    e.new_caption_id = j.at("new_caption_id").get<std::string>();
    e.orig_caption_id = j.at("orig_caption_id").get<std::string>();
    e.image_id = j.at("image_id").get<std::string>();
    std::tie(e.policy, e.k) = ParsePolicy(j.at("policy").get<std::string>());
    e.source_indices = j.at("source_indices").get<std::vector<std::size_t>>();
    e.source_words = j.at("source_words").get<std::vector<std::string>>();
    e.target_words = j.at("target_words").get<std::vector<std::string>>();
    e.text = j.at("text").get<std::string>();
    e.seed = j.at("seed").get<std::uint64_t>();
    e.fallback = j.at("fallback").get<bool>();
    return e;
  } catch (const json::parse_error& err) {
    throw ParseError(std::string("malformed caption manifest entry: ") + err.what(), err.byte);
  } catch (const json::exception& err) {
    throw ParseError(std::string("invalid caption manifest entry: ") + err.what(), 0);
  }
}

std::string SerializeCaptionManifest(std::span<const CaptionManifestEntry> entries) {
  std::string out;
  for (const auto& e : entries) out += EntryToJson(e) + "\n";
  return out;
}

std::vector<CaptionManifestEntry> ParseCaptionManifest(std::string_view text) {
  std::vector<CaptionManifestEntry> out;
  for (const auto& line : SplitDataLines(text)) out.push_back(EntryFromJson(line));
  return out;
}

}  // namespace rocoforge
