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

#include <algorithm>
#include <cctype>

#include "rocoforge/errors.h"
#include "rocoforge/io.h"
#include "rocoforge/logging.h"

namespace rocoforge {

namespace {

std::string Lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::pair<std::string_view, std::string_view> SplitTab(std::string_view line) {
  const std::size_t tab = line.find('\t');
  if (tab == std::string_view::npos) return {line, {}};
  return {Trim(line.substr(0, tab)), Trim(line.substr(tab + 1))};
}

const std::unordered_map<std::string_view, std::string_view>& IrregularPlurals() {
  static const std::unordered_map<std::string_view, std::string_view> kMap = {
      {"men", "man"},      {"women", "woman"},   {"children", "child"}, {"people", "person"},
      {"mice", "mouse"},   {"geese", "goose"},   {"feet", "foot"},      {"teeth", "tooth"},
      {"knives", "knife"}, {"leaves", "leaf"},   {"shelves", "shelf"},  {"calves", "calf"},
      {"wolves", "wolf"},  {"scarves", "scarf"}, {"oxen", "ox"},
  };
  return kMap;
}

}  // namespace

std::vector<std::string> SingularCandidates(std::string_view word) {
  std::vector<std::string> out;
  const auto& irregular = IrregularPlurals();
  if (auto it = irregular.find(word); it != irregular.end()) out.emplace_back(it->second);
  if (word.size() > 3 && word.ends_with("ies")) {
    out.push_back(std::string(word.substr(0, word.size() - 3)) + "y");
  }
  if (word.size() > 2 && word.ends_with("es")) out.emplace_back(word.substr(0, word.size() - 2));
  if (word.size() > 1 && word.ends_with('s') && !word.ends_with("ss")) {
    out.emplace_back(word.substr(0, word.size() - 1));
  }
  return out;
}

bool IsExcludedTarget(std::string_view source, std::string_view target,
                      const SynonymSet& synonyms) {
  const std::string src = Lower(source), tgt = Lower(target);
  if (src == tgt || synonyms.AreSynonyms(src, tgt)) return true;
  for (const auto& s : SingularCandidates(src)) {
    if (s == tgt || synonyms.AreSynonyms(s, tgt)) return true;
  }
  return false;
}

SynonymSet SynonymSet::Parse(std::string_view text) {
  SynonymSet out;
  for (const auto& line : SplitDataLines(text)) {
    auto [a, b] = SplitTab(line);
    if (a.empty() || b.empty()) throw RegistryError("malformed synonym line: " + line);
    out.Add(a, b);
  }
  return out;
}

SynonymSet SynonymSet::Load(const std::filesystem::path& path) { return Parse(ReadFile(path)); }

void SynonymSet::Add(std::string_view a, std::string_view b) {
  const std::string la = Lower(a), lb = Lower(b);
  if (la == lb) return;
  if (links_[la].insert(lb).second) ++pairs_;
  links_[lb].insert(la);
}

bool SynonymSet::AreSynonyms(std::string_view a, std::string_view b) const {
  auto it = links_.find(Lower(a));
  return it != links_.end() && it->second.contains(Lower(b));
}

ConceptRegistry ConceptRegistry::Parse(std::string_view text, const RegistryOptions& options) {
  ConceptRegistry reg;
  for (const auto& line : SplitDataLines(text)) {
    auto [gid, lemma_raw] = SplitTab(line);
    if (gid.empty() || lemma_raw.empty()) throw RegistryError("malformed registry line: " + line);
    const std::string lemma = Lower(lemma_raw);
    auto [git, inserted] = reg.group_by_id_.emplace(std::string(gid), reg.groups_.size());
    if (inserted) reg.groups_.push_back(ConceptGroup{std::string(gid), {}});
    const std::size_t gidx = git->second;
    if (auto it = reg.lemma_index_.find(lemma); it != reg.lemma_index_.end()) {
      if (it->second != gidx) {
        LogWarning("lemma '" + lemma + "' listed in both " + reg.groups_[it->second].group_id +
                   " and " + std::string(gid) + "; keeping " + reg.groups_[it->second].group_id);
      }
      continue;
    }
    reg.lemma_index_.emplace(lemma, gidx);
    reg.groups_[gidx].lemmas.push_back(lemma);
  }
  if (options.strict) {
    for (const auto& req : kAddedGroups) {
      const ConceptGroup* g = reg.group(req.group_id);
      if (g == nullptr) {
        throw RegistryError("registry lacks required group " + std::string(req.group_id));
      }
      if (g->lemmas.size() < req.min_lemmas) {
        throw RegistryError("group " + std::string(req.group_id) + " has " +
                            std::to_string(g->lemmas.size()) + " lemmas, need " +
                            std::to_string(req.min_lemmas));
      }
    }
  }
  for (std::size_t g = 0; g < reg.groups_.size(); ++g) {
    for (const auto& lemma : reg.groups_[g].lemmas) reg.all_lemmas_.emplace_back(lemma, g);
  }
  return reg;
}

ConceptRegistry ConceptRegistry::Load(const std::filesystem::path& path,
                                      const RegistryOptions& options) {
  return Parse(ReadFile(path), options);
}

std::optional<std::size_t> ConceptRegistry::GroupIndexOf(std::string_view word) const {
  const std::string w = Lower(word);
  if (auto it = lemma_index_.find(w); it != lemma_index_.end()) return it->second;
  for (const auto& cand : SingularCandidates(w)) {
    if (auto it = lemma_index_.find(cand); it != lemma_index_.end()) return it->second;
  }
  return std::nullopt;
}

std::optional<std::string> ConceptRegistry::GroupOf(std::string_view word) const {
  if (auto idx = GroupIndexOf(word)) return groups_[*idx].group_id;
  return std::nullopt;
}

const ConceptGroup* ConceptRegistry::group(std::string_view group_id) const {
  auto it = group_by_id_.find(std::string(group_id));
  return it == group_by_id_.end() ? nullptr : &groups_[it->second];
}

std::string ConceptRegistry::SampleSameConcept(std::string_view source, Rng& rng,
                                               const SynonymSet& synonyms) const {
  const auto gidx = GroupIndexOf(source);
  if (!gidx) throw UnmappedWord("'" + std::string(source) + "' has no concept group");
  const std::string src = Lower(source);
  std::vector<const std::string*> candidates;
  for (const auto& lemma : groups_[*gidx].lemmas) {
    if (!IsExcludedTarget(src, lemma, synonyms)) candidates.push_back(&lemma);
  }
  if (candidates.empty()) {
    throw NoCandidate("group " + groups_[*gidx].group_id + " has no substitute for '" + src + "'");
  }
  return *candidates[rng.UniformIndex(candidates.size())];
}

std::string ConceptRegistry::SampleDiffConcept(std::string_view source, Rng& rng,
                                               const SynonymSet& synonyms) const {
  const auto gidx = GroupIndexOf(source);
  if (!gidx) throw UnmappedWord("'" + std::string(source) + "' has no concept group");
  const std::string src = Lower(source);
  std::vector<const std::string*> candidates;
  for (const auto& [lemma, g] : all_lemmas_) {
    if (g == *gidx || IsExcludedTarget(src, lemma, synonyms)) continue;
    candidates.push_back(&lemma);
  }
  if (candidates.empty()) throw NoCandidate("no other concept group to draw from");
  return *candidates[rng.UniformIndex(candidates.size())];
}

}  // namespace rocoforge
