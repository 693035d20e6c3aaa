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

#ifndef ROCOFORGE_TESTS_SUPPORT_FIXTURES_H_
#define ROCOFORGE_TESTS_SUPPORT_FIXTURES_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "rocoforge/corpus.h"

namespace rocoforge::fixtures {

// Bundled word lists (data/ in the source tree).
std::filesystem::path SourceDataDir();

// Fresh empty directory under the system temp dir.
std::filesystem::path MakeTempDir(std::string_view tag);

struct FixtureSpec {
  std::size_t images = 20;
  std::uint64_t seed = 1;
  int base_width = 40;
  int base_height = 32;
};

// Writes a Karpathy-format annotations.json with five template captions per
// image plus one small PNG per image, all derived from `spec.seed`. Image
// sizes vary so resizing paths are exercised. Returns the JSON path.
std::filesystem::path WriteKarpathyFixture(const std::filesystem::path& dir,
                                           const FixtureSpec& spec = {});

NounLexicon SourceLexicon();

// WriteKarpathyFixture + LoadKarpathySplit with the bundled lexicon.
Corpus MakeFixtureCorpus(const std::filesystem::path& dir, const FixtureSpec& spec = {});

}  // namespace rocoforge::fixtures

#endif  // ROCOFORGE_TESTS_SUPPORT_FIXTURES_H_
