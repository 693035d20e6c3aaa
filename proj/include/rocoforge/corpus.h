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

#ifndef ROCOFORGE_CORPUS_H_
#define ROCOFORGE_CORPUS_H_

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace rocoforge {

inline constexpr std::size_t kCaptionsPerImage = 5;

struct ImageRecord {
  std::string image_id;
  std::string file_path;  // relative to Corpus::image_root
  std::vector<std::string> caption_ids;

  bool operator==(const ImageRecord&) const = default;
};

struct CaptionRecord {
  std::string caption_id;
  std::string image_id;
  std::string text;
  std::vector<std::string> tokens;
  std::vector<std::size_t> noun_indices;  // strictly increasing

  bool operator==(const CaptionRecord&) const = default;
};

// Word list plus a stop-noun exclusion list. A token is a noun when it is in
// the word list and not in the exclusion list.
class NounLexicon {
 public:
  NounLexicon() = default;
  NounLexicon(std::vector<std::string> nouns, std::vector<std::string> stop_nouns);

  // Plain word-per-line files; '#' starts a comment line.
  static NounLexicon Load(const std::filesystem::path& nouns,
                          const std::filesystem::path& stop_nouns);

  bool IsNoun(std::string_view word) const;
  bool IsStopNoun(std::string_view word) const;
  std::size_t size() const { return nouns_.size(); }

 private:
  std::unordered_set<std::string> nouns_;
  std::unordered_set<std::string> stop_;
};

// Immutable after load. Captions are kept in image order (image 0's five
// captions first, and so on) and are also reachable by id.
class Corpus {
 public:
  Corpus() = default;
  Corpus(std::string split_name, std::vector<ImageRecord> images,
         std::vector<CaptionRecord> captions);

  const std::string& split_name() const { return split_name_; }
  const std::vector<ImageRecord>& images() const { return images_; }
  const std::vector<CaptionRecord>& captions() const { return captions_; }

  const std::filesystem::path& image_root() const { return image_root_; }
  void set_image_root(std::filesystem::path root) { image_root_ = std::move(root); }

  const CaptionRecord& caption(std::string_view caption_id) const;
  const ImageRecord& image(std::string_view image_id) const;
  bool has_caption(std::string_view caption_id) const;
  bool has_image(std::string_view image_id) const;
  std::size_t image_index(std::string_view image_id) const;
  std::size_t caption_index(std::string_view caption_id) const;

  std::filesystem::path ImagePath(const ImageRecord& image) const;

  // Checks referential integrity: every referenced caption exists, belongs to
  // its image, and no caption is orphaned. Throws ValidationError.
  void Validate() const;

 private:
  std::string split_name_;
  std::vector<ImageRecord> images_;
  std::vector<CaptionRecord> captions_;
  std::filesystem::path image_root_;
  std::unordered_map<std::string, std::size_t> caption_by_id_;
  std::unordered_map<std::string, std::size_t> image_by_id_;
};

// Lowercases, splits on whitespace and punctuation, and drops punctuation.
// Interior apostrophes and hyphens stay inside a word ("don't", "t-shirt").
std::vector<std::string> Tokenize(std::string_view text);

// Single-space join.
std::string Detokenize(std::span<const std::string> tokens);

// Indices of tokens that are lexicon nouns and not stop nouns.
std::vector<std::size_t> TagNouns(std::span<const std::string> tokens, const NounLexicon& lexicon);

enum class Split { kTest, kVal };

struct LoadOptions {
  // Strict: an image with fewer than 5 captions is a ValidationError.
  // Lenient: such images are skipped with a warning.
  // Images with more than 5 captions keep the first 5 in both modes.
  bool strict = true;
};

// Loads a Karpathy-style annotation file ({"images":[{"filename","split",
// "cocoid","sentences":[{"raw","tokens"}]}]}). Supplied tokens are trusted
// (lowercased); otherwise "raw" is tokenized.
Corpus LoadKarpathySplit(const std::filesystem::path& path, Split split, const NounLexicon& lexicon,
                         const LoadOptions& options = {});
Corpus ParseKarpathySplit(std::string_view json_text, Split split, const NounLexicon& lexicon,
                          const LoadOptions& options = {});

// Internal format: a header line then one JSON object per image with its
// captions embedded. Serialization is deterministic.
void WriteCorpusJsonl(const Corpus& corpus, const std::filesystem::path& path);
std::string SerializeCorpusJsonl(const Corpus& corpus);
Corpus ReadCorpusJsonl(const std::filesystem::path& path);
Corpus ParseCorpusJsonl(std::string_view text);

std::string_view SplitName(Split split);
Split ParseSplit(std::string_view name);

}  // namespace rocoforge

#endif  // ROCOFORGE_CORPUS_H_
