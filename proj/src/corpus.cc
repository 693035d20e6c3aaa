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

#include "rocoforge/corpus.h"

#include <algorithm>
#include <cctype>
#include <nlohmann/json.hpp>

#include "rocoforge/errors.h"
#include "rocoforge/io.h"
#include "rocoforge/logging.h"

namespace rocoforge {

using nlohmann::json;

namespace {

bool IsWordByte(unsigned char c) { return std::isalnum(c) || c == '\'' || c == '-' || c >= 0x80; }

bool IsJoiner(char c) { return c == '\'' || c == '-'; }

std::string Lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

}  // namespace

NounLexicon::NounLexicon(std::vector<std::string> nouns, std::vector<std::string> stop_nouns) {
  for (auto& w : nouns) nouns_.insert(Lower(w));
  for (auto& w : stop_nouns) stop_.insert(Lower(w));
}

NounLexicon NounLexicon::Load(const std::filesystem::path& nouns,
                              const std::filesystem::path& stop_nouns) {
  return NounLexicon(ReadDataLines(nouns), ReadDataLines(stop_nouns));
}

bool NounLexicon::IsNoun(std::string_view word) const {
  std::string w(word);
  return nouns_.contains(w) && !stop_.contains(w);
}

bool NounLexicon::IsStopNoun(std::string_view word) const {
  return stop_.contains(std::string(word));
}

std::vector<std::string> Tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && !IsWordByte(static_cast<unsigned char>(text[i]))) ++i;
    std::size_t j = i;
    while (j < text.size() && IsWordByte(static_cast<unsigned char>(text[j]))) ++j;
    std::string_view word = text.substr(i, j - i);
    while (!word.empty() && IsJoiner(word.front())) word.remove_prefix(1);
    while (!word.empty() && IsJoiner(word.back())) word.remove_suffix(1);
    if (!word.empty()) tokens.push_back(Lower(word));
    i = j;
  }
  return tokens;
}

std::string Detokenize(std::span<const std::string> tokens) {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out.push_back(' ');
    out += tokens[i];
  }
  return out;
}

std::vector<std::size_t> TagNouns(std::span<const std::string> tokens, const NounLexicon& lexicon) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (lexicon.IsNoun(tokens[i])) out.push_back(i);
  }
  return out;
}

std::string_view SplitName(Split split) { return split == Split::kTest ? "test" : "val"; }

Split ParseSplit(std::string_view name) {
  if (name == "test") return Split::kTest;
  if (name == "val") return Split::kVal;
  throw ValidationError("unknown split '" + std::string(name) + "' (expected test|val)");
}

Corpus::Corpus(std::string split_name, std::vector<ImageRecord> images,
               std::vector<CaptionRecord> captions)
    : split_name_(std::move(split_name)),
      images_(std::move(images)),
      captions_(std::move(captions)) {
  for (std::size_t i = 0; i < images_.size(); ++i) {
    if (!image_by_id_.emplace(images_[i].image_id, i).second) {
      throw ValidationError("duplicate image id " + images_[i].image_id);
    }
  }
  for (std::size_t i = 0; i < captions_.size(); ++i) {
    if (!caption_by_id_.emplace(captions_[i].caption_id, i).second) {
      throw ValidationError("duplicate caption id " + captions_[i].caption_id);
    }
  }
}

const CaptionRecord& Corpus::caption(std::string_view caption_id) const {
  return captions_[caption_index(caption_id)];
}

const ImageRecord& Corpus::image(std::string_view image_id) const {
  return images_[image_index(image_id)];
}

bool Corpus::has_caption(std::string_view caption_id) const {
  return caption_by_id_.contains(std::string(caption_id));
}

bool Corpus::has_image(std::string_view image_id) const {
  return image_by_id_.contains(std::string(image_id));
}

std::size_t Corpus::image_index(std::string_view image_id) const {
  auto it = image_by_id_.find(std::string(image_id));
  if (it == image_by_id_.end()) throw ValidationError("unknown image id " + std::string(image_id));
  return it->second;
}

std::size_t Corpus::caption_index(std::string_view caption_id) const {
  auto it = caption_by_id_.find(std::string(caption_id));
  if (it == caption_by_id_.end()) {
    throw ValidationError("unknown caption id " + std::string(caption_id));
  }
  return it->second;
}

std::filesystem::path Corpus::ImagePath(const ImageRecord& image) const {
  return image_root_ / image.file_path;
}

void Corpus::Validate() const {
  std::size_t referenced = 0;
  for (const auto& image : images_) {
    if (image.caption_ids.size() != kCaptionsPerImage) {
      throw ValidationError("image " + image.image_id + " has " +
                            std::to_string(image.caption_ids.size()) + " captions");
    }
    for (const auto& cid : image.caption_ids) {
      if (!has_caption(cid)) {
        throw ValidationError("image " + image.image_id + " references missing caption " + cid);
      }
      if (caption(cid).image_id != image.image_id) {
        throw ValidationError("caption " + cid + " owned by " + caption(cid).image_id +
                              " but listed under " + image.image_id);
      }
      ++referenced;
    }
  }
  if (referenced != captions_.size()) {
    throw ValidationError("corpus has " + std::to_string(captions_.size() - referenced) +
                          " orphan captions");
  }
  for (const auto& c : captions_) {
    for (std::size_t k = 0; k < c.noun_indices.size(); ++k) {
      if (c.noun_indices[k] >= c.tokens.size() ||
          (k > 0 && c.noun_indices[k] <= c.noun_indices[k - 1])) {
        throw ValidationError("caption " + c.caption_id + " has invalid noun indices");
      }
    }
  }
}

Corpus ParseKarpathySplit(std::string_view json_text, Split split, const NounLexicon& lexicon,
                          const LoadOptions& options) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("malformed annotation JSON: ") + e.what(), e.byte);
  }
  if (!root.is_object() || !root.contains("images") || !root["images"].is_array()) {
    throw ParseError("annotation JSON lacks an \"images\" array", 0);
  }
  const std::string_view want = SplitName(split);
  std::vector<ImageRecord> images;
  std::vector<CaptionRecord> captions;
  try {
    for (const json& entry : root["images"]) {
      if (entry.value("split", std::string()) != want) continue;
      ImageRecord image;
      if (entry.contains("cocoid")) {
        image.image_id = entry["cocoid"].is_string()
                             ? entry["cocoid"].get<std::string>()
                             : std::to_string(entry["cocoid"].get<long long>());
      } else if (entry.contains("imgid")) {
        image.image_id = std::to_string(entry["imgid"].get<long long>());
      } else {
        image.image_id = entry.at("filename").get<std::string>();
      }
      const std::string filename = entry.value("filename", image.image_id);
      const std::string dir = entry.value("filepath", std::string());
      image.file_path = dir.empty() ? filename : dir + "/" + filename;

      const json& sentences = entry.contains("sentences") ? entry["sentences"] : json::array();
      if (sentences.size() < kCaptionsPerImage) {
        const std::string msg = "image " + image.image_id + " has only " +
                                std::to_string(sentences.size()) + " captions";
        if (options.strict) throw ValidationError(msg);
        LogWarning(msg + "; skipped");
        continue;
      }
      for (std::size_t k = 0; k < kCaptionsPerImage; ++k) {
        const json& s = sentences[k];
        CaptionRecord c;
        c.caption_id = s.contains("sentid") ? std::to_string(s["sentid"].get<long long>())
                                            : image.image_id + "_" + std::to_string(k);
        c.image_id = image.image_id;
        c.text = s.value("raw", std::string());
        if (s.contains("tokens") && s["tokens"].is_array() && !s["tokens"].empty()) {
          for (const auto& t : s["tokens"]) c.tokens.push_back(Lower(t.get<std::string>()));
        } else {
          c.tokens = Tokenize(c.text);
        }
        if (c.text.empty()) c.text = Detokenize(c.tokens);
        c.noun_indices = TagNouns(c.tokens, lexicon);
        image.caption_ids.push_back(c.caption_id);
        captions.push_back(std::move(c));
      }
      images.push_back(std::move(image));
    }
  } catch (const json::exception& e) {
    throw ParseError(std::string("annotation entry has an unexpected shape: ") + e.what(), 0);
  }
  Corpus corpus(std::string(want), std::move(images), std::move(captions));
  corpus.Validate();
  return corpus;
}

Corpus LoadKarpathySplit(const std::filesystem::path& path, Split split, const NounLexicon& lexicon,
                         const LoadOptions& options) {
  Corpus corpus = ParseKarpathySplit(ReadFile(path), split, lexicon, options);
  corpus.set_image_root(path.parent_path());
  return corpus;
}

std::string SerializeCorpusJsonl(const Corpus& corpus) {
  std::string out;
  json header = {{"format", "rocoforge.corpus"},     {"version", 1},
                 {"split", corpus.split_name()},     {"image_root", corpus.image_root().string()},
                 {"images", corpus.images().size()}, {"captions", corpus.captions().size()}};
  out += header.dump() + "\n";
  for (const auto& image : corpus.images()) {
    json caps = json::array();
    for (const auto& cid : image.caption_ids) {
      const CaptionRecord& c = corpus.caption(cid);
      caps.push_back({{"caption_id", c.caption_id},
                      {"text", c.text},
                      {"tokens", c.tokens},
                      {"noun_indices", c.noun_indices}});
    }
    json rec = {{"image_id", image.image_id},
                {"file_path", image.file_path},
                {"captions", std::move(caps)}};
    out += rec.dump() + "\n";
  }
  return out;
}

void WriteCorpusJsonl(const Corpus& corpus, const std::filesystem::path& path) {
  WriteFileAtomic(path, SerializeCorpusJsonl(corpus));
}

Corpus ParseCorpusJsonl(std::string_view text) {
  std::vector<ImageRecord> images;
  std::vector<CaptionRecord> captions;
  std::string split;
  std::string image_root;
  std::size_t offset = 0;
  bool have_header = false;
  while (offset < text.size()) {
    std::size_t end = text.find('\n', offset);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(offset, end - offset);
    const std::size_t line_offset = offset;
    offset = end + 1;
    if (Trim(line).empty()) continue;
    json rec;
    try {
      rec = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ParseError(std::string("malformed corpus record: ") + e.what(), line_offset + e.byte);
    }
    if (!have_header) {
      if (rec.value("format", std::string()) != "rocoforge.corpus") {
        throw ParseError("not a rocoforge corpus file", line_offset);
      }
      split = rec.value("split", std::string());
      image_root = rec.value("image_root", std::string());
      have_header = true;
      continue;
    }
    try {
      ImageRecord image;
      image.image_id = rec.at("image_id").get<std::string>();
      image.file_path = rec.at("file_path").get<std::string>();
      for (const auto& c : rec.at("captions")) {
        CaptionRecord cap;
        cap.caption_id = c.at("caption_id").get<std::string>();
        cap.image_id = image.image_id;
        cap.text = c.at("text").get<std::string>();
        cap.tokens = c.at("tokens").get<std::vector<std::string>>();
        cap.noun_indices = c.at("noun_indices").get<std::vector<std::size_t>>();
        image.caption_ids.push_back(cap.caption_id);
        captions.push_back(std::move(cap));
      }
      images.push_back(std::move(image));
    } catch (const json::exception& e) {
      throw ParseError(std::string("corpus record has an unexpected shape: ") + e.what(),
                       line_offset);
    }
  }
  if (!have_header) throw ParseError("empty corpus file", 0);
  Corpus corpus(split, std::move(images), std::move(captions));
  corpus.set_image_root(image_root);
  corpus.Validate();
  return corpus;
}

Corpus ReadCorpusJsonl(const std::filesystem::path& path) {
  return ParseCorpusJsonl(ReadFile(path));
}

}  // namespace rocoforge
