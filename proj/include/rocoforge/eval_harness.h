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

#ifndef ROCOFORGE_EVAL_HARNESS_H_
#define ROCOFORGE_EVAL_HARNESS_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rocoforge/caption_forge.h"
#include "rocoforge/corpus.h"
#include "rocoforge/embedding.h"
#include "rocoforge/image_forge.h"

namespace rocoforge {

enum class Direction { kImageToText, kTextToImage };

std::string_view DirectionName(Direction d);

// How image-to-text hits are counted. kAnyOriginal: the top-1 caption is any
// of the image's five originals (COCO protocol). kFirstOriginal: only the
// image's first caption counts.
enum class PositiveRule { kAnyOriginal, kFirstOriginal };

// Retrieval pool in index space. Gallery order: originals (corpus order) then
// generated items (manifest order). Generated items are never positives.
struct Pool {
  Direction direction = Direction::kImageToText;
  std::vector<std::string> queries;
  std::vector<std::string> gallery;
  std::vector<std::vector<std::uint32_t>> positives;  // per query, sorted
  std::vector<std::uint8_t> fooling;                  // per gallery item

  std::size_t fooling_count() const;
  bool is_positive(std::size_t query, std::size_t item) const;
};

// Image-to-text: queries are the corpus images, gallery = original captions
// plus `captions`. Text-to-image: queries are the original captions, gallery
// = corpus images plus `images`. Entries naming ids outside the corpus throw
// ManifestError.
Pool AssembleCaptionPool(const Corpus& corpus, std::span<const CaptionManifestEntry> captions,
                         PositiveRule rule = PositiveRule::kAnyOriginal);
Pool AssembleImagePool(const Corpus& corpus, std::span<const ImageManifestEntry> images);

// Row-major float32 scores, rows = queries, cols = gallery.
class SimilarityMatrix {
 public:
  SimilarityMatrix() = default;
  SimilarityMatrix(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), data_(rows * cols, 0.0f) {}
  SimilarityMatrix(std::size_t rows, std::size_t cols, std::vector<float> data);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  float at(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
  float& at(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  std::span<const float> row(std::size_t r) const {
    return std::span<const float>(data_).subspan(r * cols_, cols_);
  }
  std::span<float> row(std::size_t r) { return std::span<float>(data_).subspan(r * cols_, cols_); }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<float> data_;
};

struct SimilarityOptions {
  int jobs = 1;
  // Upper bound for per-worker scratch in the streaming ranker.
  std::size_t memory_budget_bytes = std::size_t{256} << 20;
  // Gallery rows per tile when materializing a matrix.
  std::size_t tile_cols = 1024;
};

// Dot products of unit-norm rows (cosine). Throws ShapeError on dim or
// provider mismatch.
SimilarityMatrix Similarity(const EmbeddingMatrix& queries, const EmbeddingMatrix& gallery,
                            const SimilarityOptions& options = {});

// Top-1 gallery index per query over the concatenation of `segments`,
// without materializing the score matrix. Ties go to the lowest global index.
std::vector<std::uint32_t> StreamTopOne(const EmbeddingMatrix& queries,
                                        std::span<const EmbeddingMatrix* const> segments,
                                        const SimilarityOptions& options = {});

// Per-query ranking prefix: score descending, then gallery index ascending.
std::vector<std::uint32_t> TopOne(const SimilarityMatrix& sim, int jobs = 1);
std::vector<std::vector<std::uint32_t>> TopK(const SimilarityMatrix& sim, std::size_t k,
                                             int jobs = 1);

// Percentages in [0, 100].
double RecallAt1(const SimilarityMatrix& sim, const Pool& pool);
double FalseRecallAt1(const SimilarityMatrix& sim, const Pool& pool);
double RecallAtK(const SimilarityMatrix& sim, const Pool& pool, std::size_t k);

double RecallFromTopOne(std::span<const std::uint32_t> top1, const Pool& pool);
double FalseRecallFromTopOne(std::span<const std::uint32_t> top1, const Pool& pool);

// 100 * (base - new) / base. Throws UndefinedDropRate when base <= 0.
double DropRate(double base_r1, double new_r1);

// Half-away-from-zero rounding to two decimals (the tables' precision).
double Round2(double v);

struct ReportRow {
  std::string model;
  std::string variant;
  std::string seed;  // decimal seed, "-" for base rows, "mean" for averages
  Direction direction = Direction::kImageToText;
  double r_at_1 = 0.0;
  std::optional<double> drop_rate;  // none on base rows
  std::optional<double> fr_at_1;
};

struct EvalReport {
  std::vector<ReportRow> rows;
};

struct CaptionVariant {
  std::string name;  // policy name
  std::uint64_t seed = 0;
  std::vector<CaptionManifestEntry> entries;
};

struct ImageVariant {
  std::string name;  // e.g. "mix_0.9"
  std::uint64_t seed = 0;
  std::vector<ImageManifestEntry> entries;
  std::filesystem::path root;  // output_path entries are relative to this
};

struct EvalOptions {
  PositiveRule rule = PositiveRule::kAnyOriginal;
  SimilarityOptions similarity;
};

// For each model: base i2t and t2i rows on the clean pools, one row per
// (variant, seed), then a "mean" row per variant evaluated under several
// seeds. Row order is fixed: models in order, base rows, caption variants,
// image variants, each in input order.
EvalReport Evaluate(const Corpus& corpus, std::span<const CaptionVariant> captions,
                    std::span<const ImageVariant> images, std::span<Embedder* const> models,
                    const EvalOptions& options = {});

// model,variant,seed,r_at_1,drop_rate,fr_at_1 with two decimals; "-" where a
// base row has no drop rate or FR@1.
std::string ReportCsv(const EvalReport& report);
EvalReport ParseReportCsv(std::string_view text);
std::string ReportMarkdown(const EvalReport& report);
std::string ReportText(const EvalReport& report);

// Empty when every row's drop rate agrees with its R@1 and the base R@1 to
// within `tolerance`; otherwise a description of the first mismatch.
std::string CheckReportConsistency(const EvalReport& report, double tolerance = 0.01);

}  // namespace rocoforge

#endif  // ROCOFORGE_EVAL_HARNESS_H_
