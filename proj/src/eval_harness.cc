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

#include "rocoforge/eval_harness.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <map>
#include <numeric>
#include <sstream>
#include <unordered_set>
#include <utility>

#include "rocoforge/errors.h"
#include "rocoforge/io.h"
#include "rocoforge/kernels.h"
#include "rocoforge/logging.h"
#include "rocoforge/parallel.h"

namespace rocoforge {
namespace {

constexpr std::string_view kBaseI2t = "base_i2t";
constexpr std::string_view kBaseT2i = "base_t2i";

std::uint32_t CheckedIndex(std::size_t i) {
  if (i > UINT32_MAX) throw ShapeError("gallery larger than 2^32 items");
  return static_cast<std::uint32_t>(i);
}

void CheckCompatible(const EmbeddingMatrix& a, const EmbeddingMatrix& b) {
  if (a.dim() != b.dim() || a.provider().name != b.provider().name) {
    throw ShapeError("embedding spaces differ: " + a.provider().name + "/" +
                     std::to_string(a.dim()) + " vs " + b.provider().name + "/" +
                     std::to_string(b.dim()));
  }
}

std::string Fixed2(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.2f", Round2(v));
  return buf;
}

std::string OptFixed2(const std::optional<double>& v) { return v ? Fixed2(*v) : "-"; }

bool IsImageVariantName(std::string_view name) {
  return name == kBaseT2i || name.starts_with("mix") || name.starts_with("patch");
}

}  // namespace

std::string_view DirectionName(Direction d) { return d == Direction::kImageToText ? "i2t" : "t2i"; }

std::size_t Pool::fooling_count() const {
  return static_cast<std::size_t>(std::count(fooling.begin(), fooling.end(), 1));
}

bool Pool::is_positive(std::size_t query, std::size_t item) const {
  const auto& p = positives.at(query);
  return std::binary_search(p.begin(), p.end(), static_cast<std::uint32_t>(item));
}

Pool AssembleCaptionPool(const Corpus& corpus, std::span<const CaptionManifestEntry> captions,
                         PositiveRule rule) {
  Pool pool;
  pool.direction = Direction::kImageToText;
  const auto& images = corpus.images();
  const auto& originals = corpus.captions();
  pool.queries.reserve(images.size());
  pool.positives.reserve(images.size());
  for (const auto& img : images) {
    pool.queries.push_back(img.image_id);
    std::vector<std::uint32_t> pos;
    const std::size_t take = rule == PositiveRule::kFirstOriginal
                                 ? std::min<std::size_t>(1, img.caption_ids.size())
                                 : img.caption_ids.size();
    for (std::size_t k = 0; k < take; ++k) {
      pos.push_back(CheckedIndex(corpus.caption_index(img.caption_ids[k])));
    }
    std::sort(pos.begin(), pos.end());
    pool.positives.push_back(std::move(pos));
  }
  pool.gallery.reserve(originals.size() + captions.size());
  for (const auto& c : originals) pool.gallery.push_back(c.caption_id);
  pool.fooling.assign(originals.size(), 0);

  std::unordered_set<std::string> seen;
  for (const auto& e : captions) {
    if (!corpus.has_caption(e.orig_caption_id)) {
      throw ManifestError("caption manifest references unknown caption " + e.orig_caption_id);
    }
    if (!corpus.has_image(e.image_id) || corpus.caption(e.orig_caption_id).image_id != e.image_id) {
      throw ManifestError("caption manifest entry " + e.new_caption_id + " names the wrong image " +
                          e.image_id);
    }
    if (!seen.insert(e.new_caption_id).second || corpus.has_caption(e.new_caption_id)) {
      throw ManifestError("duplicate caption id " + e.new_caption_id);
    }
    pool.gallery.push_back(e.new_caption_id);
    pool.fooling.push_back(1);
  }
  CheckedIndex(pool.gallery.size());
  return pool;
}

Pool AssembleImagePool(const Corpus& corpus, std::span<const ImageManifestEntry> images) {
  Pool pool;
  pool.direction = Direction::kTextToImage;
  const auto& originals = corpus.images();
  for (const auto& c : corpus.captions()) {
    pool.queries.push_back(c.caption_id);
    pool.positives.push_back({CheckedIndex(corpus.image_index(c.image_id))});
  }
  for (const auto& img : originals) pool.gallery.push_back(img.image_id);
  pool.fooling.assign(originals.size(), 0);

  std::unordered_set<std::string> seen;
  for (const auto& e : images) {
    if (!corpus.has_image(e.orig_image_id)) {
      throw ManifestError("image manifest references unknown image " + e.orig_image_id);
    }
    if (!corpus.has_image(e.fake_image_id)) {
      throw ManifestError("image manifest references unknown fake " + e.fake_image_id);
    }
    if (!seen.insert(e.new_image_id).second || corpus.has_image(e.new_image_id)) {
      throw ManifestError("duplicate image id " + e.new_image_id);
    }
    pool.gallery.push_back(e.new_image_id);
    pool.fooling.push_back(1);
  }
  CheckedIndex(pool.gallery.size());
  return pool;
}

SimilarityMatrix::SimilarityMatrix(std::size_t rows, std::size_t cols, std::vector<float> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows_ * cols_) throw ShapeError("similarity data does not match shape");
}

SimilarityMatrix Similarity(const EmbeddingMatrix& queries, const EmbeddingMatrix& gallery,
                            const SimilarityOptions& options) {
  CheckCompatible(queries, gallery);
  const std::size_t n = queries.rows();
  const std::size_t m = gallery.rows();
  const std::size_t dim = queries.dim();
  SimilarityMatrix sim(n, m);
  const std::size_t tile = std::max<std::size_t>(1, options.tile_cols);
  const std::size_t col_tiles = (m + tile - 1) / tile;
  // Tiles over gallery columns keep one block of gallery rows hot while a
  // run of queries streams past it.
  ParallelFor(
      col_tiles, options.jobs,
      [&](std::size_t t) {
        const std::size_t begin = t * tile;
        const std::size_t count = std::min(tile, m - begin);
        const auto rows = gallery.data().subspan(begin * dim, count * dim);
        for (std::size_t q = 0; q < n; ++q) {
          kernels::DotRows(queries.row(q), rows, dim, sim.row(q).subspan(begin, count));
        }
      },
      1);
  return sim;
}

std::vector<std::uint32_t> StreamTopOne(const EmbeddingMatrix& queries,
                                        std::span<const EmbeddingMatrix* const> segments,
                                        const SimilarityOptions& options) {
  std::size_t total = 0;
  for (const auto* s : segments) {
    CheckCompatible(queries, *s);
    total += s->rows();
  }
  if (total == 0) throw ShapeError("empty gallery");
  CheckedIndex(total);
  const std::size_t dim = queries.dim();
  const std::size_t workers = static_cast<std::size_t>(std::max(1, options.jobs));
  const std::size_t cap =
      std::max<std::size_t>(256, options.memory_budget_bytes / (sizeof(float) * workers));
  const std::size_t block = std::min(cap, total);

  std::vector<std::uint32_t> best(queries.rows(), 0);
  ParallelFor(
      queries.rows(), options.jobs,
      [&](std::size_t q) {
        thread_local std::vector<float> scratch;
        if (scratch.size() < block) scratch.resize(block);
        const auto query = queries.row(q);
        float best_score = 0.0f;
        std::size_t best_index = 0;
        bool have = false;
        std::size_t offset = 0;
        for (const auto* seg : segments) {
          for (std::size_t begin = 0; begin < seg->rows(); begin += block) {
            const std::size_t count = std::min(block, seg->rows() - begin);
            std::span<float> out(scratch.data(), count);
            kernels::DotRows(query, seg->data().subspan(begin * dim, count * dim), dim, out);
            const std::size_t local = kernels::ArgMaxFirst(out);
            // Strict comparison keeps the earliest global index on ties.
            if (!have || out[local] > best_score) {
              best_score = out[local];
              best_index = offset + begin + local;
              have = true;
            }
          }
          offset += seg->rows();
        }
        best[q] = static_cast<std::uint32_t>(best_index);
      },
      8);
  return best;
}

std::vector<std::uint32_t> TopOne(const SimilarityMatrix& sim, int jobs) {
  if (sim.cols() == 0) throw ShapeError("empty gallery");
  std::vector<std::uint32_t> best(sim.rows(), 0);
  ParallelFor(sim.rows(), jobs,
              [&](std::size_t q) { best[q] = CheckedIndex(kernels::ArgMaxFirst(sim.row(q))); });
  return best;
}

std::vector<std::vector<std::uint32_t>> TopK(const SimilarityMatrix& sim, std::size_t k, int jobs) {
  if (k == 0) throw ValidationError("k must be positive");
  const std::size_t take = std::min(k, sim.cols());
  std::vector<std::vector<std::uint32_t>> out(sim.rows());
  ParallelFor(sim.rows(), jobs, [&](std::size_t q) {
    const auto row = sim.row(q);
    std::vector<std::uint32_t> idx(row.size());
    std::iota(idx.begin(), idx.end(), 0u);
    std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(take), idx.end(),
                      [&](std::uint32_t a, std::uint32_t b) {
                        if (row[a] != row[b]) return row[a] > row[b];
                        return a < b;
                      });
    idx.resize(take);
    out[q] = std::move(idx);
  });
  return out;
}

namespace {

void CheckPoolShape(const SimilarityMatrix& sim, const Pool& pool) {
  if (sim.rows() != pool.queries.size() || sim.cols() != pool.gallery.size()) {
    throw ShapeError("similarity " + std::to_string(sim.rows()) + "x" + std::to_string(sim.cols()) +
                     " does not match pool " + std::to_string(pool.queries.size()) + "x" +
                     std::to_string(pool.gallery.size()));
  }
}

void CheckTopShape(std::span<const std::uint32_t> top1, const Pool& pool) {
  if (top1.size() != pool.queries.size()) throw ShapeError("top-1 list does not match pool");
  if (pool.queries.empty()) throw ShapeError("pool has no queries");
}

}  // namespace

double RecallFromTopOne(std::span<const std::uint32_t> top1, const Pool& pool) {
  CheckTopShape(top1, pool);
  std::size_t hits = 0;
  for (std::size_t q = 0; q < top1.size(); ++q) hits += pool.is_positive(q, top1[q]) ? 1 : 0;
  return 100.0 * static_cast<double>(hits) / static_cast<double>(top1.size());
}

double FalseRecallFromTopOne(std::span<const std::uint32_t> top1, const Pool& pool) {
  CheckTopShape(top1, pool);
  std::size_t hits = 0;
  for (const auto g : top1) hits += pool.fooling.at(g) ? 1 : 0;
  return 100.0 * static_cast<double>(hits) / static_cast<double>(top1.size());
}

double RecallAt1(const SimilarityMatrix& sim, const Pool& pool) {
  CheckPoolShape(sim, pool);
  return RecallFromTopOne(TopOne(sim), pool);
}

double FalseRecallAt1(const SimilarityMatrix& sim, const Pool& pool) {
  CheckPoolShape(sim, pool);
  return FalseRecallFromTopOne(TopOne(sim), pool);
}

double RecallAtK(const SimilarityMatrix& sim, const Pool& pool, std::size_t k) {
  CheckPoolShape(sim, pool);
  if (pool.queries.empty()) throw ShapeError("pool has no queries");
  const auto top = TopK(sim, k);
  std::size_t hits = 0;
  for (std::size_t q = 0; q < top.size(); ++q) {
    for (const auto g : top[q]) {
      if (pool.is_positive(q, g)) {
        ++hits;
        break;
      }
    }
  }
  return 100.0 * static_cast<double>(hits) / static_cast<double>(top.size());
}

double DropRate(double base_r1, double new_r1) {
  if (!(base_r1 > 0.0)) throw UndefinedDropRate("drop rate undefined for base R@1 of 0");
  return 100.0 * (base_r1 - new_r1) / base_r1;
}

double Round2(double v) {
  // The nudge absorbs binary representation error (21.245 is stored as
  // 21.24499...), matching how the figures are printed by hand.
  const double scaled = std::abs(v) * 100.0;
  const double r = std::floor(scaled + 0.5 + 1e-9) / 100.0;
  return std::copysign(r, v);
}

namespace {

struct ModelEmbeddings {
  EmbeddingMatrix captions;
  EmbeddingMatrix images;
};

template <typename Variant>
std::vector<std::vector<std::size_t>> GroupByName(std::span<const Variant> variants) {
  std::vector<std::vector<std::size_t>> groups;
  std::map<std::string, std::size_t> slot;
  for (std::size_t i = 0; i < variants.size(); ++i) {
    auto [it, inserted] = slot.emplace(variants[i].name, groups.size());
    if (inserted) groups.emplace_back();
    groups[it->second].push_back(i);
  }
  return groups;
}

// Drop rate against a base of zero is undefined; the row keeps its R@1 and
// FR@1 and prints "-" for the drop.
std::optional<double> DropOrNone(double base, double r) {
  if (base > 0.0) return DropRate(base, r);
  return std::nullopt;
}

ReportRow MeanRow(std::span<const ReportRow> rows) {
  ReportRow mean = rows.front();
  mean.seed = "mean";
  double r = 0.0, drop = 0.0, fr = 0.0;
  bool have_drop = true;
  for (const auto& row : rows) {
    r += row.r_at_1;
    have_drop = have_drop && row.drop_rate.has_value();
    drop += row.drop_rate.value_or(0.0);
    fr += row.fr_at_1.value_or(0.0);
  }
  const double n = static_cast<double>(rows.size());
  mean.r_at_1 = r / n;
  mean.drop_rate = have_drop ? std::optional<double>(drop / n) : std::nullopt;
  mean.fr_at_1 = fr / n;
  return mean;
}

}  // namespace

EvalReport Evaluate(const Corpus& corpus, std::span<const CaptionVariant> captions,
                    std::span<const ImageVariant> images, std::span<Embedder* const> models,
                    const EvalOptions& options) {
  if (corpus.images().empty()) throw ValidationError("cannot evaluate an empty corpus");
  // Assemble every pool up front so manifest problems surface before any
  // embedding work.
  const Pool base_i2t = AssembleCaptionPool(corpus, {}, options.rule);
  const Pool base_t2i = AssembleImagePool(corpus, {});
  std::vector<Pool> caption_pools;
  for (const auto& v : captions) {
    caption_pools.push_back(AssembleCaptionPool(corpus, v.entries, options.rule));
  }
  std::vector<Pool> image_pools;
  for (const auto& v : images) image_pools.push_back(AssembleImagePool(corpus, v.entries));

  std::vector<std::string> caption_texts;
  for (const auto& c : corpus.captions()) caption_texts.push_back(c.text);
  std::vector<std::filesystem::path> image_paths;
  for (const auto& img : corpus.images()) image_paths.push_back(corpus.ImagePath(img));

  const auto caption_groups = GroupByName(captions);
  const auto image_groups = GroupByName(images);

  EvalReport report;
  for (Embedder* model : models) {
    const std::string name = model->id().name;
    LogInfo("evaluating " + name);
    const EmbeddingMatrix cap = model->EmbedTexts(caption_texts);
    const EmbeddingMatrix img = model->EmbedImages(image_paths);

    const EmbeddingMatrix* cap_only[] = {&cap};
    const EmbeddingMatrix* img_only[] = {&img};
    const double i2t = RecallFromTopOne(StreamTopOne(img, cap_only, options.similarity), base_i2t);
    const double t2i = RecallFromTopOne(StreamTopOne(cap, img_only, options.similarity), base_t2i);
    for (const auto& [base, label] : {std::pair{i2t, "i2t"}, std::pair{t2i, "t2i"}}) {
      if (base <= 0.0) {
        LogWarning("base R@1 is 0 for " + name + " " + label + "; drop rates left undefined");
      }
    }
    report.rows.push_back({name, std::string(kBaseI2t), "-", Direction::kImageToText, i2t,
                           std::nullopt, std::nullopt});
    report.rows.push_back({name, std::string(kBaseT2i), "-", Direction::kTextToImage, t2i,
                           std::nullopt, std::nullopt});

    for (const auto& group : caption_groups) {
      std::vector<ReportRow> rows;
      for (const std::size_t i : group) {
        const auto& v = captions[i];
        std::vector<std::string> texts;
        texts.reserve(v.entries.size());
        for (const auto& e : v.entries) texts.push_back(e.text);
        const EmbeddingMatrix forged = model->EmbedTexts(texts);
        const EmbeddingMatrix* segs[] = {&cap, &forged};
        const auto top = StreamTopOne(img, segs, options.similarity);
        const double r = RecallFromTopOne(top, caption_pools[i]);
        rows.push_back({name, v.name, std::to_string(v.seed), Direction::kImageToText, r,
                        DropOrNone(i2t, r), FalseRecallFromTopOne(top, caption_pools[i])});
      }
      report.rows.insert(report.rows.end(), rows.begin(), rows.end());
      if (rows.size() > 1) report.rows.push_back(MeanRow(rows));
    }

    for (const auto& group : image_groups) {
      std::vector<ReportRow> rows;
      for (const std::size_t i : group) {
        const auto& v = images[i];
        std::vector<std::filesystem::path> paths;
        paths.reserve(v.entries.size());
        for (const auto& e : v.entries) paths.push_back(v.root / e.output_path);
        EmbeddingMatrix forged;
        try {
          forged = model->EmbedImages(paths);
        } catch (const InvalidImage& e) {
          throw MissingEmbedding(std::string("no embedding for a generated image of ") + v.name +
                                 ": " + e.what());
        } catch (const IoError& e) {
          throw MissingEmbedding(std::string("no embedding for a generated image of ") + v.name +
                                 ": " + e.what());
        }
        const EmbeddingMatrix* segs[] = {&img, &forged};
        const auto top = StreamTopOne(cap, segs, options.similarity);
        const double r = RecallFromTopOne(top, image_pools[i]);
        rows.push_back({name, v.name, std::to_string(v.seed), Direction::kTextToImage, r,
                        DropOrNone(t2i, r), FalseRecallFromTopOne(top, image_pools[i])});
      }
      report.rows.insert(report.rows.end(), rows.begin(), rows.end());
      if (rows.size() > 1) report.rows.push_back(MeanRow(rows));
    }
  }
  return report;
}

std::string ReportCsv(const EvalReport& report) {
  std::string out = "model,variant,seed,r_at_1,drop_rate,fr_at_1\n";
  for (const auto& r : report.rows) {
    out += r.model + "," + r.variant + "," + r.seed + "," + Fixed2(r.r_at_1) + "," +
           OptFixed2(r.drop_rate) + "," + OptFixed2(r.fr_at_1) + "\n";
  }
  return out;
}

EvalReport ParseReportCsv(std::string_view text) {
  EvalReport report;
  std::size_t offset = 0;
  bool header = true;
  while (offset < text.size()) {
    std::size_t end = text.find('\n', offset);
    if (end == std::string_view::npos) end = text.size();
    const std::string line(Trim(text.substr(offset, end - offset)));
    const std::size_t line_start = offset;
    offset = end + 1;
    if (line.empty()) continue;
    std::vector<std::string> cols;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) cols.push_back(cell);
    if (header) {
      if (line != "model,variant,seed,r_at_1,drop_rate,fr_at_1") {
        throw ParseError("unexpected report header", line_start);
      }
      header = false;
      continue;
    }
    if (cols.size() != 6) throw ParseError("report row needs 6 columns", line_start);
    auto num = [&](const std::string& s) -> std::optional<double> {
      if (s == "-") return std::nullopt;
      try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size()) throw ParseError("bad number '" + s + "'", line_start);
        return v;
      } catch (const std::logic_error&) {
        throw ParseError("bad number '" + s + "'", line_start);
      }
    };
    ReportRow row;
    row.model = cols[0];
    row.variant = cols[1];
    row.seed = cols[2];
    row.direction =
        IsImageVariantName(row.variant) ? Direction::kTextToImage : Direction::kImageToText;
    const auto r = num(cols[3]);
    if (!r) throw ParseError("missing r_at_1", line_start);
    row.r_at_1 = *r;
    row.drop_rate = num(cols[4]);
    row.fr_at_1 = num(cols[5]);
    report.rows.push_back(std::move(row));
  }
  if (header) throw ParseError("empty report", 0);
  return report;
}

std::string ReportMarkdown(const EvalReport& report) {
  std::string out = "| Model | Variant | Seed | R@1 | Drop rate | FR@1 |\n";
  out += "|---|---|---|---:|---:|---:|\n";
  for (const auto& r : report.rows) {
    out += "| " + r.model + " | " + r.variant + " | " + r.seed + " | " + Fixed2(r.r_at_1) + " | " +
           OptFixed2(r.drop_rate) + " | " + OptFixed2(r.fr_at_1) + " |\n";
  }
  return out;
}

std::string ReportText(const EvalReport& report) {
  std::vector<std::array<std::string, 6>> cells;
  cells.push_back({"model", "variant", "seed", "R@1", "drop", "FR@1"});
  for (const auto& r : report.rows) {
    cells.push_back({r.model, r.variant, r.seed, Fixed2(r.r_at_1), OptFixed2(r.drop_rate),
                     OptFixed2(r.fr_at_1)});
  }
  std::array<std::size_t, 6> width{};
  for (const auto& row : cells) {
    for (std::size_t c = 0; c < 6; ++c) width[c] = std::max(width[c], row[c].size());
  }
  std::string out;
  for (const auto& row : cells) {
    std::string line;
    for (std::size_t c = 0; c < 6; ++c) {
      const std::string pad(width[c] - row[c].size(), ' ');
      // Text columns left-aligned, numbers right-aligned.
      line += c < 3 ? row[c] + pad : pad + row[c];
      if (c + 1 < 6) line += "  ";
    }
    while (!line.empty() && line.back() == ' ') line.pop_back();
    out += line + "\n";
  }
  return out;
}

std::string CheckReportConsistency(const EvalReport& report, double tolerance) {
  std::map<std::pair<std::string, Direction>, double> base;
  for (const auto& r : report.rows) {
    if (r.variant == kBaseI2t || r.variant == kBaseT2i) base[{r.model, r.direction}] = r.r_at_1;
  }
  for (const auto& r : report.rows) {
    if (!r.drop_rate) continue;
    const auto it = base.find({r.model, r.direction});
    if (it == base.end()) {
      return r.model + "/" + r.variant + ": no base row for " +
             std::string(DirectionName(r.direction));
    }
    const double expect = DropRate(it->second, r.r_at_1);
    if (std::abs(expect - *r.drop_rate) > tolerance) {
      return r.model + "/" + r.variant + "/" + r.seed + ": drop " + Fixed2(*r.drop_rate) +
             " but R@1 implies " + Fixed2(expect);
    }
  }
  return {};
}

}  // namespace rocoforge
