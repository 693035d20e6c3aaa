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

#include "rocoforge/cli.h"

#include <CLI11.hpp>
#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <map>
#include <memory>
#include <nlohmann/json.hpp>
#include <string>
#include <utility>
#include <vector>

#include "rocoforge/caption_forge.h"
#include "rocoforge/concept_registry.h"
#include "rocoforge/corpus.h"
#include "rocoforge/ei_scorer.h"
#include "rocoforge/embedding.h"
#include "rocoforge/errors.h"
#include "rocoforge/eval_harness.h"
#include "rocoforge/hashing.h"
#include "rocoforge/image_forge.h"
#include "rocoforge/io.h"
#include "rocoforge/logging.h"

#ifndef ROCOFORGE_DATA_DIR
#define ROCOFORGE_DATA_DIR "data"
#endif

namespace rocoforge {
namespace {

namespace fs = std::filesystem;
using json = nlohmann::json;

// A required input file or directory is absent. Maps to exit code 2.
class MissingInput : public Error {
 public:
  using Error::Error;
};

const std::vector<std::string>& AllPolicies() {
  static const std::vector<std::string> kAll = {"rand_voca",     "same_concept",  "diff_concept",
                                                "danger",        "delete_random", "delete_high_ei",
                                                "delete_low_ei", "multiword_2",   "multiword_3",
                                                "multiword_4",   "multiword_5"};
  return kAll;
}

struct RunConfig {
  std::string corpus;
  std::string split = "test";
  std::vector<std::string> provider_urls;
  std::vector<std::string> models;
  std::vector<std::string> policies;
  std::vector<double> lambdas;
  std::vector<std::string> modes;
  std::vector<std::uint64_t> seeds;
  std::string out = ".";
  std::string cache;
  bool strict = false;
  int jobs = 1;
  std::string config;
  std::string ei_dir;
  std::string format = "text";
  std::string positive = "any";
  bool full_heatmap = false;
  bool verbose = false;

  std::string data_dir;
  std::string nouns;
  std::string stop_nouns;
  std::string registry;
  std::string synonyms;
  std::string vocab;
  std::string danger;
};

fs::path DataFile(const RunConfig& cfg, const std::string& explicit_path, const char* name) {
  if (!explicit_path.empty()) return explicit_path;
  return fs::path(cfg.data_dir) / name;
}

void RequireFile(const fs::path& path) {
  if (!fs::is_regular_file(path)) throw MissingInput("missing input: " + path.string());
}

// Records what a command read and wrote, so every output can be traced back
// through earlier manifests to the original annotation file.
class RunManifest {
 public:
  RunManifest(std::string command, json config)
      : command_(std::move(command)), config_(std::move(config)) {}

  void AddInput(const fs::path& path) {
    RequireFile(path);
    inputs_[path.generic_string()] = ToHex(Sha256File(path));
  }
  void AddOutput(const std::string& name, std::string_view bytes) {
    outputs_[name] = ToHex(Sha256(bytes));
  }
  void AddOutputFile(const std::string& name, const fs::path& path) {
    outputs_[name] = ToHex(Sha256File(path));
  }

  void Write(const fs::path& out_dir) const {
    json j;
    j["tool"] = "rocoforge";
    j["version"] = std::string(kToolVersion);
    j["command"] = command_;
    j["config"] = config_;
    j["config_hash"] = ToHex(Sha256(config_.dump()));
    j["inputs"] = inputs_;
    j["outputs"] = outputs_;
    WriteFileAtomic(out_dir / ("run-" + command_ + ".json"), j.dump(2) + "\n");
  }

 private:
  std::string command_;
  json config_;
  std::map<std::string, std::string> inputs_;
  std::map<std::string, std::string> outputs_;
};

// Fields that change what a command produces. Worker count, cache location
// and output directory are deliberately left out: they must not change any
// output byte, so they must not change the config hash either.
json ConfigJson(const std::string& command, const RunConfig& cfg) {
  json j;
  j["command"] = command;
  j["corpus"] = cfg.corpus;
  j["split"] = cfg.split;
  j["models"] = cfg.models;
  j["provider_url"] = cfg.provider_urls;
  j["policy"] = cfg.policies;
  std::vector<std::string> lambdas;
  for (double l : cfg.lambdas) lambdas.push_back(LambdaLabel(l));
  j["lambda"] = lambdas;
  j["mode"] = cfg.modes;
  j["seed"] = cfg.seeds;
  j["strict"] = cfg.strict;
  j["positive"] = cfg.positive;
  j["full_heatmap"] = cfg.full_heatmap;
  return j;
}

void WriteOutput(const fs::path& out_dir, const std::string& rel, std::string_view bytes,
                 RunManifest& manifest) {
  WriteFileAtomic(out_dir / rel, bytes);
  manifest.AddOutput(rel, bytes);
}

fs::path CorpusPath(const RunConfig& cfg) {
  return cfg.corpus.empty() ? fs::path(cfg.out) / "corpus.jsonl" : fs::path(cfg.corpus);
}

Corpus LoadCorpus(const RunConfig& cfg, RunManifest& manifest) {
  const fs::path path = CorpusPath(cfg);
  manifest.AddInput(path);
  return ReadCorpusJsonl(path);
}

std::vector<std::uint64_t> SeedsOrDefault(const RunConfig& cfg) {
  return cfg.seeds.empty() ? std::vector<std::uint64_t>{0} : cfg.seeds;
}

// Owns providers, caches and embedders for the --models list.
class ModelSet {
 public:
  explicit ModelSet(const RunConfig& cfg) {
    std::string default_url;
    std::map<std::string, std::string> urls;
    for (const auto& spec : cfg.provider_urls) {
      const auto eq = spec.find('=');
      if (eq != std::string::npos && !spec.starts_with("http")) {
        urls[spec.substr(0, eq)] = spec.substr(eq + 1);
      } else {
        default_url = spec;
      }
    }
    std::string cache_dir = cfg.cache;
    if (const char* env = std::getenv("ROCOFORGE_CACHE"); env != nullptr && *env != '\0') {
      cache_dir = env;
    }
    const std::vector<std::string> names =
        cfg.models.empty() ? std::vector<std::string>{"stub"} : cfg.models;
    for (const auto& spec : names) {
      const ProviderId id = ParseProviderSpec(spec);
      std::string url = default_url;
      if (auto it = urls.find(id.name); it != urls.end()) url = it->second;
      if (url.empty() && !IsStubName(id.name)) {
        throw MissingInput("no --provider-url for model " + id.name);
      }
      EmbeddingCache* cache = nullptr;
      if (!cache_dir.empty()) {
        caches_.push_back(std::make_unique<EmbeddingCache>(CachePathFor(cache_dir, id), id));
        cache = caches_.back().get();
      }
      EmbedderOptions options;
      options.jobs = cfg.jobs;
      embedders_.push_back(std::make_unique<Embedder>(MakeProvider(id, url), cache, options));
      pointers_.push_back(embedders_.back().get());
    }
  }

  std::span<Embedder* const> embedders() const { return pointers_; }
  const std::vector<std::unique_ptr<EmbeddingCache>>& caches() const { return caches_; }

  void Flush() {
    for (auto& c : caches_) {
      if (c->dirty()) c->Flush();
    }
  }

 private:
  std::vector<std::unique_ptr<EmbeddingCache>> caches_;
  std::vector<std::unique_ptr<Embedder>> embedders_;
  std::vector<Embedder*> pointers_;
};

// ---- manifest discovery ---------------------------------------------------

fs::path CaptionManifestRel(const std::string& policy, std::uint64_t seed) {
  return fs::path("captions") / (policy + "-" + std::to_string(seed) + ".jsonl");
}

std::string ImageVariantName(MixMode mode, double lambda) {
  return std::string(MixModeName(mode)) + "_" + LambdaLabel(lambda);
}

fs::path ImageManifestRel(MixMode mode, double lambda, std::uint64_t seed) {
  return fs::path("images") /
         ("manifest-" + ImageVariantName(mode, lambda) + "-" + std::to_string(seed) + ".jsonl");
}

// "<name>-<seed>" with a decimal seed after the last dash.
std::optional<std::pair<std::string, std::uint64_t>> SplitNameSeed(const std::string& stem) {
  const auto dash = stem.rfind('-');
  if (dash == std::string::npos || dash + 1 == stem.size()) return std::nullopt;
  const std::string digits = stem.substr(dash + 1);
  if (!std::all_of(digits.begin(), digits.end(), [](char c) { return c >= '0' && c <= '9'; })) {
    return std::nullopt;
  }
  try {
    return std::make_pair(stem.substr(0, dash), std::stoull(digits));
  } catch (const std::out_of_range&) {
    return std::nullopt;
  }
}

struct Variants {
  std::vector<CaptionVariant> captions;
  std::vector<ImageVariant> images;
};

template <typename T>
bool Selected(const std::vector<T>& filter, const T& value) {
  return filter.empty() || std::find(filter.begin(), filter.end(), value) != filter.end();
}

// Finds generated sets under --out, narrowed by --policy, --mode, --lambda
// and --seed. Order: caption policies in canonical order, then image sets by
// name; seeds ascending within each.
Variants DiscoverVariants(const RunConfig& cfg, RunManifest& manifest) {
  const fs::path out(cfg.out);
  std::vector<std::tuple<std::size_t, std::uint64_t, fs::path, std::string>> caption_files;
  if (fs::is_directory(out / "captions")) {
    for (const auto& entry : fs::directory_iterator(out / "captions")) {
      if (entry.path().extension() != ".jsonl") continue;
      const auto parsed = SplitNameSeed(entry.path().stem().string());
      if (!parsed) continue;
      const auto& all = AllPolicies();
      const auto it = std::find(all.begin(), all.end(), parsed->first);
      if (it == all.end()) continue;
      if (!Selected(cfg.policies, parsed->first) || !Selected(cfg.seeds, parsed->second)) {
        continue;
      }
      caption_files.emplace_back(static_cast<std::size_t>(it - all.begin()), parsed->second,
                                 entry.path(), parsed->first);
    }
  }
  std::sort(caption_files.begin(), caption_files.end());

  std::vector<std::tuple<std::string, std::uint64_t, fs::path>> image_files;
  if (fs::is_directory(out / "images")) {
    std::vector<std::string> wanted_modes = cfg.modes;
    std::vector<std::string> wanted_labels;
    for (double l : cfg.lambdas) wanted_labels.push_back(LambdaLabel(l));
    for (const auto& entry : fs::directory_iterator(out / "images")) {
      const std::string stem = entry.path().stem().string();
      if (entry.path().extension() != ".jsonl" || !stem.starts_with("manifest-")) continue;
      const auto parsed = SplitNameSeed(stem.substr(9));
      if (!parsed) continue;
      const auto us = parsed->first.find('_');
      if (us == std::string::npos) continue;
      if (!Selected(wanted_modes, parsed->first.substr(0, us)) ||
          !Selected(wanted_labels, parsed->first.substr(us + 1)) ||
          !Selected(cfg.seeds, parsed->second)) {
        continue;
      }
      image_files.emplace_back(parsed->first, parsed->second, entry.path());
    }
  }
  std::sort(image_files.begin(), image_files.end());

  Variants v;
  for (const auto& [order, seed, path, name] : caption_files) {
    manifest.AddInput(path);
    v.captions.push_back({name, seed, ParseCaptionManifest(ReadFile(path))});
  }
  for (const auto& [name, seed, path] : image_files) {
    manifest.AddInput(path);
    v.images.push_back({name, seed, ParseImageManifest(ReadFile(path)), out / "images"});
  }
  if (!cfg.policies.empty()) {
    for (const auto& p : cfg.policies) {
      const bool found = std::any_of(v.captions.begin(), v.captions.end(),
                                     [&](const CaptionVariant& c) { return c.name == p; });
      if (!found) {
        throw MissingInput("missing input: " +
                           (out / CaptionManifestRel(p, SeedsOrDefault(cfg).front())).string());
      }
    }
  }
  if (v.captions.empty() && v.images.empty()) {
    throw MissingInput("missing input: no caption or image manifests under " +
                       (out / "captions").string() + " or " + (out / "images").string());
  }
  return v;
}

// ---- commands -------------------------------------------------------------

int CmdIngest(const RunConfig& cfg, std::ostream& out) {
  if (cfg.corpus.empty()) throw MissingInput("missing input: --corpus annotation file");
  RunManifest manifest("ingest", ConfigJson("ingest", cfg));
  const fs::path nouns = DataFile(cfg, cfg.nouns, "nouns.txt");
  const fs::path stop = DataFile(cfg, cfg.stop_nouns, "stop_nouns.txt");
  manifest.AddInput(cfg.corpus);
  manifest.AddInput(nouns);
  manifest.AddInput(stop);
  const NounLexicon lexicon = NounLexicon::Load(nouns, stop);
  LoadOptions options;
  options.strict = cfg.strict;
  const Corpus corpus = LoadKarpathySplit(cfg.corpus, ParseSplit(cfg.split), lexicon, options);
  WriteOutput(cfg.out, "corpus.jsonl", SerializeCorpusJsonl(corpus), manifest);
  manifest.Write(cfg.out);
  out << "ingested " << corpus.images().size() << " images, " << corpus.captions().size()
      << " captions\n";
  return 0;
}

int CmdEi(const RunConfig& cfg, std::ostream& out) {
  RunManifest manifest("ei", ConfigJson("ei", cfg));
  const Corpus corpus = LoadCorpus(cfg, manifest);
  ModelSet models(cfg);
  EiOptions options;
  options.full_heatmap = cfg.full_heatmap;
  const EiRunResult result =
      RunEiStage(corpus, models.embedders(), SeedsOrDefault(cfg).front(), cfg.jobs, options);
  models.Flush();

  std::string scores, lowest, highest;
  for (const auto& r : result.records) scores += EiRecordToJson(r) + "\n";
  for (const auto& r : result.lowest) lowest += ConsensusToJson(r) + "\n";
  for (const auto& r : result.highest) highest += ConsensusToJson(r) + "\n";
  const StatsReport stats = EiStatistics(result.lowest, corpus, models.embedders().size());
  WriteOutput(cfg.out, "ei_scores.jsonl", scores, manifest);
  WriteOutput(cfg.out, "consensus_lowest.jsonl", lowest, manifest);
  WriteOutput(cfg.out, "consensus_highest.jsonl", highest, manifest);
  WriteOutput(cfg.out, "consensus_histogram.csv", ConsensusHistogramCsv(stats), manifest);
  WriteOutput(cfg.out, "source_words.csv", SourceWordCsv(stats), manifest);
  manifest.Write(cfg.out);
  out << "scored " << result.lowest.size() << " captions with " << models.embedders().size()
      << " models; " << result.skipped.size() << " without a source word\n";
  return 0;
}

std::vector<ConsensusRecord> LoadConsensus(const fs::path& path, RunManifest& manifest) {
  manifest.AddInput(path);
  return ReadConsensusJsonl(ReadFile(path));
}

std::map<std::string, std::size_t> ChosenMap(std::span<const ConsensusRecord> records) {
  std::map<std::string, std::size_t> chosen;
  for (const auto& r : records) chosen[r.caption_id] = r.consensus_idx;
  return chosen;
}

int CmdGenCaptions(const RunConfig& cfg, std::ostream& out) {
  RunManifest manifest("gen-captions", ConfigJson("gen-captions", cfg));
  const Corpus corpus = LoadCorpus(cfg, manifest);
  const std::vector<std::string> policies = cfg.policies.empty() ? AllPolicies() : cfg.policies;
  std::vector<std::pair<CaptionPolicy, int>> parsed;
  for (const auto& p : policies) parsed.push_back(ParsePolicy(p));

  const fs::path ei_dir = cfg.ei_dir.empty() ? fs::path(cfg.out) : fs::path(cfg.ei_dir);
  bool need_lowest = false, need_highest = false, need_words = false;
  for (const auto& [policy, k] : parsed) {
    if (!IsDeletion(policy) && policy != CaptionPolicy::kMultiword) need_lowest = true;
    if (policy == CaptionPolicy::kDeleteLowEi) need_lowest = true;
    if (policy == CaptionPolicy::kDeleteHighEi) need_highest = true;
    if (!IsDeletion(policy)) need_words = true;
  }
  std::vector<ConsensusRecord> lowest, highest;
  if (need_lowest) lowest = LoadConsensus(ei_dir / "consensus_lowest.jsonl", manifest);
  if (need_highest) highest = LoadConsensus(ei_dir / "consensus_highest.jsonl", manifest);

  ConceptRegistry registry;
  SynonymSet synonyms;
  Vocabulary vocab;
  std::vector<std::string> danger;
  ForgeResources res;
  if (need_words) {
    const fs::path registry_path = DataFile(cfg, cfg.registry, "concept_groups.tsv");
    const fs::path synonyms_path = DataFile(cfg, cfg.synonyms, "synonyms.tsv");
    const fs::path vocab_path = DataFile(cfg, cfg.vocab, "vocab.txt");
    const fs::path danger_path = DataFile(cfg, cfg.danger, "danger.txt");
    for (const auto& p : {registry_path, synonyms_path, vocab_path, danger_path}) {
      manifest.AddInput(p);
    }
    RegistryOptions registry_options;
    registry_options.strict = cfg.strict;
    registry = ConceptRegistry::Load(registry_path, registry_options);
    synonyms = SynonymSet::Load(synonyms_path);
    vocab = Vocabulary::Load(vocab_path);
    danger = ReadDataLines(danger_path);
    res = {&registry, &synonyms, &vocab, &danger};
  }

  ForgeOptions options;
  options.strict = cfg.strict;
  options.jobs = cfg.jobs;
  const auto low_chosen = ChosenMap(lowest);
  const auto high_chosen = ChosenMap(highest);
  for (std::size_t i = 0; i < parsed.size(); ++i) {
    const auto [policy, k] = parsed[i];
    const std::string name = PolicyName(policy, k);
    for (const std::uint64_t seed : SeedsOrDefault(cfg)) {
      ForgeResult result;
      switch (policy) {
        case CaptionPolicy::kDeleteRandom:
          result = GenDeletionSet(corpus, policy, {}, seed, options);
          break;
        case CaptionPolicy::kDeleteLowEi:
          result = GenDeletionSet(corpus, policy, low_chosen, seed, options);
          break;
        case CaptionPolicy::kDeleteHighEi:
          result = GenDeletionSet(corpus, policy, high_chosen, seed, options);
          break;
        case CaptionPolicy::kMultiword:
          result = GenMultiwordSet(corpus, k, res, seed, options);
          break;
        default:
          result = GenSingleWordSet(corpus, lowest, policy, res, seed, options);
          break;
      }
      WriteOutput(cfg.out, CaptionManifestRel(name, seed).generic_string(),
                  SerializeCaptionManifest(result.entries), manifest);
      out << name << " seed " << seed << ": " << result.entries.size() << " captions, "
          << result.skipped << " skipped, " << result.fallbacks << " fallbacks\n";
    }
  }
  manifest.Write(cfg.out);
  return 0;
}

int CmdGenImages(const RunConfig& cfg, std::ostream& out) {
  RunManifest manifest("gen-images", ConfigJson("gen-images", cfg));
  const Corpus corpus = LoadCorpus(cfg, manifest);
  std::vector<MixMode> modes;
  for (const auto& m : cfg.modes.empty() ? std::vector<std::string>{"mix", "patch"} : cfg.modes) {
    modes.push_back(ParseMixMode(m));
  }
  const std::vector<double> lambdas =
      cfg.lambdas.empty() ? std::vector<double>{0.9, 0.8, 0.7, 0.6} : cfg.lambdas;
  for (double l : lambdas) {
    if (!(l > 0.0 && l < 1.0)) throw ValidationError("--lambda values must lie in (0, 1)");
  }
  const fs::path root = fs::path(cfg.out) / "images";
  ImageForgeOptions options;
  options.jobs = cfg.jobs;
  for (const MixMode mode : modes) {
    for (const double lambda : lambdas) {
      for (const std::uint64_t seed : SeedsOrDefault(cfg)) {
        const ImageForgeResult result = GenImageSet(corpus, mode, lambda, seed, root, options);
        for (const auto& e : result.entries) {
          manifest.AddOutputFile("images/" + e.output_path, root / e.output_path);
        }
        WriteOutput(cfg.out, ImageManifestRel(mode, lambda, seed).generic_string(),
                    SerializeImageManifest(result.entries), manifest);
        out << ImageVariantName(mode, lambda) << " seed " << seed << ": " << result.entries.size()
            << " images, " << result.skipped << " skipped\n";
      }
    }
  }
  manifest.Write(cfg.out);
  return 0;
}

std::vector<std::string> CorpusTexts(const Corpus& corpus) {
  std::vector<std::string> texts;
  for (const auto& c : corpus.captions()) texts.push_back(c.text);
  return texts;
}

std::vector<fs::path> CorpusImagePaths(const Corpus& corpus) {
  std::vector<fs::path> paths;
  for (const auto& img : corpus.images()) paths.push_back(corpus.ImagePath(img));
  return paths;
}

int CmdEmbed(const RunConfig& cfg, std::ostream& out) {
  const char* env = std::getenv("ROCOFORGE_CACHE");
  if (cfg.cache.empty() && (env == nullptr || *env == '\0')) {
    throw MissingInput("missing input: embed needs --cache or ROCOFORGE_CACHE");
  }
  RunManifest manifest("embed", ConfigJson("embed", cfg));
  const Corpus corpus = LoadCorpus(cfg, manifest);
  Variants variants;
  try {
    variants = DiscoverVariants(cfg, manifest);
  } catch (const MissingInput&) {
    // Warming the cache for the clean pools alone is fine.
  }
  ModelSet models(cfg);
  const auto texts = CorpusTexts(corpus);
  const auto paths = CorpusImagePaths(corpus);
  std::size_t rows = 0;
  for (Embedder* e : models.embedders()) {
    rows += e->EmbedTexts(texts).rows() + e->EmbedImages(paths).rows();
    for (const auto& v : variants.captions) {
      std::vector<std::string> forged;
      for (const auto& entry : v.entries) forged.push_back(entry.text);
      rows += e->EmbedTexts(forged).rows();
    }
    for (const auto& v : variants.images) {
      std::vector<fs::path> forged;
      for (const auto& entry : v.entries) forged.push_back(v.root / entry.output_path);
      rows += e->EmbedImages(forged).rows();
    }
  }
  models.Flush();
  for (const auto& c : models.caches()) {
    if (fs::exists(c->path())) manifest.AddOutputFile(c->path().filename().string(), c->path());
  }
  manifest.Write(cfg.out);
  out << "embedded " << rows << " rows for " << models.embedders().size() << " models\n";
  return 0;
}

int CmdEval(const RunConfig& cfg, std::ostream& out) {
  RunManifest manifest("eval", ConfigJson("eval", cfg));
  const Corpus corpus = LoadCorpus(cfg, manifest);
  const Variants variants = DiscoverVariants(cfg, manifest);
  ModelSet models(cfg);
  EvalOptions options;
  if (cfg.positive == "first") {
    options.rule = PositiveRule::kFirstOriginal;
  } else if (cfg.positive != "any") {
    throw ValidationError("--positive must be 'any' or 'first'");
  }
  options.similarity.jobs = cfg.jobs;
  const EvalReport report =
      Evaluate(corpus, variants.captions, variants.images, models.embedders(), options);
  models.Flush();
  WriteOutput(cfg.out, "report.csv", ReportCsv(report), manifest);
  WriteOutput(cfg.out, "report.md", ReportMarkdown(report), manifest);
  WriteOutput(cfg.out, "report.txt", ReportText(report), manifest);
  manifest.Write(cfg.out);
  out << ReportText(report);
  return 0;
}

int CmdReport(const RunConfig& cfg, std::ostream& out) {
  RunManifest manifest("report", ConfigJson("report", cfg));
  const fs::path csv = fs::path(cfg.out) / "report.csv";
  manifest.AddInput(csv);
  const EvalReport report = ParseReportCsv(ReadFile(csv));
  std::string rendered;
  std::string name;
  if (cfg.format == "text") {
    rendered = ReportText(report);
    name = "report.txt";
  } else if (cfg.format == "markdown") {
    rendered = ReportMarkdown(report);
    name = "report.md";
  } else if (cfg.format == "csv") {
    rendered = ReportCsv(report);
    name = "report.csv";
  } else {
    throw ValidationError("--format must be text, markdown or csv");
  }
  if (name != "report.csv") WriteOutput(cfg.out, name, rendered, manifest);
  manifest.Write(cfg.out);
  out << rendered;
  return 0;
}

// ---- flag wiring ----------------------------------------------------------

void AddCommon(CLI::App* sub, RunConfig& cfg) {
  sub->add_option("--out", cfg.out, "Output directory")->capture_default_str();
  sub->add_option("--jobs", cfg.jobs, "Worker threads")->check(CLI::PositiveNumber);
  sub->add_option("--config", cfg.config, "key=value file; flags take precedence");
  sub->add_flag("--strict", cfg.strict, "Fail instead of skipping or falling back");
  sub->add_flag("--verbose", cfg.verbose, "Log progress to stderr");
  sub->add_option("--data-dir", cfg.data_dir, "Directory with the bundled word lists");
}

void AddCorpus(CLI::App* sub, RunConfig& cfg) {
  sub->add_option("--corpus", cfg.corpus, "Corpus file (default: <out>/corpus.jsonl)");
}

void AddModels(CLI::App* sub, RunConfig& cfg) {
  sub->add_option("--models", cfg.models, "Provider specs name[:dim]")->delimiter(',');
  sub->add_option("--provider-url", cfg.provider_urls, "Sidecar URL, or name=url per model")
      ->delimiter(',');
  sub->add_option("--cache", cfg.cache, "Embedding cache directory");
}

void AddSeeds(CLI::App* sub, RunConfig& cfg) {
  sub->add_option("--seed", cfg.seeds, "Seed (repeatable)")->delimiter(',');
}

void AddVariantFilters(CLI::App* sub, RunConfig& cfg) {
  sub->add_option("--policy", cfg.policies, "Caption policies")->delimiter(',');
  sub->add_option("--mode", cfg.modes, "Image modes: mix, patch")->delimiter(',');
  sub->add_option("--lambda", cfg.lambdas, "Original-image fractions")->delimiter(',');
}

std::vector<std::string> SplitValues(std::string_view value) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= value.size()) {
    std::size_t comma = value.find(',', start);
    if (comma == std::string_view::npos) comma = value.size();
    const std::string_view item = Trim(value.substr(start, comma - start));
    if (!item.empty()) out.emplace_back(item);
    start = comma + 1;
  }
  return out;
}

// Fills options the command line left unset from a key=value config file.
// Keys are flag names without dashes.
void ApplyConfigFile(CLI::App* sub, const fs::path& path) {
  RequireFile(path);
  const std::string text = ReadFile(path);
  std::size_t offset = 0;
  while (offset < text.size()) {
    std::size_t end = text.find('\n', offset);
    if (end == std::string::npos) end = text.size();
    const std::string_view line = Trim(std::string_view(text).substr(offset, end - offset));
    const std::size_t line_start = offset;
    offset = end + 1;
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ParseError("config line needs key=value", line_start);
    std::string key(Trim(line.substr(0, eq)));
    std::string_view value = Trim(line.substr(eq + 1));
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') {
      value = value.substr(1, value.size() - 2);
    }
    std::replace(key.begin(), key.end(), '_', '-');
    if (key == "config") continue;
    CLI::Option* opt = sub->get_option_no_throw("--" + key);
    if (opt == nullptr) {
      throw ValidationError("config key '" + key + "' is not an option of " + sub->get_name());
    }
    if (opt->count() > 0) continue;
    opt->add_result(SplitValues(value));
    opt->run_callback();
  }
}

}  // namespace

int RunCli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  RunConfig cfg;
  if (const char* env = std::getenv("ROCOFORGE_DATA"); env != nullptr && *env != '\0') {
    cfg.data_dir = env;
  } else {
    cfg.data_dir = ROCOFORGE_DATA_DIR;
  }

  CLI::App app{"Builds and scores fooling-item retrieval benchmarks", "rocoforge"};
  app.set_version_flag("--version", std::string(kToolVersion));
  app.require_subcommand(1);

  auto* ingest = app.add_subcommand("ingest", "Load a Karpathy-format split into corpus.jsonl");
  AddCommon(ingest, cfg);
  ingest->add_option("--corpus", cfg.corpus, "Karpathy annotation JSON");
  ingest->add_option("--split", cfg.split, "test or val")->capture_default_str();
  ingest->add_option("--nouns", cfg.nouns, "Noun list");
  ingest->add_option("--stop-nouns", cfg.stop_nouns, "Excluded nouns");

  auto* ei = app.add_subcommand("ei", "Score nouns and pick consensus source words");
  AddCommon(ei, cfg);
  AddCorpus(ei, cfg);
  AddModels(ei, cfg);
  AddSeeds(ei, cfg);
  ei->add_flag("--full-heatmap", cfg.full_heatmap, "Score every token, not only nouns");

  auto* gen_captions = app.add_subcommand("gen-captions", "Generate fooling captions");
  AddCommon(gen_captions, cfg);
  AddCorpus(gen_captions, cfg);
  AddSeeds(gen_captions, cfg);
  gen_captions->add_option("--policy", cfg.policies, "Caption policies")->delimiter(',');
  gen_captions->add_option("--ei-dir", cfg.ei_dir, "Directory with consensus files");
  gen_captions->add_option("--registry", cfg.registry, "Concept groups TSV");
  gen_captions->add_option("--synonyms", cfg.synonyms, "Synonym pairs TSV");
  gen_captions->add_option("--vocab", cfg.vocab, "Target vocabulary");
  gen_captions->add_option("--danger", cfg.danger, "Danger word list");

  auto* gen_images = app.add_subcommand("gen-images", "Generate fooling images");
  AddCommon(gen_images, cfg);
  AddCorpus(gen_images, cfg);
  AddSeeds(gen_images, cfg);
  gen_images->add_option("--mode", cfg.modes, "mix, patch")->delimiter(',');
  gen_images->add_option("--lambda", cfg.lambdas, "Original-image fractions")->delimiter(',');

  auto* embed = app.add_subcommand("embed", "Warm the embedding cache");
  AddCommon(embed, cfg);
  AddCorpus(embed, cfg);
  AddModels(embed, cfg);
  AddSeeds(embed, cfg);
  AddVariantFilters(embed, cfg);

  auto* eval = app.add_subcommand("eval", "Compute R@1, drop rate and FR@1");
  AddCommon(eval, cfg);
  AddCorpus(eval, cfg);
  AddModels(eval, cfg);
  AddSeeds(eval, cfg);
  AddVariantFilters(eval, cfg);
  eval->add_option("--positive", cfg.positive, "i2t hit rule: any or first")->capture_default_str();

  auto* report = app.add_subcommand("report", "Render report.csv");
  AddCommon(report, cfg);
  report->add_option("--format", cfg.format, "text, markdown or csv")->capture_default_str();

  std::vector<std::string> args;
  for (int i = argc - 1; i > 0; --i) args.emplace_back(argv[i]);
  try {
    app.parse(std::move(args));
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : kExitMissingInput;
  }

  CLI::App* sub = app.get_subcommands().front();
  try {
    if (!cfg.config.empty()) ApplyConfigFile(sub, cfg.config);
    SetLogLevel(cfg.verbose ? LogLevel::kInfo : LogLevel::kWarning);
    const std::string name = sub->get_name();
    if (name == "ingest") return CmdIngest(cfg, out);
    if (name == "ei") return CmdEi(cfg, out);
    if (name == "gen-captions") return CmdGenCaptions(cfg, out);
    if (name == "gen-images") return CmdGenImages(cfg, out);
    if (name == "embed") return CmdEmbed(cfg, out);
    if (name == "eval") return CmdEval(cfg, out);
    return CmdReport(cfg, out);
  } catch (const MissingInput& e) {
    err << "rocoforge: " << e.what() << "\n";
    return kExitMissingInput;
  } catch (const ProviderUnavailable& e) {
    err << "rocoforge: provider unavailable: " << e.what() << "\n";
    return kExitProviderDown;
  } catch (const CLI::Error& e) {
    err << "rocoforge: " << e.what() << "\n";
    return kExitMissingInput;
  } catch (const std::exception& e) {
    err << "rocoforge: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace rocoforge
