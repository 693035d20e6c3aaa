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

#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <initializer_list>
#include <nlohmann/json.hpp>
#include <sstream>
#include <string>
#include <vector>

#include "rocoforge/io.h"
#include "support/fixtures.h"

namespace rocoforge {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct CliResult {
  int code;
  std::string out;
  std::string err;
};

CliResult Cli(std::initializer_list<std::string> args) {
  std::vector<std::string> owned = {"rocoforge"};
  owned.insert(owned.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const auto& a : owned) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = RunCli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    unsetenv("ROCOFORGE_CACHE");
    dir_ = fixtures::MakeTempDir("cli");
    annotations_ = fixtures::WriteKarpathyFixture(dir_ / "src", {.images = 4});
  }
  void TearDown() override {
    unsetenv("ROCOFORGE_CACHE");
    fs::remove_all(dir_);
  }

  // ingest, ei, gen-captions, gen-images and eval into `out`.
  void Pipeline(const fs::path& out, const std::string& jobs) {
    const std::string o = out.string();
    ASSERT_EQ(Cli({"ingest", "--corpus", annotations_.string(), "--out", o}).code, 0);
    ASSERT_EQ(Cli({"ei", "--models", "stub-a,stub-b", "--out", o, "--jobs", jobs}).code, 0);
    ASSERT_EQ(Cli({"gen-captions", "--policy", "rand_voca,delete_low_ei", "--seed", "1", "--out", o,
                   "--jobs", jobs})
                  .code,
              0);
    ASSERT_EQ(Cli({"gen-images", "--mode", "mix,patch", "--lambda", "0.8", "--seed", "1,2", "--out",
                   o, "--jobs", jobs})
                  .code,
              0);
    const CliResult eval = Cli({"eval", "--models", "stub-a,stub-b", "--out", o, "--jobs", jobs});
    ASSERT_EQ(eval.code, 0) << eval.err;
    EXPECT_NE(eval.out.find("base_i2t"), std::string::npos);
  }

  fs::path dir_;
  fs::path annotations_;
};

TEST_F(CliTest, FullPipelineWritesEveryArtifact) {
  const fs::path out = dir_ / "run";
  Pipeline(out, "1");
  for (const char* f :
       {"corpus.jsonl", "ei_scores.jsonl", "consensus_lowest.jsonl", "consensus_highest.jsonl",
        "consensus_histogram.csv", "source_words.csv", "captions/rand_voca-1.jsonl",
        "captions/delete_low_ei-1.jsonl", "images/manifest-mix_0.8-1.jsonl",
        "images/manifest-patch_0.8-2.jsonl", "report.csv", "report.md", "report.txt",
        "run-ingest.json", "run-eval.json"}) {
    EXPECT_TRUE(fs::is_regular_file(out / f)) << f;
  }
  const json manifest = json::parse(ReadFile(out / "run-eval.json"));
  EXPECT_EQ(manifest["command"], "eval");
  EXPECT_TRUE(manifest["outputs"].contains("report.csv"));
  EXPECT_EQ(manifest["config_hash"].get<std::string>().size(), 64u);

  const CliResult md = Cli({"report", "--format", "markdown", "--out", out.string()});
  EXPECT_EQ(md.code, 0);
  EXPECT_NE(md.out.find("| Model |"), std::string::npos);
  const CliResult csv = Cli({"report", "--format", "csv", "--out", out.string()});
  EXPECT_EQ(csv.out, ReadFile(out / "report.csv"));
}

TEST_F(CliTest, JobsDoNotChangeOutputs) {
  Pipeline(dir_ / "a", "1");
  Pipeline(dir_ / "b", "3");
  for (const char* f : {"ei_scores.jsonl", "consensus_lowest.jsonl", "captions/rand_voca-1.jsonl",
                        "images/manifest-patch_0.8-1.jsonl", "report.csv"}) {
    EXPECT_EQ(ReadFile(dir_ / "a" / f), ReadFile(dir_ / "b" / f)) << f;
  }
  const json a = json::parse(ReadFile(dir_ / "a" / "run-eval.json"));
  const json b = json::parse(ReadFile(dir_ / "b" / "run-eval.json"));
  EXPECT_EQ(a["config_hash"], b["config_hash"]);
  EXPECT_EQ(a["outputs"], b["outputs"]);
}

TEST_F(CliTest, DefaultImageGridHasTwentyFourSets) {
  const fs::path out = dir_ / "grid";
  ASSERT_EQ(Cli({"ingest", "--corpus", annotations_.string(), "--out", out.string()}).code, 0);
  ASSERT_EQ(Cli({"gen-images", "--seed", "0,1,2", "--out", out.string()}).code, 0);
  std::size_t sets = 0;
  for (const auto& e : fs::directory_iterator(out / "images")) {
    sets += e.path().filename().string().starts_with("manifest-");
  }
  EXPECT_EQ(sets, 24u);
  EXPECT_TRUE(fs::is_directory(out / "images" / "patch" / "0.6" / "2"));
}

TEST_F(CliTest, MissingInputsExitTwo) {
  const std::string out = (dir_ / "empty").string();
  EXPECT_EQ(Cli({"ingest", "--out", out}).code, 2);
  EXPECT_EQ(Cli({"ei", "--out", out}).code, 2);
  EXPECT_EQ(Cli({"ingest", "--corpus", annotations_.string(), "--out", out}).code, 0);
  EXPECT_EQ(Cli({"eval", "--out", out}).code, 2);
  EXPECT_EQ(Cli({"embed", "--out", out}).code, 2);
  EXPECT_EQ(Cli({"ei", "--models", "clip", "--out", out}).code, 2);
  EXPECT_EQ(Cli({"no-such-command"}).code, 2);
  EXPECT_EQ(Cli({"--help"}).code, 0);
}

TEST_F(CliTest, UnreachableProviderExitsThree) {
  const std::string out = (dir_ / "down").string();
  ASSERT_EQ(Cli({"ingest", "--corpus", annotations_.string(), "--out", out}).code, 0);
  const CliResult r =
      Cli({"ei", "--models", "clip", "--provider-url", "http://127.0.0.1:9", "--out", out});
  EXPECT_EQ(r.code, 3) << r.err;
}

TEST_F(CliTest, ConfigFileFillsUnsetFlagsOnly) {
  const fs::path out = dir_ / "cfg";
  ASSERT_EQ(Cli({"ingest", "--corpus", annotations_.string(), "--out", out.string()}).code, 0);
  ASSERT_EQ(Cli({"ei", "--out", out.string()}).code, 0);
  const fs::path config = dir_ / "run.cfg";
  WriteFileAtomic(config, "# comment\npolicy=rand_voca\nseed=5\n");
  ASSERT_EQ(Cli({"gen-captions", "--config", config.string(), "--out", out.string()}).code, 0);
  EXPECT_TRUE(fs::is_regular_file(out / "captions" / "rand_voca-5.jsonl"));
  ASSERT_EQ(
      Cli({"gen-captions", "--config", config.string(), "--seed", "6", "--out", out.string()}).code,
      0);
  EXPECT_TRUE(fs::is_regular_file(out / "captions" / "rand_voca-6.jsonl"));
  EXPECT_FALSE(fs::exists(out / "captions" / "same_concept-6.jsonl"));

  WriteFileAtomic(config, "no_such_key=1\n");
  EXPECT_EQ(Cli({"gen-captions", "--config", config.string(), "--out", out.string()}).code, 1);
}

TEST_F(CliTest, CacheDirectoryFromEnvironment) {
  const fs::path out = dir_ / "env";
  const fs::path cache = dir_ / "cache";
  ASSERT_EQ(Cli({"ingest", "--corpus", annotations_.string(), "--out", out.string()}).code, 0);
  setenv("ROCOFORGE_CACHE", cache.c_str(), 1);
  const CliResult r = Cli({"embed", "--models", "stub", "--out", out.string()});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(fs::is_directory(cache));
  EXPECT_FALSE(fs::is_empty(cache));
}

}  // namespace
}  // namespace rocoforge
