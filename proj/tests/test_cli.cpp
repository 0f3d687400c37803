// Copyright 2026 The patchasm Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "patchasm/npy.hpp"

namespace {

namespace fs = std::filesystem;

const fs::path kBinary = PATCHASM_CLI;

struct Run {
  int code;
  std::string out;
};

Run run(const std::string& args) {
  const fs::path log = fs::temp_directory_path() / "patchasm_cli_test.log";
  const std::string cmd = kBinary.string() + " " + args + " > " + log.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  std::ifstream in(log);
  std::stringstream ss;
  ss << in.rdbuf();
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, ss.str()};
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("patchasm_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  std::string p(const std::string& rel) const { return (dir_ / rel).string(); }
  fs::path dir_;
};

TEST_F(Cli, SynthAssembleEvalRoundTrip) {
  ASSERT_EQ(run("synth --output " + p("data") + " --shape 48x48 --patch 7x7 --seed 3").code, 0);
  for (const char* f : {"gt_masks.npy", "patch_probs.npy", "fg_probs.npy", "ninst_probs.npy", "manifest.json"})
    EXPECT_TRUE(fs::exists(dir_ / "data" / f)) << f;
  const auto a = run("assemble --input " + p("data") + " --output " + p("out") +
                     " --patch 7x7 --threads 1 --dump_scores --dump_edges --dump_consensus");
  ASSERT_EQ(a.code, 0) << a.out;
  EXPECT_NE(a.out.find("assemble:"), std::string::npos);
  const auto e = run("eval --pred " + p("out/instances.npy") + " --gt " + p("data/gt_masks.npy") +
                     " --output " + p("eval"));
  ASSERT_EQ(e.code, 0) << e.out;
  EXPECT_NE(e.out.find("avap\t\t\t\t1.000000"), std::string::npos) << e.out;
  std::ifstream in(dir_ / "eval" / "eval.json");
  const auto j = nlohmann::json::parse(in);
  EXPECT_DOUBLE_EQ(j["avap"].get<double>(), 1.0);

  std::ifstream mf(dir_ / "out" / "manifest.json");
  const auto m = nlohmann::json::parse(mf);
  for (const char* key : {"command", "config", "timings", "counts", "outputs"}) EXPECT_TRUE(m.contains(key)) << key;
  for (const char* f : {"scores.npy", "edges.txt", "consensus_numerator.npy", "consensus_count.npy"})
    EXPECT_TRUE(fs::exists(dir_ / "out" / f)) << f;
}

TEST_F(Cli, DeterministicAndReproducibleFromManifest) {
  ASSERT_EQ(run("synth --output " + p("data") + " --kind crossing-strips --shape 64x64 --patch 13x13 --seed 2"
                " --flip_prob 0.05").code, 0);
  const std::string base = "assemble --input " + p("data") + " --patch 13x13 --threads 1";
  ASSERT_EQ(run(base + " --output " + p("r1")).code, 0);
  ASSERT_EQ(run(base + " --output " + p("r2")).code, 0);
  ASSERT_EQ(run("assemble --config " + p("r1/manifest.json") + " --output " + p("r3")).code, 0);
  for (const char* f : {"instances.npy", "labels.npy"}) {
    const auto ref = patchasm::read_file(dir_ / "r1" / f);
    EXPECT_EQ(ref, patchasm::read_file(dir_ / "r2" / f)) << f;
    EXPECT_EQ(ref, patchasm::read_file(dir_ / "r3" / f)) << f;
  }
}

TEST_F(Cli, TomlConfig) {
  {
    std::ofstream out(dir_ / "run.toml");
    out << "shape = [32, 32]\npatch = [5, 5]\nseed = 4\nmax_radius = 6\n";
  }
  ASSERT_EQ(run("synth --config " + p("run.toml") + " --output " + p("data")).code, 0);
  EXPECT_EQ(patchasm::peek_npy(dir_ / "data" / "patch_probs.npy").shape,
            (std::vector<std::size_t>{25, 32, 32}));
}

TEST_F(Cli, ErrorsExitWithStatusTwo) {
  ASSERT_EQ(run("synth --output " + p("a") + " --shape 32x32 --patch 5x5 --seed 1").code, 0);
  ASSERT_EQ(run("synth --output " + p("b") + " --shape 40x32 --patch 5x5 --seed 1").code, 0);
  const auto mismatch = run("eval --pred " + p("a/gt_masks.npy") + " --gt " + p("b/gt_masks.npy"));
  EXPECT_EQ(mismatch.code, 2);
  EXPECT_NE(mismatch.out.find("shape mismatch"), std::string::npos) << mismatch.out;
  EXPECT_EQ(run("assemble --input " + p("a") + " --output " + p("o") + " --patch 7x7").code, 2);
  EXPECT_EQ(run("assemble --input " + p("a") + " --output " + p("o") + " --t 0.2").code, 2);
  EXPECT_EQ(run("assemble --input " + p("missing") + " --output " + p("o") + " --patch 5x5").code, 2);
  EXPECT_EQ(run("assemble --bogus 1").code, 2);
  EXPECT_EQ(run("eval").code, 2);
}

TEST_F(Cli, HelpListsFlags) {
  const auto h = run("assemble --help");
  EXPECT_EQ(h.code, 0);
  for (const char* flag : {"--patch", "--t", "--sparse", "--partitioner", "--threads", "--config", "--thin_out",
                           "--min_instance_size"})
    EXPECT_NE(h.out.find(flag), std::string::npos) << flag;
}

TEST_F(Cli, BenchWritesTable) {
  const auto b = run("bench --bench_sizes 48x48 --bench_patches 5,7 --output " + p("bench"));
  ASSERT_EQ(b.code, 0) << b.out;
  std::ifstream in(dir_ / "bench" / "bench.tsv");
  std::string line;
  int lines = 0;
  while (std::getline(in, line)) ++lines;
  EXPECT_EQ(lines, 3);
}

}  // namespace
