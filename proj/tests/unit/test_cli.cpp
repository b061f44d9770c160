/*
 * Copyright 2026 The pairdis Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */


#include <gtest/gtest.h>
#include <stdlib.h>
#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <regex>
#include <sstream>

#include "pairdis/cli/app.hpp"
#include "pairdis/cli/manifest.hpp"

namespace pairdis {
namespace {

namespace fs = std::filesystem;

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::size_t line_count(const fs::path& p) {
  std::ifstream in(p);
  std::size_t n = 0;
  for (std::string line; std::getline(in, line);) ++n;
  return n;
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    root_ = fs::temp_directory_path() /
            ("pairdis_cli_" + std::to_string(::getpid()) + "_" +
             ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(root_);
    fs::create_directories(root_);
    ::unsetenv("PAIRDIS_SEED");
  }
  void TearDown() override {
    ::unsetenv("PAIRDIS_SEED");
    fs::remove_all(root_);
  }

  int run(std::vector<std::string> args) {
    out_.str("");
    err_.str("");
    args.insert(args.begin(), "pairdis");
    return cli::run(args, out_, err_);
  }
  std::string dir(const std::string& name) const { return (root_ / name).string(); }

  // gen-data + gen-pairs + train on a small blobs set.
  void small_pipeline(std::size_t d_u) {
    ASSERT_EQ(run({"gen-data", "--dataset", "blobs", "--n", "200", "--seed", "1", "--run-dir", dir("d")}), 0)
        << err_.str();
    ASSERT_EQ(run({"gen-pairs", "--data", dir("d"), "--proportion", "0.01", "--run-dir", dir("p")}), 0)
        << err_.str();
    ASSERT_EQ(run({"train", "--data", dir("d"), "--pairs", dir("p") + "/pairs.csv", "--epochs", "1",
                   "--d-u", std::to_string(d_u), "--d-v", "2", "--hidden", "16", "--run-dir", dir("t")}),
              0)
        << err_.str();
  }

  fs::path root_;
  std::ostringstream out_, err_;
};

TEST(Manifest, GitBlobHash) {
  EXPECT_EQ(cli::git_blob_hash("hello\n"), "ce013625030ba8dba906f756967f9e9ca394464a");
  EXPECT_EQ(cli::git_blob_hash(""), "e69de29bb2d1d6434b8b29ae775ad8c2e48c5391");
}

TEST_F(Cli, RunDirectoryNaming) {
  const fs::path a = cli::timestamped_run_dir(root_, "train", 42);
  EXPECT_TRUE(std::regex_match(a.filename().string(),
                               std::regex(R"(\d{8}T\d{6}Z-seed42-train)")))
      << a;
  fs::create_directories(a);
  const fs::path b = cli::timestamped_run_dir(root_, "train", 42);
  EXPECT_NE(a, b);

  ASSERT_EQ(run({"gen-data", "--n", "10", "--runs-root", root_.string()}), 0) << err_.str();
  std::size_t found = 0;
  for (const auto& e : fs::directory_iterator(root_)) {
    if (std::regex_match(e.path().filename().string(), std::regex(R"(\d{8}T\d{6}Z-seed0-gen-data)"))) {
      ++found;
      EXPECT_TRUE(fs::exists(e.path() / "manifest.json"));
    }
  }
  EXPECT_EQ(found, 1u);
}

TEST_F(Cli, GenPairsCount) {
  ASSERT_EQ(run({"gen-data", "--dataset", "blobs", "--n", "10000", "--run-dir", dir("d")}), 0);
  ASSERT_EQ(run({"gen-pairs", "--data", dir("d"), "--proportion", "1e-4", "--run-dir", dir("p")}), 0);
  EXPECT_EQ(line_count(root_ / "p" / "pairs.csv"), 5001u);  // header + 5000
  const cli::RunManifest m = cli::RunManifest::read(root_ / "p");
  EXPECT_EQ(m.command, "gen-pairs");
  EXPECT_EQ(m.outputs, (std::vector<std::string>{"pairs.csv"}));
  EXPECT_EQ(m.input_hash.size(), 40u);
}

TEST_F(Cli, DeterministicOutputs) {
  for (const char* d : {"a", "b"}) {
    ASSERT_EQ(run({"gen-data", "--dataset", "bars", "--n", "100", "--seed", "5", "--run-dir", dir(d)}), 0);
  }
  EXPECT_EQ(slurp(root_ / "a" / "images.pdt"), slurp(root_ / "b" / "images.pdt"));
  EXPECT_EQ(slurp(root_ / "a" / "factors.csv"), slurp(root_ / "b" / "factors.csv"));
  ASSERT_EQ(run({"gen-data", "--dataset", "bars", "--n", "100", "--seed", "6", "--run-dir", dir("c")}), 0);
  EXPECT_NE(slurp(root_ / "a" / "images.pdt"), slurp(root_ / "c" / "images.pdt"));
}

TEST_F(Cli, SeedEnvironmentOverride) {
  ::setenv("PAIRDIS_SEED", "5", 1);
  ASSERT_EQ(run({"gen-data", "--n", "50", "--seed", "9", "--run-dir", dir("env")}), 0);
  ::unsetenv("PAIRDIS_SEED");
  ASSERT_EQ(run({"gen-data", "--n", "50", "--seed", "5", "--run-dir", dir("flag")}), 0);
  EXPECT_EQ(slurp(root_ / "env" / "images.pdt"), slurp(root_ / "flag" / "images.pdt"));
  EXPECT_EQ(cli::RunManifest::read(root_ / "env").seed, 5u);
}

TEST_F(Cli, ConfigFileLosesToFlags) {
  std::ofstream(root_ / "cfg.txt") << "# comment\nn=30\ndataset=bars\nseed=3\n";
  ASSERT_EQ(run({"gen-data", "--config", (root_ / "cfg.txt").string(), "--n", "12", "--run-dir", dir("d")}), 0)
      << err_.str();
  const cli::RunManifest m = cli::RunManifest::read(root_ / "d");
  EXPECT_EQ(m.config.at("n"), "12");
  EXPECT_EQ(m.config.at("dataset"), "bars");
  EXPECT_EQ(m.seed, 3u);
  EXPECT_EQ(m.config.count("config"), 0u);
  std::ofstream(root_ / "bad.txt") << "no-such-option=1\n";
  EXPECT_EQ(run({"gen-data", "--config", (root_ / "bad.txt").string(), "--run-dir", dir("e")}), cli::kExitUsage);
}

TEST_F(Cli, MissingInputIsUsageError) {
  EXPECT_EQ(run({"gen-pairs", "--data", dir("nowhere"), "--run-dir", dir("p")}), cli::kExitUsage);
  EXPECT_FALSE(fs::exists(root_ / "p"));
  EXPECT_EQ(run({"frobnicate"}), cli::kExitUsage);
  EXPECT_EQ(run({"gen-data", "--n", "ten"}), cli::kExitUsage);
  EXPECT_EQ(run({"--help"}), cli::kExitOk);
}

TEST_F(Cli, CrossvalTableHasOneRowPerBeta) {
  small_pipeline(1);
  ASSERT_EQ(run({"xval-beta", "--data", dir("d"), "--pairs", dir("p") + "/pairs.csv", "--epochs", "1",
                 "--folds", "2", "--ll-samples", "1", "--d-u", "1", "--d-v", "2", "--hidden", "16",
                 "--run-dir", dir("x")}),
            0)
      << err_.str();
  EXPECT_EQ(line_count(root_ / "x" / "xval.csv"), 6u);  // header + 5 betas
  EXPECT_NE(out_.str().find("selected beta "), std::string::npos);
}

TEST_F(Cli, EvalMigPrintsOneScalar) {
  small_pipeline(1);
  ASSERT_EQ(run({"eval-mig", "--checkpoint", dir("t") + "/checkpoint", "--data", dir("d"), "--run-dir", dir("m")}),
            0)
      << err_.str();
  std::regex mig_line(R"(mig -?[0-9.eE+-]+)");
  std::istringstream lines(out_.str());
  std::string first;
  std::getline(lines, first);
  EXPECT_TRUE(std::regex_match(first, mig_line)) << out_.str();
  const std::string metrics = slurp(root_ / "m" / "metrics.csv");
  EXPECT_EQ(metrics.rfind("metric,dataset,seed,value\nmig,blobs,0,", 0), 0u) << metrics;
}

TEST_F(Cli, TraverseStripGridAndRefusal) {
  small_pipeline(1);
  ASSERT_EQ(run({"traverse", "--checkpoint", dir("t") + "/checkpoint", "--data", dir("d"), "--steps", "5",
                 "--run-dir", dir("s")}),
            0)
      << err_.str();
  EXPECT_EQ(slurp(root_ / "s" / "traverse.pgm").rfind("P5\n80 16\n255\n", 0), 0u);

  ASSERT_EQ(run({"train", "--data", dir("d"), "--pairs", dir("p") + "/pairs.csv", "--epochs", "1", "--d-u",
                 "2", "--d-v", "2", "--hidden", "16", "--run-dir", dir("t2")}),
            0);
  ASSERT_EQ(run({"traverse", "--checkpoint", dir("t2") + "/checkpoint", "--data", dir("d"), "--steps", "3",
                 "--run-dir", dir("g")}),
            0);
  EXPECT_EQ(slurp(root_ / "g" / "traverse.pgm").rfind("P5\n48 48\n255\n", 0), 0u);

  ASSERT_EQ(run({"train", "--data", dir("d"), "--pairs", dir("p") + "/pairs.csv", "--epochs", "1", "--d-u",
                 "3", "--d-v", "2", "--hidden", "16", "--run-dir", dir("t3")}),
            0);
  EXPECT_EQ(run({"traverse", "--checkpoint", dir("t3") + "/checkpoint", "--data", dir("d"), "--run-dir",
                 dir("r")}),
            cli::kExitUsage);
}

TEST_F(Cli, SweepWritesOneRowPerValueAndSeed) {
  ASSERT_EQ(run({"sweep", "--dataset", "blobs", "--n", "200", "--test-n", "100", "--seeds", "1,2,3",
                 "--param", "gamma", "--values", "0,0.1,0.3", "--proportion", "0.01", "--epochs", "1",
                 "--d-u", "1", "--d-v", "2", "--hidden", "16", "--bins", "5", "--run-dir", dir("w")}),
            0)
      << err_.str();
  std::ifstream in(root_ / "w" / "sweep.csv");
  std::string header;
  std::getline(in, header);
  EXPECT_EQ(header, "param,param_value,seed,metric,value");
  std::size_t mig_rows = 0;
  for (std::string line; std::getline(in, line);) mig_rows += line.find(",mig,") != std::string::npos;
  EXPECT_EQ(mig_rows, 9u);
}

}  // namespace
}  // namespace pairdis
