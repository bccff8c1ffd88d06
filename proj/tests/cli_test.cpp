// End-to-end checks of the installed command-line tool: exit codes, artifact
// layout, determinism, and flag precedence. Each test drives the real binary
// through std::system.

#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "fedgat/gat.hpp"
#include "fedgat/metrics.hpp"

namespace fedgat {
namespace {

namespace fs = std::filesystem;

int run_cli(const std::string& args) {
  const std::string cmd = std::string(FEDGAT_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  EXPECT_TRUE(in) << "cannot open " << path;
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) out.push_back(line);
  return out;
}

double csv_cell(const std::string& line, std::size_t col) {
  std::istringstream in(line);
  std::string cell;
  for (std::size_t i = 0; i <= col; ++i) std::getline(in, cell, ',');
  return std::stod(cell);
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    base_ = fs::path(::testing::TempDir()) / "fedgat_cli";
    fs::remove_all(base_);
    fs::create_directories(base_);
    train_cfg_ = (base_ / "cfg_train.json").string();
    std::ofstream(train_cfg_) << R"({
      "gen": {"num_nodes": 60, "target_avg_degree": 5.0},
      "fed": {"num_clients": 3, "rounds": 2},
      "dp": {"noise_multiplier": 0.0}
    })";
    gen_cfg_ = (base_ / "cfg_gen.json").string();
    std::ofstream(gen_cfg_) << R"({
      "gen": {"num_nodes": 60, "target_avg_degree": 5.0},
      "fed": {"num_clients": 3, "rounds": 2},
      "dp": {"noise_multiplier": 0.0},
      "anomaly": {"plant_fraction": 0.1}
    })";
  }

  std::string dir(const std::string& name) const { return (base_ / name).string(); }

  fs::path base_;
  std::string train_cfg_;
  std::string gen_cfg_;
};

TEST_F(CliTest, HelpSucceeds) { EXPECT_EQ(run_cli("--help"), 0); }

TEST_F(CliTest, UsageErrorsExitOne) {
  EXPECT_EQ(run_cli("frobnicate"), 1);
  EXPECT_EQ(run_cli(""), 1);  // a subcommand is required
  EXPECT_EQ(run_cli("train --recipe fig3"), 1);  // sweeps are not train recipes
  EXPECT_EQ(run_cli("train --recipe fig9"), 1);
  EXPECT_EQ(run_cli("sweep voltage --out " + dir("sv")), 1);
  EXPECT_EQ(run_cli("train --config " + train_cfg_ + " --backend quantum --out " + dir("bq")), 1);
  EXPECT_EQ(run_cli("train --config " + train_cfg_ + " --robust sometimes --out " + dir("br")), 1);
}

TEST_F(CliTest, MissingConfigFileFailsBeforeWritingAnything) {
  const std::string out = dir("missing_cfg");
  EXPECT_EQ(run_cli("train --config " + dir("no_such.json") + " --out " + out), 1);
  EXPECT_FALSE(fs::exists(out));
}

TEST_F(CliTest, GenWritesFederationDeterministically) {
  const std::string d1 = dir("gen1"), d2 = dir("gen2");
  ASSERT_EQ(run_cli("gen --config " + gen_cfg_ + " --out " + d1), 0);
  for (const char* name : {"config.json", "manifest.json", "client_000.json", "client_001.json",
                           "client_002.json"})
    EXPECT_TRUE(fs::exists(fs::path(d1) / name)) << name;
  EXPECT_FALSE(fs::exists(fs::path(d1) / "client_003.json"));

  const auto manifest = nlohmann::json::parse(read_file(fs::path(d1) / "manifest.json"));
  ASSERT_EQ(manifest.at("clients").size(), 3u);
  for (const auto& entry : manifest.at("clients")) {
    EXPECT_EQ(entry.at("num_nodes").get<std::size_t>(), 60u);
    EXPECT_FALSE(entry.at("anomalies").empty());  // plant_fraction 0.1 on 60 nodes
    EXPECT_TRUE(entry.contains("gen_seed"));
    EXPECT_TRUE(entry.contains("plant_seed"));
  }

  ASSERT_EQ(run_cli("gen --config " + gen_cfg_ + " --out " + d2), 0);
  for (const char* name : {"manifest.json", "client_000.json", "client_001.json",
                           "client_002.json"})
    EXPECT_EQ(read_file(fs::path(d1) / name), read_file(fs::path(d2) / name)) << name;
}

TEST_F(CliTest, TrainProducesRunArtifacts) {
  const std::string out = dir("train1");
  ASSERT_EQ(run_cli("train --config " + train_cfg_ + " --out " + out), 0);

  const auto metrics = lines_of(read_file(fs::path(out) / "metrics.csv"));
  ASSERT_EQ(metrics.size(), 3u);  // header + one row per round
  EXPECT_EQ(metrics[0] + "\n", metrics_csv_header());
  EXPECT_EQ(metrics[1].substr(0, 2), "1,");
  EXPECT_EQ(metrics[2].substr(0, 2), "2,");

  const auto timing = lines_of(read_file(fs::path(out) / "timing.csv"));
  ASSERT_GE(timing.size(), 3u);
  EXPECT_EQ(timing[0], "round,wall_ms");

  const ModelParams params = deserialize_model(read_file(fs::path(out) / "model.bin"));
  EXPECT_EQ(params.param_count(), 1284u);  // 64x16 + 128 + 2x64 + 4

  const auto cfg = nlohmann::json::parse(read_file(fs::path(out) / "config.json"));
  EXPECT_EQ(cfg.at("fed").at("rounds").get<int>(), 2);
  EXPECT_EQ(cfg.at("gen").at("num_nodes").get<int>(), 60);
}

TEST_F(CliTest, RoundsFlagOverridesConfig) {
  const std::string out = dir("train_r1");
  ASSERT_EQ(run_cli("train --config " + train_cfg_ + " --rounds 1 --out " + out), 0);
  EXPECT_EQ(lines_of(read_file(fs::path(out) / "metrics.csv")).size(), 2u);
}

TEST_F(CliTest, RerunsAreByteIdenticalAndSeedsMatter) {
  const std::string d1 = dir("det1"), d2 = dir("det2"), d3 = dir("det3");
  ASSERT_EQ(run_cli("train --config " + train_cfg_ + " --out " + d1), 0);
  ASSERT_EQ(run_cli("train --config " + train_cfg_ + " --out " + d2), 0);
  EXPECT_EQ(read_file(fs::path(d1) / "metrics.csv"), read_file(fs::path(d2) / "metrics.csv"));
  EXPECT_EQ(read_file(fs::path(d1) / "model.bin"), read_file(fs::path(d2) / "model.bin"));

  ASSERT_EQ(run_cli("train --config " + train_cfg_ + " --seed 43 --out " + d3), 0);
  EXPECT_NE(read_file(fs::path(d1) / "metrics.csv"), read_file(fs::path(d3) / "metrics.csv"));
}

TEST_F(CliTest, MaskedBackendMatchesPlainAtZeroNoise) {
  const std::string dp = dir("plain"), dm = dir("masked");
  ASSERT_EQ(run_cli("train --config " + train_cfg_ + " --backend plain --out " + dp), 0);
  ASSERT_EQ(run_cli("train --config " + train_cfg_ + " --backend masked --out " + dm), 0);
  const auto rows_p = lines_of(read_file(fs::path(dp) / "metrics.csv"));
  const auto rows_m = lines_of(read_file(fs::path(dm) / "metrics.csv"));
  ASSERT_EQ(rows_p.size(), rows_m.size());
  // Same accuracy up to fixed-point quantization, same 8-byte-per-coordinate
  // uplink traffic.
  EXPECT_NEAR(csv_cell(rows_p.back(), 2), csv_cell(rows_m.back(), 2), 0.01);
  EXPECT_EQ(csv_cell(rows_p.back(), 3), csv_cell(rows_m.back(), 3));
}

TEST_F(CliTest, ReportRendersTrainArtifacts) {
  const std::string out = dir("report_src");
  ASSERT_EQ(run_cli("train --config " + train_cfg_ + " --out " + out), 0);
  ASSERT_EQ(run_cli("report " + out), 0);
  for (const char* name : {"accuracy.svg", "loss.svg", "summary.txt"})
    EXPECT_TRUE(fs::exists(fs::path(out) / name)) << name;
  EXPECT_NE(read_file(fs::path(out) / "accuracy.svg").find("<svg"), std::string::npos);
  EXPECT_FALSE(read_file(fs::path(out) / "summary.txt").empty());
}

TEST_F(CliTest, ReportOnEmptyDirIsARuntimeFailure) {
  const std::string empty = dir("empty_run");
  fs::create_directories(empty);
  EXPECT_EQ(run_cli("report " + empty), 2);
}

TEST_F(CliTest, NoiseSweepWritesOneRowPerSigma) {
  const std::string out = dir("noise");
  ASSERT_EQ(run_cli("sweep noise --config " + train_cfg_ + " --out " + out), 0);
  const auto rows = lines_of(read_file(fs::path(out) / "noise_sweep.csv"));
  ASSERT_EQ(rows.size(), 5u);
  EXPECT_EQ(rows[0], "sigma,final_accuracy,final_loss,epsilon_round,epsilon_total");
  EXPECT_EQ(rows[1].substr(0, 2), "0,");
  EXPECT_EQ(rows[3].substr(0, 4), "1.1,");
}

}  // namespace
}  // namespace fedgat
