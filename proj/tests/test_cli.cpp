#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "slln/cli.hpp"
#include "slln/persist.hpp"

namespace slln {
namespace {

namespace fs = std::filesystem;

struct Run {
  int code = 0;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "slln_lab");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::parse_and_dispatch(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("slln_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string config_path(const std::string& name) {
  return (fs::path(SLLN_SOURCE_DIR) / "configs" / name).string();
}

fs::path write_config(const fs::path& dir, const std::string& body) {
  const fs::path path = dir / "config.json";
  std::ofstream(path) << body;
  return path;
}

const char* kSmallNilpotent = R"({"schema": 1, "model": {"kind": "sequence_p", "p": 2, "dim": 2},
  "ensemble": {"standard": "nilpotent"}, "grid_points": 5, "n_values": [4, 16], "trials": 20, "seed": 3})";

TEST(Cli, UsageErrors) {
  EXPECT_EQ(run({"--no-such-flag"}).code, cli::kUsage);
  EXPECT_EQ(run({}).code, cli::kUsage);
  EXPECT_EQ(run({"fourth-moment", "--n", "2"}).code, cli::kUsage);
}

TEST(Cli, ConfigErrors) {
  const auto dir = scratch_dir("config_errors");
  EXPECT_EQ(run({"run-sot"}).code, cli::kConfigInvalid);
  EXPECT_EQ(run({"run-sot", "-c", (dir / "missing.json").string()}).code, cli::kConfigInvalid);
  const auto bad = write_config(dir, R"({"schema": 1, "model": {"kind": "sequence_p", "p": 2, "dim": 2},
    "ensemble": {"atoms": [[[0, 1], [0, 0]], [[0, -1], [0, 0]]], "probs": [0.5, 0.4]}})");
  const auto r = run({"check-bounds", "-c", bad.string(), "-o", (dir / "out").string()});
  EXPECT_EQ(r.code, cli::kConfigInvalid);
  EXPECT_NE(r.err.find("ensemble.probs"), std::string::npos);
}

TEST(Cli, FourthMoment) {
  const auto r = run({"fourth-moment", "--n", "2", "--u", "1"});
  EXPECT_EQ(r.code, cli::kOk);
  EXPECT_NE(r.out.find("fourth_moment(n=2, u=1) = 65"), std::string::npos);
  EXPECT_NE(r.out.find("formula==bruteforce: true"), std::string::npos);
  EXPECT_EQ(run({"fourth-moment", "--n", "3", "--u", "1/4"}).code, cli::kOk);
  EXPECT_EQ(run({"fourth-moment", "--n", "3", "--u", "abc"}).code, cli::kConfigInvalid);
}

TEST(Cli, VerifyIdentitiesOnTheStandardSuite) {
  const auto dir = scratch_dir("verify");
  const auto r = run({"verify-identities", "-c", config_path("standard.json"), "-o", dir.string()});
  EXPECT_EQ(r.code, cli::kOk) << r.out << r.err;
  EXPECT_EQ(r.out.find("FAIL"), std::string::npos);
}

TEST(Cli, RunSotWritesArtifactsWithProvenance) {
  const auto dir = scratch_dir("run_sot");
  const auto config = write_config(dir, kSmallNilpotent);
  const auto r = run({"run-sot", "-c", config.string(), "-o", (dir / "out").string()});
  ASSERT_EQ(r.code, cli::kOk) << r.err;
  std::size_t jsonl = 0, csv = 0;
  for (const auto& entry : fs::directory_iterator(dir / "out")) {
    const auto ext = entry.path().extension();
    jsonl += ext == ".jsonl";
    csv += ext == ".csv";
    EXPECT_EQ(read_provenance(entry.path()).front().seed, 3u);
  }
  EXPECT_EQ(jsonl, 1u);
  EXPECT_EQ(csv, 1u);

  const auto again = run({"report", "-o", (dir / "out").string()});
  EXPECT_EQ(again.code, cli::kOk) << again.err;
  EXPECT_NE(again.out.find("config_hash"), std::string::npos);
}

TEST(Cli, ReportRefusesMixedConfigs) {
  const auto dir = scratch_dir("mixed");
  const auto config = write_config(dir, kSmallNilpotent);
  ASSERT_EQ(run({"run-wot", "-c", config.string(), "-o", (dir / "a").string()}).code, cli::kOk);
  ASSERT_EQ(run({"run-wot", "-c", config.string(), "--seed", "4", "-o", (dir / "b").string()}).code, cli::kOk);
  std::vector<std::string> args{"report"};
  for (const auto* sub : {"a", "b"}) {
    for (const auto& entry : fs::directory_iterator(dir / sub)) args.push_back(entry.path().string());
  }
  const auto r = run(args);
  EXPECT_EQ(r.code, cli::kConfigInvalid);
  EXPECT_NE(r.err.find("refusing"), std::string::npos);
}

TEST(Cli, OutputDirectoryFromEnvironment) {
  const auto dir = scratch_dir("env");
  const auto config = write_config(dir, kSmallNilpotent);
  ::setenv(cli::kOutputDirEnv, (dir / "from_env").string().c_str(), 1);
  const auto r = run({"burkholder", "-c", config.string()});
  ::unsetenv(cli::kOutputDirEnv);
  EXPECT_EQ(r.code, cli::kOk) << r.err;
  EXPECT_TRUE(fs::is_directory(dir / "from_env"));
  EXPECT_FALSE(fs::is_empty(dir / "from_env"));
}

TEST(Cli, UnwritableOutputIsAToolFailure) {
  const auto dir = scratch_dir("unwritable");
  const auto config = write_config(dir, kSmallNilpotent);
  std::ofstream(dir / "file") << "x";
  EXPECT_EQ(run({"run-sot", "-c", config.string(), "-o", (dir / "file").string()}).code, cli::kToolFailure);
}

}  // namespace
}  // namespace slln
