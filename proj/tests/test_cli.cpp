#include <gtest/gtest.h>

#include <sys/wait.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include <json.hpp>

#include "manifest.hpp"
#include "runner.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const fs::path kSource = HYPERLQ_SOURCE_DIR;

struct Result {
  int code = -1;
  std::string out;
  std::string err;
};

std::string Slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

fs::path Scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / "hyperlq_test_cli" / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

Result Cli(const std::string& args, const std::string& env = "") {
  const fs::path tmp = Scratch("capture");
  const std::string cmd = env + " \"" + std::string(HYPERLQ_CLI_PATH) + "\" " + args + " >\"" +
                          (tmp / "out").string() + "\" 2>\"" + (tmp / "err").string() + "\"";
  const int status = std::system(cmd.c_str());
  Result r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = Slurp(tmp / "out");
  r.err = Slurp(tmp / "err");
  return r;
}

fs::path WriteConfig(const std::string& name, const std::string& text) {
  const fs::path dir = Scratch("cfg_" + name);
  const fs::path p = dir / (name + ".json");
  std::ofstream(p) << text;
  return p;
}

std::string Config(const fs::path& p) { return "--config \"" + p.string() + "\""; }

std::vector<fs::path> ShippedConfigs() {
  std::vector<fs::path> out;
  for (const auto& e : fs::directory_iterator(kSource / "configs"))
    if (e.path().extension() == ".json") out.push_back(e.path());
  std::sort(out.begin(), out.end());
  return out;
}

std::map<std::string, std::string> Csvs(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(dir))
    if (e.path().extension() == ".csv") out[fs::relative(e.path(), dir).string()] = Slurp(e.path());
  return out;
}

}  // namespace

TEST(Cli, ValidateAcceptsEveryShippedConfig) {
  const auto configs = ShippedConfigs();
  ASSERT_GE(configs.size(), 6u);
  for (const fs::path& p : configs) {
    const Result r = Cli("validate " + Config(p));
    EXPECT_EQ(r.code, 0) << p << "\n" << r.err;
    const json echoed = json::parse(r.out);
    EXPECT_TRUE(echoed.contains("model")) << p;
  }
}

TEST(Cli, ValidateFillsDefaults) {
  const Result r = Cli("validate " + Config(kSource / "configs" / "synthetic_decay_minimal.json"));
  ASSERT_EQ(r.code, 0) << r.err;
  const json j = json::parse(r.out);
  EXPECT_DOUBLE_EQ(j["experiment"]["dt"].get<double>(), 0.25);
  EXPECT_EQ(j["experiment"]["integrator"], "exact");
  EXPECT_NEAR(j["experiment"]["data_exponent"].get<double>(), 1.6, 1e-15);
}

TEST(Cli, MinimalDecayProducesTrajectoryFitAndManifest) {
  const fs::path out = Scratch("minimal");
  const Result r = Cli("run --quiet " + Config(kSource / "configs" / "synthetic_decay_minimal.json") +
                       " --output \"" + out.string() + "\"");
  ASSERT_EQ(r.code, 0) << r.err;
  for (const char* f : {"trajectory.csv", "fit.json", "manifest.json"}) EXPECT_TRUE(fs::exists(out / f)) << f;
  const json fit = json::parse(Slurp(out / "fit.json"));
  EXPECT_EQ(fit["status"], "ok");
  EXPECT_GT(fit["fit"]["exponent"].get<double>(), 1.0);
  const json m = json::parse(Slurp(out / "manifest.json"));
  EXPECT_EQ(m["status"], "ok");
  EXPECT_EQ(m["seed"], 7);
  EXPECT_EQ(m["version"], hyperlq::cli::kVersion);
  for (const json& f : m["files"]) {
    EXPECT_EQ(f["sha256"].get<std::string>(), hyperlq::cli::Sha256File((out / f["path"].get<std::string>()).string()));
  }
  const std::string header = Slurp(out / "trajectory.csv").substr(0, 50);
  EXPECT_EQ(header.rfind("time,energy,value,control_norm_sq,obs_norm_sq\n", 0), 0u);
}

TEST(Cli, RectangleWithReversedStripExitsTwo) {
  const fs::path p = WriteConfig("rect_bad", R"({
    "output_dir": "unused",
    "model": {"type": "rectangle", "a": 2, "b": 1, "max_frequency": 16},
    "experiment": {"type": "observability", "horizon": 10, "shells": [2, 4, 8]}
  })");
  const Result r = Cli("run " + Config(p));
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("a < b required"), std::string::npos) << r.err;
  EXPECT_NE(r.err.find("model.a"), std::string::npos) << r.err;
}

TEST(Cli, UnknownKeyRejected) {
  const fs::path p = WriteConfig("unknown", R"({
    "output_dir": "unused",
    "model": {"type": "synthetic", "rho": 2, "eta": 2, "n_modes": 8, "colour": "red"},
    "experiment": {"type": "bounds"}
  })");
  const Result r = Cli("validate " + Config(p));
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("model.colour"), std::string::npos) << r.err;
  EXPECT_NE(r.err.find("unknown key"), std::string::npos) << r.err;
}

TEST(Cli, MalformedJsonReportsLineAndColumn) {
  const fs::path p = WriteConfig("malformed", "{\n  \"seed\": 1,\n  \"model\": {\"type\": \"interval\",,}\n}\n");
  const Result r = Cli("validate " + Config(p));
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find(":3:"), std::string::npos) << r.err;
  EXPECT_NE(r.err.find("JSON syntax error"), std::string::npos) << r.err;
}

TEST(Cli, TypeAndRangeErrorsNameTheField) {
  const fs::path p = WriteConfig("badrange", R"({
    "output_dir": "unused",
    "model": {"type": "synthetic", "rho": 2, "eta": 2, "n_modes": 8},
    "experiment": {"type": "observability", "horizon": -1, "shells": [1, 2, 3]}
  })");
  const Result r = Cli("validate " + Config(p));
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("experiment.horizon"), std::string::npos) << r.err;
}

TEST(Cli, MissingOutputDirExitsTwo) {
  const fs::path p = WriteConfig("noout", R"({
    "model": {"type": "synthetic", "rho": 2, "eta": 2, "n_modes": 8},
    "experiment": {"type": "bounds"}
  })");
  EXPECT_EQ(Cli("run " + Config(p)).code, 2);
  EXPECT_EQ(Cli("validate " + Config(p)).code, 0);
}

TEST(Cli, SubcommandMustMatchExperiment) {
  const fs::path cfg = kSource / "configs" / "synthetic_bounds.json";
  const fs::path out = Scratch("mismatch");
  EXPECT_EQ(Cli("turnpike " + Config(cfg) + " --output \"" + out.string() + "\"").code, 2);
  EXPECT_EQ(Cli("bounds --quiet " + Config(cfg) + " --output \"" + out.string() + "\"").code, 0);
}

TEST(Cli, BoundsOnSyntheticGivesPositiveLowerConstant) {
  const fs::path out = Scratch("bounds");
  const Result r = Cli("bounds --quiet " + Config(kSource / "configs" / "synthetic_bounds.json") + " --output \"" +
                       out.string() + "\"");
  ASSERT_EQ(r.code, 0) << r.err;
  const json s = json::parse(Slurp(out / "summary.json"));
  EXPECT_GT(s["c1_hat"].get<double>(), 0.0);
  EXPECT_GE(s["c2_hat"].get<double>(), s["c1_hat"].get<double>());
  EXPECT_TRUE(fs::exists(out / "bounds.csv"));
  EXPECT_TRUE(fs::exists(out / "riccati.json"));
}

TEST(Cli, TurnpikeEmitsOneRowPerHorizon) {
  const fs::path out = Scratch("turnpike");
  const Result r = Cli("turnpike --quiet " + Config(kSource / "configs" / "synthetic_turnpike.json") +
                       " --output \"" + out.string() + "\"");
  ASSERT_EQ(r.code, 0) << r.err;
  std::istringstream csv(Slurp(out / "turnpike.csv"));
  std::string line;
  std::getline(csv, line);
  EXPECT_EQ(line, "horizon,avg_tracking,avg_state_gap,bound_proxy");
  int rows = 0;
  while (std::getline(csv, line))
    if (!line.empty()) ++rows;
  EXPECT_EQ(rows, 4);
}

TEST(Cli, SameSeedGivesByteIdenticalCsvs) {
  const fs::path cfg = kSource / "configs" / "interval_suite.json";
  const fs::path a = Scratch("det_a"), b = Scratch("det_b"), c = Scratch("det_c");
  ASSERT_EQ(Cli("run --quiet " + Config(cfg) + " --output \"" + a.string() + "\"").code, 0);
  ASSERT_EQ(Cli("run --quiet --threads 1 " + Config(cfg) + " --output \"" + b.string() + "\"").code, 0);
  ASSERT_EQ(Cli("run --quiet " + Config(cfg) + " --output \"" + c.string() + "\"", "HYPERLQ_THREADS=3").code, 0);
  const auto ca = Csvs(a);
  EXPECT_GE(ca.size(), 6u);
  EXPECT_EQ(ca, Csvs(b));
  EXPECT_EQ(ca, Csvs(c));
}

TEST(Cli, SeedOverrideChangesRandomDraws) {
  const fs::path cfg = kSource / "configs" / "synthetic_decay_minimal.json";
  const fs::path a = Scratch("seed_a"), b = Scratch("seed_b");
  ASSERT_EQ(Cli("run --quiet " + Config(cfg) + " --output \"" + a.string() + "\"").code, 0);
  ASSERT_EQ(Cli("run --quiet --seed 8 " + Config(cfg) + " --output \"" + b.string() + "\"").code, 0);
  EXPECT_NE(Slurp(a / "trajectory.csv"), Slurp(b / "trajectory.csv"));
  EXPECT_EQ(json::parse(Slurp(b / "manifest.json"))["seed"], 8);
}

TEST(Cli, SolverFailureExitsThreeAndFlagsOutputs) {
  // No control at all: the observed undamped modes cannot be stabilized.
  const fs::path p = WriteConfig("unstab", R"({
    "model": {"type": "interval", "n_modes": 4, "control": "none"},
    "experiment": {"type": "bounds", "weak": "energy", "strong": "energy"}
  })");
  const fs::path out = Scratch("unstab_out");
  const Result r = Cli("run " + Config(p) + " --output \"" + out.string() + "\"");
  EXPECT_EQ(r.code, 3) << r.err;
  EXPECT_NE(r.err.find("numeric failure"), std::string::npos) << r.err;
  EXPECT_EQ(json::parse(Slurp(out / "summary.json"))["status"], "failed");
  EXPECT_EQ(json::parse(Slurp(out / "manifest.json"))["status"], "failed");
}

TEST(Cli, OutputsStayInsideOutputDir) {
  const fs::path out = Scratch("inside");
  ASSERT_EQ(Cli("run --quiet " + Config(kSource / "configs" / "interval_suite.json") + " --output \"" +
                out.string() + "\"")
                .code,
            0);
  const json m = json::parse(Slurp(out / "manifest.json"));
  size_t listed = 0;
  for (const json& f : m["files"]) {
    EXPECT_TRUE(fs::exists(out / f["path"].get<std::string>()));
    ++listed;
  }
  size_t present = 0;
  for (const auto& e : fs::recursive_directory_iterator(out))
    if (e.is_regular_file()) ++present;
  EXPECT_EQ(present, listed + 1);  // manifest itself
}

TEST(Cli, ThreadResolutionHonoursCap) {
  unsetenv("HYPERLQ_THREADS");
  EXPECT_EQ(hyperlq::cli::ResolveThreads(5), 5);
  EXPECT_GE(hyperlq::cli::ResolveThreads(0), 1);
  setenv("HYPERLQ_THREADS", "2", 1);
  EXPECT_EQ(hyperlq::cli::ResolveThreads(5), 2);
  EXPECT_EQ(hyperlq::cli::ResolveThreads(1), 1);
  setenv("HYPERLQ_THREADS", "junk", 1);
  EXPECT_EQ(hyperlq::cli::ResolveThreads(5), 5);
  unsetenv("HYPERLQ_THREADS");
}

TEST(Cli, MissingCommandLineArgumentsExitTwo) {
  EXPECT_EQ(Cli("").code, 2);
  EXPECT_EQ(Cli("run").code, 2);
  EXPECT_EQ(Cli("frobnicate --config x").code, 2);
  EXPECT_EQ(Cli("validate --config /nonexistent/file.json").code, 2);
}
