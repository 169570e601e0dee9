#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>
#include "ppsd/cli/commands.hpp"

using namespace ppsd;
using namespace ppsd::cli;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "ppsd_lab");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

/// Non-comment CSV lines split on commas.
std::vector<std::vector<std::string>> csv_body(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) {
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> cells;
    std::istringstream ls(line);
    for (std::string c; std::getline(ls, c, ',');) cells.push_back(c);
    rows.push_back(cells);
  }
  return rows;
}

std::filesystem::path temp_path(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("ppsd_lab_test_" + name);
}

}  // namespace

TEST(Cli, SimulateDephasingPurity) {
  const auto r = run({"simulate", "--model", "dephasing_qubit", "--param", "gamma=1", "--state", "plus", "--t-max",
                      "1", "--steps", "10"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto body = csv_body(r.out);
  ASSERT_EQ(body.size(), 12u);
  EXPECT_EQ(body[0][0], "t");
  EXPECT_EQ(body[0][1], "purity");
  EXPECT_NEAR(std::stod(body.back()[0]), 1.0, 1e-15);
  EXPECT_NEAR(std::stod(body.back()[1]), 0.5 * (1 + std::exp(-4.0)), 1e-12);
  EXPECT_NE(r.out.find("# command: simulate"), std::string::npos);
}

TEST(Cli, SimulateThermalRelaxesToMinus) {
  const auto r = run({"simulate", "--model", "thermal_qubit", "--param", "gamma0=1", "--param", "N=0", "--state",
                      "plus", "--t-max", "30", "--steps", "3", "--format", "json"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = nlohmann::json::parse(r.out);
  const auto& last = j["rows"].back();
  EXPECT_NEAR(last[1].get<double>(), 1.0, 1e-10);
  // n_z = <Z> with |+> at index 0, so the ground |-> has n_z = -1
  EXPECT_NEAR(last[6].get<double>(), -1.0, 1e-10);
  EXPECT_EQ(j["metadata"]["command"], "simulate");
}

TEST(Cli, RkAndExactAgree) {
  const std::vector<std::string> base = {"simulate", "--model", "damped_oscillator", "--param", "gamma0=1",
                                         "--param", "N=0.2", "--dim", "8", "--state", "coherent:0.8,0.1",
                                         "--t-max", "2", "--steps", "4"};
  auto rk = base;
  rk.insert(rk.end(), {"--method", "rk"});
  const auto a = csv_body(run(base).out);
  const auto b = csv_body(run(rk).out);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 1; i < a.size(); ++i) EXPECT_NEAR(std::stod(a[i][1]), std::stod(b[i][1]), 1e-8);
}

TEST(Cli, InputErrorsExitTwo) {
  EXPECT_EQ(run({"simulate", "--model", "dephasing_qubit", "--param", "gamma=1", "--t-max", "0"}).code, 2);
  EXPECT_EQ(run({"simulate", "--model", "nope", "--t-max", "1"}).code, 2);
  EXPECT_EQ(run({"simulate", "--model", "dephasing_qubit", "--t-max", "1"}).code, 2);
  EXPECT_EQ(run({"simulate", "--model", "dephasing_qubit", "--param", "gamma", "--t-max", "1"}).code, 2);
  EXPECT_EQ(run({"simulate", "--model", "dephasing_qubit", "--param", "gamma=1", "--state", "basis:5", "--t-max",
                 "1"}).code,
            2);
  EXPECT_EQ(run({"ppsd-search", "--model", "dephasing_qubit", "--param", "gamma=1", "--restarts", "0"}).code, 2);
  EXPECT_EQ(run({"reproduce", "fig9"}).code, 2);
  EXPECT_EQ(run({}).code, 2);
  EXPECT_EQ(run({"simulate", "--model-file", "/nonexistent/model.json", "--t-max", "1"}).code, 2);
}

TEST(Cli, MalformedModelFile) {
  const auto path = temp_path("bad_model.json");
  {
    std::ofstream f(path);
    f << R"({"dim": 2, "hamiltonian": [[0, 0], [0, 0]], "terms": [{"rate": -1, "op": [[1, 0], [0, -1]]}]})";
  }
  const auto r = run({"simulate", "--model-file", path.string(), "--state", "basis:0", "--t-max", "1"});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("model file"), std::string::npos);
  std::filesystem::remove(path);
}

TEST(Cli, PpsdCheckVerdicts) {
  auto r = run({"ppsd-check", "--model", "depolarizing", "--param", "gamma_x=1", "--param", "gamma_y=1", "--param",
                "gamma_z=1", "--state", "basis:0"});
  ASSERT_EQ(r.code, 0) << r.err;
  auto body = csv_body(r.out);
  EXPECT_NEAR(std::stod(body[1][0]), 2.0, 1e-12);
  EXPECT_EQ(body[1][5], "no_ppsd");

  r = run({"ppsd-check", "--model", "thermal_qubit", "--param", "gamma0=1", "--param", "N=0", "--state", "ground"});
  body = csv_body(r.out);
  EXPECT_EQ(body[1][5], "stationary_only");

  r = run({"ppsd-check", "--model", "squeezed_vacuum_decay", "--param", "gamma0=1", "--param", "r=0.2", "--param",
           "theta=3.141592653589793", "--state", "squeezed_ppsd"});
  body = csv_body(r.out);
  EXPECT_LT(std::stod(body[1][0]), 1e-12);
  EXPECT_EQ(body[1][5], "no_ppsd");
}

TEST(Cli, SearchWithoutHitsStillSucceeds) {
  const auto r = run({"ppsd-search", "--model", "thermal_qubit", "--param", "gamma0=1", "--param", "N=1",
                      "--restarts", "8"});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.err.find("no PPSD states found"), std::string::npos);
  EXPECT_EQ(csv_body(r.out).size(), 1u);
}

TEST(Cli, SearchIsByteIdenticalAcrossRuns) {
  const std::vector<std::string> args = {"ppsd-search", "--model", "phase_damped_oscillator", "--param", "gamma=1",
                                         "--dim", "4", "--restarts", "12", "--seed", "9"};
  const auto a = run(args);
  const auto b = run(args);
  ASSERT_EQ(a.code, 0);
  EXPECT_EQ(a.out, b.out);
  EXPECT_NE(a.out.find("# seed: 9"), std::string::npos);
}

TEST(Cli, ListModels) {
  const auto r = run({"list-models", "--format", "json"});
  ASSERT_EQ(r.code, 0);
  const auto j = nlohmann::json::parse(r.out);
  ASSERT_EQ(j["rows"].size(), 13u);
  EXPECT_EQ(j["rows"][0][0], "dephasing_qubit");
}

TEST(Cli, ExportModelRoundTrip) {
  const auto path = temp_path("squeezed.json");
  auto r = run({"export-model", "--model", "squeezed_vacuum_decay", "--param", "gamma0=0.7", "--param", "r=0.3",
                "--param", "theta=1.1", "-o", path.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto loaded = load_model_file(path);
  const auto direct =
      catalog_model({ModelName::squeezed_vacuum_decay, {{"gamma0", 0.7}, {"r", 0.3}, {"theta", 1.1}}, {}, {}});
  ASSERT_EQ(loaded.terms.size(), direct.terms.size());
  EXPECT_LT((loaded.hamiltonian - direct.hamiltonian).cwiseAbs().maxCoeff(), 1e-15);
  for (std::size_t i = 0; i < loaded.terms.size(); ++i) {
    EXPECT_LT(std::abs(loaded.terms[i].rate - direct.terms[i].rate), 1e-15);
    EXPECT_LT((loaded.terms[i].op - direct.terms[i].op).cwiseAbs().maxCoeff(), 1e-15);
  }

  // the exported file drives the same simulation
  const auto from_file = run({"simulate", "--model-file", path.string(), "--state", "basis:1", "--t-max", "1",
                              "--steps", "4"});
  const auto from_catalog = run({"simulate", "--model", "squeezed_vacuum_decay", "--param", "gamma0=0.7", "--param",
                                 "r=0.3", "--param", "theta=1.1", "--state", "basis:1", "--t-max", "1", "--steps", "4"});
  EXPECT_EQ(csv_body(from_file.out), csv_body(from_catalog.out));
  std::filesystem::remove(path);
}

TEST(Cli, OutputFileIsWrittenWhole) {
  const auto path = temp_path("out.csv");
  std::filesystem::remove(path);
  const auto r = run({"simulate", "--model", "dephasing_qubit", "--param", "gamma=1", "--state", "plus", "--t-max",
                      "1", "--steps", "5", "-o", path.string()});
  ASSERT_EQ(r.code, 0);
  EXPECT_TRUE(r.out.empty());
  std::ifstream f(path);
  std::stringstream ss;
  ss << f.rdbuf();
  EXPECT_EQ(csv_body(ss.str()).size(), 7u);
  for (const auto& e : std::filesystem::directory_iterator(path.parent_path())) {
    EXPECT_EQ(e.path().filename().string().find("ppsd_lab_test_out.csv."), std::string::npos);
  }
  std::filesystem::remove(path);
}

TEST(Cli, ReproduceQuickTargets) {
  for (const char* target : {"eq3", "eq16", "fig2", "fig3"}) {
    const auto r = run({"reproduce", target});
    EXPECT_EQ(r.code, 0) << target << ": " << r.err;
    EXPECT_NE(r.out.find("# check:"), std::string::npos);
  }
}
