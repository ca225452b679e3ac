#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "commands.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const fs::path kData = RPF_DATA_DIR;

struct Run {
  int code;
  std::string out;
  std::string err;
  json parsed() const { return json::parse(out); }
};

Run cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = rpf::cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string spec(const std::string& name) { return (kData / name).string(); }

fs::path fresh_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("rpf_cli_test_" + name);
  fs::remove_all(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(f), {}};
}

}  // namespace

TEST(Cli, CutoffMixture) {
  const auto r = cli({"cutoff", "--spec", spec("cutoff_mixture.json")});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = r.parsed();
  EXPECT_NEAR(j.at("s").get<double>(), 2.0932410833695028428, 1e-12);
  EXPECT_NEAR(j.at("W_at_atoms")[0].at("W").get<double>(), 0.13714398163768606963, 1e-12);
}

TEST(Cli, ExitCodes) {
  EXPECT_EQ(cli({"cutoff", "--spec", spec("cutoff_slack.json")}).code, 3);
  const auto missing = cli({"cutoff", "--spec", spec("no_such_file.json")});
  EXPECT_EQ(missing.code, 2);
  EXPECT_NE(missing.err.find("not found"), std::string::npos);
  EXPECT_EQ(cli({}).code, 2);
  EXPECT_EQ(cli({"nonsense"}).code, 2);
  EXPECT_EQ(cli({"cutoff"}).code, 2);
  EXPECT_EQ(cli({"axioms", "--spec", spec("axioms_tabulated.json")}).code, 0);
}

TEST(Cli, MalformedSpecReportsLine) {
  const auto dir = fresh_dir("malformed");
  fs::create_directories(dir);
  std::ofstream(dir / "bad.json") << "{\n  \"k\": 0.3,\n  \"noise\": {\n}\n,,\n";
  const auto r = cli({"cutoff", "--spec", (dir / "bad.json").string()});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("line"), std::string::npos) << r.err;
  fs::remove_all(dir);
}

TEST(Cli, AxiomsFailureGivesWitness) {
  const auto r = cli({"axioms", "--spec", spec("axioms_theta.json")});
  EXPECT_EQ(r.code, 1);
  bool found = false;
  const auto parsed = r.parsed();
  for (const auto& e : parsed.at("entries")) {
    if (e.at("axiom").get<std::string>() == rpf::axiom_names::co_monotonicity) {
      found = true;
      EXPECT_EQ(e.at("verdict"), "fail");
      EXPECT_TRUE(e.contains("witness"));
    }
  }
  EXPECT_TRUE(found);
  EXPECT_NE(r.err.find("fail"), std::string::npos);
  EXPECT_EQ(r.out, cli({"axioms", "--spec", spec("axioms_theta.json")}).out);
}

TEST(Cli, LogWarpedFailsOnlyShifts) {
  const auto r = cli({"axioms", "--spec", spec("axioms_log_warped.json")});
  EXPECT_EQ(r.code, 1);
  const auto parsed = r.parsed();
  for (const auto& e : parsed.at("entries")) {
    const bool shift = e.at("axiom").get<std::string>() == rpf::axiom_names::common_shifts || e.at("axiom").get<std::string>() == rpf::axiom_names::p_shifts;
    EXPECT_EQ(e.at("verdict"), shift ? "fail" : "pass") << e.at("axiom");
  }
}

TEST(Cli, Equilibrium) {
  const auto half = cli({"equilibrium", "--spec", spec("equilibrium_half.json")});
  ASSERT_EQ(half.code, 0) << half.err;
  EXPECT_NEAR(half.parsed().at("e_star").get<double>(), 1.0 / (2.0 * std::sqrt(2.0 * std::numbers::pi)), 1e-12);
  EXPECT_TRUE(half.parsed().at("verified").get<bool>());
  const auto quarter = cli({"equilibrium", "--spec", spec("equilibrium_quarter.json")});
  // phi(Phi^-1(0.75)) / 2, mpmath
  EXPECT_NEAR(quarter.parsed().at("e_star").get<double>(), 0.15888828634205311869, 1e-12);
  const auto bad = cli({"equilibrium", "--spec", spec("equilibrium_soc_fail.json")});
  EXPECT_EQ(bad.code, 0);
  EXPECT_FALSE(bad.parsed().at("soc_pass").get<bool>());
  EXPECT_NE(bad.err.find("warning"), std::string::npos);
}

TEST(Cli, DesignAndFigure) {
  const auto t1 = cli({"design", "--spec", spec("design_t1.json")}).parsed();
  EXPECT_NEAR(t1.at("optimal_k").at("k").get<double>(), 0.37100964820355159041, 1e-6);
  EXPECT_EQ(t1.at("proposition5").at("verdict"), "pass");

  const auto dir = fresh_dir("figure");
  fs::create_directories(dir / "in");
  std::ofstream(dir / "in" / "grid.json") << R"({"k_grid": [0.1, 0.25, 0.5, 0.9]})";
  const auto r = cli({"figure1", "--spec", (dir / "in" / "grid.json").string(), "--out", (dir / "out").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.parsed().at("t1").at("points"), 4);
  const auto rows = rpf::io::parse_csv(slurp(dir / "out" / "figure1_t1.csv"), 2, "figure1_t1.csv");
  ASSERT_EQ(rows.size(), 4u);
  EXPECT_EQ(std::stod(rows[1].cells[0]), 0.25);
  EXPECT_NEAR(std::stod(rows[1].cells[1]), 2.0 / std::numbers::pi, 1e-12);
  EXPECT_TRUE(fs::exists(dir / "out" / "manifest.json"));
  fs::remove_all(dir);
}

TEST(Cli, Dissipation) {
  const auto j = cli({"dissipation", "--spec", spec("dissipation_normal.json")}).parsed();
  EXPECT_NEAR(j.at("threshold_V").get<double>(), 4.0 * std::numbers::pi, 1e-12);
  EXPECT_NEAR(j.at("ratios")[0].at("ratio").get<double>(), 0.079577471545947667884, 1e-14);
}

TEST(Cli, SimulateDeterministic) {
  const auto a = cli({"simulate", "--spec", spec("simulate_mixture.json")});
  ASSERT_EQ(a.code, 0) << a.err;
  EXPECT_LE(a.parsed().at("mean_abs_err").get<double>(), 0.01);
  EXPECT_EQ(a.out, cli({"simulate", "--spec", spec("simulate_mixture.json")}).out);
  const auto b = cli({"simulate", "--spec", spec("simulate_mixture.json"), "--seed", "8"});
  EXPECT_NE(a.out, b.out);
  EXPECT_EQ(b.parsed().at("seed"), 8);
}

TEST(Cli, OutputDirectoryAndForce) {
  const auto dir = fresh_dir("force");
  const std::vector<std::string> args = {"equilibrium", "--spec", spec("equilibrium_half.json"), "--out", dir.string()};
  ASSERT_EQ(cli(args).code, 0);
  const auto first = slurp(dir / "equilibrium.json");
  const auto manifest = json::parse(slurp(dir / "manifest.json"));
  EXPECT_EQ(manifest.at("command"), "equilibrium");
  EXPECT_EQ(manifest.at("outputs")[0], "equilibrium.json");

  const auto refused = cli(args);
  EXPECT_EQ(refused.code, 2);
  EXPECT_NE(refused.err.find("--force"), std::string::npos);
  auto forced = args;
  forced.push_back("--force");
  ASSERT_EQ(cli(forced).code, 0);
  EXPECT_EQ(slurp(dir / "equilibrium.json"), first);
  fs::remove_all(dir);
}

TEST(Cli, BinaryExitCodes) {
  const std::string bin = RPF_CLI_PATH;
  auto status = [&](const std::string& args) {
    const int s = std::system((bin + " " + args + " >/dev/null 2>&1").c_str());
    return WIFEXITED(s) ? WEXITSTATUS(s) : -1;
  };
  EXPECT_EQ(status("cutoff --spec " + spec("cutoff_dirac.json")), 0);
  EXPECT_EQ(status("axioms --spec " + spec("axioms_theta.json")), 1);
  EXPECT_EQ(status("cutoff --spec " + spec("no_such_file.json")), 2);
  EXPECT_EQ(status("cutoff --spec " + spec("cutoff_slack.json")), 3);
}
