// Copyright 2026 The skewquant Authors
// SPDX-License-Identifier: Apache-2.0

#include <skewquant/cli.hpp>

#include <gtest/gtest.h>
#include <sys/wait.h>

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

using namespace skewquant;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

const std::string kCli = SKEWQUANT_CLI_PATH;
const std::string kConfigs = SKEWQUANT_CONFIG_DIR;

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "skewquant_cli_test";
  fs::create_directories(dir);
  return dir / name;
}

int run_cli(const std::string& args) {
  const std::string cmd = kCli + " " + args + " 2>" + scratch("stderr.txt").string();
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path write_config(const std::string& name, const json& j) {
  const fs::path p = scratch(name);
  std::ofstream(p) << j.dump(2);
  return p;
}

// Rows of a CSV file keyed by header column.
std::vector<std::map<std::string, double>> read_csv(const fs::path& p) {
  std::ifstream in(p);
  std::string line;
  std::getline(in, line);
  std::vector<std::string> cols;
  std::stringstream hs(line);
  for (std::string c; std::getline(hs, c, ',');) cols.push_back(c);
  std::vector<std::map<std::string, double>> rows;
  while (std::getline(in, line)) {
    std::stringstream ls(line);
    std::map<std::string, double> row;
    std::string cell;
    for (const auto& c : cols) {
      std::getline(ls, cell, ',');
      row[c] = std::stod(cell);
    }
    rows.push_back(row);
  }
  return rows;
}

std::string header(const fs::path& p) {
  std::ifstream in(p);
  std::string line;
  std::getline(in, line);
  return line;
}

}  // namespace

TEST(ParseConfig, DefaultsAndRanges) {
  const cli::RunConfig rc = cli::parse_config(json::parse(R"({"subcommand": "spectrum", "model": "ho",
      "ranges": {"n_max": 4}})"));
  EXPECT_EQ(rc.model.name, "ho");
  EXPECT_EQ(rc.spin.twice(), 1);
  EXPECT_EQ(rc.n_r_max, 3);
  EXPECT_EQ(rc.l_max, 4);
  EXPECT_EQ(rc.samples, 200);
  EXPECT_NO_THROW(cli::validate(rc));
}

TEST(ParseConfig, GridForms) {
  const cli::RunConfig rc = cli::parse_config(json::parse(R"({"subcommand": "angles", "model": "kepler",
      "grid": {"binding": {"from": 0.01, "to": 0.03, "count": 3}, "L": [0.5]}})"));
  ASSERT_EQ(rc.grid_E.size(), 3u);
  EXPECT_DOUBLE_EQ(rc.grid_E[1], 0.02);
  EXPECT_TRUE(rc.grid_binding);
  EXPECT_EQ(rc.grid_L, std::vector<double>{0.5});
}

TEST(ParseConfig, ErrorsNameTheField) {
  try {
    cli::validate(cli::parse_config(json::parse(R"({"subcommand": "spectrum", "model": "nope"})")));
    FAIL() << "expected ConfigError";
  } catch (const cli::ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("model.name"), std::string::npos) << e.what();
  }
  EXPECT_THROW(cli::parse_config(json::parse(R"({"subcommand": "spectrum", "spin": "1/3"})")), cli::ConfigError);
  EXPECT_THROW(cli::validate(cli::parse_config(json::parse(R"({"subcommand": "angles"})"))), cli::ConfigError);
  EXPECT_THROW(cli::validate(cli::parse_config(json::parse(R"({"subcommand": "dance"})"))), cli::ConfigError);
}

TEST(ParseConfig, UnitSystems) {
  cli::ModelConfig mc;
  mc.alpha_s = 0.01;
  mc.units = "atomic";
  const auto atomic = cli::make_model(mc);
  // Ground state binding is alpha^2 m c^2 / 2 = 1/2 hartree to leading order.
  mc.units = "natural";
  const auto natural = cli::make_model(mc);
  EXPECT_NEAR(atomic->escape_energy(), 1e4, 1e-8);
  EXPECT_NEAR(natural->escape_energy(), 1.0, 1e-15);
}

TEST(CliSpectrum, KeplerLowLevels) {
  const fs::path out = scratch("spectrum.csv"), summary = scratch("spectrum.json");
  ASSERT_EQ(run_cli("spectrum --config " + kConfigs + "/kepler_spectrum.json --out " + out.string() + " --summary " +
                    summary.string()),
            0);
  EXPECT_EQ(header(out), "n_r,l,m_s,j,m_j,E,multiplicity,n,I_r,L,level");
  const auto rows = read_csv(out);
  ASSERT_EQ(rows.size(), 8u);
  std::map<int, int> per_level;
  for (const auto& r : rows) ++per_level[static_cast<int>(r.at("level"))];
  EXPECT_EQ(per_level, (std::map<int, int>{{0, 2}, {1, 2}, {2, 4}}));
  const double a = 0.0072973525693;
  EXPECT_NEAR(rows[0].at("E"), std::sqrt(1 - a * a), 1e-12);
  const json s = json::parse(slurp(summary));
  ASSERT_EQ(s.at("levels").size(), 3u);
  EXPECT_EQ(s.at("levels")[2].at("multiplicity"), 4);
}

TEST(CliSpectrum, SpinlessOscillatorLadder) {
  const fs::path out = scratch("ho.csv");
  ASSERT_EQ(run_cli("spectrum --config " + kConfigs + "/ho_spectrum.json --spin 0 --out " + out.string()), 0);
  const auto rows = read_csv(out);
  ASSERT_FALSE(rows.empty());
  for (const auto& r : rows) {
    EXPECT_EQ(r.at("m_s"), 0.0);
    EXPECT_NEAR(r.at("E"), 2 * r.at("n_r") + r.at("l") + 1.5, 1e-8);
  }
}

TEST(CliSpectrum, UnknownModelIsAConfigError) {
  const fs::path cfg = write_config("bad_model.json", {{"subcommand", "spectrum"}, {"model", "nope"}});
  EXPECT_EQ(run_cli("spectrum --config " + cfg.string() + " --out " + scratch("x.csv").string()), 1);
  EXPECT_NE(slurp(scratch("stderr.txt")).find("model.name"), std::string::npos);
  EXPECT_EQ(run_cli("spectrum --config " + scratch("missing.json").string()), 1);
  std::ofstream(scratch("garbled.json")) << "{ not json";
  EXPECT_EQ(run_cli("spectrum --config " + scratch("garbled.json").string()), 1);
}

TEST(CliVerify, KeplerPasses) {
  const fs::path out = scratch("verify.json");
  ASSERT_EQ(run_cli("verify --config " + kConfigs + "/verify_kepler.json --out " + out.string()), 0);
  const json v = json::parse(slurp(out));
  EXPECT_TRUE(v.at("pass").get<bool>());
  for (const auto& r : v.at("reports")) {
    EXPECT_EQ(r.at("samples"), 200);
    if (r.at("control").get<bool>()) continue;
    EXPECT_LT(r.at("max_residual").get<double>(), 1e-6) << r.at("pair");
    EXPECT_LT(r.at("delta_max").get<double>(), 1e-6) << r.at("pair");
  }
}

TEST(CliVerify, BrokenControlFails) {
  const fs::path out = scratch("broken.json");
  ASSERT_EQ(run_cli("verify --config " + kConfigs + "/verify_broken.json --out " + out.string()), 0);
  const json v = json::parse(slurp(out));
  bool found = false;
  for (const auto& r : v.at("reports")) {
    if (!r.at("control").get<bool>()) continue;
    found = true;
    EXPECT_FALSE(r.at("pass").get<bool>());
    EXPECT_GT(r.at("max_residual").get<double>(), 1e-2);
    EXPECT_FALSE(r.at("failures").empty());
  }
  EXPECT_TRUE(found);
}

TEST(CliVerify, EmptyBoxIsAConfigError) {
  json j = json::parse(slurp(kConfigs + "/verify_kepler.json"));
  j["verify"]["box"]["p"] = {0.5, 0.5};
  const fs::path cfg = write_config("empty_box.json", j);
  EXPECT_EQ(run_cli("verify --config " + cfg.string() + " --out " + scratch("v.json").string()), 1);
}

TEST(CliOrbit, ZeroTimeGivesOneRow) {
  json j = json::parse(slurp(kConfigs + "/kepler_orbit.json"));
  j["orbit"]["t_final"] = 0.0;
  const fs::path cfg = write_config("orbit0.json", j), out = scratch("orbit0.csv");
  ASSERT_EQ(run_cli("orbit --config " + cfg.string() + " --out " + out.string()), 0);
  const auto rows = read_csv(out);
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_EQ(rows[0].at("t"), 0.0);
  EXPECT_EQ(rows[0].at("q0"), 1.0);
  EXPECT_EQ(rows[0].at("s1"), 1.0);
}

TEST(CliOrbit, RosetteAndDeterminism) {
  const fs::path a = scratch("orbit_a.csv"), b = scratch("orbit_b.csv");
  ASSERT_EQ(run_cli("orbit --config " + kConfigs + "/kepler_orbit.json --out " + a.string()), 0);
  ASSERT_EQ(run_cli("orbit --config " + kConfigs + "/kepler_orbit.json --out " + b.string()), 0);
  EXPECT_EQ(slurp(a), slurp(b));
  EXPECT_EQ(header(a), "t,x1,x2,x3,p1,p2,p3,q0,q1,q2,q3,s1,s2,s3,r,phi");
  const KeplerOrbitConstants oc = kepler_orbit_constants(1.0, 1.0, 0.5, 0.95, 0.6);
  double worst = 0.0, spin_norm = 0.0;
  const auto rows = read_csv(a);
  for (const auto& r : rows) {
    const double inv_r = 1.0 / r.at("r");
    worst = std::max(worst, std::abs(inv_r - (oc.C + oc.A * std::cos(oc.gamma * r.at("phi")))) / inv_r);
    spin_norm = std::max(spin_norm, std::abs(std::hypot(r.at("s1"), r.at("s2"), r.at("s3")) - 1.0));
  }
  EXPECT_LT(worst, 1e-6);
  EXPECT_LT(spin_norm, 1e-8);
  EXPECT_GT(rows.back().at("phi"), 3 * kTwoPi);
}

TEST(CliAngles, KeplerGridIsTwoPi) {
  const fs::path out = scratch("angles.csv");
  ASSERT_EQ(run_cli("angles --config " + kConfigs + "/kepler_angles.json --out " + out.string()), 0);
  EXPECT_EQ(header(out), "E,L,I_r,omega_r,omega_L,alpha_r");
  const auto rows = read_csv(out);
  EXPECT_EQ(rows.size(), 9u);
  for (const auto& r : rows) {
    EXPECT_NEAR(r.at("alpha_r"), kTwoPi, 1e-6);
    EXPECT_GT(r.at("I_r"), 0.0);
    EXPECT_GT(r.at("omega_L"), r.at("omega_r"));
  }
}

TEST(CliAngles, UnboundGridIsANumericFailure) {
  json j = json::parse(slurp(kConfigs + "/kepler_angles.json"));
  j["grid"]["L"] = {0.1};  // c L < e^2 everywhere
  const fs::path cfg = write_config("unbound.json", j);
  EXPECT_EQ(run_cli("angles --config " + cfg.string() + " --out " + scratch("u.csv").string()), 2);
}
