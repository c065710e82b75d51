// Copyright 2026 The skewquant Authors
// SPDX-License-Identifier: Apache-2.0
//
// skewquant spectrum|verify|orbit|angles --config FILE [overrides]

#include <skewquant/cli.hpp>

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <string>

namespace sc = skewquant::cli;

int main(int argc, char** argv) {
  CLI::App app{"Semiclassical spin quantisation of integrable skew-product flows"};
  app.require_subcommand(1, 1);

  std::string config_path, out_path, summary_path, model_name, spin;
  std::optional<double> tol;
  std::optional<std::uint64_t> seed;
  for (const char* name : {"spectrum", "verify", "orbit", "angles"}) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "JSON config file");
    sub->add_option("--out", out_path, "output file ('-' for stdout)");
    sub->add_option("--summary", summary_path, "JSON summary file (spectrum)");
    sub->add_option("--tol", tol, "integrator tolerance");
    sub->add_option("--seed", seed, "sampling seed");
    sub->add_option("--model", model_name, "model name (kepler | ho)");
    sub->add_option("--spin", spin, "spin quantum number, e.g. 1/2");
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? sc::kOk : sc::kConfigError;
  }

  sc::RunConfig rc;
  try {
    nlohmann::json j = nlohmann::json::object();
    if (!config_path.empty()) {
      std::ifstream in(config_path);
      if (!in) throw sc::ConfigError("cannot open config file '" + config_path + "'");
      try {
        j = nlohmann::json::parse(in);
      } catch (const nlohmann::json::parse_error& e) {
        throw sc::ConfigError("config file '" + config_path + "' is not valid JSON: " + e.what());
      }
    }
    if (!model_name.empty()) {
      if (j.contains("model") && j["model"].is_object()) j["model"]["name"] = model_name;
      else j["model"] = model_name;
    }
    if (!spin.empty()) j["spin"] = spin;
    rc = sc::parse_config(j);
    rc.subcommand = app.get_subcommands().front()->get_name();
    if (!out_path.empty()) rc.out_path = out_path;
    if (!summary_path.empty()) rc.summary_path = summary_path;
    if (tol) rc.tol_integrator = *tol;
    if (seed) rc.seed = *seed;
  } catch (const sc::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return sc::kConfigError;
  }
  return sc::run(rc);
}
