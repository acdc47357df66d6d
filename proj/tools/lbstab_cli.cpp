// lbstab: construct, verify, simulate, converge, scan.
//
//   lbstab construct --preset preset-1 --out out/
//   lbstab converge --config configs/converge_test1_preset1.json --grid 32,64,128
//   lbstab scan --config configs/scan_u01_1_6.json --threads 4

#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "lbstab/config.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Stability-certified lattice Boltzmann schemes for the linearized Euler equations"};
  app.set_version_flag("--version", "lbstab 0.1.0");

  std::string command;
  std::string config_path;
  std::string out_dir;
  std::string preset;
  std::vector<std::size_t> grids;
  double tau = 0.0;
  bool allow_unstable = false;
  unsigned threads = 0;
  int test_case = 0;
  std::string operator_path;

  app.add_option("command", command, "construct | verify | simulate | converge | scan");
  app.add_option("--config", config_path, "JSON run configuration")->check(CLI::ExistingFile);
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--preset", preset, "background velocity preset (preset-1 .. preset-4)");
  app.add_option("--grid", grids, "grid size(s), comma separated")->delimiter(',');
  auto* tau_opt = app.add_option("--tau", tau, "relaxation time");
  app.add_flag("--allow-unstable", allow_unstable, "permit tau < 1/2");
  app.add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber);
  app.add_option("--test-case", test_case, "test case id (1, 2, 3)")->check(CLI::Range(1, 3));
  app.add_option("--operator", operator_path, "operator file for verify");

  CLI11_PARSE(app, argc, argv);

  try {
    nlohmann::json j = config_path.empty() ? nlohmann::json::object() : lbstab::load_config_json(config_path);
    if (!j.is_object()) throw lbstab::ConfigError("cli", "configuration must be a JSON object");
    if (!command.empty()) j["command"] = command;
    if (!out_dir.empty()) j["out"] = out_dir;
    if (!preset.empty()) {
      j["preset"] = preset;
      if (j.contains("background") && j["background"].is_object()) j["background"].erase("u0");
    }
    if (!grids.empty()) j["grid"] = grids;
    if (*tau_opt) j["tau"] = tau;
    if (allow_unstable) j["allow_unstable"] = true;
    if (threads > 0) j["threads"] = threads;
    if (test_case > 0) j["test_case"] = test_case;
    if (!operator_path.empty()) j["operator"] = operator_path;

    const lbstab::RunConfig cfg = lbstab::parse_config(j);
    return lbstab::dispatch(cfg, std::cout, std::cerr);
  } catch (const lbstab::Error& e) {
    std::cerr << e.what() << '\n';
    return lbstab::kExitError;
  }
}
