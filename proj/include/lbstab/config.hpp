#pragma once

// Run configuration (JSON) and command dispatch.
//
// {
//   "command": "construct" | "verify" | "simulate" | "converge" | "scan",
//   "preset": "preset-1",                        // or "background"
//   "background": {"rho0": 1, "u0": ["3/20/sqrt(3)", 0.0577, ...], "cs2": "1/3"},
//   "velocity_set": "D3Q33", "tau": 0.5, "allow_unstable": false,
//   "grid": 64 | [32, 64, 128], "test_case": 1, "final_time": 1.0, "steps": 100,
//   "pseudo1d": false, "write_binary": false, "operator": "operator.txt",
//   "out": "out", "threads": 1,
//   "scan": {"u01": 0.1667, "resolution": 41, "lo": -1, "hi": 1},
//   "reference": {"grid": 256, "method": "auto", "memory_cap_mb": 2048, "threshold": 1e-15},
//   "tolerances": {"certification": 1e-10, "kernel": 1e-10}
// }
//
// u0 components and cs2 accept numbers or exact strings such as
// "3/20/sqrt(3)"; when all of u0 is exact, rank checks run exactly too.

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "lbstab/analysis.hpp"
#include "lbstab/equilibrium.hpp"

namespace lbstab {

enum class Command { construct, verify, simulate, converge, scan };

struct RunConfig {
  Command command = Command::construct;
  std::optional<std::string> preset;
  bool has_background = false;
  BackgroundState background;
  std::string velocity_set = "D3Q33";
  double tau = 0.5;
  bool allow_unstable = false;
  std::vector<std::size_t> grids;
  int test_case = 1;
  std::optional<double> final_time;
  std::size_t steps = 0;
  bool pseudo1d = false;
  bool write_binary = false;
  std::string operator_path;
  std::string out_dir = ".";
  unsigned threads = 1;
  std::optional<double> scan_u01;
  std::size_t scan_resolution = 41;
  double scan_lo = -1.0;
  double scan_hi = 1.0;
  std::size_t reference_grid = 256;
  ReferenceMethod reference_method = ReferenceMethod::automatic;
  std::size_t memory_cap_mb = 2048;
  double spectral_threshold = 1e-15;
  double certification_tol = 1e-10;
  double kernel_tol = 1e-10;
};

/// Preset names accepted in "preset".
const std::vector<std::string>& preset_names();

/// Exact background velocity of a named preset; throws ConfigError otherwise.
ExactBackground preset_background(const std::string& name);

/// Validates and fills defaults. Throws ConfigError listing unknown keys,
/// missing required fields, or tau < 1/2 without allow_unstable.
RunConfig parse_config(const nlohmann::json& j);
RunConfig parse_config_text(const std::string& text);
nlohmann::json load_config_json(const std::string& path);

std::string command_name(Command c);

/// Exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitInfeasible = 2;

/// Runs a command, writes its artifacts below cfg.out_dir and a summary to
/// `log`; errors go to `err` with their module tag.
int dispatch(const RunConfig& cfg, std::ostream& log, std::ostream& err);

}  // namespace lbstab
