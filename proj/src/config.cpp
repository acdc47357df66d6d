#include "lbstab/config.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <set>
#include <sstream>

#include "lbstab/matrix_io.hpp"
#include "lbstab/simulator.hpp"
#include "lbstab/stability.hpp"

namespace lbstab {

using nlohmann::json;

namespace {

void reject_unknown(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
  std::string unknown;
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (!allowed.count(it.key())) unknown += (unknown.empty() ? "" : ", ") + it.key();
  }
  if (!unknown.empty()) throw ConfigError("cli", "unknown key(s) in " + where + ": " + unknown);
}

double number(const json& v, const std::string& key) {
  if (!v.is_number()) throw ConfigError("cli", "'" + key + "' must be a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) throw ConfigError("cli", "'" + key + "' must be finite");
  return d;
}

std::size_t count(const json& v, const std::string& key) {
  if (!v.is_number_integer() || v.get<long long>() < 0) {
    throw ConfigError("cli", "'" + key + "' must be a non-negative integer");
  }
  return v.get<std::size_t>();
}

// Number or exact string; returns the value and, for strings, the exact form.
std::pair<double, std::optional<exact::ScaledRoot>> scalar(const json& v, const std::string& key) {
  if (v.is_number()) return {number(v, key), std::nullopt};
  if (v.is_string()) {
    try {
      exact::ScaledRoot r = exact::parse_scaled_root(v.get<std::string>());
      return {r.to_double(), r};
    } catch (const Error& e) {
      throw ConfigError("cli", "'" + key + "': " + e.what());
    }
  }
  throw ConfigError("cli", "'" + key + "' must be a number or an exact expression string");
}

Command parse_command(const std::string& s) {
  if (s == "construct") return Command::construct;
  if (s == "verify") return Command::verify;
  if (s == "simulate") return Command::simulate;
  if (s == "converge") return Command::converge;
  if (s == "scan") return Command::scan;
  throw ConfigError("cli", "unknown command '" + s + "' (construct, verify, simulate, converge, scan)");
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6e", v);
  return buf;
}

BackgroundState resolve_background(const RunConfig& cfg) {
  if (cfg.preset) return BackgroundState::from_exact(cfg.background.rho0, preset_background(*cfg.preset));
  return cfg.background;
}

std::filesystem::path output_path(const RunConfig& cfg, const std::string& name) {
  std::filesystem::create_directories(cfg.out_dir);
  return std::filesystem::path(cfg.out_dir) / name;
}

void write_text(const std::filesystem::path& p, const std::string& text) {
  std::ofstream os(p);
  if (!os) throw InputError("cli", "cannot write '" + p.string() + "'");
  os << text;
}

ConstructionOptions construction_options(const RunConfig& cfg, bool full) {
  ConstructionOptions o;
  o.tau = cfg.tau;
  o.allow_unstable = cfg.allow_unstable;
  o.kernel_tol = cfg.kernel_tol;
  o.materialize_full = full;
  return o;
}

StudyOptions study_options(const RunConfig& cfg) {
  StudyOptions o;
  o.threads = cfg.threads;
  o.reference_grid = cfg.reference_grid;
  o.reference_method = cfg.reference_method;
  o.memory_cap_bytes = cfg.memory_cap_mb << 20;
  o.spectral_threshold = cfg.spectral_threshold;
  return o;
}

int run_construct(const RunConfig& cfg, std::ostream& log) {
  const BackgroundState bg = resolve_background(cfg);
  const VelocitySet vs = build_velocity_set(cfg.velocity_set);
  const Construction c = construct_partially_relative(vs, bg, construction_options(cfg, true));

  log << "velocity set " << vs.name() << ", u0 = (" << fmt(bg.u0[0]) << ", " << fmt(bg.u0[1]) << ", "
      << fmt(bg.u0[2]) << ")\n";
  log << "kernel dimension " << c.kernel.cols() << '\n';
  if (bg.exact && c.m1->integral()) {
    try {
      log << "kernel dimension (exact) " << exact_kernel_dimension(*c.m1, *bg.exact) << '\n';
    } catch (const Error& e) {
      log << "kernel dimension (exact) unavailable: " << e.what() << '\n';
    }
  }
  if (!c.feasible()) {
    log << "infeasible: no positive weights in the kernel of the constraint matrix\n";
    return kExitInfeasible;
  }
  const StabilityCertificate& cert = *c.certificate;
  log << "lambda min " << fmt(cert.lambda.minCoeff()) << ", max " << fmt(cert.lambda.maxCoeff()) << ", sum "
      << fmt(cert.lambda.sum()) << '\n';
  log << "symmetrization residual " << fmt(cert.symmetrization_residual) << '\n';
  log << "idempotency residual " << fmt(cert.idempotency_residual) << '\n';
  log << "projection rank " << cert.projection_rank << '\n';
  log << "relaxation rates";
  for (double r : cert.relaxation_rates) log << ' ' << fmt(r);
  log << '\n';
  const bool ok = cert.certified(cfg.certification_tol);
  log << (ok ? "certified" : "NOT certified") << '\n';
  const auto path = output_path(cfg, "operator.txt");
  save_matrix_file(path.string(), operator_to_file(*c.op, bg, &cert));
  log << "wrote " << path.string() << '\n';
  return ok ? kExitOk : kExitError;
}

int run_verify(const RunConfig& cfg, std::ostream& log) {
  if (cfg.operator_path.empty()) throw ConfigError("cli", "verify needs 'operator' (path to an operator file)");
  const LoadedOperator lo = operator_from_file(load_matrix_file(cfg.operator_path));
  if (!lo.op.full_matrix || !lo.lambda) {
    throw InputError("cli", "operator file lacks full_matrix or lambda; cannot verify");
  }
  const double sym = verify_prestability(lo.op, *lo.lambda);
  const double idem = verify_projection(lo.op);
  const std::size_t rank = projection_rank(lo.op);
  const bool ok = lo.lambda->minCoeff() > 0.0 && sym <= cfg.certification_tol && idem <= cfg.certification_tol &&
                  lo.op.tau >= 0.5;
  std::ostringstream report;
  report << "operator " << cfg.operator_path << '\n'
         << "lambda_min " << fmt(lo.lambda->minCoeff()) << '\n'
         << "symmetrization_residual " << fmt(sym) << '\n'
         << "idempotency_residual " << fmt(idem) << '\n'
         << "projection_rank " << rank << '\n'
         << "tau " << fmt(lo.op.tau) << '\n'
         << "certified " << (ok ? 1 : 0) << '\n';
  log << report.str();
  write_text(output_path(cfg, "verify.txt"), report.str());
  return ok ? kExitOk : kExitError;
}

std::shared_ptr<const CollisionOperator> certified_operator(const RunConfig& cfg, const BackgroundState& bg,
                                                            Vector* lambda) {
  Construction c = construct_partially_relative(build_velocity_set(cfg.velocity_set), bg,
                                                construction_options(cfg, false));
  if (!c.feasible()) return nullptr;
  if (lambda) *lambda = c.weights.lambda;
  return std::make_shared<const CollisionOperator>(std::move(*c.op));
}

int run_simulate(const RunConfig& cfg, std::ostream& log) {
  if (cfg.grids.size() != 1) throw ConfigError("cli", "simulate needs exactly one 'grid' value");
  const TestCase tc = make_test_case(cfg.test_case);
  const BackgroundState bg = test_background(tc, resolve_background(cfg));
  Vector lambda;
  auto op = certified_operator(cfg, bg, &lambda);
  if (!op) {
    log << "infeasible: no positive weights for this background velocity\n";
    return kExitInfeasible;
  }
  SimConfig sc;
  const std::size_t n = cfg.grids.front();
  sc.grid = cfg.pseudo1d ? Grid::pseudo1d(n) : Grid::cube(n);
  sc.background = bg;
  sc.op = op;
  sc.threads = cfg.threads;
  sc.lambda = lambda;
  if (cfg.final_time) {
    const double s = *cfg.final_time * static_cast<double>(n);
    if (std::abs(s - std::round(s)) > 1e-9 * std::max(1.0, s)) {
      throw ConfigError("cli", "final_time is not a whole number of steps on this grid");
    }
    sc.steps = static_cast<std::size_t>(std::round(s));
  } else {
    sc.steps = cfg.steps;
  }
  LatticeField field = init_equilibrium_field(sc, sample_macros(sc.grid, tc.rho, tc.u));
  const std::vector<Monitor> mon = run(sc, field);
  {
    std::ofstream os(output_path(cfg, "monitors.csv"));
    write_monitor_csv(os, mon);
  }
  {
    std::ofstream os(output_path(cfg, "macros.csv"));
    write_macro_csv(os, macro_fields(field, *op, bg));
  }
  if (cfg.write_binary) write_field_binary(output_path(cfg, "field.bin").string(), field);
  log << "simulated test case " << tc.id << " on " << sc.grid.nx << 'x' << sc.grid.ny << 'x' << sc.grid.nz
      << " for " << sc.steps << " steps\n";
  log << "energy " << fmt(mon.front().energy) << " -> " << fmt(mon.back().energy) << '\n';
  return kExitOk;
}

int run_converge(const RunConfig& cfg, std::ostream& log) {
  if (cfg.grids.empty()) throw ConfigError("cli", "converge needs 'grid' (list of grid sizes)");
  const TestCase tc = make_test_case(cfg.test_case);
  const BackgroundState bg = test_background(tc, resolve_background(cfg));
  auto op = certified_operator(cfg, bg, nullptr);
  if (!op) {
    log << "infeasible: no positive weights for this background velocity\n";
    return kExitInfeasible;
  }
  const double t = cfg.final_time.value_or(tc.final_time);
  const ConvergenceReport rep = convergence_study(tc, bg, op, cfg.grids, t, study_options(cfg));
  const auto path = output_path(cfg, "convergence_test" + std::to_string(tc.id) + ".csv");
  {
    std::ofstream os(path);
    write_convergence_csv(os, rep);
  }
  log << "test case " << tc.id << ", final time " << t << '\n';
  for (const ConvergenceRow& r : rep.rows) {
    log << "  N = " << r.grid_n << "  error = " << fmt(r.error);
    if (r.order) log << "  order = " << *r.order;
    log << '\n';
  }
  log << "wrote " << path.string() << '\n';
  return kExitOk;
}

int run_scan(const RunConfig& cfg, std::ostream& log) {
  if (!cfg.scan_u01) throw ConfigError("cli", "scan needs 'scan.u01'");
  const DomainMap map = scan_stability_domain(*cfg.scan_u01, cfg.scan_resolution, cfg.velocity_set, cfg.scan_lo,
                                              cfg.scan_hi, cfg.threads);
  const auto path = output_path(cfg, "domain.csv");
  {
    std::ofstream os(path);
    write_domain_csv(os, map);
  }
  std::size_t feasible = 0;
  for (auto v : map.feasible) feasible += v;
  log << "u01 = " << *cfg.scan_u01 << ": " << feasible << " of " << map.feasible.size() << " cells feasible\n";
  for (std::size_t j = map.u03.size(); j-- > 0;) {
    for (std::size_t i = 0; i < map.u02.size(); ++i) log << (map.at(i, j) ? '#' : '.');
    log << '\n';
  }
  log << "wrote " << path.string() << '\n';
  return kExitOk;
}

}  // namespace

const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> names = {"preset-1", "preset-2", "preset-3", "preset-4"};
  return names;
}

ExactBackground preset_background(const std::string& name) {
  static const std::vector<std::array<const char*, 3>> table = {
      {"3/20/sqrt(3)", "1/10/sqrt(3)", "1/5/sqrt(3)"},
      {"-1/4/sqrt(3)", "1/4/sqrt(3)", "1/2/sqrt(3)"},
      {"2/5/sqrt(3)", "9/10/sqrt(3)", "3/4/sqrt(3)"},
      {"3/4/sqrt(3)", "5/8/sqrt(3)", "1/sqrt(3)"},
  };
  const auto& names = preset_names();
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (names[i] == name) {
      ExactBackground bg;
      for (int d = 0; d < 3; ++d) bg.u0[d] = exact::parse_scaled_root(table[i][d]);
      return bg;
    }
  }
  throw ConfigError("cli", "unknown preset '" + name + "' (preset-1 .. preset-4)");
}

std::string command_name(Command c) {
  switch (c) {
    case Command::construct: return "construct";
    case Command::verify: return "verify";
    case Command::simulate: return "simulate";
    case Command::converge: return "converge";
    case Command::scan: return "scan";
  }
  return "?";
}

namespace {

RunConfig parse_config_impl(const json& j) {
  if (!j.is_object()) throw ConfigError("cli", "configuration must be a JSON object");
  reject_unknown(j,
                 {"command", "preset", "background", "velocity_set", "tau", "allow_unstable", "grid", "test_case",
                  "final_time", "steps", "pseudo1d", "write_binary", "operator", "out", "threads", "scan",
                  "reference", "tolerances"},
                 "configuration");
  RunConfig cfg;
  if (!j.contains("command") || !j["command"].is_string()) throw ConfigError("cli", "missing 'command'");
  cfg.command = parse_command(j["command"].get<std::string>());

  if (j.contains("preset")) {
    if (!j["preset"].is_string()) throw ConfigError("cli", "'preset' must be a string");
    cfg.preset = j["preset"].get<std::string>();
    preset_background(*cfg.preset);
  }
  if (j.contains("background")) {
    const json& b = j["background"];
    if (!b.is_object()) throw ConfigError("cli", "'background' must be an object");
    reject_unknown(b, {"rho0", "u0", "cs2"}, "background");
    if (b.contains("rho0")) cfg.background.rho0 = number(b["rho0"], "background.rho0");
    std::optional<exact::Rational> cs2_exact;
    if (b.contains("cs2")) {
      const auto [v, ex] = scalar(b["cs2"], "background.cs2");
      cfg.background.cs2 = v;
      if (ex && ex->radicand == 1) cs2_exact = ex->coeff;
    }
    if (b.contains("u0")) {
      if (cfg.preset) throw ConfigError("cli", "give either 'preset' or 'background.u0', not both");
      const json& u = b["u0"];
      if (!u.is_array() || u.size() != 3) throw ConfigError("cli", "'background.u0' must have three components");
      ExactBackground ex;
      bool all_exact = true;
      for (int d = 0; d < 3; ++d) {
        const auto [v, e] = scalar(u[static_cast<std::size_t>(d)], "background.u0");
        cfg.background.u0[d] = v;
        if (e) {
          ex.u0[d] = *e;
        } else {
          all_exact = false;
        }
      }
      const bool cs2_ok = !b.contains("cs2") || cs2_exact.has_value();
      if (all_exact && cs2_ok) {
        if (cs2_exact) ex.cs2 = *cs2_exact;
        cfg.background.exact = ex;
      }
      cfg.has_background = true;
    }
    cfg.background.validate();
  }
  if (cfg.preset && std::abs(cfg.background.cs2 - 1.0 / 3.0) > 0.0) {
    throw ConfigError("cli", "presets assume cs2 = 1/3");
  }

  if (j.contains("velocity_set")) {
    if (!j["velocity_set"].is_string()) throw ConfigError("cli", "'velocity_set' must be a string");
    cfg.velocity_set = j["velocity_set"].get<std::string>();
    build_velocity_set(cfg.velocity_set);
  }
  if (j.contains("allow_unstable")) {
    if (!j["allow_unstable"].is_boolean()) throw ConfigError("cli", "'allow_unstable' must be true or false");
    cfg.allow_unstable = j["allow_unstable"].get<bool>();
  }
  if (j.contains("tau")) cfg.tau = number(j["tau"], "tau");
  if (!(cfg.tau > 0.0)) throw ConfigError("cli", "tau must be positive");
  if (cfg.tau < 0.5 && !cfg.allow_unstable) {
    throw ConfigError("cli", "tau = " + std::to_string(cfg.tau) +
                                 " is below 1/2, where the collision is no longer a contraction in the weighted "
                                 "norm; set allow_unstable to run it anyway");
  }
  if (j.contains("grid")) {
    const json& g = j["grid"];
    if (g.is_array()) {
      for (const json& v : g) cfg.grids.push_back(count(v, "grid"));
    } else {
      cfg.grids.push_back(count(g, "grid"));
    }
  }
  if (j.contains("test_case")) {
    cfg.test_case = static_cast<int>(count(j["test_case"], "test_case"));
    make_test_case(cfg.test_case);
  }
  if (j.contains("final_time")) cfg.final_time = number(j["final_time"], "final_time");
  if (j.contains("steps")) cfg.steps = count(j["steps"], "steps");
  for (const char* key : {"pseudo1d", "write_binary"}) {
    if (!j.contains(key)) continue;
    if (!j[key].is_boolean()) throw ConfigError("cli", std::string("'") + key + "' must be true or false");
    (std::string(key) == "pseudo1d" ? cfg.pseudo1d : cfg.write_binary) = j[key].get<bool>();
  }
  if (j.contains("operator")) cfg.operator_path = j["operator"].get<std::string>();
  if (j.contains("out")) cfg.out_dir = j["out"].get<std::string>();
  if (j.contains("threads")) cfg.threads = static_cast<unsigned>(std::max<std::size_t>(1, count(j["threads"], "threads")));

  if (j.contains("scan")) {
    const json& s = j["scan"];
    reject_unknown(s, {"u01", "resolution", "lo", "hi"}, "scan");
    if (s.contains("u01")) cfg.scan_u01 = scalar(s["u01"], "scan.u01").first;
    if (s.contains("resolution")) cfg.scan_resolution = count(s["resolution"], "scan.resolution");
    if (s.contains("lo")) cfg.scan_lo = number(s["lo"], "scan.lo");
    if (s.contains("hi")) cfg.scan_hi = number(s["hi"], "scan.hi");
  }
  if (j.contains("reference")) {
    const json& r = j["reference"];
    reject_unknown(r, {"grid", "method", "memory_cap_mb", "threshold"}, "reference");
    if (r.contains("grid")) cfg.reference_grid = count(r["grid"], "reference.grid");
    if (r.contains("memory_cap_mb")) cfg.memory_cap_mb = count(r["memory_cap_mb"], "reference.memory_cap_mb");
    if (r.contains("threshold")) cfg.spectral_threshold = number(r["threshold"], "reference.threshold");
    if (r.contains("method")) {
      const std::string m = r["method"].get<std::string>();
      if (m == "auto") {
        cfg.reference_method = ReferenceMethod::automatic;
      } else if (m == "direct") {
        cfg.reference_method = ReferenceMethod::direct;
      } else if (m == "spectral") {
        cfg.reference_method = ReferenceMethod::spectral;
      } else {
        throw ConfigError("cli", "reference.method must be auto, direct or spectral");
      }
    }
  }
  if (j.contains("tolerances")) {
    const json& t = j["tolerances"];
    reject_unknown(t, {"certification", "kernel"}, "tolerances");
    if (t.contains("certification")) cfg.certification_tol = number(t["certification"], "tolerances.certification");
    if (t.contains("kernel")) cfg.kernel_tol = number(t["kernel"], "tolerances.kernel");
  }

  const bool needs_background = cfg.command == Command::construct || cfg.command == Command::simulate ||
                                cfg.command == Command::converge;
  if (needs_background && !cfg.preset && !cfg.has_background) {
    throw ConfigError("cli", command_name(cfg.command) + " needs 'preset' or 'background.u0'");
  }
  return cfg;
}

}  // namespace

RunConfig parse_config(const json& j) {
  try {
    return parse_config_impl(j);
  } catch (const json::exception& e) {
    throw ConfigError("cli", std::string("invalid value type: ") + e.what());
  }
}

RunConfig parse_config_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError("cli", std::string("malformed JSON: ") + e.what());
  }
  return parse_config(j);
}

json load_config_json(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cli", "cannot open configuration '" + path + "'");
  try {
    return json::parse(is);
  } catch (const json::exception& e) {
    throw ConfigError("cli", "malformed JSON in '" + path + "': " + e.what());
  }
}

int dispatch(const RunConfig& cfg, std::ostream& log, std::ostream& err) {
  try {
    switch (cfg.command) {
      case Command::construct: return run_construct(cfg, log);
      case Command::verify: return run_verify(cfg, log);
      case Command::simulate: return run_simulate(cfg, log);
      case Command::converge: return run_converge(cfg, log);
      case Command::scan: return run_scan(cfg, log);
    }
  } catch (const InfeasibleError& e) {
    err << e.what() << '\n';
    return kExitInfeasible;
  } catch (const Error& e) {
    err << e.what() << '\n';
    return kExitError;
  } catch (const std::exception& e) {
    err << "[cli] " << e.what() << '\n';
    return kExitError;
  }
  return kExitError;
}

}  // namespace lbstab
