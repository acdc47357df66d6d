#include "lbstab/analysis.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>
#include <ostream>

#include "lbstab/parallel.hpp"

namespace lbstab {

namespace {

using cplx = std::complex<double>;
constexpr double kPi = std::numbers::pi;

double gaussian(double x, double c) { return std::exp(-100.0 * (x - c) * (x - c)); }

std::size_t steps_for(double final_time, std::size_t grid_n) {
  const double s = final_time * static_cast<double>(grid_n);
  const double r = std::round(s);
  if (!(final_time >= 0.0) || std::abs(s - r) > 1e-9 * std::max(1.0, s)) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "final time %.17g is not a whole number of steps on grid %zu", final_time, grid_n);
    throw ConfigError("analysis", buf);
  }
  return static_cast<std::size_t>(r);
}

Eigen::Matrix4cd expm(const Eigen::Matrix4cd& x) {
  const double norm = x.cwiseAbs().rowwise().sum().maxCoeff();
  int squarings = 0;
  if (norm > 0.5) squarings = static_cast<int>(std::ceil(std::log2(norm / 0.5)));
  const Eigen::Matrix4cd y = x / std::ldexp(1.0, squarings);
  Eigen::Matrix4cd sum = Eigen::Matrix4cd::Identity();
  Eigen::Matrix4cd term = Eigen::Matrix4cd::Identity();
  for (int k = 1; k <= 24; ++k) {
    term = term * y / static_cast<double>(k);
    sum += term;
  }
  for (int s = 0; s < squarings; ++s) sum = sum * sum;
  return sum;
}

}  // namespace

TestCase make_test_case(int id) {
  TestCase tc;
  tc.id = id;
  const double s3 = std::sqrt(3.0);
  switch (id) {
    case 1:
      tc.rho0 = 2.0 / 5.0;
      tc.rho = [](const Vec3& x) { return std::cos(4.0 * kPi * x[0]); };
      tc.u = [s3](const Vec3& x) { return Vec3{5.0 / s3 * std::cos(2.0 * kPi * x[0]), 0.0, 0.0}; };
      tc.band_limit = 2;
      tc.final_time = 1.0;
      break;
    case 2:
      tc.rho0 = 1.0 / 5.0;
      tc.rho = [](const Vec3& x) {
        const double a = x[0];
        return 0.7 * std::sin(2.0 * kPi * a) * std::sin(4.0 * kPi * a) * std::cos(4.0 * kPi * a) *
               std::cos(8.0 * kPi * a);
      };
      tc.u = [s3](const Vec3& x) {
        return Vec3{5.0 / (2.0 * s3) * std::sin(8.0 * kPi * x[0]) * std::cos(2.0 * kPi * x[0]), 0.0, 0.0};
      };
      tc.band_limit = 9;
      tc.final_time = 1.0;
      break;
    case 3: {
      tc.rho0 = 1.0 / 5.0;
      tc.reference = ReferenceKind::high_resolution;
      tc.final_time = 0.25;
      std::vector<Vec3> centers = {{0.5, 0.5, 0.5}};
      for (double a : {0.35, 0.65}) {
        for (double b : {0.35, 0.65}) {
          for (double c : {0.35, 0.65}) centers.push_back({a, b, c});
        }
      }
      for (const Vec3& c : centers) {
        SeparableTerm t;
        for (int d = 0; d < 3; ++d) {
          const double cd = c[d];
          t.factors[d] = [cd](double x) { return gaussian(x, cd); };
        }
        tc.separable_rho.push_back(std::move(t));
      }
      tc.rho = [centers](const Vec3& x) {
        double s = 0.0;
        for (const Vec3& c : centers) s += gaussian(x[0], c[0]) * gaussian(x[1], c[1]) * gaussian(x[2], c[2]);
        return s;
      };
      tc.u = [](const Vec3&) { return Vec3{0.0, 0.0, 0.0}; };
      break;
    }
    default:
      throw ConfigError("analysis", "unknown test case " + std::to_string(id) + " (expected 1, 2 or 3)");
  }
  return tc;
}

BackgroundState test_background(const TestCase& tc, const BackgroundState& flow) {
  BackgroundState bg = flow;
  bg.rho0 = tc.rho0;
  return bg;
}

Eigen::Matrix4d flux_jacobian_x(const BackgroundState& bg) {
  const double u1 = bg.u0[0];
  const double u2 = bg.u0[1];
  const double u3 = bg.u0[2];
  Eigen::Matrix4d a;
  a << 0.0, 1.0, 0.0, 0.0,
      bg.cs2 - u1 * u1, 2.0 * u1, 0.0, 0.0,
      -u1 * u2, u2, u1, 0.0,
      -u1 * u3, u3, 0.0, u1;
  return a;
}

FourierState fourier_initial_state(const TestCase& tc, const BackgroundState& bg) {
  if (!tc.band_limit || !tc.rho || !tc.u) {
    throw ConfigError("analysis", "test case " + std::to_string(tc.id) + " has no finite Fourier description in x");
  }
  const int band = *tc.band_limit;
  const std::size_t m = 4 * static_cast<std::size_t>(band + 1);
  std::vector<std::array<double, 4>> samples(m);
  double scale = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const double x = node_coordinate(i, m);
    const double r = tc.rho({x, 0.0, 0.0});
    const Vec3 u = tc.u({x, 0.0, 0.0});
    const Vec3 j = momentum_from_velocity(r, u, bg);
    samples[i] = {r, j[0], j[1], j[2]};
    // Data must not depend on y, z.
    for (const Vec3& yz : {Vec3{x, 0.3, 0.7}, Vec3{x, 0.61, 0.13}}) {
      const Vec3 u2 = tc.u(yz);
      if (std::abs(tc.rho(yz) - r) > 1e-12 * (1.0 + std::abs(r)) || std::abs(u2[0] - u[0]) > 1e-12 * (1.0 + std::abs(u[0])) ||
          std::abs(u2[1] - u[1]) > 1e-12 * (1.0 + std::abs(u[1])) || std::abs(u2[2] - u[2]) > 1e-12 * (1.0 + std::abs(u[2]))) {
        throw ConfigError("analysis", "initial data of test case " + std::to_string(tc.id) + " depends on y or z");
      }
    }
    for (double v : samples[i]) scale = std::max(scale, std::abs(v));
  }

  FourierState st;
  const int half = static_cast<int>(m / 2);
  for (int k = -half + 1; k <= half; ++k) {
    Eigen::Vector4cd c = Eigen::Vector4cd::Zero();
    for (std::size_t i = 0; i < m; ++i) {
      const cplx w = std::polar(1.0, -2.0 * kPi * static_cast<double>(k) * node_coordinate(i, m));
      for (int a = 0; a < 4; ++a) c(a) += samples[i][a] * w;
    }
    c /= static_cast<double>(m);
    if (std::abs(k) > band) {
      if (c.cwiseAbs().maxCoeff() > 1e-12 * std::max(scale, 1.0)) {
        throw ConfigError("analysis", "initial data of test case " + std::to_string(tc.id) +
                                          " is not band-limited to wavenumber " + std::to_string(band));
      }
      continue;
    }
    st.wavenumbers.push_back(k);
    st.coefficients.push_back(c);
  }
  return st;
}

FourierState evolve_fourier(const FourierState& state, const BackgroundState& bg, double t) {
  const Eigen::Matrix4cd a = flux_jacobian_x(bg).cast<cplx>();
  FourierState out = state;
  for (std::size_t i = 0; i < state.wavenumbers.size(); ++i) {
    const double k = static_cast<double>(state.wavenumbers[i]);
    if (k == 0.0) continue;
    const Eigen::Matrix4cd e = expm(cplx(0.0, -2.0 * kPi * k * t) * a);
    out.coefficients[i] = e * state.coefficients[i];
  }
  return out;
}

MacroField sample_fourier(const FourierState& state, const BackgroundState& bg, const Grid& grid) {
  MacroField out(grid);
  for (std::size_t x = 0; x < grid.nx; ++x) {
    Eigen::Vector4cd q = Eigen::Vector4cd::Zero();
    const double pos = node_coordinate(x, grid.nx);
    for (std::size_t i = 0; i < state.wavenumbers.size(); ++i) {
      q += state.coefficients[i] * std::polar(1.0, 2.0 * kPi * static_cast<double>(state.wavenumbers[i]) * pos);
    }
    const Macroscopic mac = macro_fields(q(0).real(), {q(1).real(), q(2).real(), q(3).real()}, bg);
    for (std::size_t z = 0; z < grid.nz; ++z) {
      for (std::size_t y = 0; y < grid.ny; ++y) {
        const std::size_t p = grid.index(x, y, z);
        out.rho[p] = mac.rho;
        for (int d = 0; d < 3; ++d) out.u[d][p] = mac.u[d];
      }
    }
  }
  return out;
}

MacroField exact_pseudo1d(const TestCase& tc, const BackgroundState& bg, double t, const Grid& grid) {
  grid.validate();
  return sample_fourier(evolve_fourier(fourier_initial_state(tc, bg), bg, t), bg, grid);
}

double linf_error(const MacroField& a, const MacroField& b) {
  if (!(a.grid == b.grid) || a.rho.size() != b.rho.size()) {
    throw InputError("analysis", "macro fields are on different grids");
  }
  double e = 0.0;
  for (std::size_t p = 0; p < a.rho.size(); ++p) {
    e = std::max(e, std::abs(a.rho[p] - b.rho[p]));
    for (int d = 0; d < 3; ++d) e = std::max(e, std::abs(a.u[d][p] - b.u[d][p]));
  }
  return e;
}

MacroField restrict_to(const MacroField& fine, const Grid& coarse) {
  const Grid& f = fine.grid;
  if (coarse.nx == 0 || coarse.ny == 0 || coarse.nz == 0 || f.nx % coarse.nx || f.ny % coarse.ny ||
      f.nz % coarse.nz) {
    throw InputError("analysis", "coarse grid extents must divide the fine grid extents");
  }
  const std::size_t rx = f.nx / coarse.nx;
  const std::size_t ry = f.ny / coarse.ny;
  const std::size_t rz = f.nz / coarse.nz;
  MacroField out(coarse);
  for (std::size_t z = 0; z < coarse.nz; ++z) {
    for (std::size_t y = 0; y < coarse.ny; ++y) {
      for (std::size_t x = 0; x < coarse.nx; ++x) {
        const std::size_t p = coarse.index(x, y, z);
        const std::size_t q = f.index(x * rx, y * ry, z * rz);
        out.rho[p] = fine.rho[q];
        for (int d = 0; d < 3; ++d) out.u[d][p] = fine.u[d][q];
      }
    }
  }
  return out;
}

std::optional<double> ConvergenceReport::finest_order() const {
  if (rows.empty()) return std::nullopt;
  return rows.back().order;
}

std::size_t direct_memory_bytes(std::size_t grid_n, std::size_t velocities) {
  return 2 * grid_n * grid_n * grid_n * velocities * sizeof(double);
}

MacroField simulate_test_case(const TestCase& tc, const BackgroundState& bg,
                              std::shared_ptr<const CollisionOperator> op, std::size_t grid_n, double final_time,
                              const StudyOptions& options) {
  SimConfig cfg;
  cfg.grid = (tc.band_limit && options.pseudo1d_reduction) ? Grid::pseudo1d(grid_n) : Grid::cube(grid_n);
  cfg.background = bg;
  cfg.op = std::move(op);
  cfg.steps = steps_for(final_time, grid_n);
  cfg.threads = options.threads;
  LatticeField field = init_equilibrium_field(cfg, sample_macros(cfg.grid, tc.rho, tc.u));
  LatticeField scratch(field.grid, field.q);
  for (std::size_t s = 0; s < cfg.steps; ++s) step(field, scratch, cfg);
  for (double v : field.data) {
    if (!std::isfinite(v)) throw SimulationError("analysis", "non-finite densities on grid " + std::to_string(grid_n));
  }
  return macro_fields(field, *cfg.op, bg);
}

ReferenceResult highres_reference(const TestCase& tc, const BackgroundState& bg,
                                  std::shared_ptr<const CollisionOperator> op, std::size_t grid_n_ref,
                                  double final_time, const std::vector<std::size_t>& targets,
                                  const StudyOptions& options) {
  std::size_t finest = 0;
  for (std::size_t t : targets) {
    finest = std::max(finest, t);
    if (t == 0 || grid_n_ref % t) {
      throw ConfigError("analysis", "study grid " + std::to_string(t) + " does not divide reference grid " +
                                        std::to_string(grid_n_ref));
    }
  }
  if (grid_n_ref < 4 * finest) {
    throw ConfigError("analysis", "reference grid " + std::to_string(grid_n_ref) +
                                      " must be at least four times the finest study grid");
  }
  const std::size_t steps = steps_for(final_time, grid_n_ref);
  const std::size_t need = direct_memory_bytes(grid_n_ref, op->size());
  const bool fits = need <= options.memory_cap_bytes;

  ReferenceMethod method = options.reference_method;
  if (method == ReferenceMethod::automatic) method = fits ? ReferenceMethod::direct : ReferenceMethod::spectral;

  ReferenceResult out;
  out.method = method;
  if (method == ReferenceMethod::direct) {
    if (!fits) {
      throw ConfigError("analysis", "direct reference on grid " + std::to_string(grid_n_ref) + " needs " +
                                        std::to_string(need >> 20) + " MiB, above the memory cap of " +
                                        std::to_string(options.memory_cap_bytes >> 20) + " MiB");
    }
    StudyOptions o = options;
    o.pseudo1d_reduction = false;
    const MacroField fine = simulate_test_case(tc, bg, op, grid_n_ref, final_time, o);
    for (std::size_t t : targets) out.fields.push_back(restrict_to(fine, Grid::cube(t)));
    return out;
  }

  if (tc.separable_rho.empty()) {
    throw ConfigError("analysis", "reference grid " + std::to_string(grid_n_ref) +
                                      " exceeds the memory cap and the test case has no separable form");
  }
  SpectralOptions so;
  so.threshold = options.spectral_threshold;
  so.threads = options.threads;
  SpectralResult sr = spectral_reference(*op, bg, tc.separable_rho, grid_n_ref, steps, targets, so);
  out.fields = std::move(sr.fields);
  out.omitted_amplitude = sr.omitted_amplitude;
  return out;
}

ConvergenceReport convergence_study(const TestCase& tc, const BackgroundState& bg,
                                    const std::vector<std::size_t>& grids, double final_time,
                                    const StudyOptions& options) {
  ConstructionOptions co;
  co.materialize_full = false;
  Construction c = construct_certified(build_velocity_set("D3Q33"), bg, co);
  return convergence_study(tc, bg, std::make_shared<const CollisionOperator>(std::move(*c.op)), grids, final_time,
                           options);
}

ConvergenceReport convergence_study(const TestCase& tc, const BackgroundState& bg,
                                    std::shared_ptr<const CollisionOperator> op,
                                    const std::vector<std::size_t>& grids, double final_time,
                                    const StudyOptions& options) {
  if (grids.empty()) throw ConfigError("analysis", "convergence study needs at least one grid");
  for (std::size_t n : grids) {
    Grid::cube(n).validate();
    steps_for(final_time, n);
  }

  ConvergenceReport rep;
  rep.test_case = tc.id;
  rep.u0 = bg.u0;
  rep.final_time = final_time;
  rep.rows.resize(grids.size());

  std::vector<MacroField> refs(grids.size());
  if (tc.reference == ReferenceKind::high_resolution) {
    ReferenceResult rr = highres_reference(tc, bg, op, options.reference_grid, final_time, grids, options);
    refs = std::move(rr.fields);
    rep.reference_grid = options.reference_grid;
    rep.reference_omitted_amplitude = rr.omitted_amplitude;
  }

  StudyOptions inner = options;
  inner.threads = 1;
  parallel_for(grids.size(), options.threads, [&](std::size_t i) {
    const std::size_t n = grids[i];
    const MacroField sim = simulate_test_case(tc, bg, op, n, final_time, inner);
    const MacroField ref = tc.reference == ReferenceKind::fourier_exact ? exact_pseudo1d(tc, bg, final_time, sim.grid)
                                                                        : refs[i];
    rep.rows[i].grid_n = n;
    rep.rows[i].error = linf_error(sim, ref);
  });
  for (std::size_t i = 1; i < grids.size(); ++i) {
    if (grids[i] == 2 * grids[i - 1] && rep.rows[i].error > 0.0 && rep.rows[i - 1].error > 0.0) {
      rep.rows[i].order = std::log2(rep.rows[i - 1].error / rep.rows[i].error);
    }
  }
  return rep;
}

DomainMap scan_stability_domain(double u01, std::size_t n, const std::string& velocity_set, double lo, double hi,
                                unsigned threads) {
  if (n < 2) throw ConfigError("analysis", "scan resolution must be at least 2");
  if (!(hi > lo)) throw ConfigError("analysis", "scan range must satisfy lo < hi");
  const VelocitySet vs = build_velocity_set(velocity_set);
  DomainMap map;
  map.u01 = u01;
  map.velocity_set = velocity_set;
  for (std::size_t i = 0; i < n; ++i) {
    const double v = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
    map.u02.push_back(v);
    map.u03.push_back(v);
  }
  map.feasible.assign(n * n, 0);
  parallel_for(n * n, threads, [&](std::size_t cell) {
    BackgroundState bg;
    bg.u0 = {u01, map.u02[cell % n], map.u03[cell / n]};
    map.feasible[cell] = weights_feasible(vs, bg) ? 1 : 0;
  });
  return map;
}

void write_convergence_csv(std::ostream& os, const ConvergenceReport& report) {
  os << "grid_n,error,order\n";
  char buf[128];
  for (const ConvergenceRow& r : report.rows) {
    if (r.order) {
      std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g\n", r.grid_n, r.error, *r.order);
    } else {
      std::snprintf(buf, sizeof buf, "%zu,%.17g,\n", r.grid_n, r.error);
    }
    os << buf;
  }
}

void write_domain_csv(std::ostream& os, const DomainMap& map) {
  os << "u02,u03,feasible\n";
  char buf[96];
  for (std::size_t j = 0; j < map.u03.size(); ++j) {
    for (std::size_t i = 0; i < map.u02.size(); ++i) {
      std::snprintf(buf, sizeof buf, "%.17g,%.17g,%d\n", map.u02[i], map.u03[j], map.at(i, j) ? 1 : 0);
      os << buf;
    }
  }
}

}  // namespace lbstab
