#include "lbstab/simulator.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <ostream>

#include "lbstab/parallel.hpp"

namespace lbstab {

namespace {

// Neumaier-compensated sum.
struct CompensatedSum {
  double sum = 0.0;
  double c = 0.0;
  void add(double v) {
    const double t = sum + v;
    if (std::abs(sum) >= std::abs(v)) {
      c += (sum - t) + v;
    } else {
      c += (v - t) + sum;
    }
    sum = t;
  }
  double value() const { return sum + c; }
};

std::vector<std::size_t> wrap_table(std::size_t extent, int shift) {
  std::vector<std::size_t> t(extent);
  const auto e = static_cast<long long>(extent);
  for (std::size_t i = 0; i < extent; ++i) {
    long long v = (static_cast<long long>(i) + shift) % e;
    if (v < 0) v += e;
    t[i] = static_cast<std::size_t>(v);
  }
  return t;
}

// Destination index tables per velocity and axis.
struct ShiftTables {
  std::vector<std::array<std::vector<std::size_t>, 3>> tables;

  ShiftTables(const Grid& g, const VelocitySet& vs) : tables(vs.size()) {
    for (std::size_t i = 0; i < vs.size(); ++i) {
      tables[i][0] = wrap_table(g.nx, vs[i][0]);
      tables[i][1] = wrap_table(g.ny, vs[i][1]);
      tables[i][2] = wrap_table(g.nz, vs[i][2]);
    }
  }
};

void check_shape(const LatticeField& a, const LatticeField& b, const SimConfig& cfg) {
  if (!(a.grid == cfg.grid) || a.q != cfg.op->size() || a.data.size() != a.grid.nodes() * a.q) {
    throw InputError("simulator", "field shape does not match the simulation configuration");
  }
  if (!(b.grid == a.grid) || b.q != a.q || b.data.size() != a.data.size()) {
    throw InputError("simulator", "scratch field shape does not match the field");
  }
}

template <class Visit>
void for_rows(const Grid& g, unsigned threads, Visit&& visit) {
  const std::size_t rows = g.ny * g.nz;
  const unsigned t = g.nodes() >= 4096 ? threads : 1;
  parallel_chunks(rows, t, [&](std::size_t begin, std::size_t end) {
    for (std::size_t r = begin; r < end; ++r) visit(r % g.ny, r / g.ny);
  });
}

}  // namespace

void Grid::validate() const {
  for (std::size_t e : {nx, ny, nz}) {
    if (e == 0) throw ConfigError("simulator", "grid extents must be positive");
    if (e != 1 && e < 5) {
      throw ConfigError("simulator", "grid extent " + std::to_string(e) +
                                         " is too small; use 1 (reduced axis) or at least 5");
    }
  }
}

void SimConfig::validate() const {
  grid.validate();
  background.validate();
  if (!op) throw ConfigError("simulator", "no collision operator set");
  if (lambda && static_cast<std::size_t>(lambda->size()) != op->size()) {
    throw ConfigError("simulator", "energy weights do not match the velocity set");
  }
  if (lambda && lambda->minCoeff() <= 0.0) throw ConfigError("simulator", "energy weights must be positive");
}

MacroField::MacroField(Grid g) : grid(g), rho(g.nodes(), 0.0) {
  for (auto& c : u) c.assign(g.nodes(), 0.0);
}

MacroField sample_macros(const Grid& grid, const std::function<double(const Vec3&)>& rho,
                         const std::function<Vec3(const Vec3&)>& u) {
  MacroField m(grid);
  for (std::size_t z = 0; z < grid.nz; ++z) {
    for (std::size_t y = 0; y < grid.ny; ++y) {
      for (std::size_t x = 0; x < grid.nx; ++x) {
        const Vec3 pos = {node_coordinate(x, grid.nx), node_coordinate(y, grid.ny), node_coordinate(z, grid.nz)};
        const std::size_t p = grid.index(x, y, z);
        m.rho[p] = rho(pos);
        const Vec3 v = u(pos);
        for (int d = 0; d < 3; ++d) m.u[d][p] = v[d];
      }
    }
  }
  return m;
}

LatticeField init_equilibrium_field(const SimConfig& cfg, const MacroField& macros) {
  cfg.validate();
  if (!(macros.grid == cfg.grid)) throw InputError("simulator", "macro field grid does not match configuration");
  const CollisionOperator& op = *cfg.op;
  if (op.gamma() != 4) throw InputError("simulator", "equilibrium initialization expects four conserved moments");
  LatticeField f(cfg.grid, op.size());
  const std::size_t nodes = cfg.grid.nodes();
  Vector m(4);
  for (std::size_t p = 0; p < nodes; ++p) {
    const Vec3 j = momentum_from_velocity(macros.rho[p], {macros.u[0][p], macros.u[1][p], macros.u[2][p]},
                                          cfg.background);
    m << macros.rho[p], j[0], j[1], j[2];
    const Vector feq = op.reduced_equilibrium * m;
    for (std::size_t i = 0; i < op.size(); ++i) f.data[i * nodes + p] = feq(static_cast<Eigen::Index>(i));
  }
  return f;
}

void step(LatticeField& field, LatticeField& scratch, const SimConfig& cfg) {
  check_shape(field, scratch, cfg);
  const CollisionOperator& op = *cfg.op;
  const Grid& g = field.grid;
  const std::size_t q = op.size();
  const std::size_t gm = op.gamma();
  const std::size_t nodes = g.nodes();
  const double omega = 1.0 / op.tau;

  // Row-major copies for the inner loops.
  std::vector<double> c(gm * q);
  std::vector<double> r(q * gm);
  for (std::size_t a = 0; a < gm; ++a) {
    for (std::size_t i = 0; i < q; ++i) {
      c[a * q + i] = op.conserved_rows(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(i));
      r[i * gm + a] = op.reduced_equilibrium(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(a));
    }
  }
  const ShiftTables shifts(g, op.velocities);
  const double* src = field.data.data();
  double* dst = scratch.data.data();

  for_rows(g, cfg.threads, [&](std::size_t y, std::size_t z) {
    std::vector<double> f(q);
    std::vector<double> m(gm);
    for (std::size_t x = 0; x < g.nx; ++x) {
      const std::size_t p = g.index(x, y, z);
      for (std::size_t i = 0; i < q; ++i) f[i] = src[i * nodes + p];
      for (std::size_t a = 0; a < gm; ++a) {
        double s = 0.0;
        const double* row = &c[a * q];
        for (std::size_t i = 0; i < q; ++i) s += row[i] * f[i];
        m[a] = s;
      }
      for (std::size_t i = 0; i < q; ++i) {
        double feq = 0.0;
        const double* row = &r[i * gm];
        for (std::size_t a = 0; a < gm; ++a) feq += row[a] * m[a];
        const auto& t = shifts.tables[i];
        const std::size_t dp = g.index(t[0][x], t[1][y], t[2][z]);
        dst[i * nodes + dp] = f[i] + omega * (feq - f[i]);
      }
    }
  });
  std::swap(field.data, scratch.data);
}

void stream_only(LatticeField& field, LatticeField& scratch, const VelocitySet& vs, unsigned threads) {
  if (field.q != vs.size() || !(scratch.grid == field.grid) || scratch.q != field.q) {
    throw InputError("simulator", "field shape does not match the velocity set");
  }
  const Grid& g = field.grid;
  const std::size_t nodes = g.nodes();
  const ShiftTables shifts(g, vs);
  for_rows(g, threads, [&](std::size_t y, std::size_t z) {
    for (std::size_t i = 0; i < vs.size(); ++i) {
      const auto& t = shifts.tables[i];
      for (std::size_t x = 0; x < g.nx; ++x) {
        scratch.data[i * nodes + g.index(t[0][x], t[1][y], t[2][z])] = field.data[i * nodes + g.index(x, y, z)];
      }
    }
  });
  std::swap(field.data, scratch.data);
}

double weighted_energy(const LatticeField& field, const Vector& lambda) {
  if (static_cast<std::size_t>(lambda.size()) != field.q) {
    throw InputError("simulator", "weight vector length does not match the field");
  }
  const std::size_t nodes = field.grid.nodes();
  CompensatedSum total;
  for (std::size_t i = 0; i < field.q; ++i) {
    CompensatedSum s;
    const double* f = field.slice(i);
    for (std::size_t p = 0; p < nodes; ++p) s.add(f[p] * f[p]);
    total.add(s.value() / lambda(static_cast<Eigen::Index>(i)));
  }
  return total.value();
}

Vector conserved_sums(const LatticeField& field, const CollisionOperator& op) {
  if (field.q != op.size()) throw InputError("simulator", "field does not match the operator");
  const std::size_t nodes = field.grid.nodes();
  const auto gm = static_cast<Eigen::Index>(op.gamma());
  std::vector<CompensatedSum> sums(static_cast<std::size_t>(gm));
  for (std::size_t i = 0; i < field.q; ++i) {
    CompensatedSum s;
    const double* f = field.slice(i);
    for (std::size_t p = 0; p < nodes; ++p) s.add(f[p]);
    const double slice_sum = s.value();
    for (Eigen::Index a = 0; a < gm; ++a) {
      sums[static_cast<std::size_t>(a)].add(op.conserved_rows(a, static_cast<Eigen::Index>(i)) * slice_sum);
    }
  }
  Vector out(gm);
  for (Eigen::Index a = 0; a < gm; ++a) out(a) = sums[static_cast<std::size_t>(a)].value();
  return out;
}

std::vector<Monitor> run(const SimConfig& cfg, LatticeField& field) {
  cfg.validate();
  LatticeField scratch(field.grid, field.q);
  check_shape(field, scratch, cfg);
  const Vector lambda = cfg.lambda ? *cfg.lambda : Vector::Ones(static_cast<Eigen::Index>(field.q));

  std::vector<Monitor> out;
  out.reserve(cfg.steps + 1);
  auto record = [&](std::size_t s) {
    Monitor m;
    m.step = s;
    m.energy = weighted_energy(field, lambda);
    const Vector sums = conserved_sums(field, *cfg.op);
    m.rho_sum = sums(0);
    for (int d = 0; d < 3 && d + 1 < sums.size(); ++d) m.j_sum[d] = sums(d + 1);
    if (!std::isfinite(m.energy) || !std::isfinite(m.rho_sum)) {
      throw SimulationError("simulator", "non-finite values detected after step " + std::to_string(s));
    }
    out.push_back(m);
  };
  record(0);
  for (std::size_t s = 1; s <= cfg.steps; ++s) {
    step(field, scratch, cfg);
    record(s);
  }
  return out;
}

MacroField macro_fields(const LatticeField& field, const CollisionOperator& op, const BackgroundState& bg) {
  if (field.q != op.size() || op.gamma() < 4) throw InputError("simulator", "field does not match the operator");
  MacroField out(field.grid);
  const std::size_t nodes = field.grid.nodes();
  for (std::size_t p = 0; p < nodes; ++p) {
    std::array<double, 4> m{};
    for (std::size_t i = 0; i < field.q; ++i) {
      const double f = field.data[i * nodes + p];
      for (int a = 0; a < 4; ++a) m[a] += op.conserved_rows(a, static_cast<Eigen::Index>(i)) * f;
    }
    const Macroscopic mac = lbstab::macro_fields(m[0], {m[1], m[2], m[3]}, bg);
    out.rho[p] = mac.rho;
    for (int d = 0; d < 3; ++d) out.u[d][p] = mac.u[d];
  }
  return out;
}

void write_macro_csv(std::ostream& os, const MacroField& m) {
  const Grid& g = m.grid;
  os << "ix,iy,iz,rho,u1,u2,u3\n";
  char buf[160];
  for (std::size_t z = 0; z < g.nz; ++z) {
    for (std::size_t y = 0; y < g.ny; ++y) {
      for (std::size_t x = 0; x < g.nx; ++x) {
        const std::size_t p = g.index(x, y, z);
        std::snprintf(buf, sizeof buf, "%zu,%zu,%zu,%.17g,%.17g,%.17g,%.17g\n", x, y, z, m.rho[p], m.u[0][p],
                      m.u[1][p], m.u[2][p]);
        os << buf;
      }
    }
  }
}

namespace {

template <class T>
T to_little(T v) {
  if constexpr (std::endian::native == std::endian::big) {
    unsigned char b[sizeof(T)];
    std::memcpy(b, &v, sizeof(T));
    for (std::size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(b[i], b[sizeof(T) - 1 - i]);
    std::memcpy(&v, b, sizeof(T));
  }
  return v;
}

template <class T>
void put(std::ostream& os, T v) {
  v = to_little(v);
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T get(std::istream& is) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!is) throw InputError("simulator", "truncated binary field file");
  return to_little(v);
}

}  // namespace

void write_field_binary(const std::string& path, const LatticeField& field) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw InputError("simulator", "cannot open '" + path + "' for writing");
  put<std::uint32_t>(os, static_cast<std::uint32_t>(field.q));
  put<std::uint32_t>(os, static_cast<std::uint32_t>(field.grid.nx));
  put<std::uint32_t>(os, static_cast<std::uint32_t>(field.grid.ny));
  put<std::uint32_t>(os, static_cast<std::uint32_t>(field.grid.nz));
  for (double v : field.data) put<double>(os, v);
  if (!os) throw InputError("simulator", "write to '" + path + "' failed");
}

LatticeField read_field_binary(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw InputError("simulator", "cannot open '" + path + "'");
  const auto q = get<std::uint32_t>(is);
  Grid g;
  g.nx = get<std::uint32_t>(is);
  g.ny = get<std::uint32_t>(is);
  g.nz = get<std::uint32_t>(is);
  LatticeField f(g, q);
  for (double& v : f.data) v = get<double>(is);
  return f;
}

void write_monitor_csv(std::ostream& os, const std::vector<Monitor>& monitors) {
  os << "step,energy,rho_sum,jx_sum,jy_sum,jz_sum\n";
  char buf[200];
  for (const Monitor& m : monitors) {
    std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g,%.17g,%.17g,%.17g\n", m.step, m.energy, m.rho_sum, m.j_sum[0],
                  m.j_sum[1], m.j_sum[2]);
    os << buf;
  }
}

}  // namespace lbstab
