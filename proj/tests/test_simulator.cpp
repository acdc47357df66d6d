#include <doctest.h>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <limits>
#include <map>
#include <sstream>

#include "lbstab/simulator.hpp"
#include "support/oracles.hpp"

using namespace lbstab;

namespace {

std::shared_ptr<const CollisionOperator> preset_operator(int k) {
  static std::map<int, std::shared_ptr<const CollisionOperator>> cache;
  auto& slot = cache[k];
  if (!slot) {
    const Construction c = construct_certified(build_velocity_set("D3Q33"), oracle::preset_background(k));
    slot = std::make_shared<const CollisionOperator>(*c.op);
  }
  return slot;
}

Vector preset_lambda(int k) {
  return construct_certified(build_velocity_set("D3Q33"), oracle::preset_background(k)).weights.lambda;
}

SimConfig config(const Grid& g, int preset, std::size_t steps = 1) {
  SimConfig cfg;
  cfg.grid = g;
  cfg.background = oracle::preset_background(preset);
  cfg.op = preset_operator(preset);
  cfg.steps = steps;
  return cfg;
}

}  // namespace

TEST_CASE("grid validation") {
  CHECK_NOTHROW(Grid::cube(5).validate());
  CHECK_NOTHROW(Grid::pseudo1d(8).validate());
  CHECK_THROWS_AS(Grid::cube(4).validate(), ConfigError);
  CHECK_THROWS_AS((Grid{8, 0, 8}).validate(), ConfigError);
  CHECK_THROWS_AS((Grid{8, 2, 8}).validate(), ConfigError);
  CHECK(Grid::cube(6).index(1, 2, 3) == 1 + 6 * (2 + 6 * 3));
}

TEST_CASE("the zero field stays zero and a uniform equilibrium is a fixed point") {
  const SimConfig cfg = config(Grid::cube(6), 1);
  LatticeField f(cfg.grid, 33);
  LatticeField scratch(cfg.grid, 33);
  step(f, scratch, cfg);
  CHECK(std::all_of(f.data.begin(), f.data.end(), [](double v) { return v == 0.0; }));

  const MacroField m = sample_macros(
      cfg.grid, [](const Vec3&) { return 0.3; }, [](const Vec3&) { return Vec3{0.1, -0.2, 0.05}; });
  LatticeField g = init_equilibrium_field(cfg, m);
  const std::vector<double> before = g.data;
  for (int s = 0; s < 5; ++s) step(g, scratch, cfg);
  CHECK(oracle::max_abs_diff(before, g.data) < 1e-14);
}

TEST_CASE("equilibrium initialization reproduces the sampled macros") {
  const SimConfig cfg = config(Grid::cube(5), 2);
  const MacroField m = sample_macros(
      cfg.grid, [](const Vec3& x) { return std::sin(2 * M_PI * x[0]) * std::cos(2 * M_PI * x[2]); },
      [](const Vec3& x) { return Vec3{x[1], -x[0], 0.5 * x[2]}; });
  const LatticeField f = init_equilibrium_field(cfg, m);
  const MacroField back = macro_fields(f, *cfg.op, cfg.background);
  for (std::size_t p = 0; p < cfg.grid.nodes(); ++p) {
    CHECK(std::abs(back.rho[p] - m.rho[p]) < 1e-14);
    for (int d = 0; d < 3; ++d) CHECK(std::abs(back.u[d][p] - m.u[d][p]) < 1e-13);
  }
}

TEST_CASE("fused step agrees with the dense per-node update") {
  for (int preset = 1; preset <= 3; ++preset) {
    CAPTURE(preset);
    const SimConfig cfg = config(Grid{7, 5, 6}, preset);
    LatticeField f = oracle::random_field(cfg.grid, 33, 100 + preset);
    const LatticeField ref = oracle::dense_step(f, *cfg.op);
    LatticeField scratch(cfg.grid, 33);
    step(f, scratch, cfg);
    double scale = 0.0;
    for (double v : ref.data) scale = std::max(scale, std::abs(v));
    CHECK(oracle::max_abs_diff(f.data, ref.data) <= 1e-12 * scale);
  }
}

TEST_CASE("streaming permutes each velocity slice") {
  const VelocitySet vs = build_velocity_set("D3Q33");
  const Grid g{6, 7, 5};
  LatticeField f = oracle::random_field(g, 33, 4);
  const LatticeField orig = f;
  LatticeField scratch(g, 33);
  stream_only(f, scratch, vs);
  for (std::size_t i = 0; i < 33; ++i) {
    std::vector<double> a(orig.slice(i), orig.slice(i) + g.nodes());
    std::vector<double> b(f.slice(i), f.slice(i) + g.nodes());
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    CHECK(a == b);
  }
  // Velocity c29 = (2, 0, 0) moves node (1, 3, 2) to (3, 3, 2).
  CHECK(f.slice(28)[g.index(3, 3, 2)] == orig.slice(28)[g.index(1, 3, 2)]);
  // Wrap-around: c28 = (-2, 0, 0) moves x = 1 to x = 5.
  CHECK(f.slice(27)[g.index(5, 0, 0)] == orig.slice(27)[g.index(1, 0, 0)]);
}

TEST_CASE("conservation, energy decay and monitors") {
  SimConfig cfg = config(Grid::cube(8), 1, 30);
  cfg.lambda = preset_lambda(1);
  LatticeField f = oracle::random_field(cfg.grid, 33, 17);
  const Vector c0 = conserved_sums(f, *cfg.op);
  const std::vector<Monitor> mon = run(cfg, f);
  REQUIRE(mon.size() == 31);
  const Vector c1 = conserved_sums(f, *cfg.op);
  CHECK((c1 - c0).cwiseAbs().maxCoeff() <= 1e-12 * (1.0 + c0.cwiseAbs().maxCoeff()));
  for (std::size_t s = 1; s < mon.size(); ++s) CHECK(mon[s].energy <= mon[s - 1].energy * (1.0 + 1e-12));
  CHECK(mon.front().energy == doctest::Approx(weighted_energy(oracle::random_field(cfg.grid, 33, 17), *cfg.lambda)));
  CHECK(mon.back().rho_sum == doctest::Approx(c0(0)).epsilon(1e-12));
}

TEST_CASE("a reduced grid reproduces x-only data on the full cube") {
  SimConfig cube = config(Grid::cube(8), 2, 7);
  SimConfig line = config(Grid::pseudo1d(8), 2, 7);
  const auto rho = [](const Vec3& x) { return std::cos(2 * M_PI * x[0]); };
  const auto u = [](const Vec3& x) { return Vec3{std::sin(4 * M_PI * x[0]), 0.2, -0.1}; };
  LatticeField fc = init_equilibrium_field(cube, sample_macros(cube.grid, rho, u));
  LatticeField fl = init_equilibrium_field(line, sample_macros(line.grid, rho, u));
  run(cube, fc);
  run(line, fl);
  const MacroField mc = macro_fields(fc, *cube.op, cube.background);
  const MacroField ml = macro_fields(fl, *line.op, line.background);
  double err = 0.0;
  for (std::size_t z = 0; z < 8; ++z) {
    for (std::size_t y = 0; y < 8; ++y) {
      for (std::size_t x = 0; x < 8; ++x) {
        err = std::max(err, std::abs(mc.rho[cube.grid.index(x, y, z)] - ml.rho[x]));
        err = std::max(err, std::abs(mc.u[0][cube.grid.index(x, y, z)] - ml.u[0][x]));
      }
    }
  }
  CHECK(err < 1e-13);
}

TEST_CASE("threaded stepping matches the serial result") {
  SimConfig serial = config(Grid::cube(16), 1, 3);
  SimConfig threaded = serial;
  threaded.threads = 3;
  LatticeField a = oracle::random_field(serial.grid, 33, 8);
  LatticeField b = a;
  run(serial, a);
  run(threaded, b);
  CHECK(a.data == b.data);
}

TEST_CASE("non-finite data aborts the run") {
  SimConfig cfg = config(Grid::cube(5), 1, 3);
  LatticeField f(cfg.grid, 33);
  f.data[10] = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(run(cfg, f), SimulationError);
}

TEST_CASE("binary and CSV output") {
  const Grid g{5, 6, 7};
  const LatticeField f = oracle::random_field(g, 33, 2);
  const std::string path = (std::filesystem::temp_directory_path() / "lbstab_field_test.bin").string();
  write_field_binary(path, f);
  const LatticeField back = read_field_binary(path);
  std::remove(path.c_str());
  CHECK(back.grid == g);
  CHECK(back.q == 33);
  CHECK(back.data == f.data);

  MacroField m(Grid{5, 1, 1});
  m.rho[2] = 0.25;
  m.u[0][2] = -1.5;
  std::ostringstream os;
  write_macro_csv(os, m);
  std::istringstream is(os.str());
  std::string header;
  std::string line;
  std::getline(is, header);
  CHECK(header == "ix,iy,iz,rho,u1,u2,u3");
  int rows = 0;
  while (std::getline(is, line)) {
    if (rows == 2) CHECK(line.rfind("2,0,0,0.25,-1.5,", 0) == 0);
    ++rows;
  }
  CHECK(rows == 5);
}
