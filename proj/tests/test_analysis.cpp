#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <complex>
#include <sstream>

#include "lbstab/analysis.hpp"
#include "support/oracles.hpp"

using namespace lbstab;

namespace {

using cplx = std::complex<double>;

// exp(-2 pi i k A t) q through the eigen-decomposition of A.
Eigen::Vector4cd propagate_by_eigenvectors(const Eigen::Matrix4d& a, int k, double t, const Eigen::Vector4cd& q) {
  Eigen::EigenSolver<Eigen::Matrix4d> es(a);
  const Eigen::Matrix4cd v = es.eigenvectors();
  Eigen::Vector4cd phase;
  for (int i = 0; i < 4; ++i) phase(i) = std::exp(cplx(0.0, -2.0 * M_PI * k * t) * es.eigenvalues()(i));
  return v * phase.asDiagonal() * v.inverse() * q;
}

std::shared_ptr<const CollisionOperator> preset_operator(int k) {
  const Construction c = construct_certified(build_velocity_set("D3Q33"), oracle::preset_background(k));
  return std::make_shared<const CollisionOperator>(*c.op);
}

}  // namespace

TEST_CASE("test case definitions") {
  const TestCase t1 = make_test_case(1);
  const TestCase t2 = make_test_case(2);
  const TestCase t3 = make_test_case(3);
  CHECK(t1.rho0 == doctest::Approx(0.4));
  CHECK(t2.rho0 == doctest::Approx(0.2));
  CHECK(t3.rho0 == doctest::Approx(0.2));
  CHECK(t1.band_limit == 2);
  CHECK(t2.band_limit == 9);
  CHECK_FALSE(t3.band_limit.has_value());
  CHECK(t3.reference == ReferenceKind::high_resolution);
  CHECK(t3.final_time == doctest::Approx(0.25));
  CHECK_THROWS_AS(make_test_case(4), ConfigError);

  // The separable description of case 3 agrees with its pointwise density.
  for (const Vec3& x : {Vec3{0.5, 0.5, 0.5}, Vec3{0.1, 0.7, 0.33}, Vec3{0.0, 0.0, 0.0}}) {
    double s = 0.0;
    for (const SeparableTerm& term : t3.separable_rho) {
      s += term.coefficient * term.factors[0](x[0]) * term.factors[1](x[1]) * term.factors[2](x[2]);
    }
    CHECK(s == doctest::Approx(t3.rho(x)).epsilon(1e-14));
  }
  CHECK(t3.separable_rho.size() == 9);
}

TEST_CASE("flux Jacobian carries the acoustic and convective speeds") {
  BackgroundState bg;
  bg.u0 = {0.1, 0.2, -0.05};
  const Eigen::EigenSolver<Eigen::Matrix4d> es(flux_jacobian_x(bg));
  std::vector<double> ev;
  for (int i = 0; i < 4; ++i) {
    CHECK(std::abs(es.eigenvalues()(i).imag()) < 1e-14);
    ev.push_back(es.eigenvalues()(i).real());
  }
  std::sort(ev.begin(), ev.end());
  const double cs = std::sqrt(1.0 / 3.0);
  CHECK(ev[0] == doctest::Approx(0.1 - cs));
  CHECK(ev[1] == doctest::Approx(0.1));
  CHECK(ev[2] == doctest::Approx(0.1));
  CHECK(ev[3] == doctest::Approx(0.1 + cs));
}

TEST_CASE("Fourier evolution") {
  const TestCase tc = make_test_case(1);
  const BackgroundState bg = test_background(tc, oracle::preset_background(2));
  const FourierState s0 = fourier_initial_state(tc, bg);
  REQUIRE(s0.wavenumbers.size() == 5);

  SUBCASE("matches an eigenvector propagation") {
    const FourierState s = evolve_fourier(s0, bg, 0.37);
    for (std::size_t i = 0; i < s.wavenumbers.size(); ++i) {
      const Eigen::Vector4cd ref =
          propagate_by_eigenvectors(flux_jacobian_x(bg), s0.wavenumbers[i], 0.37, s0.coefficients[i]);
      CHECK((s.coefficients[i] - ref).cwiseAbs().maxCoeff() < 1e-12);
    }
  }
  SUBCASE("is a semigroup that leaves the mean unchanged") {
    const FourierState a = evolve_fourier(evolve_fourier(s0, bg, 0.2), bg, 0.55);
    const FourierState b = evolve_fourier(s0, bg, 0.75);
    for (std::size_t i = 0; i < a.wavenumbers.size(); ++i) {
      CHECK((a.coefficients[i] - b.coefficients[i]).cwiseAbs().maxCoeff() < 1e-12);
      if (a.wavenumbers[i] == 0) CHECK(a.coefficients[i] == s0.coefficients[i]);
    }
  }
  SUBCASE("reproduces the initial data at t = 0") {
    const Grid g = Grid::pseudo1d(24);
    const MacroField exact0 = exact_pseudo1d(tc, bg, 0.0, g);
    const MacroField sampled = sample_macros(g, tc.rho, tc.u);
    CHECK(linf_error(exact0, sampled) < 1e-13);
  }
}

TEST_CASE("data without a finite Fourier description is rejected") {
  const TestCase t3 = make_test_case(3);
  CHECK_THROWS_AS(fourier_initial_state(t3, test_background(t3, BackgroundState{})), ConfigError);
  TestCase wide = make_test_case(1);
  wide.band_limit = 1;
  CHECK_THROWS_AS(fourier_initial_state(wide, test_background(wide, BackgroundState{})), ConfigError);
}

TEST_CASE("norm and restriction helpers") {
  const Grid fine = Grid::cube(10);
  const MacroField a = sample_macros(
      fine, [](const Vec3& x) { return x[0] + 2 * x[1]; }, [](const Vec3&) { return Vec3{1, 2, 3}; });
  CHECK(linf_error(a, a) == 0.0);
  MacroField b = a;
  b.u[2][17] += 0.5;
  CHECK(linf_error(a, b) == doctest::Approx(0.5));
  CHECK_THROWS_AS(linf_error(a, MacroField(Grid::cube(5))), InputError);

  const MacroField r = restrict_to(a, Grid::cube(5));
  CHECK(r.rho[Grid::cube(5).index(2, 1, 0)] == doctest::Approx(0.4 + 2 * 0.2));
  CHECK(r.u[1][7] == 2.0);
  CHECK_THROWS_AS(restrict_to(a, Grid::cube(6)), InputError);
}

TEST_CASE("mode-wise reference agrees with a direct simulation") {
  const TestCase tc = make_test_case(3);
  const BackgroundState bg = test_background(tc, oracle::preset_background(1));
  const auto op = preset_operator(1);
  StudyOptions direct;
  direct.reference_method = ReferenceMethod::direct;
  StudyOptions spectral;
  spectral.reference_method = ReferenceMethod::spectral;
  spectral.spectral_threshold = 0.0;
  const ReferenceResult d = highres_reference(tc, bg, op, 20, 0.25, {5}, direct);
  const ReferenceResult s = highres_reference(tc, bg, op, 20, 0.25, {5}, spectral);
  CHECK(d.method == ReferenceMethod::direct);
  CHECK(s.method == ReferenceMethod::spectral);
  CHECK(s.omitted_amplitude == 0.0);
  CHECK(linf_error(d.fields[0], s.fields[0]) < 1e-12);

  CHECK_THROWS_AS(highres_reference(tc, bg, op, 16, 0.25, {5}, direct), ConfigError);
  StudyOptions capped = direct;
  capped.memory_cap_bytes = 1024;
  CHECK_THROWS_AS(highres_reference(tc, bg, op, 20, 0.25, {5}, capped), ConfigError);
  CHECK(direct_memory_bytes(20, 33) == 2 * 33 * 8000 * sizeof(double));
}

TEST_CASE("pseudo-1D convergence study reports second-order decay") {
  const TestCase tc = make_test_case(1);
  const BackgroundState bg = test_background(tc, oracle::preset_background(1));
  const ConvergenceReport rep = convergence_study(tc, bg, {16, 32, 64}, 0.5);
  REQUIRE(rep.rows.size() == 3);
  CHECK_FALSE(rep.rows[0].order.has_value());
  CHECK(rep.rows[1].error < rep.rows[0].error);
  CHECK(rep.rows[2].error < rep.rows[1].error);
  REQUIRE(rep.finest_order());
  CHECK(*rep.finest_order() > 1.5);
  std::ostringstream os;
  write_convergence_csv(os, rep);
  CHECK(os.str().rfind("grid_n,error,order\n16,", 0) == 0);
  CHECK_THROWS_AS(convergence_study(tc, bg, {10}, 0.55), ConfigError);
}

TEST_CASE("stability domain scan is symmetric") {
  const DomainMap map = scan_stability_domain(1.0 / 6.0, 5, "D3Q33", -0.5, 0.5);
  REQUIRE(map.u02.size() == 5);
  CHECK(map.u02.front() == -0.5);
  CHECK(map.u03.back() == 0.5);
  for (std::size_t i = 0; i < 5; ++i) {
    for (std::size_t j = 0; j < 5; ++j) {
      CHECK(map.at(i, j) == map.at(4 - i, j));
      CHECK(map.at(i, j) == map.at(i, 4 - j));
      CHECK(map.at(i, j) == map.at(j, i));
    }
  }
  std::ostringstream os;
  write_domain_csv(os, map);
  CHECK(os.str().rfind("u02,u03,feasible\n", 0) == 0);
  CHECK_THROWS_AS(scan_stability_domain(0.0, 1), ConfigError);
}

TEST_CASE("constant initial data is reproduced exactly at every grid") {
  TestCase tc = make_test_case(1);
  tc.rho = [](const Vec3&) { return 0.25; };
  tc.u = [](const Vec3&) { return Vec3{0.1, 0.0, -0.2}; };
  tc.band_limit = 0;
  const BackgroundState bg = test_background(tc, oracle::preset_background(2));
  const ConvergenceReport rep = convergence_study(tc, bg, {8, 16, 32}, 0.5);
  for (const ConvergenceRow& r : rep.rows) CHECK(r.error < 1e-13);
}

TEST_CASE("test case 3 peaks at the domain centre with the sum of all nine pulses") {
  const TestCase tc = make_test_case(3);
  const MacroField m = sample_macros(Grid::cube(20), tc.rho, tc.u);
  const std::size_t centre = Grid::cube(20).index(10, 10, 10);
  // Eight corner pulses sit at squared distance 3 * (3/20)^2 from the centre.
  const double expected = 1.0 + 8.0 * std::exp(-100.0 * 3.0 * 0.15 * 0.15);
  CHECK(m.rho[centre] == doctest::Approx(expected).epsilon(1e-14));
  CHECK(*std::max_element(m.rho.begin(), m.rho.end()) == m.rho[centre]);
  for (int d = 0; d < 3; ++d) CHECK(std::all_of(m.u[d].begin(), m.u[d].end(), [](double v) { return v == 0.0; }));
}

TEST_CASE("dropping negligible modes changes the reference by less than the reported bound") {
  const TestCase tc = make_test_case(3);
  const BackgroundState bg = test_background(tc, oracle::preset_background(1));
  const auto op = preset_operator(1);
  SpectralOptions all;
  all.threshold = 0.0;
  const SpectralResult full = spectral_reference(*op, bg, tc.separable_rho, 40, 10, {10}, all);
  const SpectralResult pruned = spectral_reference(*op, bg, tc.separable_rho, 40, 10, {10});
  CHECK(full.modes_kept == full.modes_total);
  CHECK(pruned.modes_kept < pruned.modes_total);
  CHECK(pruned.omitted_amplitude > 0.0);
  CHECK(pruned.omitted_amplitude < 1e-12);
  CHECK(std::abs(pruned.fields[0].rho[123] - full.fields[0].rho[123]) < 1e-12);
  CHECK(linf_error(full.fields[0], pruned.fields[0]) < 1e-10);
}
