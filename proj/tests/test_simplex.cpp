#include <doctest.h>

#include "lbstab/simplex.hpp"

using namespace lbstab;

TEST_CASE("simplex finds the optimum of a small LP") {
  // max x + y  s.t. x + 2y <= 4, 3x + y <= 6  ->  optimum (8/5, 6/5), value 14/5.
  Matrix a(2, 4);
  a << 1, 2, 1, 0, 3, 1, 0, 1;
  Vector b(2);
  b << 4, 6;
  Vector c(4);
  c << -1, -1, 0, 0;
  const LpSolution s = solve_standard_form(a, b, c);
  REQUIRE(s.status == LpStatus::optimal);
  CHECK(s.x(0) == doctest::Approx(1.6));
  CHECK(s.x(1) == doctest::Approx(1.2));
  CHECK(s.objective == doctest::Approx(-2.8));
  CHECK((a * s.x - b).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("simplex reports infeasibility") {
  // x + y = 1 and x + y = 2 cannot both hold.
  Matrix a(2, 2);
  a << 1, 1, 1, 1;
  Vector b(2);
  b << 1, 2;
  const LpSolution s = solve_standard_form(a, b, Vector::Zero(2));
  CHECK(s.status == LpStatus::infeasible);
  CHECK(s.phase_one_residual > 0.5);
}

TEST_CASE("simplex reports unboundedness") {
  // min -x  s.t. x - y = 0.
  Matrix a(1, 2);
  a << 1, -1;
  Vector b(1);
  b << 0;
  Vector c(2);
  c << -1, 0;
  CHECK(solve_standard_form(a, b, c).status == LpStatus::unbounded);
}

TEST_CASE("simplex survives degenerate vertices and redundant rows") {
  // Redundant equality (row 3 = row 1 + row 2) and a degenerate start.
  Matrix a(3, 4);
  a << 1, 1, 1, 0, 1, -1, 0, 1, 2, 0, 1, 1;
  Vector b(3);
  b << 1, 0, 1;
  Vector c(4);
  c << 1, 2, 0, 0;
  const LpSolution s = solve_standard_form(a, b, c);
  REQUIRE(s.status == LpStatus::optimal);
  CHECK(s.objective == doctest::Approx(0.0));
  CHECK((s.x.array() >= -1e-12).all());
  CHECK((a * s.x - b).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("negative right-hand sides are handled") {
  // -x = -3  ->  x = 3.
  Matrix a(1, 1);
  a << -1;
  Vector b(1);
  b << -3;
  Vector c(1);
  c << 1;
  const LpSolution s = solve_standard_form(a, b, c);
  REQUIRE(s.status == LpStatus::optimal);
  CHECK(s.x(0) == doctest::Approx(3.0));
}
