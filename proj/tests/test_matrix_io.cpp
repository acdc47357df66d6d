#include <doctest.h>

#include <sstream>

#include "lbstab/matrix_io.hpp"
#include "support/oracles.hpp"

using namespace lbstab;

TEST_CASE("matrix files round-trip bit for bit") {
  MatrixFile f;
  f.header = {{"n", "3"}, {"note", "two words"}};
  Matrix m(2, 3);
  m << 0.1, -1.0 / 3.0, 1e-300, 12345.678901234567, -0.0, 2.0;
  f.matrices = {{"m", m}, {"v", Vector::LinSpaced(4, 0.0, 1.0 / 7.0)}};
  std::stringstream ss;
  write_matrix_file(ss, f);
  const MatrixFile g = read_matrix_file(ss);
  REQUIRE(g.find_header("note"));
  CHECK(*g.find_header("note") == "two words");
  CHECK(g.find_header("missing") == nullptr);
  REQUIRE(g.find_matrix("m"));
  CHECK(*g.find_matrix("m") == m);
  CHECK(g.find_matrix("v")->rows() == 4);
  CHECK((*g.find_matrix("v"))(3, 0) == 1.0 / 7.0);
}

TEST_CASE("malformed matrix files are rejected") {
  std::stringstream bad("# lbstab matrix file v1\nmatrix m 2 2\n1 2\n3\n");
  CHECK_THROWS_AS(read_matrix_file(bad), InputError);
  std::stringstream wrong("hello\n");
  CHECK_THROWS_AS(read_matrix_file(wrong), InputError);
}

TEST_CASE("operators survive a save and load") {
  const BackgroundState bg = oracle::preset_background(1);
  const Construction c = construct_certified(build_velocity_set("D3Q33"), bg);
  std::stringstream ss;
  write_matrix_file(ss, operator_to_file(*c.op, bg, &*c.certificate));
  const LoadedOperator back = operator_from_file(read_matrix_file(ss));
  CHECK(back.op.velocities.name() == "D3Q33");
  CHECK(back.op.tau == c.op->tau);
  CHECK(back.op.reduced_equilibrium == c.op->reduced_equilibrium);
  CHECK(back.op.conserved_rows == c.op->conserved_rows);
  REQUIRE(back.op.full_matrix);
  CHECK(*back.op.full_matrix == *c.op->full_matrix);
  REQUIRE(back.lambda);
  CHECK(*back.lambda == c.weights.lambda);
  CHECK(back.background.u0 == bg.u0);
  CHECK(verify_prestability(back.op, *back.lambda) <= kCertificationTolerance);
}
