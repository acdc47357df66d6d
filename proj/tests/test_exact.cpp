#include <doctest.h>

#include "lbstab/common.hpp"
#include "lbstab/exact.hpp"

using namespace lbstab::exact;

TEST_CASE("split_square extracts the largest square factor") {
  CHECK(split_square(12) == std::pair<std::int64_t, std::int64_t>{2, 3});
  CHECK(split_square(49) == std::pair<std::int64_t, std::int64_t>{7, 1});
  CHECK(split_square(3) == std::pair<std::int64_t, std::int64_t>{1, 3});
  CHECK_THROWS_AS(split_square(0), lbstab::InputError);
}

TEST_CASE("parse_scaled_root normalizes to q * sqrt(r)") {
  const ScaledRoot a = parse_scaled_root("3/20/sqrt(3)");
  CHECK(a.coeff == Rational(1, 20));
  CHECK(a.radicand == 3);
  CHECK(a.to_double() == doctest::Approx(0.15 / std::sqrt(3.0)).epsilon(1e-15));

  const ScaledRoot b = parse_scaled_root("-0.25*sqrt(12)");
  CHECK(b.coeff == Rational(-1, 2));
  CHECK(b.radicand == 3);

  const ScaledRoot c = parse_scaled_root("(3/4)/sqrt(3)");
  CHECK(c.coeff == Rational(1, 4));

  const ScaledRoot d = parse_scaled_root("0.1");
  CHECK(d.coeff == Rational(1, 10));
  CHECK(d.radicand == 1);

  CHECK(parse_scaled_root("0").is_zero());
  CHECK_THROWS_AS(parse_scaled_root("3/"), lbstab::InputError);
  CHECK_THROWS_AS(parse_scaled_root("sqrt(-3)"), lbstab::InputError);
  CHECK_THROWS_AS(parse_scaled_root("pi"), lbstab::InputError);
}

TEST_CASE("rational_from_double is exact") {
  const Rational r = rational_from_double(0.1);
  CHECK(r != Rational(1, 10));
  CHECK(static_cast<double>(r) == 0.1);
  CHECK(rational_from_double(0.5) == Rational(1, 2));
  CHECK(rational_from_double(-3.0) == Rational(-3));
}

TEST_CASE("Surd arithmetic in Q(sqrt 3)") {
  const Surd one_plus(Rational(1), Rational(1), 3);
  const Surd one_minus(Rational(1), Rational(-1), 3);
  CHECK(one_plus * one_minus == Surd(Rational(-2)));
  CHECK((one_plus / one_plus) == Surd(Rational(1)));
  const Surd s = Surd::from(parse_scaled_root("sqrt(3)"));
  CHECK(s * s == Surd(Rational(3)));
  CHECK((one_plus - one_plus).is_zero());
  CHECK(one_plus.to_double() == doctest::Approx(1.0 + std::sqrt(3.0)));
  const Surd t = Surd::from(parse_scaled_root("sqrt(2)"));
  CHECK_THROWS(s + t);
}

TEST_CASE("Bareiss determinant and integer rank") {
  DenseMatrix<Integer> m = {{2, 0, 1}, {1, 3, 2}, {1, 1, 3}};
  CHECK(bareiss_determinant(m) == 12);
  CHECK(integer_rank(m) == 3);
  DenseMatrix<Integer> dup = {{1, 2, 3}, {2, 4, 6}, {0, 1, 1}};
  CHECK(bareiss_determinant(dup) == 0);
  CHECK(integer_rank(dup) == 2);
  DenseMatrix<Integer> zero = {{0, 0}, {0, 0}};
  CHECK(integer_rank(zero) == 0);
}

TEST_CASE("field_rank over rationals and surds agrees with integer rank") {
  DenseMatrix<Rational> q = {{Rational(1, 2), Rational(1)}, {Rational(1), Rational(2)}};
  CHECK(field_rank(q) == 1);
  const Surd r3 = Surd::from(parse_scaled_root("sqrt(3)"));
  DenseMatrix<Surd> s = {{r3, Surd(Rational(3))}, {Surd(Rational(1)), r3}};
  CHECK(field_rank(s) == 1);
  s[1][1] = Surd(Rational(1));
  CHECK(field_rank(s) == 2);
}
