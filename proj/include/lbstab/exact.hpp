#pragma once

// Exact arithmetic used to cross-check rank decisions made in floating point.
//
// Moment matrices are integral, so determinants and ranks are computed with
// fraction-free (Bareiss) elimination over arbitrary-precision integers.
// Constraint matrices additionally depend on the background velocity, whose
// components are typically of the form q * sqrt(d) (e.g. 3/20 / sqrt(3)); all
// of their entries then lie in the quadratic field Q(sqrt d).

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

namespace lbstab::exact {

using Integer = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

/// Largest square-free divisor representation: returns (s, r) with v = s^2 * r.
std::pair<std::int64_t, std::int64_t> split_square(std::int64_t v);

/// A real number q * sqrt(r) with q rational and r a square-free positive
/// integer (r = 1 for rationals).
struct ScaledRoot {
  Rational coeff{0};
  std::int64_t radicand{1};

  double to_double() const;
  bool is_zero() const { return coeff == 0; }
};

/// Parses products and quotients of integers, decimals and sqrt(...) factors,
/// e.g. "3/20/sqrt(3)", "-0.25*sqrt(3)/3", "(3/4)/sqrt(3)". Throws
/// InputError on anything else.
ScaledRoot parse_scaled_root(std::string_view text);

/// Converts a double to the exact rational it represents.
Rational rational_from_double(double v);

/// Element a + b*sqrt(d) of Q(sqrt d), d square-free. Operands must share d
/// (or have b = 0).
class Surd {
 public:
  Surd() = default;
  Surd(Rational a) : a_(std::move(a)) {}  // NOLINT(google-explicit-constructor)
  Surd(Rational a, Rational b, std::int64_t d);
  static Surd from(const ScaledRoot& x);

  const Rational& rational_part() const { return a_; }
  const Rational& root_part() const { return b_; }
  std::int64_t radicand() const { return d_; }

  bool is_zero() const { return a_ == 0 && b_ == 0; }
  double to_double() const;

  Surd operator-() const;
  Surd& operator+=(const Surd& o);
  Surd& operator-=(const Surd& o);
  Surd& operator*=(const Surd& o);
  Surd& operator/=(const Surd& o);

  friend Surd operator+(Surd l, const Surd& r) { return l += r; }
  friend Surd operator-(Surd l, const Surd& r) { return l -= r; }
  friend Surd operator*(Surd l, const Surd& r) { return l *= r; }
  friend Surd operator/(Surd l, const Surd& r) { return l /= r; }
  friend bool operator==(const Surd& l, const Surd& r) {
    return (l - r).is_zero();
  }

 private:
  std::int64_t common_radicand(const Surd& o) const;
  void normalize();

  Rational a_{0};
  Rational b_{0};
  std::int64_t d_{1};
};

template <class T>
using DenseMatrix = std::vector<std::vector<T>>;

/// Determinant of a square integer matrix via Bareiss elimination.
Integer bareiss_determinant(DenseMatrix<Integer> m);

/// Rank of an integer matrix via fraction-free elimination.
std::size_t integer_rank(DenseMatrix<Integer> m);

inline bool is_zero(const Rational& x) { return x == 0; }
inline bool is_zero(const Surd& x) { return x.is_zero(); }

/// Rank over a field (Rational or Surd) by Gaussian elimination; any nonzero
/// pivot is exact, so no pivoting strategy is needed for correctness.
template <class Field>
std::size_t field_rank(DenseMatrix<Field> m) {
  if (m.empty()) return 0;
  const std::size_t rows = m.size();
  const std::size_t cols = m.front().size();
  std::size_t rank = 0;
  for (std::size_t c = 0; c < cols && rank < rows; ++c) {
    std::size_t p = rank;
    while (p < rows && is_zero(m[p][c])) ++p;
    if (p == rows) continue;
    std::swap(m[p], m[rank]);
    const Field inv = Field(Rational(1)) / m[rank][c];
    for (std::size_t r = rank + 1; r < rows; ++r) {
      if (is_zero(m[r][c])) continue;
      const Field factor = m[r][c] * inv;
      for (std::size_t k = c; k < cols; ++k) {
        m[r][k] -= factor * m[rank][k];
      }
    }
    ++rank;
  }
  return rank;
}

}  // namespace lbstab::exact
