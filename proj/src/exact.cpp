#include "lbstab/exact.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <limits>

#include "lbstab/common.hpp"

namespace lbstab::exact {

std::pair<std::int64_t, std::int64_t> split_square(std::int64_t v) {
  if (v <= 0) throw InputError("exact", "split_square needs a positive value");
  std::int64_t square = 1;
  std::int64_t rest = v;
  for (std::int64_t p = 2; p * p <= rest; ++p) {
    while (rest % (p * p) == 0) {
      rest /= p * p;
      square *= p;
    }
  }
  return {square, rest};
}

double ScaledRoot::to_double() const {
  return static_cast<double>(coeff) * std::sqrt(static_cast<double>(radicand));
}

Rational rational_from_double(double v) {
  if (!std::isfinite(v)) throw InputError("exact", "non-finite value");
  int exponent = 0;
  const double mantissa = std::frexp(v, &exponent);
  // mantissa * 2^53 is an exact integer for doubles
  const auto scaled = static_cast<std::int64_t>(std::ldexp(mantissa, 53));
  Rational r{Integer(scaled)};
  exponent -= 53;
  Integer pow2 = Integer(1) << std::abs(exponent);
  if (exponent >= 0) return r * Rational(pow2);
  return r / Rational(pow2);
}

namespace {

struct Parser {
  std::string_view text;
  std::size_t pos = 0;

  [[noreturn]] void fail(const std::string& why) const {
    throw InputError("exact", "cannot parse '" + std::string(text) + "': " + why);
  }

  void skip_ws() {
    while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
  }

  bool consume(char c) {
    skip_ws();
    if (pos < text.size() && text[pos] == c) {
      ++pos;
      return true;
    }
    return false;
  }

  // Rational number with optional decimal fraction.
  Rational number() {
    skip_ws();
    const std::size_t start = pos;
    Integer digits = 0;
    Integer scale = 1;
    bool seen_digit = false;
    bool in_fraction = false;
    while (pos < text.size()) {
      const char c = text[pos];
      if (std::isdigit(static_cast<unsigned char>(c))) {
        digits = digits * 10 + (c - '0');
        if (in_fraction) scale *= 10;
        seen_digit = true;
      } else if (c == '.' && !in_fraction) {
        in_fraction = true;
      } else {
        break;
      }
      ++pos;
    }
    if (!seen_digit) {
      pos = start;
      fail("expected a number");
    }
    return Rational(digits, scale);
  }

  // value represented as coeff * sqrt(radicand_num / radicand_den)
  struct Value {
    Rational coeff{1};
    Rational radicand{1};
  };

  Value factor() {
    skip_ws();
    if (consume('-')) {
      Value v = factor();
      v.coeff = -v.coeff;
      return v;
    }
    if (consume('(')) {
      Value v = product();
      if (!consume(')')) fail("missing ')'");
      return v;
    }
    if (text.substr(pos, 4) == "sqrt") {
      pos += 4;
      if (!consume('(')) fail("expected '(' after sqrt");
      Value inner = product();
      if (!consume(')')) fail("missing ')'");
      if (inner.radicand != 1) fail("nested roots are not supported");
      if (inner.coeff < 0) fail("square root of a negative number");
      return Value{Rational(1), inner.coeff};
    }
    return Value{number(), Rational(1)};
  }

  Value product() {
    Value acc = factor();
    while (true) {
      if (consume('*')) {
        Value rhs = factor();
        acc.coeff *= rhs.coeff;
        acc.radicand *= rhs.radicand;
      } else if (consume('/')) {
        Value rhs = factor();
        if (rhs.coeff == 0) fail("division by zero");
        acc.coeff /= rhs.coeff;
        acc.radicand /= rhs.radicand;
      } else {
        return acc;
      }
    }
  }
};

std::int64_t to_int64(const Integer& v) {
  if (v > std::numeric_limits<std::int64_t>::max()) {
    throw InputError("exact", "radicand too large");
  }
  return static_cast<std::int64_t>(v);
}

}  // namespace

ScaledRoot parse_scaled_root(std::string_view text) {
  Parser p{text};
  Parser::Value v = p.product();
  p.skip_ws();
  if (p.pos != text.size()) p.fail("trailing characters");

  // sqrt(a/b) = sqrt(a*b) / b, then pull square factors out of a*b.
  const Integer num = boost::multiprecision::numerator(v.radicand);
  const Integer den = boost::multiprecision::denominator(v.radicand);
  const auto [square, rest] = split_square(to_int64(num * den));
  ScaledRoot out;
  out.coeff = v.coeff * Rational(Integer(square), den);
  out.radicand = rest;
  if (out.coeff == 0) out.radicand = 1;
  return out;
}

Surd::Surd(Rational a, Rational b, std::int64_t d)
    : a_(std::move(a)), b_(std::move(b)), d_(d) {
  if (d_ <= 0) throw InputError("exact", "radicand must be positive");
  const auto [square, rest] = split_square(d_);
  b_ *= Rational(Integer(square));
  d_ = rest;
  normalize();
}

Surd Surd::from(const ScaledRoot& x) { return Surd(Rational(0), x.coeff, x.radicand); }

void Surd::normalize() {
  if (d_ == 1) {
    a_ += b_;
    b_ = 0;
  }
  if (b_ == 0) d_ = 1;
}

double Surd::to_double() const {
  return static_cast<double>(a_) + static_cast<double>(b_) * std::sqrt(static_cast<double>(d_));
}

std::int64_t Surd::common_radicand(const Surd& o) const {
  if (d_ == 1) return o.d_;
  if (o.d_ == 1 || o.d_ == d_) return d_;
  throw InputError("exact", "mixed quadratic fields Q(sqrt " + std::to_string(d_) +
                                ") and Q(sqrt " + std::to_string(o.d_) + ")");
}

Surd Surd::operator-() const {
  Surd r = *this;
  r.a_ = -r.a_;
  r.b_ = -r.b_;
  return r;
}

Surd& Surd::operator+=(const Surd& o) {
  d_ = common_radicand(o);
  a_ += o.a_;
  b_ += o.b_;
  normalize();
  return *this;
}

Surd& Surd::operator-=(const Surd& o) { return *this += -o; }

Surd& Surd::operator*=(const Surd& o) {
  const std::int64_t d = common_radicand(o);
  const Rational a = a_ * o.a_ + b_ * o.b_ * Rational(d);
  const Rational b = a_ * o.b_ + b_ * o.a_;
  a_ = a;
  b_ = b;
  d_ = d;
  normalize();
  return *this;
}

Surd& Surd::operator/=(const Surd& o) {
  if (o.is_zero()) throw InputError("exact", "division by zero");
  const std::int64_t d = common_radicand(o);
  // 1/(a + b sqrt d) = (a - b sqrt d) / (a^2 - d b^2); the norm is nonzero
  // because d is square-free and not 1 whenever b != 0.
  const Rational norm = o.a_ * o.a_ - Rational(d) * o.b_ * o.b_;
  Surd conj(o.a_ / norm, -o.b_ / norm, d == 1 ? 1 : d);
  return *this *= conj;
}

Integer bareiss_determinant(DenseMatrix<Integer> m) {
  const std::size_t n = m.size();
  for (const auto& row : m) {
    if (row.size() != n) throw InputError("exact", "determinant of a non-square matrix");
  }
  if (n == 0) return 1;
  Integer sign = 1;
  Integer prev = 1;
  for (std::size_t k = 0; k + 1 < n; ++k) {
    if (m[k][k] == 0) {
      std::size_t p = k + 1;
      while (p < n && m[p][k] == 0) ++p;
      if (p == n) return 0;
      std::swap(m[p], m[k]);
      sign = -sign;
    }
    for (std::size_t i = k + 1; i < n; ++i) {
      for (std::size_t j = k + 1; j < n; ++j) {
        m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) / prev;
      }
      m[i][k] = 0;
    }
    prev = m[k][k];
  }
  return sign * m[n - 1][n - 1];
}

std::size_t integer_rank(DenseMatrix<Integer> m) {
  if (m.empty()) return 0;
  const std::size_t rows = m.size();
  const std::size_t cols = m.front().size();
  std::size_t rank = 0;
  Integer prev = 1;
  for (std::size_t c = 0; c < cols && rank < rows; ++c) {
    std::size_t p = rank;
    while (p < rows && m[p][c] == 0) ++p;
    if (p == rows) continue;
    std::swap(m[p], m[rank]);
    for (std::size_t i = rank + 1; i < rows; ++i) {
      for (std::size_t j = c + 1; j < cols; ++j) {
        m[i][j] = (m[i][j] * m[rank][c] - m[i][c] * m[rank][j]) / prev;
      }
      m[i][c] = 0;
    }
    prev = m[rank][c];
    ++rank;
  }
  return rank;
}

}  // namespace lbstab::exact
