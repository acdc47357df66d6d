#pragma once

// Reference computations used only by the tests. Each one follows a route
// that differs from the library code it checks.

#include <cmath>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "lbstab/analysis.hpp"
#include "lbstab/simulator.hpp"
#include "lbstab/stability.hpp"

namespace oracle {

using lbstab::Matrix;
using lbstab::Vector;

/// Loads the golden D3Q33 matrix shipped in data/.
inline lbstab::IntMatrix golden_m1() {
  std::ifstream is(std::string(LBSTAB_DATA_DIR) + "/d3q33_m1.csv");
  lbstab::IntMatrix m(33, 33);
  std::string line;
  int r = 0;
  while (std::getline(is, line) && r < 33) {
    std::stringstream ss(line);
    std::string cell;
    int c = 0;
    while (std::getline(ss, cell, ',') && c < 33) m(r, c++) = std::stoll(cell);
    ++r;
  }
  return m;
}

/// Lambda-weighted inner product evaluated term by term.
inline double inner(const Vector& a, const Vector& b, const Vector& lambda) {
  double s = 0.0;
  for (Eigen::Index k = 0; k < a.size(); ++k) s += a(k) * lambda(k) * b(k);
  return s;
}

/// R = Lambda C^T (C Lambda C^T)^-1: the Lambda-orthogonal complement of the
/// tail rows is the image of Lambda C^T, so this equals the first gamma
/// columns of the modified matrix inverse.
inline Matrix projection_equilibrium(const Matrix& c, const Vector& lambda) {
  const Matrix lct = lambda.asDiagonal() * c.transpose();
  return lct * (c * lct).inverse();
}

/// One step by dense matrices: f <- (I + J) f at every node, then each
/// velocity slice is moved by explicit coordinate arithmetic.
inline lbstab::LatticeField dense_step(const lbstab::LatticeField& in, const lbstab::CollisionOperator& op) {
  const lbstab::Grid& g = in.grid;
  const std::size_t nodes = g.nodes();
  const std::size_t q = in.q;
  const Matrix h = Matrix::Identity(static_cast<Eigen::Index>(q), static_cast<Eigen::Index>(q)) + *op.full_matrix;
  lbstab::LatticeField out(g, q);
  for (std::size_t z = 0; z < g.nz; ++z) {
    for (std::size_t y = 0; y < g.ny; ++y) {
      for (std::size_t x = 0; x < g.nx; ++x) {
        const std::size_t p = g.index(x, y, z);
        Vector f(static_cast<Eigen::Index>(q));
        for (std::size_t i = 0; i < q; ++i) f(static_cast<Eigen::Index>(i)) = in.data[i * nodes + p];
        const Vector post = h * f;
        for (std::size_t i = 0; i < q; ++i) {
          const auto& c = op.velocities[i];
          const auto wrap = [](long long v, std::size_t n) {
            const auto m = static_cast<long long>(n);
            return static_cast<std::size_t>(((v % m) + m) % m);
          };
          const std::size_t dx = wrap(static_cast<long long>(x) + c[0], g.nx);
          const std::size_t dy = wrap(static_cast<long long>(y) + c[1], g.ny);
          const std::size_t dz = wrap(static_cast<long long>(z) + c[2], g.nz);
          out.data[i * nodes + g.index(dx, dy, dz)] = post(static_cast<Eigen::Index>(i));
        }
      }
    }
  }
  return out;
}

inline lbstab::LatticeField random_field(const lbstab::Grid& g, std::size_t q, unsigned seed, double lo = -1.0,
                                         double hi = 1.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(lo, hi);
  lbstab::LatticeField f(g, q);
  for (double& v : f.data) v = dist(rng);
  return f;
}

inline double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double e = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) e = std::max(e, std::abs(a[i] - b[i]));
  return e;
}

/// Background velocity of a preset as doubles, from the stated fractions.
inline lbstab::Vec3 preset_u0(int k) {
  const double s = 1.0 / std::sqrt(3.0);
  switch (k) {
    case 1: return {3.0 / 20.0 * s, 1.0 / 10.0 * s, 1.0 / 5.0 * s};
    case 2: return {-1.0 / 4.0 * s, 1.0 / 4.0 * s, 1.0 / 2.0 * s};
    case 3: return {2.0 / 5.0 * s, 9.0 / 10.0 * s, 3.0 / 4.0 * s};
    default: return {3.0 / 4.0 * s, 5.0 / 8.0 * s, 1.0 * s};
  }
}

inline lbstab::BackgroundState preset_background(int k, double rho0 = 1.0) {
  lbstab::BackgroundState bg;
  bg.rho0 = rho0;
  bg.u0 = preset_u0(k);
  return bg;
}

}  // namespace oracle
