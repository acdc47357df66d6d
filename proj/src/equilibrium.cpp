#include "lbstab/equilibrium.hpp"

#include <cmath>

namespace lbstab {

void BackgroundState::validate() const {
  if (!(rho0 > 0.0) || !std::isfinite(rho0)) {
    throw ConfigError("equilibrium", "background density rho0 must be positive");
  }
  if (!(cs2 > 0.0) || !std::isfinite(cs2)) {
    throw ConfigError("equilibrium", "squared speed of sound cs2 must be positive");
  }
  for (double u : u0) {
    if (!std::isfinite(u)) throw ConfigError("equilibrium", "background velocity must be finite");
  }
}

BackgroundState BackgroundState::from_exact(double rho0, const ExactBackground& exact) {
  BackgroundState bg;
  bg.rho0 = rho0;
  for (int d = 0; d < 3; ++d) bg.u0[d] = exact.u0[d].to_double();
  bg.cs2 = static_cast<double>(exact.cs2);
  bg.exact = exact;
  return bg;
}

EquilibriumMap lee_equilibrium_map(const BackgroundState& bg) {
  bg.validate();
  EquilibriumMap out;
  out.e21 = Matrix::Zero(6, 4);
  for (std::size_t r = 0; r < kSecondMomentPairs.size(); ++r) {
    const auto [a, b] = kSecondMomentPairs[r];
    const auto row = static_cast<Eigen::Index>(r);
    out.e21(row, 0) = (a == b ? bg.cs2 : 0.0) - bg.u0[a] * bg.u0[b];
    out.e21(row, 1 + b) += bg.u0[a];
    out.e21(row, 1 + a) += bg.u0[b];
  }
  return out;
}

exact::DenseMatrix<exact::Surd> lee_equilibrium_map_exact(const ExactBackground& bg) {
  using exact::Surd;
  std::array<Surd, 3> u;
  for (int d = 0; d < 3; ++d) u[d] = Surd::from(bg.u0[d]);
  exact::DenseMatrix<Surd> e(6, std::vector<Surd>(4));
  for (std::size_t r = 0; r < kSecondMomentPairs.size(); ++r) {
    const auto [a, b] = kSecondMomentPairs[r];
    e[r][0] = (a == b ? Surd(bg.cs2) : Surd()) - u[a] * u[b];
    e[r][1 + b] += u[a];
    e[r][1 + a] += u[b];
  }
  return e;
}

ConservedMoments conserved_moments(std::span<const double> densities, const MomentMatrix& m) {
  if (densities.size() != m.size()) {
    throw InputError("equilibrium", "density vector has " + std::to_string(densities.size()) +
                                        " entries, moment matrix expects " + std::to_string(m.size()));
  }
  if (m.gamma() < 4) throw InputError("equilibrium", "moment matrix has fewer than four conserved rows");
  const Eigen::Map<const Vector> f(densities.data(), static_cast<Eigen::Index>(densities.size()));
  ConservedMoments out;
  out.rho = m.row(0).dot(f);
  for (int d = 0; d < 3; ++d) out.j[d] = m.row(static_cast<std::size_t>(1 + d)).dot(f);
  return out;
}

Macroscopic macro_fields(double rho, const Vec3& j, const BackgroundState& bg) {
  Macroscopic out;
  out.rho = rho;
  for (int d = 0; d < 3; ++d) out.u[d] = (j[d] - bg.u0[d] * rho) / bg.rho0;
  return out;
}

Vec3 momentum_from_velocity(double rho, const Vec3& u, const BackgroundState& bg) {
  Vec3 j{};
  for (int d = 0; d < 3; ++d) j[d] = bg.rho0 * u[d] + bg.u0[d] * rho;
  return j;
}

}  // namespace lbstab
