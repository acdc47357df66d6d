#pragma once

// Target system: the isothermal Euler equations linearized around a
// background state (rho0, u0), written in the conserved variables
// (rho', j) with j = rho0 u' + u0 rho'.

#include <optional>
#include <span>

#include "lbstab/common.hpp"
#include "lbstab/exact.hpp"
#include "lbstab/lattice.hpp"

namespace lbstab {

/// Optional exact description of u0 and cs^2, used for exact rank checks.
struct ExactBackground {
  std::array<exact::ScaledRoot, 3> u0;
  exact::Rational cs2{1, 3};
};

struct BackgroundState {
  double rho0 = 1.0;
  Vec3 u0 = {0.0, 0.0, 0.0};
  double cs2 = 1.0 / 3.0;
  std::optional<ExactBackground> exact;

  /// Throws ConfigError unless rho0 > 0, cs2 > 0 and u0 is finite.
  void validate() const;

  /// Background with exact components; the double fields are derived from it.
  static BackgroundState from_exact(double rho0, const ExactBackground& exact);
};

/// (xx, xy, xz, yy, yz, zz): ordering of the consistency (second-moment) rows.
inline constexpr std::array<std::array<int, 2>, 6> kSecondMomentPairs = {
    {{0, 0}, {0, 1}, {0, 2}, {1, 1}, {1, 2}, {2, 2}}};

/// Equilibrium moments as linear maps of the conserved moments. The identity
/// block for the conserved moments themselves is implicit.
struct EquilibriumMap {
  Matrix e21;                ///< beta x gamma
  std::optional<Matrix> e31; ///< (n - beta - gamma) x gamma, fully relative schemes only
};

/// Pi_ab = u0_a j_b + u0_b j_a + (cs2 delta_ab - u0_a u0_b) rho'
/// in the (xx, xy, xz, yy, yz, zz) x (rho', jx, jy, jz) layout.
EquilibriumMap lee_equilibrium_map(const BackgroundState& bg);

/// Same map evaluated in exact arithmetic (requires bg.exact).
exact::DenseMatrix<exact::Surd> lee_equilibrium_map_exact(const ExactBackground& bg);

struct ConservedMoments {
  double rho = 0.0;
  Vec3 j = {0.0, 0.0, 0.0};
};

/// rho' and j from the first four rows of m.
ConservedMoments conserved_moments(std::span<const double> densities, const MomentMatrix& m);

struct Macroscopic {
  double rho = 0.0;
  Vec3 u = {0.0, 0.0, 0.0};
};

/// Inverts j = rho0 u' + u0 rho'.
Macroscopic macro_fields(double rho, const Vec3& j, const BackgroundState& bg);

/// j = rho0 u' + u0 rho'.
Vec3 momentum_from_velocity(double rho, const Vec3& u, const BackgroundState& bg);

}  // namespace lbstab
