#pragma once

// Mode-by-mode evaluation of the discrete lattice Boltzmann scheme.
//
// On a periodic N^3 lattice the stream-collide update is linear and
// translation invariant, so it acts on each discrete Fourier mode k
// independently:
//   f^(k) <- P(k) (f^(k) + (1/tau)(R C f^(k) - f^(k))),  P_ii(k) = exp(-2 pi i k.c_i / N).
// For initial densities that are sums of separable products this gives the
// scheme's exact output on grids far too large to hold in memory, restricted
// to the nodes of coarser grids. No continuum approximation is involved.

#include <functional>
#include <vector>

#include "lbstab/simulator.hpp"

namespace lbstab {

/// rho'(x) = sum_t coeff_t fx_t(x) fy_t(y) fz_t(z), with u'(x) = 0.
struct SeparableTerm {
  double coefficient = 1.0;
  std::array<std::function<double(double)>, 3> factors;
};

struct SpectralOptions {
  /// 3D modes whose initial amplitude is below threshold * (bound on the
  /// largest amplitude) are dropped. 0 keeps every mode.
  double threshold = 1e-15;
  unsigned threads = 1;
};

struct SpectralResult {
  std::vector<MacroField> fields;  ///< one per target extent, cubic grids
  std::size_t modes_kept = 0;
  std::size_t modes_total = 0;
  /// (1/N^3) * L1 norm of the dropped initial density coefficients: a bound
  /// on the nodal amplitude of the discarded part of the initial data.
  double omitted_amplitude = 0.0;
};

/// Output of `steps` updates on the n_ref^3 lattice from the equilibrium of
/// the given density (u' = 0), sampled at the nodes of each n_ref/target
/// cubic subgrid. Every target must divide n_ref.
SpectralResult spectral_reference(const CollisionOperator& op, const BackgroundState& bg,
                                  const std::vector<SeparableTerm>& rho, std::size_t n_ref, std::size_t steps,
                                  const std::vector<std::size_t>& targets, const SpectralOptions& options = {});

}  // namespace lbstab
