#pragma once

// Test cases, reference solutions, convergence studies and the
// stability-domain scanner.

#include <complex>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "lbstab/simulator.hpp"
#include "lbstab/spectral.hpp"
#include "lbstab/stability.hpp"

namespace lbstab {

enum class ReferenceKind { fourier_exact, high_resolution };

struct TestCase {
  int id = 0;
  double rho0 = 1.0;
  std::function<double(const Vec3&)> rho;
  std::function<Vec3(const Vec3&)> u;
  ReferenceKind reference = ReferenceKind::fourier_exact;
  double final_time = 1.0;
  /// Pseudo-1D cases: highest wavenumber in x of the initial data (the data
  /// must be a trigonometric polynomial of this degree).
  std::optional<int> band_limit;
  /// Test case 3: the initial density as a sum of separable products.
  std::vector<SeparableTerm> separable_rho;
};

/// Test cases 1, 2 and 3. The scalar u' of cases 1-2 is the first velocity
/// component. Default final times: 1 for cases 1-2, 1/4 for case 3. Throws
/// ConfigError for any other id.
TestCase make_test_case(int id);

/// Background for a test case: rho0 from the case, u0 as given.
BackgroundState test_background(const TestCase& tc, const BackgroundState& flow);

/// Fourier content of a pseudo-1D case: wavenumber k and coefficient of
/// (rho', j1, j2, j3) such that q(x) = sum_k qhat_k exp(2 pi i k x).
struct FourierState {
  std::vector<int> wavenumbers;
  std::vector<Eigen::Vector4cd> coefficients;
};

/// x-flux Jacobian of the linearized Euler equations in (rho', j).
Eigen::Matrix4d flux_jacobian_x(const BackgroundState& bg);

/// Throws ConfigError if tc is not pseudo-1D or its initial data is not a
/// trigonometric polynomial of degree band_limit.
FourierState fourier_initial_state(const TestCase& tc, const BackgroundState& bg);

/// qhat_k(t) = exp(-2 pi i k A_x t) qhat_k(0).
FourierState evolve_fourier(const FourierState& state, const BackgroundState& bg, double t);

/// rho', u' of the Fourier state on a grid (the x-profile is broadcast over y, z).
MacroField sample_fourier(const FourierState& state, const BackgroundState& bg, const Grid& grid);

/// Exact solution of a pseudo-1D case at time t.
MacroField exact_pseudo1d(const TestCase& tc, const BackgroundState& bg, double t, const Grid& grid);

/// Max over nodes and the four components (rho', u'1..3). Throws InputError
/// on grid mismatch.
double linf_error(const MacroField& a, const MacroField& b);

/// Node-coincident restriction of a fine field onto a coarser grid whose
/// extents divide the fine ones.
MacroField restrict_to(const MacroField& fine, const Grid& coarse);

struct ConvergenceRow {
  std::size_t grid_n = 0;
  double error = 0.0;
  std::optional<double> order;  ///< log2(e_previous / e) for doubled grids
};

struct ConvergenceReport {
  int test_case = 0;
  Vec3 u0 = {0.0, 0.0, 0.0};
  double final_time = 0.0;
  std::size_t reference_grid = 0;  ///< test case 3 only
  double reference_omitted_amplitude = 0.0;
  std::vector<ConvergenceRow> rows;

  std::optional<double> finest_order() const;
};

enum class ReferenceMethod { automatic, direct, spectral };

struct StudyOptions {
  unsigned threads = 1;
  /// Simulate pseudo-1D cases on N x 1 x 1 grids (exact for x-only data).
  bool pseudo1d_reduction = true;
  std::size_t reference_grid = 256;
  ReferenceMethod reference_method = ReferenceMethod::automatic;
  std::size_t memory_cap_bytes = std::size_t{2} << 30;
  double spectral_threshold = 1e-15;
};

/// Runs the certified D3Q33 scheme (tau = 1/2) at each grid with
/// dt = 1 / N, steps = final_time * N. Throws InfeasibleError if no weights
/// exist for bg, ConfigError if a step count is not an integer.
ConvergenceReport convergence_study(const TestCase& tc, const BackgroundState& bg,
                                    const std::vector<std::size_t>& grids, double final_time,
                                    const StudyOptions& options = {});

/// Same study with an already assembled operator.
ConvergenceReport convergence_study(const TestCase& tc, const BackgroundState& bg,
                                    std::shared_ptr<const CollisionOperator> op,
                                    const std::vector<std::size_t>& grids, double final_time,
                                    const StudyOptions& options = {});

/// Simulated macros of a test case at one grid and time.
MacroField simulate_test_case(const TestCase& tc, const BackgroundState& bg,
                              std::shared_ptr<const CollisionOperator> op, std::size_t grid_n, double final_time,
                              const StudyOptions& options = {});

/// Reference solution at grid_n_ref restricted to each target grid. Uses a
/// direct simulation when it fits in options.memory_cap_bytes and the
/// mode-wise evaluation otherwise (or as requested). Throws ConfigError if
/// grid_n_ref < 4 * max(targets), or when a direct run exceeds the cap.
struct ReferenceResult {
  std::vector<MacroField> fields;
  ReferenceMethod method = ReferenceMethod::direct;
  double omitted_amplitude = 0.0;
};
ReferenceResult highres_reference(const TestCase& tc, const BackgroundState& bg,
                                  std::shared_ptr<const CollisionOperator> op, std::size_t grid_n_ref,
                                  double final_time, const std::vector<std::size_t>& targets,
                                  const StudyOptions& options = {});

/// Bytes needed by a direct simulation (two density buffers).
std::size_t direct_memory_bytes(std::size_t grid_n, std::size_t velocities);

struct DomainMap {
  double u01 = 0.0;
  std::string velocity_set;
  std::vector<double> u02;  ///< axis values (columns)
  std::vector<double> u03;  ///< axis values (rows)
  std::vector<std::uint8_t> feasible;  ///< row-major over (u03, u02)

  bool at(std::size_t i02, std::size_t i03) const { return feasible[i03 * u02.size() + i02] != 0; }
};

/// LP feasibility on an n x n grid over (u02, u03) in [lo, hi]^2.
DomainMap scan_stability_domain(double u01, std::size_t n, const std::string& velocity_set = "D3Q33",
                                double lo = -1.0, double hi = 1.0, unsigned threads = 1);

/// CSV columns grid_n,error,order.
void write_convergence_csv(std::ostream& os, const ConvergenceReport& report);

/// CSV columns u02,u03,feasible.
void write_domain_csv(std::ostream& os, const DomainMap& map);

}  // namespace lbstab
