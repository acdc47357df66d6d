#pragma once

// Construction and certification of partially relative BGK collision
// operators.
//
// Pipeline:
//   M1 (raw moments) --E21--> M3 (consistency rows made relative)
//   M3 --> A (one row per conserved/consistency pair) --> ker(A)
//   ker(A) --LP--> lambda > 0 with <r_i, r_j>_Lambda = 0 for i conserved,
//                  j consistency
//   (M3, lambda) --truncated weighted Gram-Schmidt--> M~
//   M~ --> J = (1/tau) M~^-1 (E - I) M~,  E = diag(I_gamma, 0)
//
// J Lambda = Lambda J^T then holds, and H = I + tau J is a projection, so
// for tau >= 1/2 the collision is a contraction in the norm sum f_i^2/lambda_i.

#include <optional>
#include <span>
#include <vector>

#include "lbstab/common.hpp"
#include "lbstab/equilibrium.hpp"
#include "lbstab/exact.hpp"
#include "lbstab/lattice.hpp"
#include "lbstab/simplex.hpp"

namespace lbstab {

/// Certification tolerance on residuals for double-precision n = 33 matrices.
inline constexpr double kCertificationTolerance = 1e-10;

struct StabilityCertificate {
  Vector lambda;
  double symmetrization_residual = 0.0;  ///< max |J Lambda - Lambda J^T|
  double idempotency_residual = 0.0;     ///< max |H^2 - H|
  std::vector<double> relaxation_rates;  ///< distinct |eigenvalues| of J, ascending
  double tau = 0.5;
  std::size_t kernel_dimension = 0;
  std::size_t projection_rank = 0;

  /// lambda > 0, both residuals within tol, and tau >= 1/2.
  bool certified(double tol = kCertificationTolerance) const;
};

/// BGK collision f <- f + (1/tau)(R m_cons - f), m_cons = C f.
struct CollisionOperator {
  VelocitySet velocities;
  std::optional<MomentMatrix> moment_matrix;  ///< M~ (absent when loaded without it)
  Matrix reduced_equilibrium;                 ///< R, n x gamma: first gamma columns of M~^-1
  Matrix conserved_rows;                      ///< C, gamma x n
  double tau = 0.5;
  std::optional<Matrix> full_matrix;          ///< J, n x n

  std::size_t size() const { return velocities.size(); }
  std::size_t gamma() const { return static_cast<std::size_t>(conserved_rows.rows()); }

  /// In-place collision of one node.
  void collide(std::span<double> f) const;
  Vector apply(const Vector& f) const;

  /// f_eq = R m for a conserved-moment vector m.
  Vector equilibrium(const Vector& conserved) const;
};

/// Rows gamma+1..gamma+beta become r_i - sum_c E21_ic r_c.
MomentMatrix build_relative_m3(const MomentMatrix& m1, const EquilibriumMap& eq);

/// Consistency and tail rows both shifted by their equilibrium maps.
MomentMatrix build_fully_relative_m2(const MomentMatrix& m1, const EquilibriumMap& eq);

/// Row (i, j), i conserved, j consistency (i-major), has entries
/// r_i[k] * r_j[k], so that A lambda = 0 <=> <r_i, r_j>_Lambda = 0.
Matrix constraint_matrix(const MomentMatrix& m3);

/// Null-space basis (n x d) by Gauss-Jordan elimination with full pivoting;
/// entries below rel_tol * max|A| are treated as zero. Each basis vector has a
/// unit entry at its free column.
Matrix kernel_basis(const Matrix& a, double rel_tol = 1e-10);

struct WeightsResult {
  bool feasible = false;
  Vector lambda;
  Vector coefficients;  ///< alpha with lambda = basis * alpha
  double objective = 0.0;
  LpSolution lp;
};

/// min sum(lambda) s.t. lambda = basis * alpha, lambda_i >= 1, solved in the
/// alpha coordinates with a two-phase simplex.
WeightsResult solve_weights_lp(const Matrix& basis, const SimplexOptions& options = {});

/// Auxiliary Lambda-orthogonal basis of the conserved rows (classical
/// Gram-Schmidt with one re-orthogonalization pass, not normalized).
std::vector<Vector> conserved_orthogonal_basis(const MomentMatrix& m3, const Vector& lambda);

/// Tail rows projected Lambda-orthogonally against span(conserved rows);
/// all other rows are copied unchanged.
MomentMatrix gram_schmidt_tail(const MomentMatrix& m3, const Vector& lambda);

CollisionOperator assemble_collision(const MomentMatrix& modified, const VelocitySet& vs, double tau,
                                     bool materialize_full = true);

/// max |J diag(lambda) - diag(lambda) J^T|; requires full_matrix.
double verify_prestability(const CollisionOperator& op, const Vector& lambda);

/// max |H^2 - H| with H = I + tau J; requires full_matrix.
double verify_projection(const CollisionOperator& op);

/// Number of singular values of H above rel_tol * sigma_max.
std::size_t projection_rank(const CollisionOperator& op, double rel_tol = 1e-8);

/// Distinct magnitudes of the eigenvalues of J, clustered at cluster_tol.
std::vector<double> relaxation_rates(const CollisionOperator& op, double cluster_tol = 1e-8);

/// Constraint matrix in exact arithmetic, for raw (integral) M1.
exact::DenseMatrix<exact::Surd> exact_constraint_matrix(const MomentMatrix& m1, const ExactBackground& bg);

/// dim ker(A) computed exactly.
std::size_t exact_kernel_dimension(const MomentMatrix& m1, const ExactBackground& bg);

struct ConstructionOptions {
  double tau = 0.5;
  bool allow_unstable = false;
  double kernel_tol = 1e-10;
  bool materialize_full = true;
  SimplexOptions simplex{};
};

struct Construction {
  std::optional<MomentMatrix> m1;
  std::optional<MomentMatrix> m3;
  Matrix constraint;
  Matrix kernel;
  WeightsResult weights;
  std::optional<MomentMatrix> modified;
  std::optional<CollisionOperator> op;
  std::optional<StabilityCertificate> certificate;

  bool feasible() const { return weights.feasible; }
};

/// Full pipeline for a velocity set and background. Infeasibility of the
/// weight program is reported through feasible() == false, not an exception.
/// Throws ConfigError for tau < 1/2 unless allow_unstable is set.
Construction construct_partially_relative(const VelocitySet& vs, const BackgroundState& bg,
                                          const ConstructionOptions& options = {});

/// Feasibility only (M3, A, kernel, LP), used by the domain scanner.
bool weights_feasible(const VelocitySet& vs, const BackgroundState& bg, double kernel_tol = 1e-10);

/// Convenience: construct and throw InfeasibleError when no weights exist.
Construction construct_certified(const VelocitySet& vs, const BackgroundState& bg,
                                 const ConstructionOptions& options = {});

}  // namespace lbstab
