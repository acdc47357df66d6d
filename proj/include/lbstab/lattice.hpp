#pragma once

// Discrete velocity sets and raw moment matrices.

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lbstab/common.hpp"

namespace lbstab {

using Velocity = std::array<int, 3>;
using Exponents = std::array<int, 3>;
using IntMatrix = Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using IntVector = Eigen::Matrix<std::int64_t, Eigen::Dynamic, 1>;

/// Ordered, symmetric list of integer lattice velocities.
class VelocitySet {
 public:
  VelocitySet(std::string name, std::vector<Velocity> velocities);

  const std::string& name() const { return name_; }
  std::size_t size() const { return velocities_.size(); }
  const Velocity& operator[](std::size_t i) const { return velocities_[i]; }
  const std::vector<Velocity>& velocities() const { return velocities_; }

  /// Index of -c_i.
  std::size_t opposite(std::size_t i) const { return opposite_[i]; }

  /// Largest |component| over all velocities (streaming reach).
  int max_displacement() const;

 private:
  std::string name_;
  std::vector<Velocity> velocities_;
  std::vector<std::size_t> opposite_;
};

/// Names accepted by build_velocity_set.
const std::vector<std::string>& velocity_set_names();

/// D3Q7 ... D3Q33. D3Q33 follows the reference ordering c1..c33 (rest, six
/// axis, twelve edge, eight corner, six speed-two axis velocities); every
/// other set is the order-preserving subsequence of it. Throws ConfigError on
/// an unknown name.
VelocitySet build_velocity_set(const std::string& name);

enum class RowRole { conserved, consistency, tail };

/// n x n moment matrix with row-role annotations. The first gamma rows are
/// conserved, the next beta rows carry the consistency moments, and the
/// remaining rows are the tail.
class MomentMatrix {
 public:
  MomentMatrix(Matrix entries, std::size_t gamma, std::size_t beta);
  MomentMatrix(const IntMatrix& entries, std::size_t gamma, std::size_t beta,
               std::vector<Exponents> exponents);

  const Matrix& entries() const { return entries_; }
  std::size_t size() const { return static_cast<std::size_t>(entries_.rows()); }
  std::size_t gamma() const { return gamma_; }
  std::size_t beta() const { return beta_; }
  std::size_t tail_count() const { return size() - gamma_ - beta_; }
  RowRole role(std::size_t row) const;

  auto row(std::size_t i) const { return entries_.row(static_cast<Eigen::Index>(i)); }
  auto conserved_rows() const { return entries_.topRows(static_cast<Eigen::Index>(gamma_)); }

  /// Exact integer entries, present for raw moment matrices only.
  const std::optional<IntMatrix>& integral() const { return integral_; }

  /// Monomial exponents per row, present for raw moment matrices only.
  const std::vector<Exponents>& exponents() const { return exponents_; }

 private:
  Matrix entries_;
  std::size_t gamma_;
  std::size_t beta_;
  std::optional<IntMatrix> integral_;
  std::vector<Exponents> exponents_;
};

/// Component i equals prod_j c_ij^k_j (with 0^0 = 1).
IntVector raw_moment_row(const VelocitySet& vs, const Exponents& exponents);

/// Exponent tuples of the D3Q33 raw moment matrix in row order: density,
/// momentum, the six second moments (xx, xy, xz, yy, yz, zz), then the 23
/// third- to sixth-order monomials.
const std::vector<Exponents>& d3q33_exponents();

/// The D3Q33 raw moment matrix with gamma = 4, beta = 6.
MomentMatrix build_m1_d3q33();

/// Raw moment matrix for any supported set: density, momentum and second
/// moments, completed by monomials from the D3Q33 tail list (then further
/// monomials of degree <= 6) that increase the exact rank. Throws
/// ConstructionError if the velocity set cannot carry the second moments.
MomentMatrix build_raw_moment_matrix(const VelocitySet& vs);

struct RegularityReport {
  bool regular = false;
  std::size_t rank = 0;
  double condition = 0.0;  ///< sigma_max / sigma_min (inf when singular)
};

/// Numerical rank and 2-norm condition estimate from the singular values;
/// singular values below rel_tol * sigma_max count as zero.
RegularityReport regularity_check(const Matrix& m, double rel_tol = 1e-10);
RegularityReport regularity_check(const MomentMatrix& m, double rel_tol = 1e-10);

/// Exact determinant of an integer matrix (Bareiss).
std::string exact_determinant(const IntMatrix& m);

}  // namespace lbstab
