#include "lbstab/lattice.hpp"

#include <algorithm>
#include <cstdlib>
#include <limits>
#include <map>
#include <set>

#include "lbstab/exact.hpp"

namespace lbstab {

namespace {

// c1..c33 in reference order.
const std::vector<Velocity>& d3q33_velocities() {
  static const std::vector<Velocity> v = {
      {0, 0, 0},
      {-1, 0, 0},   {1, 0, 0},   {0, -1, 0},  {0, 1, 0},   {0, 0, -1},  {0, 0, 1},
      {-1, -1, 0},  {-1, 1, 0},  {1, -1, 0},  {1, 1, 0},
      {-1, 0, -1},  {-1, 0, 1},  {1, 0, -1},  {1, 0, 1},
      {0, -1, -1},  {0, -1, 1},  {0, 1, -1},  {0, 1, 1},
      {-1, -1, -1}, {-1, -1, 1}, {-1, 1, -1}, {-1, 1, 1},
      {1, -1, -1},  {1, -1, 1},  {1, 1, -1},  {1, 1, 1},
      {-2, 0, 0},   {2, 0, 0},   {0, -2, 0},  {0, 2, 0},   {0, 0, -2},  {0, 0, 2},
  };
  return v;
}

enum Shell { rest = 1, axis = 2, edge = 4, corner = 8, axis2 = 16 };

int shell_of(const Velocity& c) {
  int nonzero = 0;
  int maxabs = 0;
  for (int x : c) {
    nonzero += x != 0;
    maxabs = std::max(maxabs, std::abs(x));
  }
  if (maxabs == 2) return axis2;
  switch (nonzero) {
    case 0: return rest;
    case 1: return axis;
    case 2: return edge;
    default: return corner;
  }
}

const std::map<std::string, int>& shells_by_name() {
  static const std::map<std::string, int> m = {
      {"D3Q7", rest | axis},
      {"D3Q13", rest | edge},
      {"D3Q15", rest | axis | corner},
      {"D3Q19", rest | axis | edge},
      {"D3Q21", rest | edge | corner},
      {"D3Q27", rest | axis | edge | corner},
      {"D3Q33", rest | axis | edge | corner | axis2},
  };
  return m;
}

std::int64_t ipow(std::int64_t base, int e) {
  std::int64_t r = 1;
  for (int i = 0; i < e; ++i) r *= base;
  return r;
}

exact::DenseMatrix<exact::Integer> to_exact(const std::vector<IntVector>& rows) {
  exact::DenseMatrix<exact::Integer> m;
  m.reserve(rows.size());
  for (const auto& r : rows) {
    std::vector<exact::Integer> row(static_cast<std::size_t>(r.size()));
    for (Eigen::Index i = 0; i < r.size(); ++i) row[static_cast<std::size_t>(i)] = r[i];
    m.push_back(std::move(row));
  }
  return m;
}

}  // namespace

VelocitySet::VelocitySet(std::string name, std::vector<Velocity> velocities)
    : name_(std::move(name)), velocities_(std::move(velocities)) {
  std::set<Velocity> seen;
  for (const auto& c : velocities_) {
    if (!seen.insert(c).second) {
      throw ConfigError("lattice", "duplicate velocity in set " + name_);
    }
  }
  opposite_.resize(velocities_.size());
  for (std::size_t i = 0; i < velocities_.size(); ++i) {
    const Velocity neg = {-velocities_[i][0], -velocities_[i][1], -velocities_[i][2]};
    auto it = std::find(velocities_.begin(), velocities_.end(), neg);
    if (it == velocities_.end()) {
      throw ConfigError("lattice", "velocity set " + name_ + " is not symmetric");
    }
    opposite_[i] = static_cast<std::size_t>(it - velocities_.begin());
  }
}

int VelocitySet::max_displacement() const {
  int m = 0;
  for (const auto& c : velocities_) {
    for (int x : c) m = std::max(m, std::abs(x));
  }
  return m;
}

const std::vector<std::string>& velocity_set_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> out;
    for (const auto& [name, mask] : shells_by_name()) out.push_back(name);
    return out;
  }();
  return names;
}

VelocitySet build_velocity_set(const std::string& name) {
  const auto& table = shells_by_name();
  auto it = table.find(name);
  if (it == table.end()) {
    throw ConfigError("lattice", "unknown velocity set '" + name + "'");
  }
  std::vector<Velocity> out;
  for (const auto& c : d3q33_velocities()) {
    if (shell_of(c) & it->second) out.push_back(c);
  }
  return VelocitySet(name, std::move(out));
}

MomentMatrix::MomentMatrix(Matrix entries, std::size_t gamma, std::size_t beta)
    : entries_(std::move(entries)), gamma_(gamma), beta_(beta) {
  if (entries_.rows() != entries_.cols()) {
    throw InputError("lattice", "moment matrix must be square");
  }
  if (gamma_ + beta_ > size()) {
    throw InputError("lattice", "gamma + beta exceeds the matrix size");
  }
}

MomentMatrix::MomentMatrix(const IntMatrix& entries, std::size_t gamma, std::size_t beta,
                           std::vector<Exponents> exponents)
    : MomentMatrix(entries.cast<double>(), gamma, beta) {
  integral_ = entries;
  exponents_ = std::move(exponents);
}

RowRole MomentMatrix::role(std::size_t row) const {
  if (row < gamma_) return RowRole::conserved;
  if (row < gamma_ + beta_) return RowRole::consistency;
  return RowRole::tail;
}

IntVector raw_moment_row(const VelocitySet& vs, const Exponents& exponents) {
  for (int e : exponents) {
    if (e < 0) throw InputError("lattice", "negative moment exponent");
  }
  IntVector row(static_cast<Eigen::Index>(vs.size()));
  for (std::size_t i = 0; i < vs.size(); ++i) {
    std::int64_t v = 1;
    for (int d = 0; d < 3; ++d) v *= ipow(vs[i][d], exponents[d]);
    row[static_cast<Eigen::Index>(i)] = v;
  }
  return row;
}

const std::vector<Exponents>& d3q33_exponents() {
  static const std::vector<Exponents> e = {
      {0, 0, 0},
      {1, 0, 0}, {0, 1, 0}, {0, 0, 1},
      {2, 0, 0}, {1, 1, 0}, {1, 0, 1}, {0, 2, 0}, {0, 1, 1}, {0, 0, 2},
      {3, 0, 0}, {0, 3, 0}, {0, 0, 3},
      {2, 1, 0}, {2, 0, 1}, {1, 2, 0}, {0, 2, 1}, {1, 0, 2}, {0, 1, 2}, {1, 1, 1},
      {4, 0, 0}, {0, 4, 0}, {0, 0, 4},
      {2, 2, 0}, {2, 0, 2}, {0, 2, 2},
      {2, 1, 1}, {1, 2, 1}, {1, 1, 2},
      {2, 2, 1}, {2, 1, 2}, {1, 2, 2},
      {2, 2, 2},
  };
  return e;
}

MomentMatrix build_m1_d3q33() {
  const VelocitySet vs = build_velocity_set("D3Q33");
  const auto& exps = d3q33_exponents();
  IntMatrix m(33, 33);
  for (std::size_t r = 0; r < exps.size(); ++r) {
    m.row(static_cast<Eigen::Index>(r)) = raw_moment_row(vs, exps[r]).transpose();
  }
  return MomentMatrix(m, 4, 6, exps);
}

MomentMatrix build_raw_moment_matrix(const VelocitySet& vs) {
  const auto& exps = d3q33_exponents();
  const std::size_t n = vs.size();
  std::vector<IntVector> rows;
  std::vector<Exponents> used;
  for (std::size_t r = 0; r < 10; ++r) {
    rows.push_back(raw_moment_row(vs, exps[r]));
    used.push_back(exps[r]);
  }
  if (n < 10 || exact::integer_rank(to_exact(rows)) < 10) {
    throw ConstructionError("lattice", "velocity set " + vs.name() +
                                           " cannot resolve density, momentum and second moments");
  }

  std::vector<Exponents> candidates(exps.begin() + 10, exps.end());
  for (int degree = 3; degree <= 6; ++degree) {
    for (int a = degree; a >= 0; --a) {
      for (int b = degree - a; b >= 0; --b) {
        const Exponents e = {a, b, degree - a - b};
        if (std::find(candidates.begin(), candidates.end(), e) == candidates.end()) {
          candidates.push_back(e);
        }
      }
    }
  }

  std::size_t rank = rows.size();
  for (const auto& e : candidates) {
    if (rows.size() == n) break;
    rows.push_back(raw_moment_row(vs, e));
    const std::size_t r = exact::integer_rank(to_exact(rows));
    if (r > rank) {
      rank = r;
      used.push_back(e);
    } else {
      rows.pop_back();
    }
  }
  if (rows.size() != n) {
    throw ConstructionError("lattice", "could not complete a regular moment matrix for " + vs.name());
  }
  IntMatrix m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t r = 0; r < n; ++r) m.row(static_cast<Eigen::Index>(r)) = rows[r].transpose();
  return MomentMatrix(m, 4, 6, std::move(used));
}

RegularityReport regularity_check(const Matrix& m, double rel_tol) {
  RegularityReport out;
  if (m.rows() == 0) return out;
  Eigen::JacobiSVD<Matrix> svd(m);
  const auto& s = svd.singularValues();
  const double smax = s(0);
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (s(i) > rel_tol * smax) ++out.rank;
  }
  out.regular = m.rows() == m.cols() && out.rank == static_cast<std::size_t>(m.rows());
  const double smin = s(s.size() - 1);
  out.condition = smin > 0.0 ? smax / smin : std::numeric_limits<double>::infinity();
  return out;
}

RegularityReport regularity_check(const MomentMatrix& m, double rel_tol) {
  return regularity_check(m.entries(), rel_tol);
}

std::string exact_determinant(const IntMatrix& m) {
  exact::DenseMatrix<exact::Integer> d(static_cast<std::size_t>(m.rows()));
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) d[static_cast<std::size_t>(r)].push_back(m(r, c));
  }
  return exact::bareiss_determinant(std::move(d)).str();
}

}  // namespace lbstab
