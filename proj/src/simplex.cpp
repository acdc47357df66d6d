#include "lbstab/simplex.hpp"

#include <cmath>
#include <limits>
#include <vector>

namespace lbstab {

namespace {

class Tableau {
 public:
  // rows 0..m-1 constraints, row m objective; last column is the rhs.
  Tableau(Eigen::Index m, Eigen::Index cols) : t_(Matrix::Zero(m + 1, cols + 1)), basis_(m) {}

  double& at(Eigen::Index r, Eigen::Index c) { return t_(r, c); }
  double rhs(Eigen::Index r) const { return t_(r, t_.cols() - 1); }
  Eigen::Index rows() const { return t_.rows() - 1; }
  Eigen::Index cols() const { return t_.cols() - 1; }
  std::vector<Eigen::Index>& basis() { return basis_; }

  void pivot(Eigen::Index r, Eigen::Index c) {
    t_.row(r) /= t_(r, c);
    for (Eigen::Index i = 0; i < t_.rows(); ++i) {
      if (i == r) continue;
      const double f = t_(i, c);
      if (f != 0.0) t_.row(i) -= f * t_.row(r);
    }
    basis_[static_cast<std::size_t>(r)] = c;
  }

  // Sets the objective row to the reduced costs of `cost` for the current basis.
  void price(const Vector& cost) {
    const Eigen::Index m = rows();
    t_.row(m).setZero();
    t_.row(m).head(cost.size()) = cost.transpose();
    for (Eigen::Index r = 0; r < m; ++r) {
      const Eigen::Index j = basis_[static_cast<std::size_t>(r)];
      const double cj = j < cost.size() ? cost(j) : 0.0;
      if (cj != 0.0) t_.row(m) -= cj * t_.row(r);
    }
  }

  // Objective value: minus the rhs of the objective row.
  double objective() const { return -t_(rows(), t_.cols() - 1); }

  // Bland's rule. allowed(j) filters columns that may enter.
  template <class Allowed>
  LpStatus run(Allowed allowed, const SimplexOptions& opt, std::size_t& iterations) {
    const Eigen::Index m = rows();
    while (iterations < opt.max_iterations) {
      Eigen::Index enter = -1;
      for (Eigen::Index j = 0; j < cols(); ++j) {
        if (allowed(j) && t_(m, j) < -opt.cost_tol) {
          enter = j;
          break;
        }
      }
      if (enter < 0) return LpStatus::optimal;

      Eigen::Index leave = -1;
      double best = std::numeric_limits<double>::infinity();
      for (Eigen::Index r = 0; r < m; ++r) {
        const double a = t_(r, enter);
        if (a <= opt.pivot_tol) continue;
        const double ratio = std::max(rhs(r), 0.0) / a;
        const double slack = 1e-14 * (1.0 + std::abs(ratio));
        if (leave < 0 || ratio < best - slack ||
            (ratio <= best + slack &&
             basis_[static_cast<std::size_t>(r)] < basis_[static_cast<std::size_t>(leave)])) {
          best = ratio;
          leave = r;
        }
      }
      if (leave < 0) return LpStatus::unbounded;
      pivot(leave, enter);
      ++iterations;
    }
    throw ConstructionError("simplex", "iteration limit reached");
  }

  void drop_row(Eigen::Index r) {
    const Eigen::Index last = t_.rows() - 1;
    Matrix reduced(t_.rows() - 1, t_.cols());
    reduced << t_.topRows(r), t_.middleRows(r + 1, last - r);
    t_ = std::move(reduced);
    basis_.erase(basis_.begin() + r);
  }

 private:
  Matrix t_;
  std::vector<Eigen::Index> basis_;
};

}  // namespace

LpSolution solve_standard_form(const Matrix& a, const Vector& b, const Vector& c,
                               const SimplexOptions& options) {
  const Eigen::Index m = a.rows();
  const Eigen::Index n = a.cols();
  if (b.size() != m || c.size() != n) {
    throw InputError("simplex", "dimension mismatch in linear program");
  }

  // Columns: n structural variables followed by m artificials.
  Tableau tab(m, n + m);
  for (Eigen::Index r = 0; r < m; ++r) {
    const double sign = b(r) < 0.0 ? -1.0 : 1.0;
    for (Eigen::Index j = 0; j < n; ++j) tab.at(r, j) = sign * a(r, j);
    tab.at(r, n + r) = 1.0;
    tab.at(r, n + m) = sign * b(r);
    tab.basis()[static_cast<std::size_t>(r)] = n + r;
  }

  LpSolution out;
  Vector phase_one_cost = Vector::Zero(n + m);
  phase_one_cost.tail(m).setOnes();
  tab.price(phase_one_cost);
  tab.run([](Eigen::Index) { return true; }, options, out.iterations);

  out.phase_one_residual = tab.objective();
  if (out.phase_one_residual > options.feasibility_tol * (1.0 + b.lpNorm<1>())) {
    out.status = LpStatus::infeasible;
    return out;
  }

  // Drive remaining artificials out of the basis; rows where that is
  // impossible are linearly dependent and get dropped.
  for (Eigen::Index r = tab.rows() - 1; r >= 0; --r) {
    if (tab.basis()[static_cast<std::size_t>(r)] < n) continue;
    Eigen::Index col = -1;
    double best = options.pivot_tol;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (std::abs(tab.at(r, j)) > best) {
        best = std::abs(tab.at(r, j));
        col = j;
      }
    }
    if (col >= 0) {
      tab.pivot(r, col);
    } else {
      tab.drop_row(r);
    }
  }

  Vector phase_two_cost = Vector::Zero(n + m);
  phase_two_cost.head(n) = c;
  tab.price(phase_two_cost);
  out.status = tab.run([n](Eigen::Index j) { return j < n; }, options, out.iterations);
  if (out.status != LpStatus::optimal) return out;

  out.x = Vector::Zero(n);
  for (Eigen::Index r = 0; r < tab.rows(); ++r) {
    const Eigen::Index j = tab.basis()[static_cast<std::size_t>(r)];
    if (j < n) out.x(j) = tab.rhs(r);
  }
  out.objective = c.dot(out.x);
  return out;
}

}  // namespace lbstab
