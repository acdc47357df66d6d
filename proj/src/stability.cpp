#include "lbstab/stability.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <Eigen/SVD>

namespace lbstab {

namespace {

double weighted_dot(const Vector& x, const Vector& y, const Vector& w) {
  return (x.array() * w.array() * y.array()).sum();
}

void require_full(const CollisionOperator& op, const char* what) {
  if (!op.full_matrix) {
    throw InputError("stability", std::string(what) + " needs the full collision matrix");
  }
}

void require_layout(const MomentMatrix& m1, const EquilibriumMap& eq) {
  if (static_cast<std::size_t>(eq.e21.rows()) != m1.beta() ||
      static_cast<std::size_t>(eq.e21.cols()) != m1.gamma()) {
    throw InputError("stability", "equilibrium map does not match the moment matrix layout");
  }
}

Vector row_vector(const MomentMatrix& m, std::size_t i) { return m.row(i).transpose(); }

}  // namespace

bool StabilityCertificate::certified(double tol) const {
  return lambda.size() > 0 && lambda.minCoeff() > 0.0 && symmetrization_residual <= tol &&
         idempotency_residual <= tol && tau >= 0.5;
}

void CollisionOperator::collide(std::span<double> f) const {
  const auto n = static_cast<Eigen::Index>(f.size());
  Eigen::Map<Vector> fv(f.data(), n);
  const Vector m = conserved_rows * fv;
  const double omega = 1.0 / tau;
  fv += omega * (reduced_equilibrium * m - fv);
}

Vector CollisionOperator::apply(const Vector& f) const {
  Vector out = f;
  collide(std::span<double>(out.data(), static_cast<std::size_t>(out.size())));
  return out;
}

Vector CollisionOperator::equilibrium(const Vector& conserved) const {
  return reduced_equilibrium * conserved;
}

MomentMatrix build_relative_m3(const MomentMatrix& m1, const EquilibriumMap& eq) {
  require_layout(m1, eq);
  Matrix out = m1.entries();
  const auto g = static_cast<Eigen::Index>(m1.gamma());
  const auto b = static_cast<Eigen::Index>(m1.beta());
  out.middleRows(g, b) -= eq.e21 * m1.entries().topRows(g);
  return MomentMatrix(std::move(out), m1.gamma(), m1.beta());
}

MomentMatrix build_fully_relative_m2(const MomentMatrix& m1, const EquilibriumMap& eq) {
  require_layout(m1, eq);
  const auto g = static_cast<Eigen::Index>(m1.gamma());
  const auto b = static_cast<Eigen::Index>(m1.beta());
  const auto t = static_cast<Eigen::Index>(m1.tail_count());
  if (!eq.e31 || eq.e31->rows() != t || eq.e31->cols() != g) {
    throw InputError("stability", "fully relative matrix needs a tail equilibrium map of size " +
                                      std::to_string(t) + " x " + std::to_string(g));
  }
  Matrix out = m1.entries();
  out.middleRows(g, b) -= eq.e21 * m1.entries().topRows(g);
  out.bottomRows(t) -= *eq.e31 * m1.entries().topRows(g);
  return MomentMatrix(std::move(out), m1.gamma(), m1.beta());
}

Matrix constraint_matrix(const MomentMatrix& m3) {
  const std::size_t g = m3.gamma();
  const std::size_t b = m3.beta();
  const auto n = static_cast<Eigen::Index>(m3.size());
  Matrix a(static_cast<Eigen::Index>(g * b), n);
  for (std::size_t i = 0; i < g; ++i) {
    for (std::size_t j = 0; j < b; ++j) {
      a.row(static_cast<Eigen::Index>(i * b + j)) = m3.row(i).cwiseProduct(m3.row(g + j));
    }
  }
  return a;
}

Matrix kernel_basis(const Matrix& a, double rel_tol) {
  const Eigen::Index rows = a.rows();
  const Eigen::Index cols = a.cols();
  Matrix r = a;
  const double scale = a.size() > 0 ? a.cwiseAbs().maxCoeff() : 0.0;
  const double tol = rel_tol * (scale > 0.0 ? scale : 1.0);

  std::vector<Eigen::Index> pivot_cols;
  std::vector<bool> is_pivot(static_cast<std::size_t>(cols), false);
  for (Eigen::Index k = 0; k < rows; ++k) {
    Eigen::Index pr = -1;
    Eigen::Index pc = -1;
    double best = tol;
    for (Eigen::Index i = k; i < rows; ++i) {
      for (Eigen::Index j = 0; j < cols; ++j) {
        if (is_pivot[static_cast<std::size_t>(j)]) continue;
        const double v = std::abs(r(i, j));
        if (v > best) {
          best = v;
          pr = i;
          pc = j;
        }
      }
    }
    if (pr < 0) break;
    r.row(k).swap(r.row(pr));
    r.row(k) /= r(k, pc);
    for (Eigen::Index i = 0; i < rows; ++i) {
      if (i != k && r(i, pc) != 0.0) r.row(i) -= r(i, pc) * r.row(k);
    }
    r(k, pc) = 1.0;
    is_pivot[static_cast<std::size_t>(pc)] = true;
    pivot_cols.push_back(pc);
  }

  std::vector<Eigen::Index> free_cols;
  for (Eigen::Index j = 0; j < cols; ++j) {
    if (!is_pivot[static_cast<std::size_t>(j)]) free_cols.push_back(j);
  }
  Matrix basis = Matrix::Zero(cols, static_cast<Eigen::Index>(free_cols.size()));
  for (std::size_t f = 0; f < free_cols.size(); ++f) {
    const auto col = static_cast<Eigen::Index>(f);
    basis(free_cols[f], col) = 1.0;
    for (std::size_t p = 0; p < pivot_cols.size(); ++p) {
      basis(pivot_cols[p], col) = -r(static_cast<Eigen::Index>(p), free_cols[f]);
    }
  }
  return basis;
}

WeightsResult solve_weights_lp(const Matrix& basis, const SimplexOptions& options) {
  const Eigen::Index n = basis.rows();
  const Eigen::Index d = basis.cols();
  WeightsResult out;
  if (d == 0) return out;

  // Variables: alpha+ (d), alpha- (d), surplus s (n).
  // B alpha+ - B alpha- - s = 1.
  Matrix a = Matrix::Zero(n, 2 * d + n);
  a.leftCols(d) = basis;
  a.middleCols(d, d) = -basis;
  a.rightCols(n) = -Matrix::Identity(n, n);
  const Vector b = Vector::Ones(n);
  const Vector colsum = basis.colwise().sum().transpose();
  Vector c = Vector::Zero(2 * d + n);
  c.head(d) = colsum;
  c.segment(d, d) = -colsum;

  out.lp = solve_standard_form(a, b, c, options);
  if (out.lp.status != LpStatus::optimal) return out;

  out.coefficients = out.lp.x.head(d) - out.lp.x.segment(d, d);
  out.lambda = basis * out.coefficients;
  out.objective = out.lambda.sum();
  out.feasible = out.lambda.minCoeff() > 0.0;
  return out;
}

std::vector<Vector> conserved_orthogonal_basis(const MomentMatrix& m3, const Vector& lambda) {
  if (static_cast<std::size_t>(lambda.size()) != m3.size()) {
    throw InputError("stability", "weight vector length does not match the moment matrix");
  }
  if (lambda.minCoeff() <= 0.0) throw InputError("stability", "weights must be positive");

  std::vector<Vector> basis;
  basis.reserve(m3.gamma());
  for (std::size_t j = 0; j < m3.gamma(); ++j) {
    const Vector r = row_vector(m3, j);
    Vector o = r;
    for (int pass = 0; pass < 2; ++pass) {
      for (const Vector& q : basis) {
        o -= (weighted_dot(o, q, lambda) / weighted_dot(q, q, lambda)) * q;
      }
    }
    const double norm = std::sqrt(weighted_dot(o, o, lambda));
    const double ref = std::sqrt(weighted_dot(r, r, lambda));
    if (!(norm > 1e-12 * ref)) {
      throw ConstructionError("stability", "conserved rows are linearly dependent (row " +
                                               std::to_string(j + 1) + ")");
    }
    basis.push_back(std::move(o));
  }
  return basis;
}

MomentMatrix gram_schmidt_tail(const MomentMatrix& m3, const Vector& lambda) {
  const std::vector<Vector> basis = conserved_orthogonal_basis(m3, lambda);
  std::vector<double> norms;
  norms.reserve(basis.size());
  for (const Vector& q : basis) norms.push_back(weighted_dot(q, q, lambda));

  Matrix out = m3.entries();
  for (std::size_t i = m3.gamma() + m3.beta(); i < m3.size(); ++i) {
    Vector r = row_vector(m3, i);
    for (int pass = 0; pass < 2; ++pass) {
      for (std::size_t j = 0; j < basis.size(); ++j) {
        r -= (weighted_dot(r, basis[j], lambda) / norms[j]) * basis[j];
      }
    }
    out.row(static_cast<Eigen::Index>(i)) = r.transpose();
  }
  return MomentMatrix(std::move(out), m3.gamma(), m3.beta());
}

CollisionOperator assemble_collision(const MomentMatrix& modified, const VelocitySet& vs, double tau,
                                     bool materialize_full) {
  if (modified.size() != vs.size()) {
    throw InputError("stability", "moment matrix size " + std::to_string(modified.size()) +
                                      " does not match velocity set " + vs.name());
  }
  if (!(tau > 0.0) || !std::isfinite(tau)) throw ConfigError("stability", "tau must be positive");

  const Matrix& m = modified.entries();
  const auto n = m.rows();
  const auto g = static_cast<Eigen::Index>(modified.gamma());
  Eigen::FullPivLU<Matrix> lu(m);
  lu.setThreshold(1e-12);
  if (!lu.isInvertible()) throw ConstructionError("stability", "modified moment matrix is singular");

  CollisionOperator op{vs, modified, Matrix(), m.topRows(g), tau, std::nullopt};
  const Matrix inv = lu.inverse();
  op.reduced_equilibrium = inv.leftCols(g);
  if (materialize_full) {
    // M^-1 (E - I) M = -(M^-1 restricted to tail columns)(tail rows of M).
    const Matrix j = -(inv.rightCols(n - g) * m.bottomRows(n - g)) / tau;
    op.full_matrix = j;
  }
  return op;
}

double verify_prestability(const CollisionOperator& op, const Vector& lambda) {
  require_full(op, "prestability check");
  const Matrix& j = *op.full_matrix;
  if (lambda.size() != j.rows()) throw InputError("stability", "weight vector length mismatch");
  const Matrix jl = j * lambda.asDiagonal();
  return (jl - jl.transpose()).cwiseAbs().maxCoeff();
}

double verify_projection(const CollisionOperator& op) {
  require_full(op, "projection check");
  const Matrix h = Matrix::Identity(op.full_matrix->rows(), op.full_matrix->cols()) + op.tau * *op.full_matrix;
  return (h * h - h).cwiseAbs().maxCoeff();
}

std::size_t projection_rank(const CollisionOperator& op, double rel_tol) {
  require_full(op, "projection rank");
  const Matrix h = Matrix::Identity(op.full_matrix->rows(), op.full_matrix->cols()) + op.tau * *op.full_matrix;
  Eigen::JacobiSVD<Matrix> svd(h);
  const Vector& s = svd.singularValues();
  if (s.size() == 0 || s(0) == 0.0) return 0;
  return static_cast<std::size_t>((s.array() > rel_tol * s(0)).count());
}

std::vector<double> relaxation_rates(const CollisionOperator& op, double cluster_tol) {
  require_full(op, "relaxation rates");
  Eigen::EigenSolver<Matrix> es(*op.full_matrix, false);
  std::vector<double> mags;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) mags.push_back(std::abs(es.eigenvalues()(i)));
  std::sort(mags.begin(), mags.end());
  const double tol = cluster_tol * std::max(1.0, 1.0 / op.tau);
  std::vector<double> distinct;
  for (double v : mags) {
    if (v <= tol) v = 0.0;
    if (distinct.empty() || v - distinct.back() > tol) distinct.push_back(v);
  }
  return distinct;
}

exact::DenseMatrix<exact::Surd> exact_constraint_matrix(const MomentMatrix& m1, const ExactBackground& bg) {
  using exact::Surd;
  if (!m1.integral()) throw InputError("stability", "exact constraint matrix needs an integral moment matrix");
  if (m1.gamma() != 4 || m1.beta() != 6) {
    throw InputError("stability", "exact constraint matrix expects 4 conserved and 6 consistency rows");
  }
  const IntMatrix& raw = *m1.integral();
  const std::size_t n = m1.size();
  const auto e21 = lee_equilibrium_map_exact(bg);

  auto entry = [&](std::size_t r, std::size_t k) {
    return Surd(exact::Rational(raw(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(k))));
  };
  exact::DenseMatrix<Surd> rel(6, std::vector<Surd>(n));
  for (std::size_t j = 0; j < 6; ++j) {
    for (std::size_t k = 0; k < n; ++k) {
      Surd v = entry(4 + j, k);
      for (std::size_t c = 0; c < 4; ++c) v -= e21[j][c] * entry(c, k);
      rel[j][k] = v;
    }
  }
  exact::DenseMatrix<Surd> a(24, std::vector<Surd>(n));
  for (std::size_t i = 0; i < 4; ++i) {
    for (std::size_t j = 0; j < 6; ++j) {
      for (std::size_t k = 0; k < n; ++k) a[i * 6 + j][k] = entry(i, k) * rel[j][k];
    }
  }
  return a;
}

std::size_t exact_kernel_dimension(const MomentMatrix& m1, const ExactBackground& bg) {
  const auto a = exact_constraint_matrix(m1, bg);
  return m1.size() - exact::field_rank(a);
}

namespace {

void check_tau(const ConstructionOptions& options) {
  if (!(options.tau > 0.0) || !std::isfinite(options.tau)) {
    throw ConfigError("stability", "tau must be a positive finite number");
  }
  if (options.tau < 0.5 && !options.allow_unstable) {
    throw ConfigError("stability", "tau = " + std::to_string(options.tau) +
                                       " is below 1/2; pass allow_unstable to build it anyway");
  }
}

}  // namespace

Construction construct_partially_relative(const VelocitySet& vs, const BackgroundState& bg,
                                          const ConstructionOptions& options) {
  check_tau(options);
  bg.validate();

  Construction out;
  out.m1 = vs.name() == "D3Q33" ? build_m1_d3q33() : build_raw_moment_matrix(vs);
  const EquilibriumMap eq = lee_equilibrium_map(bg);
  out.m3 = build_relative_m3(*out.m1, eq);
  out.constraint = constraint_matrix(*out.m3);
  out.kernel = kernel_basis(out.constraint, options.kernel_tol);
  out.weights = solve_weights_lp(out.kernel, options.simplex);
  if (!out.weights.feasible) return out;

  out.modified = gram_schmidt_tail(*out.m3, out.weights.lambda);
  out.op = assemble_collision(*out.modified, vs, options.tau, options.materialize_full);

  StabilityCertificate cert;
  cert.lambda = out.weights.lambda;
  cert.tau = options.tau;
  cert.kernel_dimension = static_cast<std::size_t>(out.kernel.cols());
  if (out.op->full_matrix) {
    cert.symmetrization_residual = verify_prestability(*out.op, cert.lambda);
    cert.idempotency_residual = verify_projection(*out.op);
    cert.projection_rank = projection_rank(*out.op);
    cert.relaxation_rates = relaxation_rates(*out.op);
  }
  out.certificate = std::move(cert);
  return out;
}

bool weights_feasible(const VelocitySet& vs, const BackgroundState& bg, double kernel_tol) {
  bg.validate();
  const MomentMatrix m1 = vs.name() == "D3Q33" ? build_m1_d3q33() : build_raw_moment_matrix(vs);
  const MomentMatrix m3 = build_relative_m3(m1, lee_equilibrium_map(bg));
  return solve_weights_lp(kernel_basis(constraint_matrix(m3), kernel_tol)).feasible;
}

Construction construct_certified(const VelocitySet& vs, const BackgroundState& bg,
                                 const ConstructionOptions& options) {
  Construction c = construct_partially_relative(vs, bg, options);
  if (!c.feasible()) {
    throw InfeasibleError("stability", "no positive weights exist for " + vs.name() +
                                           " at this background velocity");
  }
  return c;
}

}  // namespace lbstab
