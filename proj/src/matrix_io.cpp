#include "lbstab/matrix_io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace lbstab {

namespace {

constexpr const char* kMagic = "# lbstab matrix file v1";

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double parse_double(const std::string& s, const std::string& ctx) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw InputError("matrix_io", "cannot parse number '" + s + "' in " + ctx);
  }
}

std::size_t parse_size(const std::string& s, const std::string& ctx) {
  std::size_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw InputError("matrix_io", "cannot parse size '" + s + "' in " + ctx);
  }
  return v;
}

const std::string& require(const MatrixFile& f, const std::string& key) {
  const std::string* v = f.find_header(key);
  if (!v) throw InputError("matrix_io", "missing header entry '" + key + "'");
  return *v;
}

const Matrix& require_matrix(const MatrixFile& f, const std::string& name) {
  const Matrix* m = f.find_matrix(name);
  if (!m) throw InputError("matrix_io", "missing matrix '" + name + "'");
  return *m;
}

}  // namespace

const std::string* MatrixFile::find_header(const std::string& key) const {
  for (const auto& [k, v] : header) {
    if (k == key) return &v;
  }
  return nullptr;
}

const Matrix* MatrixFile::find_matrix(const std::string& name) const {
  for (const auto& [k, m] : matrices) {
    if (k == name) return &m;
  }
  return nullptr;
}

void write_matrix_file(std::ostream& os, const MatrixFile& file) {
  os << kMagic << '\n';
  for (const auto& [k, v] : file.header) os << k << ' ' << v << '\n';
  for (const auto& [name, m] : file.matrices) {
    os << "matrix " << name << ' ' << m.rows() << ' ' << m.cols() << '\n';
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      for (Eigen::Index c = 0; c < m.cols(); ++c) {
        if (c) os << ' ';
        os << fmt(m(r, c));
      }
      os << '\n';
    }
  }
}

MatrixFile read_matrix_file(std::istream& is) {
  MatrixFile out;
  std::string line;
  if (!std::getline(is, line) || line != kMagic) {
    throw InputError("matrix_io", "not an lbstab matrix file (bad first line)");
  }
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::string key;
    ls >> key;
    if (key != "matrix") {
      std::string rest;
      std::getline(ls >> std::ws, rest);
      out.header.emplace_back(key, rest);
      continue;
    }
    std::string name, rs, cs;
    ls >> name >> rs >> cs;
    const std::size_t rows = parse_size(rs, "matrix " + name);
    const std::size_t cols = parse_size(cs, "matrix " + name);
    Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (std::size_t r = 0; r < rows; ++r) {
      if (!std::getline(is, line)) throw InputError("matrix_io", "truncated matrix '" + name + "'");
      std::istringstream rsx(line);
      std::string tok;
      std::size_t c = 0;
      while (rsx >> tok) {
        if (c >= cols) throw InputError("matrix_io", "too many columns in matrix '" + name + "'");
        m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c++)) = parse_double(tok, "matrix " + name);
      }
      if (c != cols) throw InputError("matrix_io", "too few columns in matrix '" + name + "'");
    }
    out.matrices.emplace_back(name, std::move(m));
  }
  return out;
}

void save_matrix_file(const std::string& path, const MatrixFile& file) {
  std::ofstream os(path);
  if (!os) throw InputError("matrix_io", "cannot open '" + path + "' for writing");
  write_matrix_file(os, file);
  if (!os) throw InputError("matrix_io", "write to '" + path + "' failed");
}

MatrixFile load_matrix_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw InputError("matrix_io", "cannot open '" + path + "'");
  return read_matrix_file(is);
}

MatrixFile operator_to_file(const CollisionOperator& op, const BackgroundState& bg,
                            const StabilityCertificate* certificate) {
  MatrixFile f;
  const std::size_t beta = op.moment_matrix ? op.moment_matrix->beta() : 0;
  f.header = {
      {"velocity_set", op.velocities.name()},
      {"n", std::to_string(op.size())},
      {"gamma", std::to_string(op.gamma())},
      {"beta", std::to_string(beta)},
      {"tau", fmt(op.tau)},
      {"u0", fmt(bg.u0[0]) + ' ' + fmt(bg.u0[1]) + ' ' + fmt(bg.u0[2])},
      {"rho0", fmt(bg.rho0)},
      {"cs2", fmt(bg.cs2)},
  };
  if (certificate) {
    f.header.emplace_back("symmetrization_residual", fmt(certificate->symmetrization_residual));
    f.header.emplace_back("idempotency_residual", fmt(certificate->idempotency_residual));
    f.header.emplace_back("kernel_dimension", std::to_string(certificate->kernel_dimension));
    f.header.emplace_back("projection_rank", std::to_string(certificate->projection_rank));
    std::string rates;
    for (double r : certificate->relaxation_rates) rates += (rates.empty() ? "" : " ") + fmt(r);
    f.header.emplace_back("relaxation_rates", rates);
    f.header.emplace_back("certified", certificate->certified() ? "1" : "0");
    f.matrices.emplace_back("lambda", certificate->lambda);
  }
  if (op.moment_matrix) f.matrices.emplace_back("moment_matrix", op.moment_matrix->entries());
  f.matrices.emplace_back("reduced_equilibrium", op.reduced_equilibrium);
  f.matrices.emplace_back("conserved_rows", op.conserved_rows);
  if (op.full_matrix) f.matrices.emplace_back("full_matrix", *op.full_matrix);
  return f;
}

LoadedOperator operator_from_file(const MatrixFile& file) {
  const VelocitySet vs = build_velocity_set(require(file, "velocity_set"));
  const std::size_t n = parse_size(require(file, "n"), "header n");
  const std::size_t gamma = parse_size(require(file, "gamma"), "header gamma");
  const std::size_t beta = parse_size(require(file, "beta"), "header beta");
  if (n != vs.size()) throw InputError("matrix_io", "header n does not match velocity set " + vs.name());

  BackgroundState bg;
  bg.rho0 = parse_double(require(file, "rho0"), "header rho0");
  bg.cs2 = parse_double(require(file, "cs2"), "header cs2");
  {
    std::istringstream us(require(file, "u0"));
    std::string a, b, c;
    us >> a >> b >> c;
    bg.u0 = {parse_double(a, "header u0"), parse_double(b, "header u0"), parse_double(c, "header u0")};
  }
  bg.validate();

  const Matrix& r = require_matrix(file, "reduced_equilibrium");
  const Matrix& c = require_matrix(file, "conserved_rows");
  const auto ni = static_cast<Eigen::Index>(n);
  const auto gi = static_cast<Eigen::Index>(gamma);
  if (r.rows() != ni || r.cols() != gi || c.rows() != gi || c.cols() != ni) {
    throw InputError("matrix_io", "operator matrices have inconsistent shapes");
  }
  LoadedOperator out{CollisionOperator{vs, std::nullopt, r, c, parse_double(require(file, "tau"), "header tau"),
                                       std::nullopt},
                     bg, std::nullopt};
  if (const Matrix* m = file.find_matrix("moment_matrix")) {
    if (m->rows() != ni || m->cols() != ni) throw InputError("matrix_io", "moment_matrix has wrong shape");
    out.op.moment_matrix = MomentMatrix(*m, gamma, beta);
  }
  if (const Matrix* j = file.find_matrix("full_matrix")) {
    if (j->rows() != ni || j->cols() != ni) throw InputError("matrix_io", "full_matrix has wrong shape");
    out.op.full_matrix = *j;
  }
  if (const Matrix* l = file.find_matrix("lambda")) {
    if (l->rows() != ni || l->cols() != 1) throw InputError("matrix_io", "lambda has wrong shape");
    out.lambda = Vector(*l);
  }
  return out;
}

}  // namespace lbstab
