#pragma once

// Plain-text matrix files for operators and certificates.
//
//   # lbstab matrix file v1
//   n 33
//   gamma 4
//   ...
//   matrix lambda 33 1
//   <row-major decimal rows>
//
// Header lines are "key value..."; values are written with 17 significant
// digits so a write/read round trip is exact.

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "lbstab/equilibrium.hpp"
#include "lbstab/stability.hpp"

namespace lbstab {

struct MatrixFile {
  std::vector<std::pair<std::string, std::string>> header;
  std::vector<std::pair<std::string, Matrix>> matrices;

  const std::string* find_header(const std::string& key) const;
  const Matrix* find_matrix(const std::string& name) const;
};

void write_matrix_file(std::ostream& os, const MatrixFile& file);
MatrixFile read_matrix_file(std::istream& is);

void save_matrix_file(const std::string& path, const MatrixFile& file);
MatrixFile load_matrix_file(const std::string& path);

/// Operator + certificate + background in one file.
MatrixFile operator_to_file(const CollisionOperator& op, const BackgroundState& bg,
                            const StabilityCertificate* certificate = nullptr);

struct LoadedOperator {
  CollisionOperator op;
  BackgroundState background;
  std::optional<Vector> lambda;
};

/// Rebuilds the operator (velocity set by name). Throws InputError on
/// missing or inconsistent entries.
LoadedOperator operator_from_file(const MatrixFile& file);

}  // namespace lbstab
