#pragma once

#include <array>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace lbstab {

using Vec3 = std::array<double, 3>;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Base class for every error raised by the library. Messages carry a
/// module tag, e.g. "[stability] singular moment matrix".
class Error : public std::runtime_error {
 public:
  Error(const std::string& module, const std::string& what)
      : std::runtime_error("[" + module + "] " + what), module_(module) {}

  const std::string& module() const noexcept { return module_; }

 private:
  std::string module_;
};

/// Invalid configuration: unknown names, out-of-range parameters.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Malformed or mismatched input data.
class InputError : public Error {
 public:
  using Error::Error;
};

/// A construction step cannot proceed (singular matrix, degenerate span).
class ConstructionError : public Error {
 public:
  using Error::Error;
};

/// The weight linear program has no solution for the requested background.
class InfeasibleError : public Error {
 public:
  using Error::Error;
};

/// Runtime failure during time stepping (non-finite values, memory cap).
class SimulationError : public Error {
 public:
  using Error::Error;
};

}  // namespace lbstab
