#pragma once

// Periodic stream-collide evolution on [0,1)^3 with dx = dt = 1/N.

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "lbstab/common.hpp"
#include "lbstab/equilibrium.hpp"
#include "lbstab/stability.hpp"

namespace lbstab {

/// Node counts per axis. An axis of extent 1 is a reduced dimension: every
/// shift along it wraps to the same node, which is exact for data that does
/// not vary along that axis. Any other extent must be at least 5.
struct Grid {
  std::size_t nx = 0;
  std::size_t ny = 0;
  std::size_t nz = 0;

  static Grid cube(std::size_t n) { return {n, n, n}; }
  static Grid pseudo1d(std::size_t n) { return {n, 1, 1}; }

  std::size_t nodes() const { return nx * ny * nz; }
  std::size_t index(std::size_t x, std::size_t y, std::size_t z) const { return x + nx * (y + ny * z); }
  void validate() const;
  bool operator==(const Grid&) const = default;
};

struct SimConfig {
  Grid grid;
  BackgroundState background;
  std::shared_ptr<const CollisionOperator> op;
  std::size_t steps = 0;
  unsigned threads = 1;
  std::optional<Vector> lambda;  ///< weights for the energy monitor (unit weights if absent)

  void validate() const;
};

/// Densities in structure-of-arrays layout: f_i at node p is data[i * nodes + p].
struct LatticeField {
  Grid grid;
  std::size_t q = 0;
  std::vector<double> data;

  LatticeField() = default;
  LatticeField(Grid g, std::size_t velocities)
      : grid(g), q(velocities), data(g.nodes() * velocities, 0.0) {}

  double* slice(std::size_t i) { return data.data() + i * grid.nodes(); }
  const double* slice(std::size_t i) const { return data.data() + i * grid.nodes(); }
};

/// rho' and u' per node (same node indexing as Grid::index).
struct MacroField {
  Grid grid;
  std::vector<double> rho;
  std::array<std::vector<double>, 3> u;

  MacroField() = default;
  explicit MacroField(Grid g);
};

/// Node coordinate along an axis: i / extent.
inline double node_coordinate(std::size_t i, std::size_t extent) {
  return static_cast<double>(i) / static_cast<double>(extent);
}

/// Samples closed-form macros at the nodes.
MacroField sample_macros(const Grid& grid, const std::function<double(const Vec3&)>& rho,
                         const std::function<Vec3(const Vec3&)>& u);

/// f = R (rho', j) with j = rho0 u' + u0 rho'.
LatticeField init_equilibrium_field(const SimConfig& cfg, const MacroField& macros);

/// One collide-then-stream update; `scratch` must have the same shape and is
/// swapped with `field`.
void step(LatticeField& field, LatticeField& scratch, const SimConfig& cfg);

/// Streaming only (a permutation of each velocity slice).
void stream_only(LatticeField& field, LatticeField& scratch, const VelocitySet& vs, unsigned threads = 1);

struct Monitor {
  std::size_t step = 0;
  double energy = 0.0;
  double rho_sum = 0.0;
  Vec3 j_sum = {0.0, 0.0, 0.0};
};

/// Applies `step` cfg.steps times; monitors are recorded before the first
/// step and after each step (steps + 1 samples). Throws SimulationError on
/// the first non-finite monitor.
std::vector<Monitor> run(const SimConfig& cfg, LatticeField& field);

/// Weighted energy sum_x sum_i f_i^2 / lambda_i (compensated summation).
double weighted_energy(const LatticeField& field, const Vector& lambda);

/// Global sums of the conserved moments C f over all nodes (compensated).
Vector conserved_sums(const LatticeField& field, const CollisionOperator& op);

MacroField macro_fields(const LatticeField& field, const CollisionOperator& op, const BackgroundState& bg);

/// CSV with columns ix,iy,iz,rho,u1,u2,u3.
void write_macro_csv(std::ostream& os, const MacroField& m);

/// Little-endian binary: uint32 q, nx, ny, nz followed by q * nodes doubles
/// in the structure-of-arrays order of LatticeField.
void write_field_binary(const std::string& path, const LatticeField& field);
LatticeField read_field_binary(const std::string& path);

void write_monitor_csv(std::ostream& os, const std::vector<Monitor>& monitors);

}  // namespace lbstab
