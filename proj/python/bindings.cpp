#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "lbstab/analysis.hpp"
#include "lbstab/config.hpp"
#include "lbstab/stability.hpp"

namespace py = pybind11;
using namespace lbstab;

namespace {

BackgroundState background_from(const py::object& u0, double rho0) {
  if (py::isinstance<py::str>(u0)) return BackgroundState::from_exact(rho0, preset_background(u0.cast<std::string>()));
  BackgroundState bg;
  bg.rho0 = rho0;
  bg.u0 = u0.cast<Vec3>();
  return bg;
}

py::dict construct(const py::object& u0, const std::string& velocity_set, double tau, bool allow_unstable) {
  const BackgroundState bg = background_from(u0, 1.0);
  ConstructionOptions o;
  o.tau = tau;
  o.allow_unstable = allow_unstable;
  Construction c;
  {
    py::gil_scoped_release release;
    c = construct_partially_relative(build_velocity_set(velocity_set), bg, o);
  }
  py::dict d;
  d["feasible"] = c.feasible();
  d["kernel_dimension"] = c.kernel.cols();
  if (!c.feasible()) return d;
  const StabilityCertificate& cert = *c.certificate;
  d["lambda"] = cert.lambda;
  d["symmetrization_residual"] = cert.symmetrization_residual;
  d["idempotency_residual"] = cert.idempotency_residual;
  d["projection_rank"] = cert.projection_rank;
  d["relaxation_rates"] = cert.relaxation_rates;
  d["certified"] = cert.certified();
  d["moment_matrix"] = c.modified->entries();
  d["reduced_equilibrium"] = c.op->reduced_equilibrium;
  d["full_matrix"] = *c.op->full_matrix;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Stability-certified lattice Boltzmann collision operators";

  py::register_exception<Error>(m, "LbstabError");

  m.def("velocity_set_names", &velocity_set_names);
  m.def("preset_names", &preset_names);
  m.def(
      "preset_velocity",
      [](const std::string& name) { return BackgroundState::from_exact(1.0, preset_background(name)).u0; },
      py::arg("name"));
  m.def(
      "m1_d3q33", [] { return Matrix(build_m1_d3q33().entries()); },
      "D3Q33 raw moment matrix (33 x 33).");
  m.def(
      "equilibrium_map",
      [](const Vec3& u0, double cs2) {
        BackgroundState bg;
        bg.u0 = u0;
        bg.cs2 = cs2;
        return lee_equilibrium_map(bg).e21;
      },
      py::arg("u0"), py::arg("cs2") = 1.0 / 3.0);
  m.def("construct", &construct, py::arg("u0"), py::arg("velocity_set") = "D3Q33", py::arg("tau") = 0.5,
        py::arg("allow_unstable") = false,
        "Build and certify the operator. u0 is a preset name or a 3-sequence.");
  m.def(
      "exact_kernel_dimension",
      [](const std::string& preset) { return exact_kernel_dimension(build_m1_d3q33(), preset_background(preset)); },
      py::arg("preset"));
  m.def(
      "scan",
      [](double u01, std::size_t n, const std::string& velocity_set, unsigned threads) {
        DomainMap map;
        {
          py::gil_scoped_release release;
          map = scan_stability_domain(u01, n, velocity_set, -1.0, 1.0, threads);
        }
        Eigen::MatrixXi out(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
        for (std::size_t j = 0; j < n; ++j) {
          for (std::size_t i = 0; i < n; ++i) {
            out(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = map.at(i, j) ? 1 : 0;
          }
        }
        return py::make_tuple(map.u02, map.u03, out);
      },
      py::arg("u01"), py::arg("n") = 41, py::arg("velocity_set") = "D3Q33", py::arg("threads") = 1,
      "Feasibility map over (u02, u03) in [-1, 1]^2; rows index u03.");
  m.def(
      "convergence",
      [](int test_case, const py::object& u0, const std::vector<std::size_t>& grids, double final_time) {
        const TestCase tc = make_test_case(test_case);
        const BackgroundState bg = test_background(tc, background_from(u0, tc.rho0));
        ConvergenceReport rep;
        {
          py::gil_scoped_release release;
          rep = convergence_study(tc, bg, grids, final_time > 0.0 ? final_time : tc.final_time);
        }
        py::list rows;
        for (const ConvergenceRow& r : rep.rows) {
          rows.append(py::make_tuple(r.grid_n, r.error, r.order ? py::cast(*r.order) : py::none()));
        }
        return rows;
      },
      py::arg("test_case"), py::arg("u0"), py::arg("grids"), py::arg("final_time") = 0.0,
      "Rows of (grid_n, error, order) for test case 1, 2 or 3.");
}
