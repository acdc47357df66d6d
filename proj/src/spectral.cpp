#include "lbstab/spectral.hpp"

#include <cmath>
#include <complex>
#include <numbers>

#include "lbstab/parallel.hpp"

namespace lbstab {

namespace {

using cplx = std::complex<double>;

// Unnormalized forward DFT of samples g(i/n), i < n.
std::vector<cplx> forward_dft(const std::function<double(double)>& g, std::size_t n) {
  std::vector<double> samples(n);
  for (std::size_t i = 0; i < n; ++i) samples[i] = g(node_coordinate(i, n));
  std::vector<cplx> out(n);
  const double base = -2.0 * std::numbers::pi / static_cast<double>(n);
  for (std::size_t k = 0; k < n; ++k) {
    cplx s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      s += samples[i] * std::polar(1.0, base * static_cast<double>((k * i) % n));
    }
    out[k] = s;
  }
  return out;
}

// In-place inverse DFT (no normalization) along one axis of an n^3 block of
// 4-component values.
void inverse_axis(std::vector<std::array<cplx, 4>>& data, std::size_t n, int axis, const std::vector<cplx>& twiddle) {
  std::vector<std::array<cplx, 4>> line(n);
  const std::size_t stride = axis == 0 ? 1 : axis == 1 ? n : n * n;
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = 0; b < n; ++b) {
      std::size_t base = 0;
      if (axis == 0) base = n * (a + n * b);
      if (axis == 1) base = a + n * n * b;
      if (axis == 2) base = a + n * b;
      for (std::size_t x = 0; x < n; ++x) {
        std::array<cplx, 4> s{};
        for (std::size_t k = 0; k < n; ++k) {
          const cplx w = twiddle[(k * x) % n];
          const auto& v = data[base + k * stride];
          for (int c = 0; c < 4; ++c) s[c] += v[c] * w;
        }
        line[x] = s;
      }
      for (std::size_t x = 0; x < n; ++x) data[base + x * stride] = line[x];
    }
  }
}

}  // namespace

SpectralResult spectral_reference(const CollisionOperator& op, const BackgroundState& bg,
                                  const std::vector<SeparableTerm>& rho, std::size_t n_ref, std::size_t steps,
                                  const std::vector<std::size_t>& targets, const SpectralOptions& options) {
  if (n_ref == 0) throw ConfigError("spectral", "reference extent must be positive");
  if (op.gamma() != 4) throw InputError("spectral", "expects four conserved moments");
  for (std::size_t t : targets) {
    if (t == 0 || n_ref % t != 0) {
      throw ConfigError("spectral", "target extent " + std::to_string(t) + " does not divide " + std::to_string(n_ref));
    }
  }
  const std::size_t q = op.size();
  const auto qi = static_cast<Eigen::Index>(q);

  // 1D coefficients per term and axis.
  std::vector<std::array<std::vector<cplx>, 3>> coeffs(rho.size());
  for (std::size_t t = 0; t < rho.size(); ++t) {
    for (int d = 0; d < 3; ++d) coeffs[t][d] = forward_dft(rho[t].factors[d], n_ref);
  }
  const auto amplitude = [&](const std::array<std::size_t, 3>& k) {
    cplx amp = 0.0;
    for (std::size_t t = 0; t < rho.size(); ++t) {
      amp += rho[t].coefficient * coeffs[t][0][k[0]] * coeffs[t][1][k[1]] * coeffs[t][2][k[2]];
    }
    return amp;
  };
  // Upper bound on any mode amplitude; the threshold is relative to it.
  double largest = 0.0;
  for (std::size_t t = 0; t < rho.size(); ++t) {
    double b = std::abs(rho[t].coefficient);
    for (int d = 0; d < 3; ++d) {
      double mx = 0.0;
      for (const cplx& v : coeffs[t][d]) mx = std::max(mx, std::abs(v));
      b *= mx;
    }
    largest += b;
  }
  const double cut = options.threshold > 0.0 ? options.threshold * largest : -1.0;

  SpectralResult out;
  out.modes_total = n_ref * n_ref * n_ref;
  const double volume = std::pow(static_cast<double>(n_ref), 3);

  // Equilibrium direction for u' = 0: f = rho' R (1, u0).
  Vector m0(4);
  m0 << 1.0, bg.u0[0], bg.u0[1], bg.u0[2];
  const Eigen::VectorXcd w = (op.reduced_equilibrium * m0).cast<cplx>();
  const Eigen::MatrixXcd c = op.conserved_rows.cast<cplx>();
  const Eigen::MatrixXcd r = op.reduced_equilibrium.cast<cplx>();
  const double omega = 1.0 / op.tau;
  const double base = -2.0 * std::numbers::pi / static_cast<double>(n_ref);

  struct Mode {
    std::array<std::size_t, 3> k;
    std::array<cplx, 4> moments;
  };
  std::vector<std::vector<Mode>> kept(n_ref);
  std::vector<double> omitted(n_ref, 0.0);
  parallel_for(n_ref, options.threads, [&](std::size_t kz) {
    Eigen::VectorXcd f(qi);
    Eigen::VectorXcd phase(qi);
    for (std::size_t ky = 0; ky < n_ref; ++ky) {
      for (std::size_t kx = 0; kx < n_ref; ++kx) {
        const std::array<std::size_t, 3> k = {kx, ky, kz};
        const cplx amp = amplitude(k);
        if (std::abs(amp) <= cut) {
          omitted[kz] += std::abs(amp);
          continue;
        }
        for (std::size_t i = 0; i < q; ++i) {
          const auto& cv = op.velocities[i];
          long long dot = 0;
          for (int d = 0; d < 3; ++d) dot += static_cast<long long>(k[d]) * cv[d];
          long long red = dot % static_cast<long long>(n_ref);
          if (red < 0) red += static_cast<long long>(n_ref);
          phase(static_cast<Eigen::Index>(i)) = std::polar(1.0, base * static_cast<double>(red));
        }
        f = amp * w;
        for (std::size_t s = 0; s < steps; ++s) {
          const Eigen::Vector4cd m = c * f;
          f = (f + omega * (r * m - f)).cwiseProduct(phase);
        }
        const Eigen::Vector4cd m = c * f;
        kept[kz].push_back({k, {m(0), m(1), m(2), m(3)}});
      }
    }
  });
  for (std::size_t kz = 0; kz < n_ref; ++kz) {
    out.modes_kept += kept[kz].size();
    out.omitted_amplitude += omitted[kz] / volume;
  }

  for (std::size_t ns : targets) {
    std::vector<std::array<cplx, 4>> folded(ns * ns * ns);
    for (const auto& plane : kept) {
      for (const Mode& mode : plane) {
        const std::size_t p = mode.k[0] % ns + ns * (mode.k[1] % ns + ns * (mode.k[2] % ns));
        for (int a = 0; a < 4; ++a) folded[p][a] += mode.moments[a];
      }
    }
    std::vector<cplx> twiddle(ns);
    for (std::size_t j = 0; j < ns; ++j) {
      twiddle[j] = std::polar(1.0, 2.0 * std::numbers::pi * static_cast<double>(j) / static_cast<double>(ns));
    }
    for (int axis = 0; axis < 3; ++axis) inverse_axis(folded, ns, axis, twiddle);

    MacroField mf(Grid::cube(ns));
    for (std::size_t p = 0; p < folded.size(); ++p) {
      const double rho_v = folded[p][0].real() / volume;
      const Vec3 j = {folded[p][1].real() / volume, folded[p][2].real() / volume, folded[p][3].real() / volume};
      const Macroscopic mac = macro_fields(rho_v, j, bg);
      mf.rho[p] = mac.rho;
      for (int d = 0; d < 3; ++d) mf.u[d][p] = mac.u[d];
    }
    out.fields.push_back(std::move(mf));
  }
  return out;
}

}  // namespace lbstab
