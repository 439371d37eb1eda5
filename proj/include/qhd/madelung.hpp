#pragma once

// Conversions between psi = R exp(iS) and the hydrodynamic fields
// (rho = R^2, v = (hbar/m) dS/dx), plus the quantum potential and the
// quantum pressure that generates the same force density.
//
// In one dimension every velocity field is a gradient, so the zero-vorticity
// constraint of the Madelung fluid holds identically.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>

#include "qhd/core.hpp"

namespace qhd {

enum class PressureVariant {
  P1,  ///< -(hbar^2/4m) (rho'' - rho'^2/rho), differentiated in rho
  P2,  ///< -(hbar^2/4m) rho (ln rho)'', differentiated in ln rho
};

/// Unwrapped phase of psi. Nodes with |psi|^2 < rho_floor are skipped while
/// unwrapping and then take the value of the nearest node that was kept.
/// Returns nullopt when no node is above the floor.
inline std::optional<Field> unwrap_phase(std::span<const Complex> psi,
                                         double rho_floor = kDefaultRhoFloor) {
  constexpr double pi = std::numbers::pi;
  const std::size_t n = psi.size();
  Field s(n, 0.0);
  std::vector<char> valid(n, 0);
  bool any = false;
  double prev_arg = 0.0;
  double prev_s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (std::norm(psi[i]) < rho_floor) continue;
    valid[i] = 1;
    const double a = std::arg(psi[i]);
    if (!any) {
      s[i] = a;
      any = true;
    } else {
      double jump = a - prev_arg;  // both in [-pi, pi], so one fold suffices
      if (jump > pi) jump -= 2.0 * pi;
      else if (jump < -pi) jump += 2.0 * pi;
      s[i] = prev_s + jump;
    }
    prev_arg = a;
    prev_s = s[i];
  }
  if (!any) return std::nullopt;

  // Fill skipped nodes from the nearest kept node (ties go left): a forward pass
  // records the distance to the last kept node, a backward pass takes the next
  // kept node where it is strictly closer.
  std::vector<std::size_t> gap(n, 0);
  std::ptrdiff_t last = -1;
  for (std::size_t i = 0; i < n; ++i) {
    if (valid[i]) {
      last = static_cast<std::ptrdiff_t>(i);
    } else if (last >= 0) {
      s[i] = s[static_cast<std::size_t>(last)];
      gap[i] = i - static_cast<std::size_t>(last);
    } else {
      gap[i] = n;
    }
  }
  last = -1;
  for (std::size_t i = n; i-- > 0;) {
    if (valid[i]) {
      last = static_cast<std::ptrdiff_t>(i);
    } else if (last >= 0 && static_cast<std::size_t>(last) - i < gap[i]) {
      s[i] = s[static_cast<std::size_t>(last)];
    }
  }
  return s;
}

inline HydroState to_hydro(const WaveState& w, const Grid1D& grid, const Params& params,
                           double rho_floor = kDefaultRhoFloor) {
  if (w.psi.size() != grid.n()) throw ContractViolation("to_hydro: psi length != grid size");
  HydroState h;
  h.t = w.t;
  h.rho.resize(grid.n());
  double total = 0.0;
  for (std::size_t i = 0; i < grid.n(); ++i) {
    h.rho[i] = std::norm(w.psi[i]);
    total += h.rho[i];
  }
  if (!(total > 0.0)) throw DegenerateState("to_hydro: wavefunction vanishes identically");

  auto phase = unwrap_phase(w.psi, rho_floor);
  if (!phase) {
    h.v.assign(grid.n(), 0.0);  // everything below the floor: no defined flow
    return h;
  }
  h.v = derivative(*phase, grid);
  const double scale = params.hbar / params.m;
  for (std::size_t i = 0; i < grid.n(); ++i) h.v[i] = h.rho[i] < rho_floor ? 0.0 : scale * h.v[i];
  return h;
}

/// Velocity potential S with S(x_min) = 0 whose central-difference derivative
/// reproduces (m/hbar) v exactly at every node but the last one.
inline Field phase_from_velocity(std::span<const double> v, const Grid1D& grid,
                                 const Params& params) {
  require_length(v, grid, "phase_from_velocity");
  const std::size_t n = grid.n();
  const double c = params.m / params.hbar;
  const double dx = grid.dx();
  Field s(n);
  s[0] = 0.0;
  s[1] = 0.5 * dx * c * (v[0] + v[1]);
  for (std::size_t i = 1; i + 1 < n; ++i) s[i + 1] = s[i - 1] + 2.0 * dx * c * v[i];
  return s;
}

inline WaveState to_wavefn(const HydroState& h, const Grid1D& grid, const Params& params) {
  check_state(h, grid, "to_wavefn");
  const Field s = phase_from_velocity(h.v, grid, params);
  WaveState w;
  w.t = h.t;
  w.psi.resize(grid.n());
  for (std::size_t i = 0; i < grid.n(); ++i) w.psi[i] = std::polar(std::sqrt(h.rho[i]), s[i]);
  return w;
}

/// ln(max(rho, floor)) and its first two derivatives.
struct LogDensity {
  Field log_rho;
  Field d1;
  Field d2;
};

inline LogDensity log_density(std::span<const double> rho, const Grid1D& grid,
                              double rho_floor) {
  require_length(rho, grid, "log_density");
  LogDensity out;
  out.log_rho.resize(rho.size());
  for (std::size_t i = 0; i < rho.size(); ++i)
    out.log_rho[i] = std::log(std::max(rho[i], rho_floor));
  out.d1 = derivative(out.log_rho, grid);
  out.d2 = second_derivative(out.log_rho, grid);
  return out;
}

/// U_q = -(hbar^2/2m) R''/R with R = sqrt(rho).
///
/// R''/R is evaluated through ln R as (ln R)'' + ((ln R)')^2, which stays
/// well conditioned in the exponentially small tails and is exact for
/// Gaussian densities.
inline Field quantum_potential(std::span<const double> rho, const Grid1D& grid,
                               const Params& params, double rho_floor = kDefaultRhoFloor) {
  const LogDensity ld = log_density(rho, grid, rho_floor);
  const double c = -params.hbar * params.hbar / (2.0 * params.m);
  Field uq(rho.size());
  for (std::size_t i = 0; i < rho.size(); ++i)
    uq[i] = c * (0.5 * ld.d2[i] + 0.25 * ld.d1[i] * ld.d1[i]);
  return uq;
}

/// Scalar quantum pressure P with dP/dx = rho dU_q/dx.
///
/// Both variants are the same analytic field in one dimension; they differ in
/// which quantity gets differentiated and therefore in discretization error.
inline Field quantum_pressure(std::span<const double> rho, const Grid1D& grid,
                              const Params& params, PressureVariant variant,
                              double rho_floor = kDefaultRhoFloor) {
  require_length(rho, grid, "quantum_pressure");
  const double c = -params.hbar * params.hbar / (4.0 * params.m);
  Field p(rho.size());
  if (variant == PressureVariant::P1) {
    const Field d1 = derivative(rho, grid);
    const Field d2 = second_derivative(rho, grid);
    for (std::size_t i = 0; i < rho.size(); ++i)
      p[i] = c * (d2[i] - d1[i] * d1[i] / std::max(rho[i], rho_floor));
  } else {
    const LogDensity ld = log_density(rho, grid, rho_floor);
    for (std::size_t i = 0; i < rho.size(); ++i) p[i] = c * rho[i] * ld.d2[i];
  }
  return p;
}

}  // namespace qhd
