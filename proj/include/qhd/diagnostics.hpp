#pragma once

// Observables and distances evaluated on snapshots.

#include <algorithm>
#include <cmath>

#include "qhd/core.hpp"

namespace qhd {

namespace detail {

inline void require_same_grid(std::span<const double> a, std::span<const double> b,
                              const Grid1D& grid, const char* what) {
  require_length(a, grid, what);
  require_length(b, grid, what);
}

}  // namespace detail

/// sqrt of the integral of (rho - rho_ref)^2.
inline double l2_distance(std::span<const double> rho, std::span<const double> rho_ref,
                          const Grid1D& grid) {
  detail::require_same_grid(rho, rho_ref, grid, "l2_distance");
  Field d2(rho.size());
  for (std::size_t i = 0; i < rho.size(); ++i) d2[i] = (rho[i] - rho_ref[i]) * (rho[i] - rho_ref[i]);
  return std::sqrt(integrate(d2, grid));
}

/// sqrt of the integral of (rho - rho_s)^2 + v^2 + ((rho - rho_s)')^2.
inline double sobolev_distance(const HydroState& h, const StationaryState& s, const Grid1D& grid) {
  detail::require_same_grid(h.rho, s.rho_s, grid, "sobolev_distance");
  require_length(h.v, grid, "sobolev_distance");
  Field diff(grid.n());
  for (std::size_t i = 0; i < diff.size(); ++i) diff[i] = h.rho[i] - s.rho_s[i];
  const Field ddiff = derivative(diff, grid);
  Field sum(grid.n());
  for (std::size_t i = 0; i < sum.size(); ++i)
    sum[i] = diff[i] * diff[i] + h.v[i] * h.v[i] + ddiff[i] * ddiff[i];
  return std::sqrt(integrate(sum, grid));
}

/// j = rho v.
inline Field probability_current(const HydroState& h) {
  if (h.rho.size() != h.v.size()) throw ContractViolation("probability_current: length mismatch");
  Field j(h.rho.size());
  for (std::size_t i = 0; i < j.size(); ++i) j[i] = h.rho[i] * h.v[i];
  return j;
}

/// Energy density m rho v^2/2 + (hbar^2/2m) ((sqrt rho)')^2 + rho U per node.
/// The gradient term equals (hbar^2/8m) rho'^2/rho but is differentiated in
/// sqrt(rho), which stays bounded where rho is small.
inline Field energy_density(const HydroState& h, const Grid1D& grid, const Params& params) {
  require_length(h.rho, grid, "energy_density");
  require_length(h.v, grid, "energy_density");
  const Field u = evaluate_potential(params.potential, grid);
  Field r(grid.n());
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = std::sqrt(std::max(h.rho[i], 0.0));
  const Field dr = derivative(r, grid);
  const double c = params.hbar * params.hbar / (2.0 * params.m);
  Field e(grid.n());
  for (std::size_t i = 0; i < e.size(); ++i)
    e[i] = 0.5 * params.m * h.rho[i] * h.v[i] * h.v[i] + c * dr[i] * dr[i] + h.rho[i] * u[i];
  return e;
}

/// Integral of energy_density.
inline double energy_expectation(const HydroState& h, const Grid1D& grid, const Params& params) {
  return integrate(energy_density(h, grid, params), grid);
}

}  // namespace qhd
