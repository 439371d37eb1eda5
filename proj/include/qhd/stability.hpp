#pragma once

// Liapunov functional of a stationary state, its rate along the damped flow,
// the dissipation inequality and the second variation.
//
//   L[rho, v] = integral of  m rho v^2/2 + (hbar^2/8m) rho'^2/rho + rho (U - E_s)
//   dL/dt     = integral of  rho v f_d(v)           (surface terms dropped)
//
// Surface terms vanish only if rho decays at the domain edges, so both
// functionals warn when the edge density exceeds kBoundaryDecayTolerance.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <string>

#include "qhd/core.hpp"
#include "qhd/diagnostics.hpp"
#include "qhd/hydro_solver.hpp"
#include "qhd/stationary.hpp"

namespace qhd {

namespace detail {

inline void warn_if_not_decayed(std::span<const double> rho, const char* what, Warnings* warnings) {
  if (!warnings) return;
  const double edge = std::max(rho.front(), rho.back());
  if (edge >= kBoundaryDecayTolerance)
    warnings->push_back(std::string(what) + ": density at the domain edge is " +
                        std::to_string(edge) + "; dropped surface terms may be significant");
}

}  // namespace detail

/// energy_expectation(h) - E_s * integral(rho).
inline double liapunov(const HydroState& h, const StationaryState& s, const Grid1D& grid,
                       const Params& params, Warnings* warnings = nullptr) {
  check_state(h, grid, "liapunov");
  if (s.rho_s.size() != grid.n())
    throw ContractViolation("liapunov: stationary state does not match the grid");
  detail::warn_if_not_decayed(h.rho, "liapunov", warnings);
  return energy_expectation(h, grid, params) - s.E_s * integrate(h.rho, grid);
}

/// Integral of rho v f_d(v); -k integral(rho v^2) for linear damping.
inline double liapunov_rate(const HydroState& h, const Grid1D& grid, const Params& params,
                            const DampingSpec& damping, Warnings* warnings = nullptr) {
  check_state(h, grid, "liapunov_rate");
  params.validate();
  detail::warn_if_not_decayed(h.rho, "liapunov_rate", warnings);
  Field p(grid.n());
  for (std::size_t i = 0; i < p.size(); ++i) p[i] = h.rho[i] * h.v[i] * damping.force(h.v[i]);
  return integrate(p, grid);
}

struct DissipationCheck {
  double value = 0.0;  ///< integral of rho v f_d(v)
  bool pass = false;   ///< value <= tolerance
  /// value is zero within tolerance although rho v does not vanish: the
  /// inequality holds, but not strictly.
  bool degenerate = false;
};

inline DissipationCheck dissipation_check(const HydroState& h, const Grid1D& grid,
                                          const DampingSpec& damping) {
  check_state(h, grid, "dissipation_check");
  Field p(grid.n()), a(grid.n());
  double flow = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double f = damping.force(h.v[i]);
    p[i] = h.rho[i] * h.v[i] * f;
    a[i] = std::abs(p[i]);
    flow = std::max(flow, std::abs(h.rho[i] * h.v[i]));
  }
  DissipationCheck out;
  out.value = integrate(p, grid);
  const double tol = 1e-12 * std::max(1.0, integrate(a, grid));
  out.pass = out.value <= tol;
  out.degenerate = std::abs(out.value) <= tol && flow > 1e-12;
  return out;
}

/// Principal minors of the second-variation kernel, per node.
struct SecondVariationMinors {
  Field delta1;  ///< m rho
  Field delta2;  ///< m^2 [ (hbar^2/m^2) (rho'/2rho)^2 - v^2 ]
  Field delta3;  ///< -m hbar^2 v^2 / (4 rho)
};

/// With hbar = m = 1: delta1 = rho, delta2 = (rho'/2rho)^2 - v^2, delta3 = -v^2/(4 rho).
/// rho is clamped below by rho_floor in every denominator.
inline SecondVariationMinors second_variation_minors(const HydroState& h, const Grid1D& grid,
                                                     const Params& params = {},
                                                     double rho_floor = kDefaultRhoFloor) {
  check_state(h, grid, "second_variation_minors");
  const double m = params.m;
  const double c = params.hbar * params.hbar / (4.0 * m);
  // ln(rho)' = rho'/rho is better conditioned in the tails than the quotient
  const Field g = derivative(log_density(h.rho, grid, rho_floor).log_rho, grid);
  SecondVariationMinors out;
  out.delta1.resize(grid.n());
  out.delta2.resize(grid.n());
  out.delta3.resize(grid.n());
  for (std::size_t i = 0; i < grid.n(); ++i) {
    const double rho = std::max(h.rho[i], rho_floor);
    const double v = h.v[i];
    out.delta1[i] = m * h.rho[i];
    out.delta2[i] = m * (c * g[i] * g[i] - m * v * v);
    out.delta3[i] = -m * m * c * v * v / rho;
  }
  return out;
}

/// A perturbation (delta rho, delta v) of a hydrodynamic state.
struct Perturbation {
  Field drho;
  Field dv;
};

/// Sobolev-type squared size: integral of dv^2 + drho^2 + drho'^2.
inline double perturbation_norm2(const Perturbation& p, const Grid1D& grid) {
  require_length(p.drho, grid, "perturbation_norm2");
  require_length(p.dv, grid, "perturbation_norm2");
  const Field d = derivative(p.drho, grid);
  Field s(grid.n());
  for (std::size_t i = 0; i < s.size(); ++i)
    s[i] = p.dv[i] * p.dv[i] + p.drho[i] * p.drho[i] + d[i] * d[i];
  return integrate(s, grid);
}

namespace detail {

inline void require_mass_preserving(const Perturbation& p, const Grid1D& grid) {
  require_length(p.drho, grid, "second_variation_form");
  require_length(p.dv, grid, "second_variation_form");
  Field a(grid.n());
  for (std::size_t i = 0; i < a.size(); ++i) a[i] = std::abs(p.drho[i]);
  const double total = integrate(p.drho, grid);
  if (std::abs(total) > 1e-10 * std::max(1.0, integrate(a, grid)))
    throw ContractViolation("second_variation_form: delta rho must integrate to zero, got " +
                            std::to_string(total));
}

}  // namespace detail

/// Bilinear second-variation form
///
///   integral of  w_a^T K w_b,   w = (dv, drho, drho'),
///   K = [[m rho, m v, 0], [m v, c rho'^2/rho^3, -c rho'/rho^2], [0, -c rho'/rho^2, c/rho]]
///
/// with c = hbar^2/(4m). The lower block is the rank-one matrix (c/rho) g g^T
/// with g = (-rho'/rho, 1), so it is evaluated as (c/rho)(g.w_a)(g.w_b): the
/// same value, exactly symmetric in a and b, and never negative for a = b at v = 0.
inline double second_variation_form(const HydroState& h, const Grid1D& grid,
                                    const Perturbation& a, const Perturbation& b,
                                    const Params& params = {},
                                    double rho_floor = kDefaultRhoFloor) {
  check_state(h, grid, "second_variation_form");
  detail::require_mass_preserving(a, grid);
  detail::require_mass_preserving(b, grid);
  const double m = params.m;
  const double c = params.hbar * params.hbar / (4.0 * m);
  const Field g = derivative(log_density(h.rho, grid, rho_floor).log_rho, grid);
  const Field da = derivative(a.drho, grid);
  const Field db = derivative(b.drho, grid);
  Field q(grid.n());
  for (std::size_t i = 0; i < q.size(); ++i) {
    const double rho = std::max(h.rho[i], rho_floor);
    const double va = a.dv[i], vb = b.dv[i];
    const double ra = a.drho[i], rb = b.drho[i];
    const double kinetic = m * h.rho[i] * (va * vb) + m * h.v[i] * (va * rb + ra * vb);
    const double ga = da[i] - g[i] * ra;
    const double gb = db[i] - g[i] * rb;
    q[i] = kinetic + c / rho * (ga * gb);
  }
  return integrate(q, grid);
}

struct MarginalWitness {
  Perturbation perturbation;
  double form = 0.0;   ///< second_variation_form(p, p)
  double norm2 = 0.0;  ///< perturbation_norm2(p)
  double ratio() const { return form / norm2; }
};

/// Samples velocity bumps (delta rho = 0) at random positions and widths and
/// returns the one with the smallest form/norm ratio. A bump placed where rho is
/// negligible costs almost nothing, which is how a small ratio arises; the
/// result is evidence of marginality, not a proof.
inline MarginalWitness find_marginal_witness(const HydroState& h, const Grid1D& grid,
                                             std::size_t samples = 200,
                                             std::uint64_t seed = 20260101,
                                             const Params& params = {}) {
  if (samples == 0) throw ContractViolation("find_marginal_witness: need at least one sample");
  std::mt19937_64 rng(seed);
  const double span = grid.x_max() - grid.x_min();
  std::uniform_real_distribution<double> centre(grid.x_min(), grid.x_max());
  std::uniform_real_distribution<double> width(2.0 * grid.dx(), 0.1 * span);
  std::optional<MarginalWitness> best;
  for (std::size_t s = 0; s < samples; ++s) {
    const double x0 = centre(rng);
    const double w = width(rng);
    Perturbation p;
    p.drho.assign(grid.n(), 0.0);
    p.dv = grid.sample([&](double x) { return std::exp(-0.5 * (x - x0) * (x - x0) / (w * w)); });
    MarginalWitness cand;
    cand.norm2 = perturbation_norm2(p, grid);
    if (!(cand.norm2 > 0.0)) continue;
    cand.form = second_variation_form(h, grid, p, p, params);
    cand.perturbation = std::move(p);
    if (!best || cand.ratio() < best->ratio()) best = std::move(cand);
  }
  if (!best) throw SolverFailure("find_marginal_witness: no admissible sample");
  return *best;
}

}  // namespace qhd
