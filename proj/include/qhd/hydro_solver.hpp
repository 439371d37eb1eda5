#pragma once

// Time integration of the one-dimensional dissipative Madelung system
//
//   d(rho)/dt = -d(rho v)/dx
//   m dv/dt   = -d/dx [ m v^2/2 + U_q(rho) + U ] + f_d(v),   f_d = -k v
//
// by a staggered (kick-transport-kick) leapfrog:
//
//   1. half kick:  v advanced by dt/2 under -dQ/dx with Q = U_q + U and the
//                  damping force; for linear damping the frozen-force ODE
//                  m v' = -Q' - k v is integrated exactly (exponential factor).
//   2. transport:  rho and v advanced by dt under the flux form of the mass
//                  balance and the Bernoulli term -d(v^2/2)/dx (midpoint rule).
//   3. half kick:  with Q evaluated on the new density.
//
// Boundary velocities are extrapolated linearly from the two nearest interior
// nodes after every velocity update; boundary densities are continued from the
// interior in ln(rho), consistent with an exponentially decaying tail.

#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "qhd/core.hpp"
#include "qhd/madelung.hpp"

namespace qhd {

/// Damping force f_d(v) acting on the fluid element (force, not acceleration).
class DampingSpec {
public:
  /// f_d = -k v.
  static DampingSpec linear(double k) {
    if (!(k >= 0.0)) throw ContractViolation("linear damping requires k >= 0");
    DampingSpec d;
    d.name_ = "linear";
    d.rate_ = k;
    return d;
  }

  /// Any per-node force law; integrated explicitly by the solver.
  static DampingSpec custom(std::string name, std::function<double(double)> force) {
    DampingSpec d;
    d.name_ = std::move(name);
    d.force_ = std::move(force);
    return d;
  }

  bool is_linear() const noexcept { return !force_; }
  double rate() const noexcept { return rate_; }
  const std::string& name() const noexcept { return name_; }

  double force(double v) const { return force_ ? force_(v) : -rate_ * v; }

private:
  DampingSpec() = default;
  std::string name_;
  double rate_ = 0.0;
  std::function<double(double)> force_;
};

enum class BoundaryRule { ExtrapolateVelocity };

struct SolverConfig {
  /// Time step; stable_dt() when unset.
  std::optional<double> dt;
  double rho_floor = kDefaultRhoFloor;
  BoundaryRule boundary = BoundaryRule::ExtrapolateVelocity;
  /// Damping law; linear with Params::k when unset.
  std::optional<DampingSpec> damping;
  /// Mass drift tolerated after clamping negative densities before renormalizing.
  double tol_norm = kDefaultNormTolerance;
  /// Permit dt above stable_dt().
  bool allow_large_dt = false;
};

/// Advisory step bound 0.1 dx^2 m/hbar, reduced by 1/(1 + k dt0/m) for strong damping.
inline double stable_dt(const Grid1D& grid, const Params& params) {
  constexpr double c = 0.1;
  const double dt0 = c * grid.dx() * grid.dx() * params.m / params.hbar;
  return dt0 / (1.0 + params.k * dt0 / params.m);
}

inline DampingSpec resolve_damping(const SolverConfig& cfg, const Params& params) {
  return cfg.damping ? *cfg.damping : DampingSpec::linear(params.k);
}

inline double resolve_dt(const SolverConfig& cfg, const Grid1D& grid, const Params& params) {
  const double bound = stable_dt(grid, params);
  if (!cfg.dt) return bound;
  const double dt = *cfg.dt;
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ContractViolation("dt must be positive");
  if (dt > bound * (1.0 + 1e-12) && !cfg.allow_large_dt)
    throw ContractViolation("dt = " + std::to_string(dt) + " exceeds stable_dt = " +
                            std::to_string(bound) + " (set allow_large_dt to override)");
  return dt;
}

/// Reusable integrator for one trajectory. Holds scratch buffers and the
/// potential field evaluated on the most recent density, so consecutive steps
/// share one quantum-potential evaluation.
///
/// Nodes whose density is below rho_floor, and the two edge nodes of the
/// domain, are treated as vacuum: there ln(rho) is continued quadratically
/// (with non-positive curvature) and v linearly from the nearest fluid node.
/// The Madelung variables cannot follow relative perturbations of an
/// exponentially small tail, which grow like exp(|d ln rho/dx| k t / 2), so
/// the tail is slaved to the fluid instead of being integrated.
class HydroStepper {
public:
  HydroStepper(const Grid1D& grid, const Params& params, const SolverConfig& cfg)
      : grid_(grid), params_(params), cfg_(cfg), damping_(resolve_damping(cfg, params)),
        u_(evaluate_potential(params.potential, grid)) {
    params.validate();
    if (!(cfg.rho_floor > 0.0)) throw ContractViolation("rho_floor must be > 0");
    const std::size_t n = grid.n();
    for (auto* buf : {&q_, &dq_, &log_rho_, &l1_, &l2_, &flux_, &dflux_, &kin_, &dkin_, &rho_mid_,
                      &v_mid_})
      buf->assign(n, 0.0);
    source_.assign(n, 0);
    dist_.assign(n, 0);
  }

  const Grid1D& grid() const noexcept { return grid_; }
  const DampingSpec& damping() const noexcept { return damping_; }
  std::size_t clamp_events() const noexcept { return clamp_events_; }
  std::size_t renormalizations() const noexcept { return renormalizations_; }

  /// Advances h in place by dt.
  void step(HydroState& h, double dt) {
    const std::size_t n = grid_.n();
    if (h.rho.size() != n || h.v.size() != n)
      throw ContractViolation("step: state does not match grid");
    const double mass_before = integrate(h.rho, grid_);

    if (!cached_rho_ || *cached_rho_ != h.rho || *cached_v_ != h.v) {
      close_tails(h.rho, h.v);
      update_potential();
    }
    kick(h.v, 0.5 * dt);
    transport(h, dt);
    h.t += dt;
    // before close_tails, which would take a NaN node for vacuum and overwrite it
    check_finite(h);
    clamp_negative(h.rho, mass_before);
    close_tails(h.rho, h.v);
    update_potential();
    kick(h.v, 0.5 * dt);
    check_finite(h);
    cached_rho_ = h.rho;
    cached_v_ = h.v;
  }

private:
  /// Marks vacuum nodes, assigns each one its nearest fluid node and overwrites
  /// rho, v and ln(rho) there. Fills log_rho_ for every node.
  void close_tails(Field& rho, Field& v) {
    const std::size_t n = rho.size();
    const double floor = cfg_.rho_floor;
    auto fluid = [&](std::size_t i) { return i > 0 && i + 1 < n && rho[i] >= floor; };

    std::ptrdiff_t last = -1;
    for (std::size_t i = 0; i < n; ++i) {
      if (fluid(i)) {
        last = static_cast<std::ptrdiff_t>(i);
        source_[i] = last;
        dist_[i] = 0;
      } else {
        source_[i] = last;
        dist_[i] = last < 0 ? std::numeric_limits<std::ptrdiff_t>::max()
                            : static_cast<std::ptrdiff_t>(i) - last;
      }
    }
    if (last < 0) throw DegenerateState("hydro step: density below the floor everywhere");
    last = -1;
    for (std::size_t i = n; i-- > 0;) {
      if (fluid(i)) {
        last = static_cast<std::ptrdiff_t>(i);
        continue;
      }
      if (last >= 0 && last - static_cast<std::ptrdiff_t>(i) < dist_[i]) {
        source_[i] = last;
        dist_[i] = static_cast<std::ptrdiff_t>(i) - last;  // negative: source lies right
      }
    }

    for (std::size_t i = 0; i < n; ++i)
      if (dist_[i] == 0) log_rho_[i] = std::log(rho[i]);
    for (std::size_t i = 0; i < n; ++i) {
      if (dist_[i] == 0) continue;
      const std::ptrdiff_t e = source_[i];
      const std::ptrdiff_t dir = dist_[i] > 0 ? 1 : -1;  // outward direction from e
      const double d = static_cast<double>(dist_[i] * dir);
      const auto at = [&](std::ptrdiff_t j) { return static_cast<std::size_t>(j); };
      const bool has1 = e - dir >= 0 && e - dir < static_cast<std::ptrdiff_t>(n) &&
                        dist_[at(e - dir)] == 0;
      const bool has2 = has1 && e - 2 * dir >= 0 && e - 2 * dir < static_cast<std::ptrdiff_t>(n) &&
                        dist_[at(e - 2 * dir)] == 0;
      const double le = log_rho_[at(e)];
      double slope = 0.0, curv = 0.0, vslope = 0.0;
      if (has1) {
        slope = std::min(0.0, le - log_rho_[at(e - dir)]);
        vslope = v[at(e)] - v[at(e - dir)];
      }
      if (has2) curv = std::min(0.0, le - 2.0 * log_rho_[at(e - dir)] + log_rho_[at(e - 2 * dir)]);
      log_rho_[i] = le + slope * d + 0.5 * curv * d * (d + 1.0);
      rho[i] = std::exp(log_rho_[i]);
      v[i] = v[at(e)] + vslope * d;
    }
  }

  void extrapolate_velocity(Field& v) const {
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (dist_[i] == 0) continue;
      const std::ptrdiff_t e = source_[i];
      const std::ptrdiff_t dir = dist_[i] > 0 ? 1 : -1;
      const auto inner = e - dir;
      const bool has1 = inner >= 0 && inner < static_cast<std::ptrdiff_t>(v.size()) &&
                        dist_[static_cast<std::size_t>(inner)] == 0;
      const double ve = v[static_cast<std::size_t>(e)];
      const double slope = has1 ? ve - v[static_cast<std::size_t>(inner)] : 0.0;
      v[i] = ve + slope * static_cast<double>(dist_[i] * dir);
    }
  }

  void update_potential() {
    const std::size_t n = log_rho_.size();
    const double dx = grid_.dx();
    detail::derivative_into(log_rho_, dx, l1_);
    detail::second_derivative_into(log_rho_, dx, l2_);
    const double c = -params_.hbar * params_.hbar / (2.0 * params_.m);
    for (std::size_t i = 0; i < n; ++i)
      q_[i] = c * (0.5 * l2_[i] + 0.25 * l1_[i] * l1_[i]) + u_[i];
    detail::derivative_into(q_, dx, dq_);
  }

  void kick(Field& v, double tau) {
    const double inv_m = 1.0 / params_.m;
    if (damping_.is_linear()) {
      const double gamma = damping_.rate() * inv_m;
      const double decay = std::exp(-gamma * tau);
      // (1 - e^{-gamma tau}) / gamma, continuous at gamma = 0
      const double span = gamma > 0.0 ? -std::expm1(-gamma * tau) / gamma : tau;
      for (std::size_t i = 0; i < v.size(); ++i) v[i] = v[i] * decay - span * dq_[i] * inv_m;
    } else {
      for (std::size_t i = 0; i < v.size(); ++i)
        v[i] += tau * inv_m * (-dq_[i] + damping_.force(v[i]));
    }
    extrapolate_velocity(v);
  }

  void transport(HydroState& h, double dt) {
    const std::size_t n = grid_.n();
    const double dx = grid_.dx();
    auto rates = [&](const Field& rho, const Field& v) {
      for (std::size_t i = 0; i < n; ++i) {
        flux_[i] = rho[i] * v[i];
        kin_[i] = 0.5 * v[i] * v[i];
      }
      detail::derivative_into(flux_, dx, dflux_);
      detail::derivative_into(kin_, dx, dkin_);
    };
    rates(h.rho, h.v);
    for (std::size_t i = 0; i < n; ++i) {
      rho_mid_[i] = h.rho[i] - 0.5 * dt * dflux_[i];
      v_mid_[i] = h.v[i] - 0.5 * dt * dkin_[i];
    }
    extrapolate_velocity(v_mid_);
    rates(rho_mid_, v_mid_);
    for (std::size_t i = 0; i < n; ++i) {
      h.rho[i] -= dt * dflux_[i];
      h.v[i] -= dt * dkin_[i];
    }
  }

  void clamp_negative(Field& rho, double mass_before) {
    bool clamped = false;
    for (double& r : rho)
      if (r < 0.0) {
        r = cfg_.rho_floor;
        clamped = true;
      }
    if (!clamped) return;
    ++clamp_events_;
    const double mass = integrate(rho, grid_);
    if (std::abs(mass - mass_before) > cfg_.tol_norm && mass > 0.0) {
      const double s = mass_before / mass;
      for (double& r : rho) r *= s;
      ++renormalizations_;
    }
  }

  static void check_finite(const HydroState& h) {
    for (std::size_t i = 0; i < h.rho.size(); ++i) {
      if (!std::isfinite(h.rho[i])) throw DivergenceError("rho", i, h.t);
      if (!std::isfinite(h.v[i])) throw DivergenceError("v", i, h.t);
    }
  }

  Grid1D grid_;
  Params params_;
  SolverConfig cfg_;
  DampingSpec damping_;
  Field u_;
  Field q_, dq_, log_rho_, l1_, l2_, flux_, dflux_, kin_, dkin_, rho_mid_, v_mid_;
  std::vector<std::ptrdiff_t> source_;  // nearest fluid node
  std::vector<std::ptrdiff_t> dist_;    // signed distance to it, 0 for fluid nodes
  std::optional<Field> cached_rho_, cached_v_;
  std::size_t clamp_events_ = 0;
  std::size_t renormalizations_ = 0;
};

/// One time step of length cfg.dt (or stable_dt).
inline HydroState step(const HydroState& h, const Grid1D& grid, const Params& params,
                       const SolverConfig& cfg) {
  check_state(h, grid, "step");
  HydroStepper stepper(grid, params, cfg);
  HydroState out = h;
  stepper.step(out, resolve_dt(cfg, grid, params));
  return out;
}

struct Trajectory {
  std::vector<HydroState> snapshots;
  std::size_t steps = 0;
  double dt = 0.0;  ///< step actually used: t_end divided into whole steps
  Warnings warnings;
};

using SnapshotObserver = std::function<void(const HydroState&)>;

namespace detail {

/// Step indices at which snapshots are taken: nearest step to every multiple of
/// the cadence up to t_end, plus the final step.
inline std::vector<std::size_t> snapshot_steps(double t_end, double every, double dt,
                                               std::size_t total) {
  std::vector<std::size_t> idx;
  const double slack = 1e-9 * t_end;
  for (std::size_t j = 0;; ++j) {
    const double target = static_cast<double>(j) * every;
    if (target > t_end + slack) break;
    const auto s = static_cast<std::size_t>(std::llround(target / dt));
    const std::size_t clamped = std::min(s, total);
    if (idx.empty() || idx.back() != clamped) idx.push_back(clamped);
  }
  if (idx.back() != total) idx.push_back(total);
  return idx;
}

/// Number of whole steps covering t_end with steps no longer than dt.
inline std::size_t step_count(double t_end, double dt) {
  const double ratio = t_end / dt;
  auto n = static_cast<std::size_t>(std::ceil(ratio - 1e-9));
  return std::max<std::size_t>(n, 1);
}

/// Step count for run() and sl_run(): step_count(), rounded up to a multiple of
/// t_end / every when that ratio is a whole number, so snapshots fall on exact
/// multiples of the cadence.
inline std::size_t plan_steps(double t_end, double every, double dt_max) {
  std::size_t n = step_count(t_end, dt_max);
  const double r = t_end / every;
  const double rr = std::round(r);
  if (rr >= 1.0 && std::abs(r - rr) <= 1e-9 * rr) {
    const auto per = static_cast<std::size_t>(rr);
    n = (n + per - 1) / per * per;
  }
  return n;
}

}  // namespace detail

/// Integrates to t_end, recording snapshots every `snapshot_every` (nearest
/// step) including t = 0 and the final state. The step is shortened so that a
/// whole number of steps lands on t_end, and on every snapshot time when the
/// cadence divides t_end.
inline Trajectory run(const HydroState& initial, const Grid1D& grid, const Params& params,
                      const SolverConfig& cfg, double t_end, double snapshot_every,
                      const SnapshotObserver& observer = {}) {
  check_state(initial, grid, "run");
  if (!(t_end > 0.0)) throw ContractViolation("run: t_end must be > 0");
  if (!(snapshot_every > 0.0)) throw ContractViolation("run: snapshot_every must be > 0");

  const double dt_max = resolve_dt(cfg, grid, params);
  Trajectory traj;
  traj.steps = detail::plan_steps(t_end, snapshot_every, dt_max);
  traj.dt = t_end / static_cast<double>(traj.steps);
  const auto marks = detail::snapshot_steps(t_end, snapshot_every, traj.dt, traj.steps);

  HydroStepper stepper(grid, params, cfg);
  HydroState h = initial;
  const double t0 = initial.t;
  auto record = [&](std::size_t s) {
    h.t = t0 + static_cast<double>(s) * traj.dt;
    traj.snapshots.push_back(h);
    if (observer) observer(traj.snapshots.back());
  };

  std::size_t next = 0;
  if (marks[next] == 0) record(marks[next++]);
  for (std::size_t s = 1; s <= traj.steps; ++s) {
    stepper.step(h, traj.dt);
    h.t = t0 + static_cast<double>(s) * traj.dt;
    if (next < marks.size() && marks[next] == s) record(marks[next++]);
  }

  if (stepper.clamp_events() > 0)
    traj.warnings.push_back("negative density clamped in " +
                            std::to_string(stepper.clamp_events()) + " step(s), renormalized " +
                            std::to_string(stepper.renormalizations()) + " time(s)");
  return traj;
}

}  // namespace qhd
