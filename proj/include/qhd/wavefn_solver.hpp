#pragma once

// Direct integration of the Schroedinger-Langevin equation
//
//   i hbar psi_t = -(hbar^2/2m) psi'' + U psi - (i hbar k / 2) psi ln(psi/psi*)
//
// Since ln(psi/psi*) = 2iS, the damping term is the real potential hbar k S.
// Strang splitting: half step in the potential U + hbar k S, with S re-unwrapped
// at each half step and the phase relaxation it causes integrated exactly; full
// kinetic step in the discrete Fourier basis of the grid, zero-padded to a fast
// transform length and taken as periodic; second potential half step. Each
// substep is a pointwise phase factor, so the norm is conserved to round-off
// as long as psi is negligible at the domain edges (checked every step).

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <limits>
#include <memory>
#include <mutex>
#include <numbers>
#include <string>
#include <vector>

#include "qhd/core.hpp"
#include "qhd/hydro_solver.hpp"
#include "qhd/madelung.hpp"

namespace qhd {

struct WaveConfig {
  /// Nodes with |psi|^2 below this take their phase from the nearest node above it.
  double rho_floor = kDefaultRhoFloor;
  /// Largest |psi| tolerated in the outer 2% of nodes on either side.
  double edge_amplitude = 1e-6;
  /// Permit dt above wave_dt_bound().
  bool allow_large_dt = false;
};

namespace detail {

// FFTW's planner is not reentrant; execution of an existing plan is.
inline std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

/// In-place forward/backward transform pair on an owned buffer.
class FftPair {
public:
  explicit FftPair(std::size_t n) : n_(n) {
    buf_ = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * n));
    if (!buf_) throw std::bad_alloc();
    std::lock_guard<std::mutex> lock(fftw_planner_mutex());
    const int ni = static_cast<int>(n);
    fwd_ = fftw_plan_dft_1d(ni, buf_, buf_, FFTW_FORWARD, FFTW_ESTIMATE);
    bwd_ = fftw_plan_dft_1d(ni, buf_, buf_, FFTW_BACKWARD, FFTW_ESTIMATE);
    if (!fwd_ || !bwd_) {
      release();
      throw SolverFailure("fftw plan creation failed");
    }
  }
  FftPair(const FftPair&) = delete;
  FftPair& operator=(const FftPair&) = delete;
  ~FftPair() { release(); }

  std::size_t size() const noexcept { return n_; }
  Complex* data() noexcept { return reinterpret_cast<Complex*>(buf_); }
  void forward() { fftw_execute(fwd_); }
  /// Unnormalized: forward followed by backward multiplies by n.
  void backward() { fftw_execute(bwd_); }

private:
  void release() {
    std::lock_guard<std::mutex> lock(fftw_planner_mutex());
    if (fwd_) fftw_destroy_plan(fwd_);
    if (bwd_) fftw_destroy_plan(bwd_);
    if (buf_) fftw_free(buf_);
    fwd_ = bwd_ = nullptr;
    buf_ = nullptr;
  }

  std::size_t n_;
  fftw_complex* buf_ = nullptr;
  fftw_plan fwd_ = nullptr;
  fftw_plan bwd_ = nullptr;
};

/// Smallest length >= n whose prime factors are all <= 7 (fast FFT sizes).
inline std::size_t fft_size(std::size_t n) {
  for (std::size_t m = n;; ++m) {
    std::size_t r = m;
    for (std::size_t p : {2, 3, 5, 7})
      while (r % p == 0) r /= p;
    if (r == 1) return m;
  }
}

/// Angular wavenumbers of the DFT modes for n points of spacing dx (period n dx).
inline Field wavenumbers(std::size_t n, double dx) {
  Field kappa(n);
  const double base = 2.0 * std::numbers::pi / (static_cast<double>(n) * dx);
  for (std::size_t j = 0; j < n; ++j) {
    const auto s = j <= n / 2 ? static_cast<double>(j)
                              : static_cast<double>(j) - static_cast<double>(n);
    kappa[j] = base * s;
  }
  return kappa;
}

}  // namespace detail

/// Phase used by the damping potential: unwrapped arg(psi), zero if psi is
/// below the floor everywhere.
inline Field damping_phase(std::span<const Complex> psi, double rho_floor) {
  auto s = unwrap_phase(psi, rho_floor);
  return s ? std::move(*s) : Field(psi.size(), 0.0);
}

/// 0.5 hbar / max|U + hbar k S| for the current state.
inline double wave_dt_bound(const WaveState& w, const Grid1D& grid, const Params& params,
                            const WaveConfig& cfg = {}) {
  const Field u = evaluate_potential(params.potential, grid);
  const Field s = damping_phase(w.psi, cfg.rho_floor);
  double peak = 0.0;
  for (std::size_t i = 0; i < grid.n(); ++i)
    peak = std::max(peak, std::abs(u[i] + params.hbar * params.k * s[i]));
  return peak > 0.0 ? 0.5 * params.hbar / peak : std::numeric_limits<double>::infinity();
}

/// Throws BoundaryDecayError if psi is not negligible near either end, where the
/// periodic kinetic step would couple the two edges.
inline void check_edge_decay(const WaveState& w, double edge_amplitude) {
  const std::size_t n = w.psi.size();
  const std::size_t band = std::max<std::size_t>(1, (n * 2 + 99) / 100);
  for (std::size_t j = 0; j < band; ++j)
    for (std::size_t i : {j, n - 1 - j})
      if (!(std::abs(w.psi[i]) < edge_amplitude))
        throw BoundaryDecayError("wavefunction solver: |psi| = " + std::to_string(std::abs(w.psi[i])) +
                                 " at node " + std::to_string(i) + " near the domain edge");
}

/// Reusable split-step integrator; owns the FFT plans for one grid.
class WaveStepper {
public:
  WaveStepper(const Grid1D& grid, const Params& params, const WaveConfig& cfg = {})
      : grid_(grid), params_(params), cfg_(cfg), fft_(detail::fft_size(grid.n())),
        u_(evaluate_potential(params.potential, grid)),
        kappa_(detail::wavenumbers(fft_.size(), grid.dx())) {
    params.validate();
  }

  void step(WaveState& w, double dt) {
    const std::size_t n = grid_.n();
    if (w.psi.size() != n) throw ContractViolation("sl_step: psi length != grid size");
    if (!(dt > 0.0) || !std::isfinite(dt)) throw ContractViolation("sl_step: dt must be positive");
    check_edge_decay(w, cfg_.edge_amplitude);

    update_phase(w.psi);
    if (!cfg_.allow_large_dt) {
      double peak = 0.0;
      for (std::size_t i = 0; i < n; ++i)
        peak = std::max(peak, std::abs(u_[i] + params_.hbar * params_.k * s_[i]));
      if (peak > 0.0 && dt > 0.5 * params_.hbar / peak)
        throw ContractViolation("sl_step: dt = " + std::to_string(dt) + " exceeds bound " +
                                std::to_string(0.5 * params_.hbar / peak));
    }

    potential_half(w.psi, 0.5 * dt);
    kinetic(w.psi, dt);
    update_phase(w.psi);
    potential_half(w.psi, 0.5 * dt);
    w.t += dt;

    for (std::size_t i = 0; i < n; ++i)
      if (!std::isfinite(w.psi[i].real()) || !std::isfinite(w.psi[i].imag()))
        throw DivergenceError("psi", i, w.t);
  }

private:
  void update_phase(const ComplexField& psi) {
    if (params_.k == 0.0) {
      s_.assign(psi.size(), 0.0);  // the damping potential vanishes; S is not needed
      return;
    }
    s_ = damping_phase(psi, cfg_.rho_floor);
  }

  // The substep i hbar psi_t = (U + hbar k S) psi leaves |psi| fixed and moves
  // the phase by S_t = -U/hbar - k S, which is integrated exactly.
  void potential_half(ComplexField& psi, double tau) const {
    const double k = params_.k;
    const double span = k > 0.0 ? -std::expm1(-k * tau) / k : tau;
    const double hk = params_.hbar * k;
    for (std::size_t i = 0; i < psi.size(); ++i)
      psi[i] *= std::polar(1.0, -(u_[i] + hk * s_[i]) * span / params_.hbar);
  }

  void kinetic(ComplexField& psi, double dt) {
    const std::size_t n = psi.size();
    const std::size_t len = fft_.size();
    Complex* b = fft_.data();
    std::copy(psi.begin(), psi.end(), b);
    std::fill(b + n, b + len, Complex{});
    fft_.forward();
    if (dt != kinetic_dt_) {
      const double c = params_.hbar * dt / (2.0 * params_.m);
      const double inv_len = 1.0 / static_cast<double>(len);
      propagator_.resize(len);
      for (std::size_t j = 0; j < len; ++j)
        propagator_[j] = std::polar(inv_len, -c * kappa_[j] * kappa_[j]);
      kinetic_dt_ = dt;
    }
    for (std::size_t j = 0; j < len; ++j) b[j] *= propagator_[j];
    fft_.backward();
    std::copy(b, b + n, psi.begin());
  }

  Grid1D grid_;
  Params params_;
  WaveConfig cfg_;
  detail::FftPair fft_;
  Field u_;
  Field kappa_;
  Field s_;
  ComplexField propagator_;
  double kinetic_dt_ = 0.0;
};

inline WaveState sl_step(const WaveState& w, const Grid1D& grid, const Params& params, double dt,
                         const WaveConfig& cfg = {}) {
  WaveStepper stepper(grid, params, cfg);
  WaveState out = w;
  stepper.step(out, dt);
  return out;
}

using WaveObserver = std::function<void(const WaveState&)>;

/// Same cadence rules as run(): dt shortened to land on t_end, snapshots at the
/// nearest step to each multiple of snapshot_every, final state always included.
inline std::vector<WaveState> sl_run(const WaveState& initial, const Grid1D& grid,
                                     const Params& params, double dt, double t_end,
                                     double snapshot_every, const WaveConfig& cfg = {},
                                     const WaveObserver& observer = {}) {
  if (initial.psi.size() != grid.n()) throw ContractViolation("sl_run: psi length != grid size");
  if (!(t_end > 0.0)) throw ContractViolation("sl_run: t_end must be > 0");
  if (!(snapshot_every > 0.0)) throw ContractViolation("sl_run: snapshot_every must be > 0");
  if (!(dt > 0.0)) throw ContractViolation("sl_run: dt must be > 0");

  const std::size_t steps = detail::plan_steps(t_end, snapshot_every, dt);
  const double h = t_end / static_cast<double>(steps);
  const auto marks = detail::snapshot_steps(t_end, snapshot_every, h, steps);

  WaveStepper stepper(grid, params, cfg);
  std::vector<WaveState> out;
  WaveState w = initial;
  const double t0 = initial.t;
  auto record = [&](std::size_t s) {
    w.t = t0 + static_cast<double>(s) * h;
    out.push_back(w);
    if (observer) observer(out.back());
  };
  std::size_t next = 0;
  if (marks[next] == 0) record(marks[next++]);
  for (std::size_t s = 1; s <= steps; ++s) {
    stepper.step(w, h);
    w.t = t0 + static_cast<double>(s) * h;
    if (next < marks.size() && marks[next] == s) record(marks[next++]);
  }
  return out;
}

/// <psi|H|psi> with the kinetic part evaluated spectrally, consistent with the
/// propagator. The damping term is not part of H.
inline double wave_energy(const WaveState& w, const Grid1D& grid, const Params& params) {
  const std::size_t n = grid.n();
  if (w.psi.size() != n) throw ContractViolation("wave_energy: psi length != grid size");
  detail::FftPair fft(n);
  std::copy(w.psi.begin(), w.psi.end(), fft.data());
  fft.forward();
  const Field kappa = detail::wavenumbers(n, grid.dx());
  // Parseval: sum |psi_i|^2 dx = (dx / n) sum |hat psi_j|^2
  double kin = 0.0;
  for (std::size_t j = 0; j < n; ++j) kin += kappa[j] * kappa[j] * std::norm(fft.data()[j]);
  kin *= params.hbar * params.hbar / (2.0 * params.m) * grid.dx() / static_cast<double>(n);

  const Field u = evaluate_potential(params.potential, grid);
  double pot = 0.0;
  for (std::size_t i = 0; i < n; ++i) pot += u[i] * std::norm(w.psi[i]);
  return kin + pot * grid.dx();
}

}  // namespace qhd
