#pragma once

// Stationary states: v_s = 0 and U_q(rho_s) + U = E_s. These are the energy
// eigenstates of the undamped problem, obtained either analytically (harmonic
// oscillator) or from the linear eigenproblem -(hbar^2/2m) R'' + U R = E R
// with R = sqrt(rho_s).

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <string>
#include <vector>

#include "qhd/core.hpp"
#include "qhd/madelung.hpp"

namespace qhd {

/// Largest density tolerated at the two end nodes of a stationary state.
inline constexpr double kBoundaryDecayTolerance = 1e-10;

namespace detail {

inline std::size_t count_sign_changes(std::span<const double> amp) {
  const double cut = 1e-8 * max_abs(amp);
  std::size_t changes = 0;
  int last = 0;
  for (double a : amp) {
    if (std::abs(a) <= cut) continue;
    const int s = a > 0.0 ? 1 : -1;
    if (last != 0 && s != last) ++changes;
    last = s;
  }
  return changes;
}

inline void check_boundary_decay(std::span<const double> rho, const char* what) {
  const double edge = std::max(rho.front(), rho.back());
  if (!(edge < kBoundaryDecayTolerance))
    throw BoundaryDecayError(std::string(what) + ": density at the domain edge is " +
                             std::to_string(edge) + ", grid too narrow");
}

/// Solves (T - shift) y = rhs for a symmetric tridiagonal T (Thomas algorithm).
inline Field solve_shifted_tridiagonal(std::span<const double> diag, double off, double shift,
                                       std::span<const double> rhs) {
  const std::size_t n = diag.size();
  Field c(n), d(n), y(n);
  const double tiny = 1e-300;
  double b = diag[0] - shift;
  if (std::abs(b) < tiny) b = tiny;
  c[0] = off / b;
  d[0] = rhs[0] / b;
  for (std::size_t i = 1; i < n; ++i) {
    b = diag[i] - shift - off * c[i - 1];
    if (std::abs(b) < tiny) b = tiny;
    c[i] = off / b;
    d[i] = (rhs[i] - off * d[i - 1]) / b;
  }
  y[n - 1] = d[n - 1];
  for (std::size_t i = n - 1; i-- > 0;) y[i] = d[i] - c[i] * y[i + 1];
  return y;
}

}  // namespace detail

/// n-th harmonic-oscillator eigenstate, normalized on the grid.
/// Throws BoundaryDecayError when the density does not decay below 1e-10 at the
/// grid ends. States with n >= 1 carry a warning: rho_s vanishes at the nodes.
inline StationaryState oscillator_eigenstate(std::size_t level, const Grid1D& grid,
                                             const Params& params) {
  params.validate();
  const auto* h = std::get_if<HarmonicPotential>(&params.potential);
  if (!h) throw ContractViolation("oscillator_eigenstate: requires a harmonic potential");

  const double omega = std::sqrt(h->stiffness / params.m);
  const double alpha = std::sqrt(params.m * omega / params.hbar);  // 1/length
  const double norm0 = std::pow(alpha * alpha / std::numbers::pi, 0.25);

  // Normalized Hermite functions by the stable three-term recurrence.
  Field amp(grid.n());
  for (std::size_t i = 0; i < grid.n(); ++i) {
    const double xi = alpha * grid.x(i);
    double prev = 0.0;
    double cur = norm0 * std::exp(-0.5 * xi * xi);
    for (std::size_t j = 1; j <= level; ++j) {
      const double jd = static_cast<double>(j);
      const double next = std::sqrt(2.0 / jd) * xi * cur - std::sqrt((jd - 1.0) / jd) * prev;
      prev = cur;
      cur = next;
    }
    amp[i] = cur;
  }

  StationaryState s;
  s.rho_s.resize(grid.n());
  for (std::size_t i = 0; i < grid.n(); ++i) s.rho_s[i] = amp[i] * amp[i];
  normalize(s.rho_s, grid);
  detail::check_boundary_decay(s.rho_s, "oscillator_eigenstate");
  s.E_s = params.hbar * omega * (static_cast<double>(level) + 0.5);
  s.nodes = level;
  if (level > 0)
    s.warnings.push_back("excited state has " + std::to_string(level) +
                         " density node(s); velocity and stability claims are undefined there");
  return s;
}

struct StationarySearch {
  /// Only eigenvalues with |E - E_guess| <= window are considered.
  double window = std::numeric_limits<double>::infinity();
  /// Number of nearest eigenvalues examined before giving up.
  std::size_t max_candidates = 16;
};

/// Eigenpair of the three-point discretized Hamiltonian nearest to E_guess whose
/// density decays at the domain edges. The eigenvalue receives a fourth-order
/// deferred correction, (hbar^2/2m)(dx^2/12) <R''|R''>, removing the leading
/// truncation error of the three-point Laplacian.
inline StationaryState solve_stationary(const PotentialSpec& potential, double E_guess,
                                        const Grid1D& grid, const Params& params,
                                        const StationarySearch& search = {}) {
  params.validate();
  const Field u = evaluate_potential(potential, grid);
  const std::size_t n = grid.n();
  const double dx = grid.dx();
  const double kin = params.hbar * params.hbar / (2.0 * params.m * dx * dx);

  Eigen::VectorXd diag(static_cast<Eigen::Index>(n));
  Eigen::VectorXd sub = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(n - 1), -kin);
  for (std::size_t i = 0; i < n; ++i) diag[static_cast<Eigen::Index>(i)] = 2.0 * kin + u[i];

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
  es.computeFromTridiagonal(diag, sub, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw SolverFailure("solve_stationary: eigensolver failed");
  const Eigen::VectorXd& evals = es.eigenvalues();  // ascending

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return std::abs(evals[static_cast<Eigen::Index>(a)] - E_guess) <
           std::abs(evals[static_cast<Eigen::Index>(b)] - E_guess);
  });

  const Field diag_vec(diag.data(), diag.data() + n);
  const double scale = std::max(1.0, diag.cwiseAbs().maxCoeff());

  for (std::size_t c = 0; c < std::min(search.max_candidates, n); ++c) {
    const std::size_t idx = order[c];
    const double e = evals[static_cast<Eigen::Index>(idx)];
    if (std::abs(e - E_guess) > search.window) break;

    // Inverse iteration at a shift just below the eigenvalue.
    const double shift = e - 1e-10 * scale;
    Field r(n, 1.0);
    for (int it = 0; it < 4; ++it) {
      r = detail::solve_shifted_tridiagonal(diag_vec, -kin, shift, r);
      const double nr = std::sqrt(std::inner_product(r.begin(), r.end(), r.begin(), 0.0));
      if (!(nr > 0.0) || !std::isfinite(nr)) throw SolverFailure("inverse iteration failed");
      for (double& x : r) x /= nr;
    }

    const std::size_t nodes = detail::count_sign_changes(r);
    if (idx == 0) {
      const double sum = std::accumulate(r.begin(), r.end(), 0.0);
      if (sum < 0.0)
        for (double& x : r) x = -x;
      const double peak = max_abs(r);
      for (double x : r)
        if (x < -1e-8 * peak)
          throw SolverFailure("solve_stationary: ground state amplitude changes sign");
      for (double& x : r) x = std::max(x, 0.0);
    }

    Field rho(n);
    for (std::size_t i = 0; i < n; ++i) rho[i] = r[i] * r[i];
    normalize(rho, grid);
    if (!(std::max(rho.front(), rho.back()) < kBoundaryDecayTolerance)) continue;

    // Deferred correction with Dirichlet zeros outside the grid.
    double lap2 = 0.0, r2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double left = i > 0 ? r[i - 1] : 0.0;
      const double right = i + 1 < n ? r[i + 1] : 0.0;
      const double lap = (left - 2.0 * r[i] + right) / (dx * dx);
      lap2 += lap * lap;
      r2 += r[i] * r[i];
    }
    const double correction =
        params.hbar * params.hbar / (2.0 * params.m) * dx * dx / 12.0 * lap2 / r2;

    StationaryState s;
    s.rho_s = std::move(rho);
    s.E_s = e + correction;
    s.nodes = nodes;
    if (nodes > 0)
      s.warnings.push_back("excited state has " + std::to_string(nodes) +
                           " density node(s); velocity and stability claims are undefined there");
    return s;
  }
  throw NotFoundError("solve_stationary: no decaying eigenstate near E = " +
                      std::to_string(E_guess));
}

/// max |U_q(rho_s) + U - E_s| over nodes where rho_s exceeds min_density.
inline double stationary_residual(const StationaryState& s, const Grid1D& grid,
                                  const Params& params, double min_density = 1e-6) {
  const Field uq = quantum_potential(s.rho_s, grid, params);
  const Field u = evaluate_potential(params.potential, grid);
  double worst = 0.0;
  for (std::size_t i = 0; i < grid.n(); ++i)
    if (s.rho_s[i] > min_density) worst = std::max(worst, std::abs(uq[i] + u[i] - s.E_s));
  return worst;
}

}  // namespace qhd
