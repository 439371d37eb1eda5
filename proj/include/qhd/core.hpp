#pragma once

// Grids, fields, physical parameters and the finite-difference / quadrature
// primitives shared by every other part of the library.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "qhd/errors.hpp"

namespace qhd {

using Field = std::vector<double>;
using Complex = std::complex<double>;
using ComplexField = std::vector<Complex>;
using Warnings = std::vector<std::string>;

/// Lower clamp for the density wherever it ends up in a denominator.
inline constexpr double kDefaultRhoFloor = 1e-12;

/// Default normalization tolerance for freshly constructed states.
inline constexpr double kDefaultNormTolerance = 1e-6;

/// Uniform node-centred grid on [x_min, x_max]; both end points are nodes.
class Grid1D {
public:
  static constexpr std::size_t kMinNodes = 8;

  Grid1D(double x_min, double x_max, std::size_t n) : x_min_(x_min), x_max_(x_max), n_(n) {
    if (!(x_min < x_max)) throw ContractViolation("Grid1D: x_min must be < x_max");
    if (n < kMinNodes) throw ContractViolation("Grid1D: need at least 8 nodes");
    dx_ = (x_max - x_min) / static_cast<double>(n - 1);
  }

  double x_min() const noexcept { return x_min_; }
  double x_max() const noexcept { return x_max_; }
  std::size_t n() const noexcept { return n_; }
  double dx() const noexcept { return dx_; }

  double x(std::size_t i) const noexcept { return x_min_ + static_cast<double>(i) * dx_; }

  Field nodes() const {
    Field xs(n_);
    for (std::size_t i = 0; i < n_; ++i) xs[i] = x(i);
    return xs;
  }

  template <class Fn>
  Field sample(Fn&& fn) const {
    Field out(n_);
    for (std::size_t i = 0; i < n_; ++i) out[i] = fn(x(i));
    return out;
  }

  friend bool operator==(const Grid1D&, const Grid1D&) = default;

private:
  double x_min_;
  double x_max_;
  std::size_t n_;
  double dx_;
};

// ---------------------------------------------------------------------------
// Potentials

struct HarmonicPotential {
  double stiffness;  // U = stiffness * x^2 / 2
  friend bool operator==(const HarmonicPotential&, const HarmonicPotential&) = default;
};

struct UniformPotential {
  double force;  // U = -force * x
  friend bool operator==(const UniformPotential&, const UniformPotential&) = default;
};

struct FreePotential {
  friend bool operator==(const FreePotential&, const FreePotential&) = default;
};

struct TabulatedPotential {
  Field values;  // one energy per grid node
  friend bool operator==(const TabulatedPotential&, const TabulatedPotential&) = default;
};

using PotentialSpec =
    std::variant<HarmonicPotential, UniformPotential, FreePotential, TabulatedPotential>;

inline void validate(const PotentialSpec& spec) {
  if (const auto* h = std::get_if<HarmonicPotential>(&spec); h && !(h->stiffness > 0.0))
    throw ContractViolation("harmonic potential requires D > 0");
  if (const auto* u = std::get_if<UniformPotential>(&spec); u && !std::isfinite(u->force))
    throw ContractViolation("uniform potential requires a finite force");
}

/// Potential energy per node.
inline Field evaluate_potential(const PotentialSpec& spec, const Grid1D& grid) {
  validate(spec);
  struct Visitor {
    const Grid1D& grid;
    Field operator()(const HarmonicPotential& h) const {
      return grid.sample([&](double x) { return 0.5 * h.stiffness * x * x; });
    }
    Field operator()(const UniformPotential& u) const {
      return grid.sample([&](double x) { return -u.force * x; });
    }
    Field operator()(const FreePotential&) const { return Field(grid.n(), 0.0); }
    Field operator()(const TabulatedPotential& t) const {
      if (t.values.size() != grid.n())
        throw ContractViolation("tabulated potential: value count must equal grid node count");
      return t.values;
    }
  };
  return std::visit(Visitor{grid}, spec);
}

/// Physical constants and damping rate. The damping force is -k v.
struct Params {
  double hbar = 1.0;
  double m = 1.0;
  double k = 0.0;
  PotentialSpec potential = FreePotential{};

  void validate() const {
    if (!(hbar > 0.0)) throw ContractViolation("Params: hbar must be > 0");
    if (!(m > 0.0)) throw ContractViolation("Params: m must be > 0");
    if (!(k >= 0.0)) throw ContractViolation("Params: k must be >= 0");
    qhd::validate(potential);
  }

  friend bool operator==(const Params&, const Params&) = default;
};

// ---------------------------------------------------------------------------
// States

struct HydroState {
  double t = 0.0;
  Field rho;
  Field v;
};

struct WaveState {
  double t = 0.0;
  ComplexField psi;
};

struct StationaryState {
  Field rho_s;
  double E_s = 0.0;
  /// Number of sign changes of the amplitude; zero for the ground state.
  std::size_t nodes = 0;
  Warnings warnings;
};

// ---------------------------------------------------------------------------
// Primitives

inline void require_length(std::span<const double> field, const Grid1D& grid, const char* what) {
  if (field.size() != grid.n())
    throw ContractViolation(std::string(what) + ": field length " +
                            std::to_string(field.size()) + " != grid size " +
                            std::to_string(grid.n()));
}

namespace detail {

// Kernels writing into caller-owned storage; `out` must not alias `f`.
inline void derivative_into(std::span<const double> f, double dx, std::span<double> out) {
  const std::size_t n = f.size();
  const double inv2dx = 0.5 / dx;
  out[0] = (-3.0 * f[0] + 4.0 * f[1] - f[2]) * inv2dx;
  for (std::size_t i = 1; i + 1 < n; ++i) out[i] = (f[i + 1] - f[i - 1]) * inv2dx;
  out[n - 1] = (3.0 * f[n - 1] - 4.0 * f[n - 2] + f[n - 3]) * inv2dx;
}

inline void second_derivative_into(std::span<const double> f, double dx, std::span<double> out) {
  const std::size_t n = f.size();
  const double inv = 1.0 / (dx * dx);
  out[0] = (2.0 * f[0] - 5.0 * f[1] + 4.0 * f[2] - f[3]) * inv;
  for (std::size_t i = 1; i + 1 < n; ++i) out[i] = (f[i + 1] - 2.0 * f[i] + f[i - 1]) * inv;
  out[n - 1] = (2.0 * f[n - 1] - 5.0 * f[n - 2] + 4.0 * f[n - 3] - f[n - 4]) * inv;
}

}  // namespace detail

/// d/dx: central differences inside, second-order one-sided stencils at both ends.
inline Field derivative(std::span<const double> f, const Grid1D& grid) {
  require_length(f, grid, "derivative");
  Field out(f.size());
  detail::derivative_into(f, grid.dx(), out);
  return out;
}

/// d2/dx2: three-point stencil inside, second-order one-sided four-point stencils at the ends.
inline Field second_derivative(std::span<const double> f, const Grid1D& grid) {
  require_length(f, grid, "second_derivative");
  Field out(f.size());
  detail::second_derivative_into(f, grid.dx(), out);
  return out;
}

/// Trapezoidal rule.
inline double integrate(std::span<const double> f, const Grid1D& grid) {
  require_length(f, grid, "integrate");
  double interior = 0.0;
  for (std::size_t i = 1; i + 1 < f.size(); ++i) interior += f[i];
  return grid.dx() * (interior + 0.5 * (f.front() + f.back()));
}

/// Running trapezoidal integral from x_min; the first entry is 0.
inline Field cumulative_integrate(std::span<const double> f, const Grid1D& grid) {
  require_length(f, grid, "cumulative_integrate");
  Field out(f.size());
  out[0] = 0.0;
  const double half_dx = 0.5 * grid.dx();
  for (std::size_t i = 1; i < f.size(); ++i) out[i] = out[i - 1] + half_dx * (f[i - 1] + f[i]);
  return out;
}

inline double max_abs(std::span<const double> f) {
  double m = 0.0;
  for (double x : f) m = std::max(m, std::abs(x));
  return m;
}

inline double max_abs_diff(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw ContractViolation("max_abs_diff: length mismatch");
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

inline double norm(const HydroState& h, const Grid1D& grid) { return integrate(h.rho, grid); }

inline double norm(const WaveState& w, const Grid1D& grid) {
  Field rho(w.psi.size());
  for (std::size_t i = 0; i < rho.size(); ++i) rho[i] = std::norm(w.psi[i]);
  return integrate(rho, grid);
}

/// Checks a state against the grid: matching lengths, non-negative density.
inline void check_state(const HydroState& h, const Grid1D& grid, const char* what) {
  require_length(h.rho, grid, what);
  require_length(h.v, grid, what);
  for (std::size_t i = 0; i < h.rho.size(); ++i)
    if (h.rho[i] < 0.0)
      throw ContractViolation(std::string(what) + ": negative density at node " +
                              std::to_string(i));
}

inline bool is_normalized(const HydroState& h, const Grid1D& grid,
                          double tol = kDefaultNormTolerance) {
  return std::abs(norm(h, grid) - 1.0) <= tol;
}

/// Rescales a density so that its trapezoidal integral is one.
inline void normalize(Field& rho, const Grid1D& grid) {
  const double mass = integrate(rho, grid);
  if (!(mass > 0.0)) throw DegenerateState("cannot normalize a density with zero mass");
  for (double& r : rho) r /= mass;
}

}  // namespace qhd
