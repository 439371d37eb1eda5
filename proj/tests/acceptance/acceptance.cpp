// Acceptance run: one PASS/FAIL line per criterion, non-zero exit if any fails.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "qhd/qhd.hpp"

using namespace qhd;

namespace {

int g_failed = 0;

void verdict(int id, bool pass, const std::string& detail) {
  std::printf("criterion %2d: %s  %s\n", id, pass ? "PASS" : "FAIL", detail.c_str());
  std::fflush(stdout);
  if (!pass) ++g_failed;
}

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

Params oscillator(double k = 0.0) {
  Params p;
  p.k = k;
  p.potential = HarmonicPotential{0.02};
  return p;
}

struct Series {
  std::vector<double> t, l2, L, rate, jmax, mass;
};

// Hydro run of a bundled scenario with its snapshot cadence replaced by `every`.
Series run_series(const std::string& name, double every) {
  const Scenario sc = *find_bundled(name);
  const StationaryState ref = reference_state(sc);
  const DampingSpec damping = resolve_damping(sc.solver, sc.params);
  Series s;
  run(make_initial(sc.initial, sc.grid), sc.grid, sc.params, sc.solver, sc.t_end, every,
      [&](const HydroState& h) {
        s.t.push_back(h.t);
        s.l2.push_back(l2_distance(h.rho, ref.rho_s, sc.grid));
        s.L.push_back(liapunov(h, ref, sc.grid, sc.params));
        s.rate.push_back(liapunov_rate(h, sc.grid, sc.params, damping));
        s.jmax.push_back(max_abs(probability_current(h)));
        s.mass.push_back(norm(h, sc.grid));
      });
  return s;
}

double max_rise(const std::vector<double>& L) {
  double worst = 0.0;
  for (std::size_t i = 1; i < L.size(); ++i) worst = std::max(worst, L[i] - L[i - 1]);
  return worst;
}

double max_mass_error(const std::vector<double>& mass) {
  double worst = 0.0;
  for (double m : mass) worst = std::max(worst, std::abs(m - 1.0));
  return worst;
}

struct CrossResult {
  double diff = 0.0;
  double wave_norm_error = 0.0;
};

// Hydro and wavefunction solvers from the scenario's initial data to t = 5.
CrossResult cross_solve(const std::string& name, std::size_t n, double dt) {
  Scenario sc = *find_bundled(name);
  sc.grid = Grid1D(sc.grid.x_min(), sc.grid.x_max(), n);
  sc.solver.dt = dt;
  const double t = 5.0;
  const HydroState h0 = make_initial(sc.initial, sc.grid);
  const Trajectory tr = run(h0, sc.grid, sc.params, sc.solver, t, 0.5);
  CrossResult r;
  const auto waves = sl_run(to_wavefn(h0, sc.grid, sc.params), sc.grid, sc.params, tr.dt, t, 0.5, {},
                            [&](const WaveState& w) {
                              r.wave_norm_error = std::max(r.wave_norm_error, std::abs(norm(w, sc.grid) - 1.0));
                            });
  const HydroState& h = tr.snapshots.back();
  for (std::size_t i = 0; i < n; ++i)
    r.diff = std::max(r.diff, std::abs(std::norm(waves.back().psi[i]) - h.rho[i]));
  return r;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

int run_all();

int main() {
  try {
    return run_all();
  } catch (const std::exception& e) {
    std::printf("aborted: %s\n", e.what());
    return 1;
  }
}

int run_all() {
  const Grid1D g(-20.0, 20.0, 801);
  const double omega = std::sqrt(0.02);

  {  // 1
    const Params p = oscillator();
    const StationaryState s = oscillator_eigenstate(0, g, p);
    const double e_err = std::abs(s.E_s - omega / 2.0);
    const double res = stationary_residual(s, g, p);
    const StationaryState num = solve_stationary(p.potential, 0.05, g, p);
    const double rel = std::abs(num.E_s - s.E_s) / s.E_s;
    verdict(1, e_err < 1e-10 && res < 1e-3 && rel < 1e-6,
            fmt("|E_s - sqrt(0.02)/2| = %.2e, residual = %.2e, solve_stationary rel = %.2e", e_err, res, rel));
  }

  {  // 2
    double worst = 0.0;
    for (double k : {0.0, 0.1, 1.0}) {
      const Params p = oscillator(k);
      const StationaryState s = oscillator_eigenstate(0, g, p);
      SolverConfig cfg;
      cfg.dt = 1e-3;
      cfg.allow_large_dt = true;
      HydroStepper stepper(g, p, cfg);
      HydroState h{0.0, s.rho_s, Field(g.n(), 0.0)};
      for (int i = 0; i < 1000; ++i) stepper.step(h, 1e-3);
      worst = std::max(worst, max_abs_diff(h.rho, s.rho_s));
    }
    verdict(2, worst < 1e-4, fmt("max |rho - rho_s| after 1000 steps = %.2e", worst));
  }

  // paper-k1 at half the bundled cadence: the odd snapshots are the midpoints
  // of the 5-unit intervals used by the rate identity.
  const Series k1h = run_series("paper-k1", 2.5);
  Series k1;
  for (std::size_t i = 0; i < k1h.t.size(); i += 2) {
    k1.t.push_back(k1h.t[i]);
    k1.l2.push_back(k1h.l2[i]);
    k1.L.push_back(k1h.L[i]);
    k1.jmax.push_back(k1h.jmax[i]);
  }
  const Series k01 = run_series("paper-k0.1", 1.0);
  const Series k0 = run_series("paper-k0", 0.95);

  {  // 3
    double drift = 0.0;
    for (double L : k0.L) drift = std::max(drift, std::abs(L - k0.L.front()));
    const double r1 = max_rise(k1.L), r01 = max_rise(k01.L);
    verdict(3, r1 <= 1e-3 && r01 <= 1e-3 && drift < 2e-3,
            fmt("largest rise k1 = %.2e, k0.1 = %.2e; k0 drift = %.2e", r1, r01, drift));
  }

  {  // 4
    // every 5-unit interval, difference quotient against the rate at its midpoint
    double worst = 0.0, worst_t = 0.0;
    bool pass = true;
    for (std::size_t i = 1; i + 1 < k1h.t.size(); i += 2) {
      const double fd = (k1h.L[i + 1] - k1h.L[i - 1]) / (k1h.t[i + 1] - k1h.t[i - 1]);
      const double rate = k1h.rate[i];
      const double err = std::abs(fd - rate);
      if (err > std::max(0.1 * std::abs(rate), 1e-4)) pass = false;
      if (std::abs(rate) > 1e-3 && err / std::abs(rate) > worst) {
        worst = err / std::abs(rate);
        worst_t = k1h.t[i];
      }
    }
    verdict(4, pass, fmt("paper-k1 largest relative mismatch = %.3f at t = %.1f", worst, worst_t));
  }

  {  // 5
    const double ratio = k1.l2.back() / k1.l2.front();
    bool min_then_rise = false;
    for (std::size_t i = 1; i + 1 < k01.l2.size(); ++i)
      if (k01.l2[i] < k01.l2[i - 1] && k01.l2[i] < k01.l2[i + 1]) min_then_rise = true;
    double running = 0.0;
    for (double d : k0.l2) running = std::max(running, d);
    const double k0_ratio = k0.l2.back() / running;
    verdict(5, ratio < 0.1 && min_then_rise && k0_ratio >= 0.75,
            fmt("k1 L2(100)/L2(0) = %.3f; k0 L2(19)/max = %.3f", ratio, k0_ratio) +
                (min_then_rise ? "; k0.1 local minimum then rise" : "; k0.1 no local minimum"));
  }

  {  // 6
    const double peak = *std::max_element(k1h.jmax.begin(), k1h.jmax.end());
    const double ratio = k1h.jmax.back() / peak;
    verdict(6, ratio < 0.05, fmt("paper-k1 max|j|(100)/peak = %.3f", ratio));
  }

  {  // 7
    bool pass = true;
    std::string detail;
    double wave_err = 0.0;
    for (const char* name : {"paper-k0", "paper-k1"}) {
      const CrossResult coarse = cross_solve(name, 1201, 1.2e-4);
      const CrossResult fine = cross_solve(name, 2401, 6e-5);
      const double ratio = coarse.diff / fine.diff;
      pass = pass && coarse.diff < 1e-2 && ratio >= 4.0;
      wave_err = std::max({wave_err, coarse.wave_norm_error, fine.wave_norm_error});
      detail += std::string(name) + fmt(": %.2e -> %.2e (x%.5f); ", coarse.diff, fine.diff, ratio);
    }
    verdict(7, pass, detail);

    // 8
    const double hydro_err =
        std::max({max_mass_error(k1h.mass), max_mass_error(k01.mass), max_mass_error(k0.mass)});
    verdict(8, hydro_err < 1e-4 && wave_err < 1e-10,
            fmt("hydro |mass - 1| = %.2e, wavefunction |norm - 1| = %.2e", hydro_err, wave_err));
  }

  {  // 9
    const Params p = oscillator();
    const StationaryState s = oscillator_eigenstate(0, g, p);
    const HydroState h{0.0, s.rho_s, Field(g.n(), 0.0)};
    const auto m = second_variation_minors(h, g);
    bool minors_ok = true;
    for (std::size_t i = 1; i + 1 < g.n(); ++i)
      minors_ok = minors_ok && m.delta1[i] > 0.0 && m.delta2[i] >= 0.0 && m.delta3[i] == 0.0;
    std::mt19937_64 rng(20260101);
    std::normal_distribution<double> gauss;
    std::uniform_real_distribution<double> centre(-8.0, 8.0), width(0.5, 4.0);
    double worst = std::numeric_limits<double>::infinity();
    for (int s_ = 0; s_ < 100; ++s_) {
      Perturbation pert{Field(g.n(), 0.0), Field(g.n(), 0.0)};
      for (int j = 0; j < 3; ++j) {
        const double c = centre(rng), w = width(rng), a = gauss(rng);
        const double cv = centre(rng), wv = width(rng), av = gauss(rng);
        for (std::size_t i = 0; i < g.n(); ++i) {
          const double x = g.x(i);
          pert.drho[i] += a * std::exp(-0.5 * (x - c) * (x - c) / (w * w));
          pert.dv[i] += av * std::exp(-0.5 * (x - cv) * (x - cv) / (wv * wv));
        }
      }
      const double mass = integrate(pert.drho, g);
      for (std::size_t i = 0; i < g.n(); ++i) pert.drho[i] -= mass * s.rho_s[i];
      const double q = second_variation_form(h, g, pert, pert) / perturbation_norm2(pert, g);
      worst = std::min(worst, q);
    }
    verdict(9, minors_ok && worst >= -1e-8,
            std::string(minors_ok ? "minors ok" : "minors violated") +
                fmt(", min form/|p|^2 = %.2e", worst));
  }

  {  // 10
    const Params p = oscillator();
    const StationaryState s = oscillator_eigenstate(0, g, p);
    HydroState shifted;
    shifted.rho = g.sample([&](double x) { return std::exp(-omega * (x - 2.0) * (x - 2.0)); });
    normalize(shifted.rho, g);
    shifted.v.assign(g.n(), 0.0);
    const double l_shift = liapunov(shifted, s, g, p);
    const double l_rest = liapunov({0.0, s.rho_s, Field(g.n(), 0.0)}, s, g, p);
    verdict(10, std::abs(l_shift - 0.04) < 1e-3 && std::abs(l_rest) < 1e-4,
            fmt("L(shifted, d=2) = %.6f, L(rho_s, 0) = %.2e", l_shift, l_rest));
  }

  {  // 11
    const Scenario sc = *find_bundled("paper-k0.1");
    const auto base = std::filesystem::temp_directory_path() / "qhd_acceptance";
    std::filesystem::remove_all(base);
    const RunReport a = run_scenario(sc, base / "a");
    run_scenario(sc, base / "b");
    bool same = true;
    std::size_t tables = 0;
    for (const auto& f : a.files) {
      if (f.filename() == "manifest.txt") continue;  // records wall time
      ++tables;
      same = same && slurp(f) == slurp(base / "b" / f.filename());
    }
    std::filesystem::remove_all(base);
    bool round_trip = true;
    for (const auto& [name, text] : bundled_scenarios()) {
      const Scenario s = parse_scenario(text);
      const std::string e = emit_scenario(s);
      round_trip = round_trip && parse_scenario(e) == s && emit_scenario(parse_scenario(e)) == e;
    }
    verdict(11, same && round_trip,
            std::to_string(tables) + " tables " + (same ? "identical" : "differ") + ", round trip " +
                (round_trip ? "exact" : "inexact"));
  }

  std::printf("%d criterion(s) failed\n", g_failed);
  return g_failed == 0 ? 0 : 1;
}
