#pragma once

// Executes a scenario and writes its output tables and run manifest.
//
// Every table is plain text: one header line starting with '#', then one row
// per snapshot, values separated by single spaces and printed with 17
// significant digits. The first column is always t.
//
//   <quantity>.txt   scalar outputs: "t value"
//                    field outputs (density, current): t followed by one column per node
//   nodes.txt        "i x" for every grid node
//   cross_check.txt  with cross-checking: "t max_abs_density_difference wavefunction_norm"
//   manifest.txt     configuration echo, overrides, step count, wall time, warnings

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "qhd/diagnostics.hpp"
#include "qhd/hydro_solver.hpp"
#include "qhd/madelung.hpp"
#include "qhd/scenario.hpp"
#include "qhd/stability.hpp"
#include "qhd/stationary.hpp"
#include "qhd/wavefn_solver.hpp"

namespace qhd {

/// Command-line values that replace the file's; echoed in the manifest.
struct RunOverrides {
  std::optional<double> dt;
  std::optional<std::size_t> grid_n;
};

struct RunOptions {
  /// Also integrate the wavefunction form and compare densities at every snapshot.
  bool cross_check = false;
};

struct RunReport {
  Scenario scenario;  ///< after overrides
  Trajectory trajectory;
  std::optional<StationaryState> reference;
  std::vector<std::filesystem::path> files;
  double wall_seconds = 0.0;
  Warnings warnings;
};

inline Scenario apply_overrides(Scenario sc, const RunOverrides& o) {
  if (o.dt) sc.solver.dt = *o.dt;
  if (o.grid_n) sc.grid = Grid1D(sc.grid.x_min(), sc.grid.x_max(), *o.grid_n);
  validate(sc);
  return sc;
}

/// Ground state used as the reference by the distance and Liapunov outputs.
inline StationaryState reference_state(const Scenario& sc) {
  if (std::holds_alternative<HarmonicPotential>(sc.params.potential))
    return oscillator_eigenstate(0, sc.grid, sc.params);
  const Field u = evaluate_potential(sc.params.potential, sc.grid);
  const double lowest = *std::min_element(u.begin(), u.end());
  StationarySearch search;
  search.max_candidates = 1;
  return solve_stationary(sc.params.potential, lowest, sc.grid, sc.params, search);
}

namespace detail {

inline bool needs_reference(const std::vector<Output>& outs) {
  for (Output o : outs)
    if (o == Output::L2Distance || o == Output::Liapunov || o == Output::SobolevDistance) return true;
  return false;
}

inline void put(std::FILE* f, double x) { std::fprintf(f, "%.17g", x); }

class TableFile {
public:
  explicit TableFile(const std::filesystem::path& path) : path_(path) {
    f_ = std::fopen(path.string().c_str(), "w");
    if (!f_) throw Error("cannot open " + path.string() + " for writing");
  }
  TableFile(const TableFile&) = delete;
  TableFile& operator=(const TableFile&) = delete;
  ~TableFile() {
    if (f_) std::fclose(f_);
  }

  std::FILE* get() { return f_; }

  void close() {
    const bool bad = std::ferror(f_) != 0;
    if (std::fclose(f_) != 0 || bad) {
      f_ = nullptr;
      throw Error("write to " + path_.string() + " failed");
    }
    f_ = nullptr;
  }

private:
  std::filesystem::path path_;
  std::FILE* f_ = nullptr;
};

inline void write_row(std::FILE* f, double t, std::span<const double> values) {
  put(f, t);
  for (double v : values) {
    std::fputc(' ', f);
    put(f, v);
  }
  std::fputc('\n', f);
}

}  // namespace detail

/// Value of one scalar output on a snapshot.
inline double scalar_output(Output o, const HydroState& h, const Scenario& sc,
                            const StationaryState* ref, const DampingSpec& damping) {
  switch (o) {
    case Output::L2Distance: return l2_distance(h.rho, ref->rho_s, sc.grid);
    case Output::Liapunov: return liapunov(h, *ref, sc.grid, sc.params);
    case Output::LiapunovRate: return liapunov_rate(h, sc.grid, sc.params, damping);
    case Output::Energy: return energy_expectation(h, sc.grid, sc.params);
    case Output::Norm: return norm(h, sc.grid);
    case Output::SobolevDistance: return sobolev_distance(h, *ref, sc.grid);
    default: throw ContractViolation("scalar_output: not a scalar output");
  }
}

/// Runs the hydrodynamic solver on a validated scenario and writes the tables
/// into out_dir (created if needed). Solver errors propagate.
inline RunReport run_scenario(const Scenario& scenario, const std::filesystem::path& out_dir,
                              const RunOptions& options = {}, const RunOverrides& overrides = {}) {
  RunReport rep;
  rep.scenario = apply_overrides(scenario, overrides);
  const Scenario& sc = rep.scenario;
  const auto start = std::chrono::steady_clock::now();

  if (detail::needs_reference(sc.outputs) || options.cross_check) rep.reference = reference_state(sc);
  const HydroState initial = make_initial(sc.initial, sc.grid);
  rep.trajectory = run(initial, sc.grid, sc.params, sc.solver, sc.t_end, sc.snapshot_every);
  rep.warnings = rep.trajectory.warnings;

  std::filesystem::create_directories(out_dir);
  const DampingSpec damping = resolve_damping(sc.solver, sc.params);
  const StationaryState* ref = rep.reference ? &*rep.reference : nullptr;
  for (Output o : sc.outputs) {
    const auto path = out_dir / (std::string(to_string(o)) + ".txt");
    detail::TableFile file(path);
    std::FILE* f = file.get();
    if (o == Output::Density || o == Output::Current) {
      std::fprintf(f, "# quantity=%s columns=t,node_0..node_%zu (x in nodes.txt)\n",
                   std::string(to_string(o)).c_str(), sc.grid.n() - 1);
      for (const HydroState& h : rep.trajectory.snapshots)
        detail::write_row(f, h.t, o == Output::Density ? h.rho : probability_current(h));
    } else {
      std::fprintf(f, "# quantity=%s columns=t,value\n", std::string(to_string(o)).c_str());
      for (const HydroState& h : rep.trajectory.snapshots) {
        const double value = scalar_output(o, h, sc, ref, damping);
        detail::write_row(f, h.t, std::span<const double>(&value, 1));
      }
    }
    file.close();
    rep.files.push_back(path);
  }
  {
    const auto path = out_dir / "nodes.txt";
    detail::TableFile file(path);
    std::fprintf(file.get(), "# quantity=nodes columns=i,x\n");
    for (std::size_t i = 0; i < sc.grid.n(); ++i) {
      std::fprintf(file.get(), "%zu ", i);
      detail::put(file.get(), sc.grid.x(i));
      std::fputc('\n', file.get());
    }
    file.close();
    rep.files.push_back(path);
  }

  if (options.cross_check) {
    const auto path = out_dir / "cross_check.txt";
    detail::TableFile file(path);
    std::fprintf(file.get(), "# quantity=cross_check columns=t,max_abs_density_difference,wavefunction_norm\n");
    const auto waves = sl_run(to_wavefn(initial, sc.grid, sc.params), sc.grid, sc.params,
                              rep.trajectory.dt, sc.t_end, sc.snapshot_every);
    if (waves.size() != rep.trajectory.snapshots.size())
      throw SolverFailure("cross-check: snapshot counts differ");
    for (std::size_t s = 0; s < waves.size(); ++s) {
      const HydroState& h = rep.trajectory.snapshots[s];
      double diff = 0.0;
      for (std::size_t i = 0; i < sc.grid.n(); ++i)
        diff = std::max(diff, std::abs(std::norm(waves[s].psi[i]) - h.rho[i]));
      const double row[2] = {diff, norm(waves[s], sc.grid)};
      detail::write_row(file.get(), h.t, row);
    }
    file.close();
    rep.files.push_back(path);
  }

  rep.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  const auto path = out_dir / "manifest.txt";
  detail::TableFile file(path);
  std::FILE* f = file.get();
  std::fprintf(f, "# run manifest\n");
  std::fprintf(f, "scenario = %s\n", sc.name.c_str());
  std::fprintf(f, "override.dt = %s\n", overrides.dt ? format_number(*overrides.dt).c_str() : "none");
  std::fprintf(f, "override.grid_n = %s\n",
               overrides.grid_n ? std::to_string(*overrides.grid_n).c_str() : "none");
  std::fprintf(f, "cross_check = %s\n", options.cross_check ? "true" : "false");
  std::fprintf(f, "initial.interpretation = density proportional to exp(-a (x - center)^2), a = %s%s\n",
               format_number(sc.initial.a).c_str(),
               sc.initial.given_as_variance ? " (given as variance 1/(2a))" : " (given as coefficient)");
  if (rep.reference)
    std::fprintf(f, "reference.E_s = %.17g\n", rep.reference->E_s);
  std::fprintf(f, "steps = %zu\n", rep.trajectory.steps);
  std::fprintf(f, "dt = %.17g\n", rep.trajectory.dt);
  std::fprintf(f, "stable_dt = %.17g\n", stable_dt(sc.grid, sc.params));
  std::fprintf(f, "snapshots = %zu\n", rep.trajectory.snapshots.size());
  std::fprintf(f, "wall_seconds = %.3f\n", rep.wall_seconds);
  for (const auto& w : rep.warnings) std::fprintf(f, "warning = %s\n", w.c_str());
  if (rep.reference)
    for (const auto& w : rep.reference->warnings) std::fprintf(f, "warning = %s\n", w.c_str());
  std::fprintf(f, "# effective configuration\n");
  std::istringstream cfg(emit_scenario(sc));
  for (std::string line; std::getline(cfg, line);) std::fprintf(f, "# | %s\n", line.c_str());
  file.close();
  rep.files.push_back(path);
  return rep;
}

}  // namespace qhd
