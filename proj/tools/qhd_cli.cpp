// qhd: run, list and validate scenarios.
//
//   qhd run <scenario-file|bundled-name>... [--out DIR] [--cross-check] [--dt X] [--grid-n N] [--parallel]
//   qhd list-scenarios
//   qhd validate <scenario-file|bundled-name>
//
// Exit codes: 0 success, 2 configuration error, 3 numerical divergence, 1 other failure.

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <mutex>
#include <sstream>
#include <string>
#include <vector>

#include "qhd/qhd.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitConfig = 2;
constexpr int kExitDivergence = 3;

std::mutex g_out_mutex;

void report(std::ostream& os, const std::string& msg) {
  std::lock_guard<std::mutex> lock(g_out_mutex);
  os << msg << std::endl;
}

// A path that exists is read as a file; otherwise the argument names a bundled scenario.
qhd::Scenario load(const std::string& arg) {
  if (std::filesystem::exists(arg)) {
    std::ifstream in(arg);
    if (!in) throw qhd::ConfigError("cannot read " + arg);
    std::ostringstream ss;
    ss << in.rdbuf();
    return qhd::parse_scenario(ss.str());
  }
  if (auto sc = qhd::find_bundled(arg)) return *sc;
  throw qhd::ConfigError("no such file or bundled scenario: " + arg);
}

int run_one(const std::string& arg, const std::filesystem::path& out_root, bool several,
            const qhd::RunOptions& opts, const qhd::RunOverrides& ov) {
  try {
    const qhd::Scenario sc = load(arg);
    const auto dir = several ? out_root / sc.name : out_root;
    const auto rep = qhd::run_scenario(sc, dir, opts, ov);
    std::ostringstream msg;
    msg << sc.name << ": " << rep.trajectory.steps << " steps, dt = " << rep.trajectory.dt << ", "
        << rep.trajectory.snapshots.size() << " snapshots, " << rep.wall_seconds << " s -> "
        << dir.string();
    for (const auto& w : rep.warnings) msg << "\n  warning: " << w;
    report(std::cout, msg.str());
    return kExitOk;
  } catch (const qhd::ConfigError& e) {
    report(std::cerr, arg + ": " + e.what());
    return kExitConfig;
  } catch (const qhd::DivergenceError& e) {
    std::ostringstream msg;
    msg << arg << ": diverged at t = " << e.time() << " (" << e.what() << ")";
    report(std::cerr, msg.str());
    return kExitDivergence;
  } catch (const std::exception& e) {
    report(std::cerr, arg + ": " + e.what());
    return kExitFailure;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dissipative Madelung-fluid simulator"};
  app.require_subcommand(1);

  std::vector<std::string> files;
  std::string out = "out";
  bool cross_check = false;
  bool parallel = false;
  double dt = 0.0;
  std::size_t grid_n = 0;
  auto* run = app.add_subcommand("run", "run one or more scenarios");
  run->add_option("scenario", files, "scenario file or bundled scenario name")->required();
  run->add_option("--out", out, "output directory (one subdirectory per scenario when several)");
  run->add_flag("--cross-check", cross_check, "also run the wavefunction solver and compare");
  auto* dt_opt = run->add_option("--dt", dt, "time step, overrides the file")->check(CLI::PositiveNumber);
  auto* n_opt = run->add_option("--grid-n", grid_n, "node count, overrides the file")->check(CLI::Range(8, 1 << 24));
  run->add_flag("--parallel", parallel, "run several scenarios concurrently");

  app.add_subcommand("list-scenarios", "print the bundled scenario names");

  std::string vfile;
  auto* val = app.add_subcommand("validate", "parse and check a scenario");
  val->add_option("scenario", vfile, "scenario file or bundled scenario name")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitConfig;
  }

  if (app.got_subcommand("list-scenarios")) {
    for (const auto& [name, text] : qhd::bundled_scenarios()) std::cout << name << "\n";
    return kExitOk;
  }

  if (app.got_subcommand("validate")) {
    try {
      const qhd::Scenario sc = load(vfile);
      std::cout << sc.name << ": ok\n";
      return kExitOk;
    } catch (const qhd::ConfigError& e) {
      std::cerr << vfile << ": " << e.what() << "\n";
      return kExitConfig;
    }
  }

  qhd::RunOptions opts;
  opts.cross_check = cross_check;
  qhd::RunOverrides ov;
  if (*dt_opt) ov.dt = dt;
  if (*n_opt) ov.grid_n = grid_n;
  const bool several = files.size() > 1;

  std::vector<int> codes;
  if (parallel && several) {
    std::vector<std::future<int>> jobs;
    for (const auto& f : files)
      jobs.push_back(std::async(std::launch::async, run_one, f, out, several, opts, ov));
    for (auto& j : jobs) codes.push_back(j.get());
  } else {
    for (const auto& f : files) codes.push_back(run_one(f, out, several, opts, ov));
  }
  // Worst outcome wins: configuration problems before divergence before other failures.
  for (int c : {kExitConfig, kExitDivergence, kExitFailure})
    if (std::find(codes.begin(), codes.end(), c) != codes.end()) return c;
  return kExitOk;
}
