// Damped oscillator from a displaced packet at rest: prints the distance to the
// ground state, the Liapunov functional and its rate at every snapshot.
//
//   damped_oscillator [k] [t_end] [snapshot_every]      (defaults 0.1 20 1)

#include <cstdio>
#include <cstdlib>

#include "qhd/qhd.hpp"

int main(int argc, char** argv) {
  const double k = argc > 1 ? std::atof(argv[1]) : 0.1;
  const double t_end = argc > 2 ? std::atof(argv[2]) : 20.0;
  const double every = argc > 3 ? std::atof(argv[3]) : 1.0;

  const qhd::Grid1D grid(-30.0, 30.0, 1201);
  qhd::Params params;
  params.k = k;
  params.potential = qhd::HarmonicPotential{0.02};

  const qhd::StationaryState ground = qhd::oscillator_eigenstate(0, grid, params);
  const qhd::HydroState initial = qhd::make_initial({-2.0, 0.05}, grid);
  const qhd::DampingSpec damping = qhd::DampingSpec::linear(k);

  std::printf("# E_s = %.10f, dt = %.3g\n", ground.E_s, qhd::stable_dt(grid, params));
  std::printf("%8s %12s %12s %12s %12s\n", "t", "L2", "L", "dL/dt", "max|j|");
  try {
    qhd::run(initial, grid, params, {}, t_end, every, [&](const qhd::HydroState& h) {
      std::printf("%8.3f %12.6f %12.6f %12.6f %12.6f\n", h.t,
                  qhd::l2_distance(h.rho, ground.rho_s, grid),
                  qhd::liapunov(h, ground, grid, params),
                  qhd::liapunov_rate(h, grid, params, damping),
                  qhd::max_abs(qhd::probability_current(h)));
    });
  } catch (const qhd::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
