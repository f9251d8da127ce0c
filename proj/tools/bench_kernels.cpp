// Benchmark of the OpenMP-parallel kernels against their serial paths:
// the collision-moment quadrature sweep and the per-cell relaxation solve.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <numbers>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "maxstef/collision_moments.hpp"
#include "maxstef/moment_solver.hpp"

using namespace maxstef;

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

int main() {
  const Mixture mix({{"A", 1.0}, {"B", 2.0}},
                    {{{0, 1}, AngularKernel::constant(1.0 / std::numbers::pi)}});
  MaxwellianState st;
  st.concentration = {1.0, 1.2};
  st.velocity = {Vec3{0.3, -0.1, 0.2}, Vec3{-0.2, 0.4, 0.0}};
  st.temperature = {1.1, 0.9};

#ifdef _OPENMP
  const int threads = omp_get_max_threads();
#else
  const int threads = 1;
#endif
  std::printf("kernel benchmark (max threads: %d)\n", threads);
  std::printf("%-28s %12s %12s %8s\n", "kernel", "serial [s]", "parallel [s]",
              "speedup");

  {
    OracleResolution res;
    res.hermite_per_axis = 16;
    res.parallel = false;
    auto t0 = std::chrono::steady_clock::now();
    const auto serial =
        collision_moment_oracle(mix, st, 0, 1, OracleWeight::kSpeedSquared, res, 0.3);
    const double t_serial = seconds_since(t0);
    res.parallel = true;
    t0 = std::chrono::steady_clock::now();
    const auto parallel =
        collision_moment_oracle(mix, st, 0, 1, OracleWeight::kSpeedSquared, res, 0.3);
    const double t_parallel = seconds_since(t0);
    std::printf("%-28s %12.4f %12.4f %7.2fx   (values agree to %.1e)\n",
                "oracle weak form (16/axis)", t_serial, t_parallel,
                t_serial / t_parallel,
                std::abs(serial.scalar - parallel.scalar) /
                    std::max(std::abs(serial.scalar), 1e-300));
  }

  {
    OracleResolution res;
    res.hermite_per_axis = 12;
    res.sphere_polar = 12;
    res.sphere_azimuth = 12;
    res.parallel = false;
    auto t0 = std::chrono::steady_clock::now();
    const double serial = collision_zeroth_strong(mix, st, 0, 1, res, 0.3);
    const double t_serial = seconds_since(t0);
    res.parallel = true;
    t0 = std::chrono::steady_clock::now();
    const double parallel = collision_zeroth_strong(mix, st, 0, 1, res, 0.3);
    const double t_parallel = seconds_since(t0);
    std::printf("%-28s %12.4f %12.4f %7.2fx   (residuals %.2e / %.2e)\n",
                "oracle strong form (12/axis)", t_serial, t_parallel,
                t_serial / t_parallel, serial, parallel);
  }

  {
    Grid1D grid{0.0, 1.0, 32768, Boundary::kPeriodic};
    KineticMomentState state;
    state.epsilon = 0.05;
    state.c.assign(2, Field(grid.n_cells));
    state.u.assign(2, Field(grid.n_cells));
    state.T.assign(2, Field(grid.n_cells));
    for (std::size_t i = 0; i < grid.n_cells; ++i) {
      const double x = grid.cell_center(i);
      state.c[0][i] = 1.0 + 0.3 * std::sin(2.0 * std::numbers::pi * x);
      state.c[1][i] = 1.3 - 0.3 * std::sin(2.0 * std::numbers::pi * x);
      state.u[0][i] = 0.2 * std::cos(2.0 * std::numbers::pi * x);
      state.u[1][i] = -0.1 * std::cos(2.0 * std::numbers::pi * x);
      state.T[0][i] = 1.0 + 0.05 * std::sin(4.0 * std::numbers::pi * x);
      state.T[1][i] = 1.1;
    }
    // The relaxation loop parallelizes over cells through OpenMP; compare a
    // single-thread pass (via omp_set_num_threads) against the full one.
    KineticMomentState a = state;
    auto t0 = std::chrono::steady_clock::now();
#ifdef _OPENMP
    omp_set_num_threads(1);
#endif
    relaxation_substep(a, mix, 1e-4);
    const double t_serial = seconds_since(t0);
    KineticMomentState b = state;
#ifdef _OPENMP
    omp_set_num_threads(threads);
#endif
    t0 = std::chrono::steady_clock::now();
    relaxation_substep(b, mix, 1e-4);
    const double t_parallel = seconds_since(t0);
    double max_diff = 0.0;
    for (std::size_t i = 0; i < grid.n_cells; ++i)
      max_diff = std::max(max_diff, std::abs(a.T[0][i] - b.T[0][i]));
    std::printf("%-28s %12.4f %12.4f %7.2fx   (fields agree to %.1e)\n",
                "relaxation (32768 cells)", t_serial, t_parallel,
                t_serial / t_parallel, max_diff);
  }
  return 0;
}
