// The OpenMP kernels must agree with their serial reference paths.

#include <cmath>
#include <numbers>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "doctest.h"
#include "maxstef/collision_moments.hpp"
#include "maxstef/moment_solver.hpp"

using namespace maxstef;

namespace {

Mixture probe_mixture() {
  return Mixture({{"A", 1.0}, {"B", 2.3}},
                 {{{0, 1}, AngularKernel::constant(0.35)}});
}

MaxwellianState probe_state() {
  MaxwellianState st;
  st.concentration = {0.9, 1.4};
  st.velocity = {Vec3{0.4, -0.2, 0.1}, Vec3{-0.3, 0.2, 0.5}};
  st.temperature = {1.2, 0.8};
  return st;
}

}  // namespace

TEST_CASE("oracle parallel path matches the serial reference") {
  const Mixture mix = probe_mixture();
  const MaxwellianState st = probe_state();
  OracleResolution serial, parallel;
  serial.hermite_per_axis = parallel.hermite_per_axis = 10;
  serial.parallel = false;
  parallel.parallel = true;

  const auto vs = collision_moment_oracle(mix, st, 0, 1, OracleWeight::kVelocity,
                                          serial, 0.25);
  const auto vp = collision_moment_oracle(mix, st, 0, 1, OracleWeight::kVelocity,
                                          parallel, 0.25);
  for (int d = 0; d < 3; ++d)
    CHECK(std::abs(vs.vector[d] - vp.vector[d]) <=
          1e-13 * (std::abs(vs.vector[d]) + 1e-12));

  const auto es = collision_moment_oracle(mix, st, 0, 1, OracleWeight::kSpeedSquared,
                                          serial, 0.25);
  const auto ep = collision_moment_oracle(mix, st, 0, 1, OracleWeight::kSpeedSquared,
                                          parallel, 0.25);
  CHECK(std::abs(es.scalar - ep.scalar) <= 1e-13 * std::abs(es.scalar));

  // The strong-form residual is itself a near-cancellation; compare the two
  // summation orders on the scale of the summed magnitudes, not the residual.
  const double zs = collision_zeroth_strong(mix, st, 0, 1, serial, 0.25);
  const double zp = collision_zeroth_strong(mix, st, 0, 1, parallel, 0.25);
  CHECK(std::abs(zs - zp) <= 1e-12);
}

TEST_CASE("relaxation is bitwise identical across thread counts") {
  const Mixture mix = probe_mixture();
  KineticMomentState base;
  base.epsilon = 0.1;
  const std::size_t n = 257;  // odd size to exercise uneven chunking
  base.c.assign(2, Field(n));
  base.u.assign(2, Field(n));
  base.T.assign(2, Field(n));
  for (std::size_t i = 0; i < n; ++i) {
    const double x = static_cast<double>(i) / n;
    base.c[0][i] = 0.6 + 0.3 * std::sin(2.0 * std::numbers::pi * x);
    base.c[1][i] = 1.1 - 0.3 * std::sin(2.0 * std::numbers::pi * x);
    base.u[0][i] = 0.2 * std::cos(2.0 * std::numbers::pi * x);
    base.u[1][i] = -0.15 * std::cos(2.0 * std::numbers::pi * x);
    base.T[0][i] = 1.0 + 0.1 * std::sin(4.0 * std::numbers::pi * x);
    base.T[1][i] = 0.9;
  }

#ifdef _OPENMP
  const int saved = omp_get_max_threads();
  KineticMomentState one = base;
  omp_set_num_threads(1);
  relaxation_substep(one, mix, 1e-3);
  KineticMomentState many = base;
  omp_set_num_threads(saved);
  relaxation_substep(many, mix, 1e-3);
  for (int s = 0; s < 2; ++s)
    for (std::size_t i = 0; i < n; ++i) {
      CHECK(one.u[s][i] == many.u[s][i]);
      CHECK(one.T[s][i] == many.T[s][i]);
    }
#else
  KineticMomentState copy = base;
  relaxation_substep(copy, mix, 1e-3);
  CHECK(copy.T[0][0] > 0.0);
#endif
}
