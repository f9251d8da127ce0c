#include <cmath>
#include <fstream>
#include <iterator>

#include "doctest.h"
#include "maxstef/config.hpp"
#include "maxstef/csv_io.hpp"
#include "maxstef/scenarios.hpp"

using namespace maxstef;

namespace {

const char* kMinimalConfig = R"cfg(
[mixture]
species = A 1
species = B 2
kernel = A B constant 0.5
)cfg";

const char* kFullConfig = R"cfg(
[mixture]
k_boltzmann = 1.5
species = A 1
species = B 2
kernel = A B poly 0.375 0 0.375

[grid]
x_min = 0
x_max = 2
n_cells = 64
boundary = no-flux

[scenario]
name = demo
profile = A gaussian 0.5 0.3 1.0 0.2
profile = B two-bump 0.8 -0.1 0.6 0.15 1.4
g0 = 2
temp_split = 0.05
velocity_init = zero

[solver]
alpha = 0.7
dt = 1e-5
t_end = 0.02
cfl_safety = 0.5
heat_scheme = explicit
temperature_scheme = characteristics
transport_scheme = classic
epsilon = 0.1
epsilons = 0.2 0.1 0.05
t_measure = 0.01
ctot_t_variation = 0.02
nonnegativity_floor = 1e-11
quadrature_order = 8

[output]
directory = results
snapshot_times = 0 0.01 0.02
precision = 10
)cfg";

}  // namespace

TEST_CASE("minimal config materializes documented defaults") {
  const RunConfig cfg = parse_config(kMinimalConfig);
  CHECK(cfg.constants.k_boltzmann == 1.0);
  CHECK(cfg.closure.alpha == 1.0);
  CHECK(cfg.grid.n_cells == 256);
  CHECK(cfg.grid.boundary == Boundary::kPeriodic);
  CHECK(cfg.output.precision == 12);
  CHECK(cfg.macro.heat_scheme == HeatScheme::kCrankNicolson);
  CHECK(cfg.scenario.profiles.size() == 2);
  CHECK(cfg.scenario.profiles[0].shape == ProfileShape::kUniform);
  // Default snapshots cover start and end of the run.
  REQUIRE(cfg.output.snapshot_times.size() == 2);
  CHECK(cfg.output.snapshot_times[0] == 0.0);
  CHECK(cfg.output.snapshot_times[1] == cfg.macro.t_end);
}

TEST_CASE("config validation names the offending field") {
  CHECK_THROWS_WITH_AS(parse_config("[mixture]\nspecies = A -1\nspecies = B 2\n"
                                    "kernel = A B constant 0.5\n"),
                       doctest::Contains("mixture.species[0].mass"), ValidationError);
  CHECK_THROWS_WITH_AS(parse_config("[mixture]\nspecies = A 1\nspecies = B 2\n"
                                    "kernel = A B constant 0.5\n[grid]\nn_cells = 4\n"),
                       doctest::Contains("grid.n_cells"), ValidationError);
  CHECK_THROWS_WITH_AS(parse_config("[mixture]\nspecies = A 1\nspecies = B 2\n"
                                    "kernel = A B constant 0.5\n[solver]\nfoo = 1\n"),
                       doctest::Contains("solver.foo"), ValidationError);
  CHECK_THROWS_WITH_AS(parse_config("[mixture]\nspecies = A 1\nspecies = B 2\n"
                                    "kernel = A B constant 0.5\n[output]\n"
                                    "precision = 20\n"),
                       doctest::Contains("output.precision"), ValidationError);
}

TEST_CASE("parse-emit round trip is stable") {
  const RunConfig cfg = parse_config(kFullConfig);
  const std::string emitted = emit_config(cfg);
  const RunConfig reparsed = parse_config(emitted);
  CHECK(emit_config(reparsed) == emitted);

  // Spot-check resolved values survived.
  CHECK(reparsed.constants.k_boltzmann == 1.5);
  CHECK(reparsed.grid.boundary == Boundary::kNoFlux);
  CHECK(reparsed.scenario.profiles[1].shape == ProfileShape::kTwoBump);
  CHECK(reparsed.scenario.profiles[1].center2 == 1.4);
  CHECK(reparsed.macro.dt == 1e-5);
  CHECK(reparsed.moment.transport == TransportMode::kClassic);
  CHECK(reparsed.epsilons.size() == 3);
}

TEST_CASE("scenario builders produce well-prepared states") {
  const RunConfig cfg = parse_config(kFullConfig);
  const Mixture mix = cfg.build_mixture();
  const MacroState macro = build_macro_initial(mix, cfg.grid, cfg.scenario);
  // c_tot * T = g0 everywhere.
  const Field ctot = macro.ctot();
  for (std::size_t i = 0; i < cfg.grid.n_cells; ++i)
    CHECK(ctot[i] * macro.T[i] == doctest::Approx(2.0).epsilon(1e-13));

  const KineticMomentState moment =
      build_moment_initial(mix, cfg.grid, cfg.scenario, cfg.closure, 0.1);
  // Temperature split preserves sum c_i T_i and splits by the requested gap.
  for (std::size_t i = 0; i < cfg.grid.n_cells; ++i) {
    const double sum_ct = moment.c[0][i] * moment.T[0][i] +
                          moment.c[1][i] * moment.T[1][i];
    CHECK(sum_ct == doctest::Approx(2.0).epsilon(1e-13));
    CHECK(moment.T[0][i] - moment.T[1][i] ==
          doctest::Approx(0.05 * macro.T[i]).epsilon(1e-12));
  }
  // velocity_init = zero honored.
  for (double u : moment.u[0]) CHECK(u == 0.0);
}

TEST_CASE("balance velocities reproduce the macro fluxes") {
  const RunConfig cfg = parse_config(kMinimalConfig);
  RunConfig modified = cfg;
  modified.scenario.profiles[0] = {ProfileShape::kGaussian, 0.5, 0.2, 0.5, 0.15, 0.0};
  modified.scenario.velocity_init = VelocityInit::kBalance;
  const Mixture mix = modified.build_mixture();
  const KineticMomentState moment =
      build_moment_initial(mix, modified.grid, modified.scenario, modified.closure, 0.1);
  double max_u = 0.0;
  for (double u : moment.u[0]) max_u = std::max(max_u, std::abs(u));
  CHECK(max_u > 1e-3);  // fluxes flow from the first species' bump
}

TEST_CASE("unknown profile shape and species are rejected") {
  CHECK_THROWS_WITH_AS(
      parse_config("[mixture]\nspecies = A 1\nspecies = B 2\n"
                   "kernel = A B constant 0.5\n[scenario]\n"
                   "profile = A blob 1.0\nprofile = B uniform 1.0\n"),
      doctest::Contains("unknown profile shape"), ValidationError);
  CHECK_THROWS_WITH_AS(
      parse_config("[mixture]\nspecies = A 1\nspecies = B 2\n"
                   "kernel = A B constant 0.5\n[scenario]\n"
                   "profile = C uniform 1.0\nprofile = B uniform 1.0\n"),
      doctest::Contains("unknown species"), ValidationError);
}

TEST_CASE("step profiles interpolate between base and base plus amplitude") {
  SpeciesProfile p{ProfileShape::kStep, 1.0, 0.6, 0.5, 0.05, 0.0};
  CHECK(evaluate_profile(p, 0.0) == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(evaluate_profile(p, 1.0) == doctest::Approx(1.6).epsilon(1e-6));
  CHECK(evaluate_profile(p, 0.5) == doctest::Approx(1.3).epsilon(1e-12));
  CHECK(evaluate_profile(p, 0.4) < evaluate_profile(p, 0.6));
}

TEST_CASE("table kernels flow through the config pipeline") {
  const RunConfig cfg = parse_config(
      "[mixture]\nspecies = A 1\nspecies = B 2\n"
      "kernel = A B table -1:0.5 0:0.75 1:0.5\n");
  const Mixture mix = cfg.build_mixture();
  // Exact integral of the symmetric tent is 1.25; Gauss-Legendre converges
  // slowly across the kink, so only table-level accuracy is expected.
  CHECK(mix.kernel_norm(0, 1) == doctest::Approx(1.25).epsilon(1e-3));
  const std::string emitted = emit_config(cfg);
  CHECK(emit_config(parse_config(emitted)) == emitted);
}

TEST_CASE("csv formatting is canonical") {
  CHECK(format_value(0.0, 12) == "0");
  CHECK(format_value(-0.0, 12) == "0");
  CHECK(format_value(1.5, 12) == "1.5");
  CHECK(format_value(1.0 / 3.0, 6) == "0.333333");
}

TEST_CASE("csv writers emit headers for empty runs and pinned row counts") {
  write_macro_diagnostics_csv("empty_diag.csv", {}, 2, 12);
  std::ifstream in("empty_diag.csv", std::ios::binary);
  std::string content((std::istreambuf_iterator<char>(in)),
                      std::istreambuf_iterator<char>());
  CHECK(content == "t,mass_1,mass_2,min_ctot,max_ctot,ctotT_variation,closure_residual\n");

  ConvergenceReport report;
  for (double eps : {0.1, 0.05, 0.025}) {
    ConvergenceReportRow row;
    row.epsilon = eps;
    row.temp_gap = eps * eps;
    report.rows.push_back(row);
  }
  report.gap_order = 2.0;
  write_sweep_report_csv("report_rows.csv", report, 12);
  std::ifstream rin("report_rows.csv", std::ios::binary);
  int lines = 0;
  std::string line;
  while (std::getline(rin, line)) ++lines;
  CHECK(lines == 5);  // header + 3 data rows + summary
}
