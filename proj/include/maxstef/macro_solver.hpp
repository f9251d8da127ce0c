#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "maxstef/grid.hpp"
#include "maxstef/mixture.hpp"

namespace maxstef {

// Limit-system fields on a 1D grid: per-species concentrations and the common
// temperature. c_tot is derived.
struct MacroState {
  double time = 0.0;
  std::vector<Field> c;  // [species][cell]
  Field T;               // [cell]

  Field ctot() const;
};

struct ClosureConfig {
  double alpha = 1.0;  // total-flux proportionality in sum_i J_i = -alpha grad c_tot

  void validate() const {
    if (!(alpha > 0.0)) throw ValidationError("closure.alpha must be > 0");
  }
};

enum class HeatScheme { kExplicit, kCrankNicolson };
enum class TemperatureScheme { kEulerianUpwind, kCharacteristics };

struct MacroTolerances {
  double ctot_T_variation = 1e-2;
  double nonnegativity_floor = 1e-12;
};

struct MacroSolverConfig {
  double dt = 0.0;  // 0 = auto from stability bounds
  double t_end = 0.1;
  double cfl_safety = 0.8;
  HeatScheme heat_scheme = HeatScheme::kCrankNicolson;
  TemperatureScheme temperature_scheme = TemperatureScheme::kEulerianUpwind;
  MacroTolerances tolerances;

  void validate() const {
    if (dt < 0.0) throw ValidationError("solver.dt must be positive or auto");
    if (!(t_end >= 0.0)) throw ValidationError("solver.t_end must be >= 0");
    if (!(cfl_safety > 0.0 && cfl_safety <= 1.0))
      throw ValidationError("solver.cfl_safety must lie in (0, 1]");
    if (!(tolerances.nonnegativity_floor > 0.0))
      throw ValidationError("solver.nonnegativity_floor must be > 0");
  }
};

// One diffusive step of d(c_tot)/dt = alpha * Laplacian(c_tot). Conserves the
// discrete total and respects the discrete maximum principle within the
// scheme's bound on r = alpha dt/dx^2 (1/2 explicit, 1 Crank-Nicolson);
// violating the bound rejects the step with a suggested dt.
Field heat_step(const Field& ctot, const Grid1D& grid, double alpha,
                HeatScheme scheme, double dt);

double heat_step_max_dt(const Grid1D& grid, double alpha, HeatScheme scheme);

// Advances T through d(T)/dt = (2/3 dt log c_tot) T + (5a/3 grad log c_tot).grad T
// with first-order upwinding of the advection and the local source integrated
// exactly via the ratio (ctot_new/ctot_old)^(2/3).
Field temperature_step_eulerian(const Field& temperature, const Field& ctot_old,
                                const Field& ctot_new, const Grid1D& grid,
                                double alpha, double dt);

// Advection field V = -(5 alpha / 3) grad log c_tot at cell centers.
Field advection_velocity(const Field& ctot, const Grid1D& grid, double alpha);

// Stored c_tot frames for characteristic tracing.
struct CtotHistory {
  std::vector<double> times;
  std::vector<Field> frames;
};

struct CharacteristicsResult {
  Field T;
  long clamped = 0;  // backward characteristics clamped at a no-flux wall
};

// Evaluates T(t,x) = T_in(X(0;t,x)) * exp((2/3) int_0^t dt(log ctot)(s, X(s)) ds)
// with a midpoint flow integrator through the stored frames, linear-in-space
// interpolation of V, and trapezoidal accumulation of the exponent.
CharacteristicsResult temperature_characteristics(const Field& initial_T,
                                                  const CtotHistory& history,
                                                  const Grid1D& grid, double alpha,
                                                  double t);

struct MacroFluxes {
  std::vector<Field> J;  // [species][face], face arrays sized n_cells+1
  double max_closure_residual = 0.0;
  double max_dropped_residual = 0.0;
  std::size_t dropped_species = 0;
};

// Per-face Maxwell-Stefan solve: n-1 flux-gradient relations (centered
// differences of c_i T on the right-hand side) plus the closure row
// sum_i J_i = -alpha * closure_gradient. The species with the largest
// cell-averaged concentration donates its (linearly dependent) row; its
// residual is reported. closure_gradient defaults to the centered gradient
// of the state's c_tot.
MacroFluxes flux_solve(const MacroState& state, const Mixture& mixture,
                       const DiffusionMatrix& diffusion, const ClosureConfig& closure,
                       const Grid1D& grid, double nonnegativity_floor = 1e-12,
                       const Field* closure_gradient = nullptr);

struct SpeciesStepResult {
  std::vector<Field> c;
  std::vector<double> clipped_mass;  // per species, mass moved by flooring
};

// Conservative finite-volume update of each species; values below the floor
// are clipped with mass-conserving redistribution. Clipping more than 1e-6 of
// a species' mass in one step aborts.
SpeciesStepResult species_step(const std::vector<Field>& c,
                               const std::vector<Field>& fluxes, const Grid1D& grid,
                               double dt, double nonnegativity_floor);

struct MacroDiagnosticsRow {
  double time = 0.0;
  std::vector<double> mass;  // per species, integral of c_i
  double min_ctot = 0.0;
  double max_ctot = 0.0;
  double ctot_T_variation = 0.0;
  double closure_residual = 0.0;
  double dropped_row_residual = 0.0;
  double clipped_mass = 0.0;
};

struct MacroSnapshot {
  MacroState state;
  std::vector<Field> J_cells;  // fluxes averaged to cell centers
};

struct MacroRunResult {
  std::vector<MacroSnapshot> snapshots;
  std::vector<MacroDiagnosticsRow> diagnostics;
  CtotHistory history;
  MacroState final_state;
  bool well_prepared = true;
  long characteristics_clamped = 0;
  double dt = 0.0;
};

// Thrown when a sub-step fails mid-run; carries everything computed up to the
// last valid state so callers can persist it.
struct MacroAborted : NumericalError {
  MacroAborted(const std::string& msg, MacroRunResult partial_result)
      : NumericalError(msg), partial(std::move(partial_result)) {}
  MacroRunResult partial;
};

// Time loop: heat step -> temperature step -> flux solve -> species step.
// Snapshot times are hit exactly by shortening steps.
MacroRunResult run_macro(const Mixture& mixture, const MacroState& initial,
                         const Grid1D& grid, const ClosureConfig& closure,
                         const MacroSolverConfig& config,
                         const std::vector<double>& snapshot_times = {},
                         std::size_t max_history_frames = 4096);

double relative_ctot_T_variation(const MacroState& state);

}  // namespace maxstef
