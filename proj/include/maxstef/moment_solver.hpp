#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "maxstef/grid.hpp"
#include "maxstef/macro_solver.hpp"
#include "maxstef/mixture.hpp"

namespace maxstef {

// Per-species moment fields of the finite-eps system on a 1D grid; velocities
// are the 1D bulk components of the Maxwellian ansatz.
struct KineticMomentState {
  double time = 0.0;
  double epsilon = 0.1;
  std::vector<Field> c;  // [species][cell]
  std::vector<Field> u;
  std::vector<Field> T;
};

enum class TransportMode {
  kClassic,  // full flux including the 1/eps^2 pressure, LLF at acoustic speeds
  kAp,       // advective flux only; pressure handled inside the relaxation
  kAuto,
};

struct MomentSolverConfig {
  double dt = 0.0;  // 0 = auto
  double t_end = 0.05;
  double cfl_safety = 0.8;
  TransportMode transport = TransportMode::kAuto;
  double nonnegativity_floor = 1e-12;

  void validate() const {
    if (dt < 0.0) throw ValidationError("moment solver: dt must be positive or auto");
    if (!(t_end >= 0.0)) throw ValidationError("moment solver: t_end must be >= 0");
    if (!(cfl_safety > 0.0 && cfl_safety <= 1.0))
      throw ValidationError("moment solver: cfl_safety must lie in (0, 1]");
  }
};

TransportMode resolve_transport_mode(TransportMode requested, double epsilon,
                                     const Mixture& mixture,
                                     const KineticMomentState& state);

// Optional manufactured source: fills per-species (mass, momentum, energy)
// source fields at time t. Used by verification tests.
using MomentSource =
    std::function<void(double t, std::vector<Field>& s_mass, std::vector<Field>& s_mom,
                       std::vector<Field>& s_energy)>;

// Conservative finite-volume transport update (local Lax-Friedrichs fluxes,
// Heun time stepping), exchange terms excluded. In kAp mode the stiff
// pressure gradient is excluded as well; it belongs to the relaxation.
void transport_substep(KineticMomentState& state, const Mixture& mixture,
                       const Grid1D& grid, double dt, TransportMode mode,
                       const MomentSource& source = nullptr);

// Largest stable dt for the transport substep in the given mode.
double transport_max_dt(const KineticMomentState& state, const Mixture& mixture,
                        const Grid1D& grid, TransportMode mode);

struct RelaxationAudit {
  double max_energy_defect = 0.0;    // |collisional total-energy change| per cell
  double max_momentum_defect = 0.0;  // |momentum change - pressure impulse|
  long singular_cells = 0;           // cells with no friction at all
};

// Per-cell exact relaxation of velocities and temperatures at frozen
// concentrations: friction and temperature exchange integrated by
// eigendecomposition, frictional heating added as the exact time integral of
// the pairwise dissipation (equals the kinetic-energy loss identically).
// `pressure_forcing`, when present (kAp mode), is integrated as a frozen
// affine term; its work is routed to the transport enthalpy flux by
// neutralizing it in the temperature update, so the substep changes total
// energy only collisionally (i.e. not at all).
RelaxationAudit relaxation_substep(KineticMomentState& state, const Mixture& mixture,
                                   double dt,
                                   const std::vector<Field>* pressure_forcing = nullptr,
                                   double nonnegativity_floor = 1e-12);

// Centered-difference pressure forcing h_i = -k/(m_i c_i) d(c_i T_i)/dx.
std::vector<Field> pressure_forcing_fields(const KineticMomentState& state,
                                           const Mixture& mixture, const Grid1D& grid,
                                           double nonnegativity_floor);

// Strang step: relaxation(dt/2) -> transport(dt) -> relaxation(dt/2).
RelaxationAudit moment_step(KineticMomentState& state, const Mixture& mixture,
                            const Grid1D& grid, double dt, TransportMode mode,
                            double nonnegativity_floor = 1e-12);

struct MomentDiagnosticsRow {
  double time = 0.0;
  std::vector<double> mass;
  double total_momentum = 0.0;
  double total_energy = 0.0;  // sum of 3 k c_i T_i + eps^2 m_i c_i u_i^2
  double max_temp_gap = 0.0;
  double max_velocity_gap = 0.0;
  double energy_audit = 0.0;    // accumulated collisional energy defect
  double momentum_audit = 0.0;  // accumulated forcing-impulse defect
};

struct MomentRunResult {
  std::vector<KineticMomentState> snapshots;
  std::vector<MomentDiagnosticsRow> diagnostics;
  KineticMomentState final_state;
  TransportMode mode_used = TransportMode::kClassic;
  double dt = 0.0;
  long singular_relaxations = 0;
};

struct MomentAborted : NumericalError {
  MomentAborted(const std::string& msg, MomentRunResult partial_result)
      : NumericalError(msg), partial(std::move(partial_result)) {}
  MomentRunResult partial;
};

MomentRunResult run_moment(const Mixture& mixture, const KineticMomentState& initial,
                           const Grid1D& grid, const MomentSolverConfig& config,
                           const std::vector<double>& snapshot_times = {});

// Per-species L2 distances between a finite-eps state and a macro snapshot on
// the same grid, relative to the macro field norms. The finite-eps flux is
// c_i u_i; macro face fluxes are averaged to cells.
struct LimitDistances {
  std::vector<double> dist_c;
  std::vector<double> dist_J;
  std::vector<double> dist_T;
  bool triangle_consistent = true;

  double max_c() const;
  double max_J() const;
  double max_T() const;
};

LimitDistances compare_to_limit(const KineticMomentState& moment_state,
                                const MacroSnapshot& macro_snapshot,
                                const Grid1D& grid);

struct EpsSweepConfig {
  std::vector<double> epsilons;  // strictly positive, strictly decreasing, >= 3
  double t_measure = 0.05;

  void validate() const;
};

struct ConvergenceReportRow {
  double epsilon = 0.0;
  double temp_gap = 0.0;
  double fitted_order_running = 0.0;  // slope using rows up to this one
  double dist_c = 0.0;
  double dist_J = 0.0;
  double dist_T = 0.0;
};

struct ConvergenceReport {
  std::vector<ConvergenceReportRow> rows;
  double gap_order = 0.0;  // least-squares log-log slope over all rows
  bool gap_monotone = true;
  bool distances_monotone = true;
  bool inconclusive = false;  // non-monotone gap sequence
};

// Runs the moment solver once per epsilon from shared (eps-independent)
// initial fields, measures the temperature gap at t_measure, and compares
// against a macro reference run of the same scenario.
ConvergenceReport eps_sweep(const Mixture& mixture, const Grid1D& grid,
                            const KineticMomentState& initial_template,
                            const MomentSolverConfig& moment_config,
                            const MacroState& macro_initial,
                            const ClosureConfig& closure,
                            const MacroSolverConfig& macro_config,
                            const EpsSweepConfig& sweep);

}  // namespace maxstef
