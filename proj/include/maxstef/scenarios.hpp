#pragma once

#include <string>
#include <vector>

#include "maxstef/macro_solver.hpp"
#include "maxstef/moment_solver.hpp"

namespace maxstef {

enum class ProfileShape { kUniform, kGaussian, kStep, kTwoBump };

ProfileShape profile_shape_from_name(const std::string& name);
std::string profile_shape_name(ProfileShape shape);

struct SpeciesProfile {
  ProfileShape shape = ProfileShape::kUniform;
  double base = 1.0;
  double amplitude = 0.0;
  double center = 0.5;
  double width = 0.1;
  double center2 = 0.75;  // second bump position (two-bump only)
};

enum class VelocityInit { kBalance, kZero };

// Initial-data recipe: per-species concentration profiles, well-prepared
// temperature T = g0 / c_tot, and for finite-eps runs an optional pairwise
// temperature split (preserving sum_i c_i T_i) plus the velocity policy.
struct Scenario {
  std::string name = "scenario";
  std::vector<SpeciesProfile> profiles;          // ordered as the mixture species
  std::vector<std::string> profile_species;      // species name per profile
  double g0 = 1.0;
  double temp_split = 0.0;
  VelocityInit velocity_init = VelocityInit::kBalance;
};

double evaluate_profile(const SpeciesProfile& profile, double x);

MacroState build_macro_initial(const Mixture& mixture, const Grid1D& grid,
                               const Scenario& scenario);

// Moment initial data: same concentrations, split temperatures, and
// velocities either zero or on the Maxwell-Stefan balance of the macro
// initial data (J_i / c_i with fluxes from flux_solve under the closure).
KineticMomentState build_moment_initial(const Mixture& mixture, const Grid1D& grid,
                                        const Scenario& scenario,
                                        const ClosureConfig& closure, double epsilon);

}  // namespace maxstef
