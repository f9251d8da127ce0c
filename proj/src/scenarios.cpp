#include "maxstef/scenarios.hpp"

#include <cmath>
#include <sstream>

namespace maxstef {

ProfileShape profile_shape_from_name(const std::string& name) {
  if (name == "uniform") return ProfileShape::kUniform;
  if (name == "gaussian") return ProfileShape::kGaussian;
  if (name == "step") return ProfileShape::kStep;
  if (name == "two-bump") return ProfileShape::kTwoBump;
  throw ValidationError("scenario: unknown profile shape '" + name +
                        "' (expected uniform, gaussian, step or two-bump)");
}

std::string profile_shape_name(ProfileShape shape) {
  switch (shape) {
    case ProfileShape::kUniform: return "uniform";
    case ProfileShape::kGaussian: return "gaussian";
    case ProfileShape::kStep: return "step";
    case ProfileShape::kTwoBump: return "two-bump";
  }
  return "uniform";
}

double evaluate_profile(const SpeciesProfile& p, double x) {
  auto bump = [&](double center) {
    const double d = (x - center) / p.width;
    return std::exp(-0.5 * d * d);
  };
  switch (p.shape) {
    case ProfileShape::kUniform:
      return p.base;
    case ProfileShape::kGaussian:
      return p.base + p.amplitude * bump(p.center);
    case ProfileShape::kStep:
      return p.base + p.amplitude * 0.5 * (1.0 + std::tanh((x - p.center) / p.width));
    case ProfileShape::kTwoBump:
      return p.base + p.amplitude * (bump(p.center) + bump(p.center2));
  }
  return p.base;
}

namespace {

std::vector<Field> build_concentrations(const Mixture& mixture, const Grid1D& grid,
                                        const Scenario& scenario) {
  grid.validate();
  if (scenario.profiles.size() != mixture.size()) {
    std::ostringstream os;
    os << "scenario: " << scenario.profiles.size() << " profiles for "
       << mixture.size() << " species";
    throw ValidationError(os.str());
  }
  if (!(scenario.g0 > 0.0)) throw ValidationError("scenario.g0 must be > 0");
  std::vector<Field> c(mixture.size(), Field(grid.n_cells));
  for (std::size_t s = 0; s < mixture.size(); ++s) {
    for (std::size_t i = 0; i < grid.n_cells; ++i) {
      const double v = evaluate_profile(scenario.profiles[s], grid.cell_center(i));
      if (!(v > 0.0) || !std::isfinite(v)) {
        std::ostringstream os;
        os << "scenario: species " << mixture.species(s).name
           << " profile is not positive at x = " << grid.cell_center(i);
        throw ValidationError(os.str());
      }
      c[s][i] = v;
    }
  }
  return c;
}

}  // namespace

MacroState build_macro_initial(const Mixture& mixture, const Grid1D& grid,
                               const Scenario& scenario) {
  MacroState state;
  state.c = build_concentrations(mixture, grid, scenario);
  const Field ctot = state.ctot();
  state.T.resize(grid.n_cells);
  for (std::size_t i = 0; i < grid.n_cells; ++i) state.T[i] = scenario.g0 / ctot[i];
  return state;
}

KineticMomentState build_moment_initial(const Mixture& mixture, const Grid1D& grid,
                                        const Scenario& scenario,
                                        const ClosureConfig& closure, double epsilon) {
  const MacroState macro = build_macro_initial(mixture, grid, scenario);
  const std::size_t n_s = mixture.size();
  const Field ctot = macro.ctot();

  KineticMomentState state;
  state.epsilon = epsilon;
  state.c = macro.c;

  // Pairwise split against species 0 preserving sum_i c_i T_i.
  state.T.assign(n_s, Field(grid.n_cells));
  const double split = scenario.temp_split;
  for (std::size_t i = 0; i < grid.n_cells; ++i) {
    const double rest = ctot[i] - macro.c[0][i];
    for (std::size_t s = 0; s < n_s; ++s) {
      const double offset = (s == 0) ? split * rest / ctot[i]
                                     : -split * macro.c[0][i] / ctot[i];
      state.T[s][i] = macro.T[i] * (1.0 + offset);
      if (!(state.T[s][i] > 0.0))
        throw ValidationError("scenario: temperature split drives T nonpositive");
    }
  }

  state.u.assign(n_s, Field(grid.n_cells, 0.0));
  if (scenario.velocity_init == VelocityInit::kBalance) {
    const DiffusionMatrix diffusion = build_diffusion_matrix(mixture);
    const MacroFluxes fluxes = flux_solve(macro, mixture, diffusion, closure, grid);
    for (std::size_t s = 0; s < n_s; ++s)
      for (std::size_t i = 0; i < grid.n_cells; ++i) {
        const double j_cell = 0.5 * (fluxes.J[s][i] + fluxes.J[s][i + 1]);
        state.u[s][i] = j_cell / macro.c[s][i];
      }
  }
  return state;
}

}  // namespace maxstef
