#pragma once

#include <string>
#include <utility>
#include <vector>

#include "maxstef/macro_solver.hpp"
#include "maxstef/mixture.hpp"
#include "maxstef/moment_solver.hpp"
#include "maxstef/scenarios.hpp"

namespace maxstef {

// Kernel entry as written in the config, kept verbatim for re-emission.
struct KernelSpec {
  std::string species_a;
  std::string species_b;
  std::string form;  // constant | poly | table
  std::vector<double> params;                     // constant / poly coefficients
  std::vector<std::pair<double, double>> table;   // table nodes

  AngularKernel build() const;
};

struct OutputConfig {
  std::string directory = "out";
  std::vector<double> snapshot_times;  // defaults to {0, t_end}
  int precision = 12;                  // decimal digits, in [6, 17]
};

struct RunConfig {
  PhysicalConstants constants;
  std::vector<Species> species;
  std::vector<KernelSpec> kernels;
  Grid1D grid;
  Scenario scenario;
  ClosureConfig closure;
  MacroSolverConfig macro;
  MomentSolverConfig moment;
  double epsilon = 0.05;
  std::vector<double> epsilons = {0.1, 0.05, 0.025};
  double t_measure = 0.05;
  int quadrature_order = 16;
  OutputConfig output;

  Mixture build_mixture() const;
};

// Parses the flat-section key-value document; unknown keys are an error
// listing them, invariant violations name the offending field.
RunConfig parse_config(const std::string& text);
RunConfig parse_config_file(const std::string& path);

// Canonical re-emission with all defaults materialized; parse(emit(c))
// emits identically.
std::string emit_config(const RunConfig& config);

extern const char* const kVersion;

}  // namespace maxstef
