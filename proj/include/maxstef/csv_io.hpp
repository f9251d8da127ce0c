#pragma once

#include <string>
#include <vector>

#include "maxstef/config.hpp"
#include "maxstef/macro_solver.hpp"
#include "maxstef/moment_solver.hpp"

namespace maxstef {

// Fixed-precision %g formatting; -0 normalized. Identical inputs produce
// identical bytes, which the determinism criterion leans on.
std::string format_value(double v, int precision);

void ensure_directory(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

// header: x,c_1..c_n,T,c_tot,J_1..J_n
void write_macro_fields_csv(const std::string& path, const Grid1D& grid,
                            const MacroSnapshot& snapshot, int precision);

// header: x,c_1..c_n,u_1..u_n,T_1..T_n
void write_moment_fields_csv(const std::string& path, const Grid1D& grid,
                             const KineticMomentState& state, int precision);

// header: t,mass_1..mass_n,min_ctot,max_ctot,ctotT_variation,closure_residual
void write_macro_diagnostics_csv(const std::string& path,
                                 const std::vector<MacroDiagnosticsRow>& rows,
                                 std::size_t n_species, int precision);

// header: t,mass_1..mass_n,total_momentum,total_energy,max_temp_gap
void write_moment_diagnostics_csv(const std::string& path,
                                  const std::vector<MomentDiagnosticsRow>& rows,
                                  std::size_t n_species, int precision);

// header: epsilon,temp_gap,fitted_order_running,dist_c,dist_J,dist_T
// followed by one summary row.
void write_sweep_report_csv(const std::string& path, const ConvergenceReport& report,
                            int precision);

// header: species,dist_c,dist_J,dist_T
void write_compare_csv(const std::string& path, const LimitDistances& distances,
                       const std::vector<std::string>& species_names, int precision);

// Resolved config plus the code version; sufficient to reproduce the run.
void write_manifest(const std::string& path, const RunConfig& config);

}  // namespace maxstef
