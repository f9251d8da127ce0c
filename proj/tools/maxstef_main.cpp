#include <cstdio>
#include <iostream>
#include <numbers>
#include <string>

#include "CLI11.hpp"
#include "maxstef/collision_moments.hpp"
#include "maxstef/csv_io.hpp"

namespace ms = maxstef;

namespace {

std::string snapshot_name(const char* prefix, std::size_t index) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%s_%04zu.csv", prefix, index);
  return buf;
}

// Pairwise closed-form exchange terms used by `oracle check`.
ms::Vec3 theta_pair(const ms::Mixture& mix, const ms::MaxwellianState& st,
                    std::size_t i, std::size_t j) {
  const double mi = mix.species(i).mass;
  const double mj = mix.species(j).mass;
  const double coeff = 2.0 * std::numbers::pi * mix.kernel_norm(i, j) * mj /
                       (mi + mj) * st.concentration[i] * st.concentration[j];
  return {coeff * (st.velocity[j][0] - st.velocity[i][0]),
          coeff * (st.velocity[j][1] - st.velocity[i][1]),
          coeff * (st.velocity[j][2] - st.velocity[i][2])};
}

double xi_pair(const ms::Mixture& mix, const ms::MaxwellianState& st, double eps,
               std::size_t i, std::size_t j) {
  const double mi = mix.species(i).mass;
  const double mj = mix.species(j).mass;
  const double k = mix.constants().k_boltzmann;
  const double msum = mi + mj;
  const ms::Vec3 du{st.velocity[j][0] - st.velocity[i][0],
                    st.velocity[j][1] - st.velocity[i][1],
                    st.velocity[j][2] - st.velocity[i][2]};
  const ms::Vec3 pu{mi * st.velocity[i][0] + mj * st.velocity[j][0],
                    mi * st.velocity[i][1] + mj * st.velocity[j][1],
                    mi * st.velocity[i][2] + mj * st.velocity[j][2]};
  return 2.0 * std::numbers::pi * mix.kernel_norm(i, j) * mi * mj / (msum * msum) *
         st.concentration[i] * st.concentration[j] *
         (3.0 * k / eps * (st.temperature[j] - st.temperature[i]) +
          eps * ms::dot(pu, du));
}

int run_diffusion_matrix(const ms::RunConfig& cfg) {
  const ms::Mixture mix = cfg.build_mixture();
  const ms::DiffusionMatrix d = ms::build_diffusion_matrix(mix);
  const int p = cfg.output.precision;
  std::cout << "species_i,species_j,D_ij\n";
  for (std::size_t i = 0; i < mix.size(); ++i)
    for (std::size_t j = i + 1; j < mix.size(); ++j)
      std::cout << mix.species(i).name << "," << mix.species(j).name << ","
                << ms::format_value(d(i, j), p) << "\n";
  return 0;
}

int run_oracle_check(const ms::RunConfig& cfg) {
  const ms::Mixture mix = cfg.build_mixture();
  const double eps = cfg.epsilon;

  // Probe state: the scenario's moment initial data at the center cell.
  const ms::KineticMomentState init =
      ms::build_moment_initial(mix, cfg.grid, cfg.scenario, cfg.closure, eps);
  const std::size_t mid = cfg.grid.n_cells / 2;
  ms::MaxwellianState st;
  st.concentration.resize(mix.size());
  st.velocity.resize(mix.size());
  st.temperature.resize(mix.size());
  for (std::size_t s = 0; s < mix.size(); ++s) {
    st.concentration[s] = init.c[s][mid];
    st.velocity[s] = {init.u[s][mid], 0.0, 0.0};
    st.temperature[s] = init.T[s][mid];
  }

  ms::OracleResolution res;
  res.hermite_per_axis = cfg.quadrature_order;

  const int p = cfg.output.precision;
  std::ostringstream table;
  table << "pair,weight,closed,oracle,rel_error\n";
  auto emit = [&](const std::string& pair, const char* weight, double closed,
                  double oracle) {
    const double denom = std::max({std::abs(closed), std::abs(oracle), 1e-300});
    const double rel = closed == 0.0 && oracle == 0.0
                           ? 0.0
                           : std::abs(oracle - closed) / denom;
    table << pair << "," << weight << "," << ms::format_value(closed, p) << ","
          << ms::format_value(oracle, p) << "," << ms::format_value(rel, p) << "\n";
  };

  for (std::size_t i = 0; i < mix.size(); ++i) {
    for (std::size_t j = 0; j < mix.size(); ++j) {
      if (i == j) continue;
      const std::string pair = mix.species(i).name + ":" + mix.species(j).name;
      const auto unity =
          ms::collision_moment_oracle(mix, st, i, j, ms::OracleWeight::kUnity, res, eps);
      emit(pair, "unity", 0.0, unity.scalar);
      const auto vel = ms::collision_moment_oracle(mix, st, i, j,
                                                   ms::OracleWeight::kVelocity, res, eps);
      emit(pair, "velocity", theta_pair(mix, st, i, j)[0], vel.vector[0] / eps);
      const auto sq = ms::collision_moment_oracle(
          mix, st, i, j, ms::OracleWeight::kSpeedSquared, res, eps);
      emit(pair, "speed-squared", xi_pair(mix, st, eps, i, j),
           0.5 * mix.species(i).mass / eps * sq.scalar);
    }
  }

  std::cout << table.str();
  ms::ensure_directory(cfg.output.directory);
  ms::write_text_file(cfg.output.directory + "/oracle_check.csv", table.str());
  ms::write_manifest(cfg.output.directory + "/manifest.txt", cfg);
  return 0;
}

void write_macro_outputs(const ms::RunConfig& cfg, const ms::MacroRunResult& result,
                         std::size_t n_species) {
  ms::ensure_directory(cfg.output.directory);
  for (std::size_t i = 0; i < result.snapshots.size(); ++i)
    ms::write_macro_fields_csv(cfg.output.directory + "/" + snapshot_name("fields", i),
                               cfg.grid, result.snapshots[i], cfg.output.precision);
  ms::write_macro_diagnostics_csv(cfg.output.directory + "/diagnostics.csv",
                                  result.diagnostics, n_species,
                                  cfg.output.precision);
  ms::write_manifest(cfg.output.directory + "/manifest.txt", cfg);
}

int run_macro_cmd(const ms::RunConfig& cfg) {
  const ms::Mixture mix = cfg.build_mixture();
  const ms::MacroState initial = ms::build_macro_initial(mix, cfg.grid, cfg.scenario);
  const double variation = ms::relative_ctot_T_variation(initial);
  if (variation > cfg.macro.tolerances.ctot_T_variation)
    std::cerr << "warning: initial c_tot*T variation " << variation
              << " exceeds tolerance; data are not well-prepared\n";
  try {
    const ms::MacroRunResult result = ms::run_macro(
        mix, initial, cfg.grid, cfg.closure, cfg.macro, cfg.output.snapshot_times);
    write_macro_outputs(cfg, result, mix.size());
    const auto& last = result.diagnostics.back();
    std::cout << "macro run: t=" << ms::format_value(last.time, cfg.output.precision)
              << " steps=" << result.diagnostics.size() - 1
              << " ctotT_variation="
              << ms::format_value(last.ctot_T_variation, cfg.output.precision)
              << " closure_residual="
              << ms::format_value(last.closure_residual, cfg.output.precision) << "\n";
    return 0;
  } catch (const ms::MacroAborted& abort) {
    write_macro_outputs(cfg, abort.partial, mix.size());
    std::cerr << "error: " << abort.what() << " (last valid state persisted)\n";
    return 2;
  }
}

void write_moment_outputs(const ms::RunConfig& cfg, const ms::MomentRunResult& result,
                          std::size_t n_species) {
  ms::ensure_directory(cfg.output.directory);
  for (std::size_t i = 0; i < result.snapshots.size(); ++i)
    ms::write_moment_fields_csv(
        cfg.output.directory + "/" + snapshot_name("moment_fields", i), cfg.grid,
        result.snapshots[i], cfg.output.precision);
  ms::write_moment_diagnostics_csv(cfg.output.directory + "/moment_diagnostics.csv",
                                   result.diagnostics, n_species,
                                   cfg.output.precision);
  ms::write_manifest(cfg.output.directory + "/manifest.txt", cfg);
}

int run_moment_cmd(const ms::RunConfig& cfg) {
  const ms::Mixture mix = cfg.build_mixture();
  const ms::KineticMomentState initial =
      ms::build_moment_initial(mix, cfg.grid, cfg.scenario, cfg.closure, cfg.epsilon);
  try {
    const ms::MomentRunResult result = ms::run_moment(mix, initial, cfg.grid,
                                                      cfg.moment,
                                                      cfg.output.snapshot_times);
    write_moment_outputs(cfg, result, mix.size());
    const auto& last = result.diagnostics.back();
    std::cout << "moment run: t=" << ms::format_value(last.time, cfg.output.precision)
              << " mode=" << (result.mode_used == ms::TransportMode::kAp ? "ap"
                                                                         : "classic")
              << " max_temp_gap="
              << ms::format_value(last.max_temp_gap, cfg.output.precision) << "\n";
    return 0;
  } catch (const ms::MomentAborted& abort) {
    write_moment_outputs(cfg, abort.partial, mix.size());
    std::cerr << "error: " << abort.what() << " (last valid state persisted)\n";
    return 2;
  }
}

int run_sweep_cmd(const ms::RunConfig& cfg) {
  const ms::Mixture mix = cfg.build_mixture();
  const ms::MacroState macro_initial =
      ms::build_macro_initial(mix, cfg.grid, cfg.scenario);
  if (cfg.epsilons.empty())
    throw ms::ValidationError("solver.epsilons must list the sweep values");
  const ms::KineticMomentState tmpl = ms::build_moment_initial(
      mix, cfg.grid, cfg.scenario, cfg.closure, cfg.epsilons.front());
  ms::EpsSweepConfig sweep;
  sweep.epsilons = cfg.epsilons;
  sweep.t_measure = cfg.t_measure;
  const ms::ConvergenceReport report = ms::eps_sweep(
      mix, cfg.grid, tmpl, cfg.moment, macro_initial, cfg.closure, cfg.macro, sweep);
  ms::ensure_directory(cfg.output.directory);
  ms::write_sweep_report_csv(cfg.output.directory + "/report.csv", report,
                             cfg.output.precision);
  ms::write_manifest(cfg.output.directory + "/manifest.txt", cfg);
  std::cout << "sweep-eps: gap_order="
            << ms::format_value(report.gap_order, cfg.output.precision)
            << " monotone=" << (report.gap_monotone ? 1 : 0)
            << " inconclusive=" << (report.inconclusive ? 1 : 0) << "\n";
  return 0;
}

int run_compare_cmd(const ms::RunConfig& cfg) {
  const ms::Mixture mix = cfg.build_mixture();
  const ms::MacroState macro_initial =
      ms::build_macro_initial(mix, cfg.grid, cfg.scenario);
  ms::MacroSolverConfig macro_cfg = cfg.macro;
  macro_cfg.t_end = cfg.t_measure;
  const ms::MacroRunResult macro_run = ms::run_macro(
      mix, macro_initial, cfg.grid, cfg.closure, macro_cfg, {cfg.t_measure});
  const ms::KineticMomentState initial =
      ms::build_moment_initial(mix, cfg.grid, cfg.scenario, cfg.closure, cfg.epsilon);
  ms::MomentSolverConfig moment_cfg = cfg.moment;
  moment_cfg.t_end = cfg.t_measure;
  const ms::MomentRunResult moment_run =
      ms::run_moment(mix, initial, cfg.grid, moment_cfg);
  const ms::LimitDistances dist =
      ms::compare_to_limit(moment_run.final_state, macro_run.snapshots.back(), cfg.grid);
  std::vector<std::string> names;
  for (std::size_t s = 0; s < mix.size(); ++s) names.push_back(mix.species(s).name);
  ms::ensure_directory(cfg.output.directory);
  ms::write_compare_csv(cfg.output.directory + "/compare.csv", dist, names,
                        cfg.output.precision);
  ms::write_manifest(cfg.output.directory + "/manifest.txt", cfg);
  std::cout << "compare: eps=" << ms::format_value(cfg.epsilon, cfg.output.precision)
            << " dist_c=" << ms::format_value(dist.max_c(), cfg.output.precision)
            << " dist_J=" << ms::format_value(dist.max_J(), cfg.output.precision)
            << " dist_T=" << ms::format_value(dist.max_T(), cfg.output.precision)
            << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "maxstef: non-isothermal Maxwell-Stefan mixture solvers.\n"
      "Scenario profile presets: uniform, gaussian, step, two-bump\n"
      "(per-species 'profile = <species> <shape> <base> [amplitude center width "
      "[center2]]')."};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string("maxstef ") + ms::kVersion);

  std::string config_path;
  std::string output_override;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "configuration file")->required();
    cmd->add_option("--output", output_override, "override [output] directory");
  };

  CLI::App* dmat = app.add_subcommand("diffusion-matrix",
                                      "print the binary diffusion coefficient table");
  add_common(dmat);
  CLI::App* oracle = app.add_subcommand("oracle", "collision-moment oracle tools");
  CLI::App* oracle_check = oracle->add_subcommand(
      "check", "closed-form exchange rates vs direct quadrature");
  add_common(oracle_check);
  oracle->require_subcommand(1);
  CLI::App* macro = app.add_subcommand("macro", "limit-system solver");
  CLI::App* macro_run = macro->add_subcommand("run", "run the macro solver");
  add_common(macro_run);
  macro->require_subcommand(1);
  CLI::App* moment = app.add_subcommand("moment", "finite-epsilon moment solver");
  CLI::App* moment_run = moment->add_subcommand("run", "run the moment solver");
  add_common(moment_run);
  moment->require_subcommand(1);
  CLI::App* sweep = app.add_subcommand(
      "sweep-eps", "temperature-gap and limit-distance sweep over epsilon");
  add_common(sweep);
  CLI::App* compare = app.add_subcommand(
      "compare", "moment run vs macro reference at solver.epsilon");
  add_common(compare);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    ms::RunConfig cfg = ms::parse_config_file(config_path);
    if (!output_override.empty()) cfg.output.directory = output_override;
    if (dmat->parsed()) return run_diffusion_matrix(cfg);
    if (oracle_check->parsed()) return run_oracle_check(cfg);
    if (macro_run->parsed()) return run_macro_cmd(cfg);
    if (moment_run->parsed()) return run_moment_cmd(cfg);
    if (sweep->parsed()) return run_sweep_cmd(cfg);
    if (compare->parsed()) return run_compare_cmd(cfg);
    std::cerr << "error: no subcommand dispatched\n";
    return 1;
  } catch (const ms::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const ms::IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const ms::NumericalError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
