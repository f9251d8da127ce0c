#include "maxstef/csv_io.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace maxstef {

std::string format_value(double v, int precision) {
  if (v == 0.0) v = 0.0;  // collapse -0
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.*g", precision, v);
  return buf;
}

void ensure_directory(const std::string& path) {
  std::error_code ec;
  std::filesystem::create_directories(path, ec);
  if (ec) throw IoError("cannot create directory '" + path + "': " + ec.message());
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << content;
  if (!out) throw IoError("write failed for '" + path + "'");
}

namespace {

std::string join_row(const std::vector<std::string>& cells) {
  std::string row;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) row += ",";
    row += cells[i];
  }
  row += "\n";
  return row;
}

}  // namespace

void write_macro_fields_csv(const std::string& path, const Grid1D& grid,
                            const MacroSnapshot& snapshot, int precision) {
  const std::size_t n_s = snapshot.state.c.size();
  std::ostringstream out;
  std::vector<std::string> header{"x"};
  for (std::size_t s = 1; s <= n_s; ++s) header.push_back("c_" + std::to_string(s));
  header.push_back("T");
  header.push_back("c_tot");
  for (std::size_t s = 1; s <= n_s; ++s) header.push_back("J_" + std::to_string(s));
  out << join_row(header);
  const Field ctot = snapshot.state.ctot();
  for (std::size_t i = 0; i < grid.n_cells; ++i) {
    std::vector<std::string> row{format_value(grid.cell_center(i), precision)};
    for (std::size_t s = 0; s < n_s; ++s)
      row.push_back(format_value(snapshot.state.c[s][i], precision));
    row.push_back(format_value(snapshot.state.T[i], precision));
    row.push_back(format_value(ctot[i], precision));
    for (std::size_t s = 0; s < n_s; ++s)
      row.push_back(format_value(snapshot.J_cells[s][i], precision));
    out << join_row(row);
  }
  write_text_file(path, out.str());
}

void write_moment_fields_csv(const std::string& path, const Grid1D& grid,
                             const KineticMomentState& state, int precision) {
  const std::size_t n_s = state.c.size();
  std::ostringstream out;
  std::vector<std::string> header{"x"};
  for (std::size_t s = 1; s <= n_s; ++s) header.push_back("c_" + std::to_string(s));
  for (std::size_t s = 1; s <= n_s; ++s) header.push_back("u_" + std::to_string(s));
  for (std::size_t s = 1; s <= n_s; ++s) header.push_back("T_" + std::to_string(s));
  out << join_row(header);
  for (std::size_t i = 0; i < grid.n_cells; ++i) {
    std::vector<std::string> row{format_value(grid.cell_center(i), precision)};
    for (std::size_t s = 0; s < n_s; ++s)
      row.push_back(format_value(state.c[s][i], precision));
    for (std::size_t s = 0; s < n_s; ++s)
      row.push_back(format_value(state.u[s][i], precision));
    for (std::size_t s = 0; s < n_s; ++s)
      row.push_back(format_value(state.T[s][i], precision));
    out << join_row(row);
  }
  write_text_file(path, out.str());
}

void write_macro_diagnostics_csv(const std::string& path,
                                 const std::vector<MacroDiagnosticsRow>& rows,
                                 std::size_t n_species, int precision) {
  std::ostringstream out;
  std::vector<std::string> header{"t"};
  for (std::size_t s = 1; s <= n_species; ++s)
    header.push_back("mass_" + std::to_string(s));
  header.push_back("min_ctot");
  header.push_back("max_ctot");
  header.push_back("ctotT_variation");
  header.push_back("closure_residual");
  out << join_row(header);
  for (const MacroDiagnosticsRow& r : rows) {
    std::vector<std::string> row{format_value(r.time, precision)};
    for (double m : r.mass) row.push_back(format_value(m, precision));
    row.push_back(format_value(r.min_ctot, precision));
    row.push_back(format_value(r.max_ctot, precision));
    row.push_back(format_value(r.ctot_T_variation, precision));
    row.push_back(format_value(r.closure_residual, precision));
    out << join_row(row);
  }
  write_text_file(path, out.str());
}

void write_moment_diagnostics_csv(const std::string& path,
                                  const std::vector<MomentDiagnosticsRow>& rows,
                                  std::size_t n_species, int precision) {
  std::ostringstream out;
  std::vector<std::string> header{"t"};
  for (std::size_t s = 1; s <= n_species; ++s)
    header.push_back("mass_" + std::to_string(s));
  header.push_back("total_momentum");
  header.push_back("total_energy");
  header.push_back("max_temp_gap");
  out << join_row(header);
  for (const MomentDiagnosticsRow& r : rows) {
    std::vector<std::string> row{format_value(r.time, precision)};
    for (double m : r.mass) row.push_back(format_value(m, precision));
    row.push_back(format_value(r.total_momentum, precision));
    row.push_back(format_value(r.total_energy, precision));
    row.push_back(format_value(r.max_temp_gap, precision));
    out << join_row(row);
  }
  write_text_file(path, out.str());
}

void write_sweep_report_csv(const std::string& path, const ConvergenceReport& report,
                            int precision) {
  std::ostringstream out;
  out << "epsilon,temp_gap,fitted_order_running,dist_c,dist_J,dist_T\n";
  for (const ConvergenceReportRow& r : report.rows) {
    out << format_value(r.epsilon, precision) << ","
        << format_value(r.temp_gap, precision) << ","
        << format_value(r.fitted_order_running, precision) << ","
        << format_value(r.dist_c, precision) << ","
        << format_value(r.dist_J, precision) << ","
        << format_value(r.dist_T, precision) << "\n";
  }
  out << "summary," << format_value(report.gap_order, precision) << ","
      << (report.gap_monotone ? "1" : "0") << ","
      << (report.distances_monotone ? "1" : "0") << ","
      << (report.inconclusive ? "1" : "0") << ",\n";
  write_text_file(path, out.str());
}

void write_compare_csv(const std::string& path, const LimitDistances& distances,
                       const std::vector<std::string>& species_names, int precision) {
  std::ostringstream out;
  out << "species,dist_c,dist_J,dist_T\n";
  for (std::size_t s = 0; s < species_names.size(); ++s) {
    out << species_names[s] << "," << format_value(distances.dist_c[s], precision)
        << "," << format_value(distances.dist_J[s], precision) << ","
        << format_value(distances.dist_T[s], precision) << "\n";
  }
  out << "max," << format_value(distances.max_c(), precision) << ","
      << format_value(distances.max_J(), precision) << ","
      << format_value(distances.max_T(), precision) << "\n";
  write_text_file(path, out.str());
}

void write_manifest(const std::string& path, const RunConfig& config) {
  std::ostringstream out;
  out << "# maxstef " << kVersion << "\n";
  out << emit_config(config);
  write_text_file(path, out.str());
}

}  // namespace maxstef
