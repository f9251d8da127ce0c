#include "maxstef/config.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace maxstef {

const char* const kVersion = "0.1.0";

AngularKernel KernelSpec::build() const {
  if (form == "constant") {
    if (params.size() != 1)
      throw ValidationError("mixture.kernel " + species_a + " " + species_b +
                            ": constant form takes exactly one value");
    return AngularKernel::constant(params[0]);
  }
  if (form == "poly") {
    if (params.empty())
      throw ValidationError("mixture.kernel " + species_a + " " + species_b +
                            ": poly form needs coefficients");
    return AngularKernel::polynomial(params);
  }
  if (form == "table") {
    std::vector<double> nodes, values;
    for (const auto& [eta, val] : table) {
      nodes.push_back(eta);
      values.push_back(val);
    }
    return AngularKernel::tabulated(nodes, values);
  }
  throw ValidationError("mixture.kernel " + species_a + " " + species_b +
                        ": unknown form '" + form +
                        "' (expected constant, poly or table)");
}

Mixture RunConfig::build_mixture() const {
  std::vector<std::pair<std::pair<std::size_t, std::size_t>, AngularKernel>> built;
  auto index_of = [&](const std::string& name) -> std::size_t {
    for (std::size_t i = 0; i < species.size(); ++i)
      if (species[i].name == name) return i;
    throw ValidationError("mixture.kernel references unknown species '" + name + "'");
  };
  for (const KernelSpec& spec : kernels)
    built.push_back({{index_of(spec.species_a), index_of(spec.species_b)},
                     spec.build()});
  return Mixture(species, std::move(built), constants);
}

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

std::vector<std::string> tokens(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

double parse_number(const std::string& value, const std::string& field) {
  try {
    std::size_t used = 0;
    const double v = std::stod(value, &used);
    if (used != value.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw ValidationError(field + ": expected a number, got '" + value + "'");
  }
}

long parse_integer(const std::string& value, const std::string& field) {
  try {
    std::size_t used = 0;
    const long v = std::stol(value, &used);
    if (used != value.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw ValidationError(field + ": expected an integer, got '" + value + "'");
  }
}

std::vector<double> parse_numbers(const std::string& value, const std::string& field) {
  std::vector<double> out;
  for (const std::string& tok : tokens(value)) out.push_back(parse_number(tok, field));
  return out;
}

std::string fmt(double v) {
  if (v == 0.0) return "0";
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

RunConfig parse_config(const std::string& text) {
  RunConfig cfg;
  std::vector<std::string> unknown;
  std::string section;
  bool have_snapshots = false;
  bool have_t_end = false;

  std::istringstream in(text);
  std::string raw;
  while (std::getline(in, raw)) {
    const auto hash = raw.find('#');
    if (hash != std::string::npos) raw = raw.substr(0, hash);
    const std::string line = trim(raw);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ValidationError("config: malformed section header '" + line + "'");
      section = trim(line.substr(1, line.size() - 2));
      if (section != "mixture" && section != "grid" && section != "scenario" &&
          section != "solver" && section != "output")
        unknown.push_back("[" + section + "]");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ValidationError("config: expected 'key = value', got '" + line + "'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const std::string field = section + "." + key;

    if (section == "mixture") {
      if (key == "k_boltzmann") {
        cfg.constants.k_boltzmann = parse_number(value, field);
      } else if (key == "species") {
        const auto toks = tokens(value);
        if (toks.size() != 2)
          throw ValidationError(field + ": expected '<name> <mass>'");
        const double mass = parse_number(toks[1], "mixture.species[" +
                                                      std::to_string(cfg.species.size()) +
                                                      "].mass");
        if (!(mass > 0.0))
          throw ValidationError("mixture.species[" +
                                std::to_string(cfg.species.size()) +
                                "].mass must be > 0, got " + toks[1]);
        cfg.species.push_back({toks[0], mass});
      } else if (key == "kernel") {
        const auto toks = tokens(value);
        if (toks.size() < 4)
          throw ValidationError(field + ": expected '<A> <B> <form> <params...>'");
        KernelSpec spec;
        spec.species_a = toks[0];
        spec.species_b = toks[1];
        spec.form = toks[2];
        if (spec.form == "table") {
          for (std::size_t i = 3; i < toks.size(); ++i) {
            const auto colon = toks[i].find(':');
            if (colon == std::string::npos)
              throw ValidationError(field + ": table entries are '<eta>:<value>'");
            spec.table.push_back(
                {parse_number(toks[i].substr(0, colon), field),
                 parse_number(toks[i].substr(colon + 1), field)});
          }
        } else {
          for (std::size_t i = 3; i < toks.size(); ++i)
            spec.params.push_back(parse_number(toks[i], field));
        }
        cfg.kernels.push_back(std::move(spec));
      } else {
        unknown.push_back(field);
      }
    } else if (section == "grid") {
      if (key == "x_min") cfg.grid.x_min = parse_number(value, field);
      else if (key == "x_max") cfg.grid.x_max = parse_number(value, field);
      else if (key == "n_cells") {
        const long n = parse_integer(value, field);
        if (n < 8) throw ValidationError("grid.n_cells must be >= 8, got " + value);
        cfg.grid.n_cells = static_cast<std::size_t>(n);
      } else if (key == "boundary") {
        if (value == "periodic") cfg.grid.boundary = Boundary::kPeriodic;
        else if (value == "no-flux") cfg.grid.boundary = Boundary::kNoFlux;
        else
          throw ValidationError("grid.boundary must be periodic or no-flux, got '" +
                                value + "'");
      } else {
        unknown.push_back(field);
      }
    } else if (section == "scenario") {
      if (key == "name") cfg.scenario.name = value;
      else if (key == "g0") cfg.scenario.g0 = parse_number(value, field);
      else if (key == "temp_split") cfg.scenario.temp_split = parse_number(value, field);
      else if (key == "velocity_init") {
        if (value == "balance") cfg.scenario.velocity_init = VelocityInit::kBalance;
        else if (value == "zero") cfg.scenario.velocity_init = VelocityInit::kZero;
        else
          throw ValidationError(
              "scenario.velocity_init must be balance or zero, got '" + value + "'");
      } else if (key == "profile") {
        const auto toks = tokens(value);
        if (toks.size() < 3)
          throw ValidationError(field +
                                ": expected '<species> <shape> <base> [amplitude "
                                "center width [center2]]'");
        SpeciesProfile p;
        p.shape = profile_shape_from_name(toks[1]);
        p.base = parse_number(toks[2], field + ".base");
        if (toks.size() > 3) p.amplitude = parse_number(toks[3], field + ".amplitude");
        if (toks.size() > 4) p.center = parse_number(toks[4], field + ".center");
        if (toks.size() > 5) p.width = parse_number(toks[5], field + ".width");
        if (toks.size() > 6) p.center2 = parse_number(toks[6], field + ".center2");
        // Species order must match [mixture]; names re-checked at build time.
        cfg.scenario.profiles.push_back(p);
        cfg.scenario.profile_species.push_back(toks[0]);
      } else {
        unknown.push_back(field);
      }
    } else if (section == "solver") {
      if (key == "alpha") cfg.closure.alpha = parse_number(value, field);
      else if (key == "dt") {
        if (value == "auto") {
          cfg.macro.dt = 0.0;
          cfg.moment.dt = 0.0;
        } else {
          const double dt = parse_number(value, field);
          cfg.macro.dt = dt;
          cfg.moment.dt = dt;
        }
      } else if (key == "t_end") {
        const double t = parse_number(value, field);
        cfg.macro.t_end = t;
        cfg.moment.t_end = t;
        have_t_end = true;
      } else if (key == "cfl_safety") {
        const double s = parse_number(value, field);
        cfg.macro.cfl_safety = s;
        cfg.moment.cfl_safety = s;
      } else if (key == "heat_scheme") {
        if (value == "explicit") cfg.macro.heat_scheme = HeatScheme::kExplicit;
        else if (value == "crank-nicolson")
          cfg.macro.heat_scheme = HeatScheme::kCrankNicolson;
        else
          throw ValidationError(
              "solver.heat_scheme must be explicit or crank-nicolson, got '" + value +
              "'");
      } else if (key == "temperature_scheme") {
        if (value == "eulerian-upwind")
          cfg.macro.temperature_scheme = TemperatureScheme::kEulerianUpwind;
        else if (value == "characteristics")
          cfg.macro.temperature_scheme = TemperatureScheme::kCharacteristics;
        else
          throw ValidationError(
              "solver.temperature_scheme must be eulerian-upwind or characteristics, "
              "got '" + value + "'");
      } else if (key == "transport_scheme") {
        if (value == "auto") cfg.moment.transport = TransportMode::kAuto;
        else if (value == "classic") cfg.moment.transport = TransportMode::kClassic;
        else if (value == "ap") cfg.moment.transport = TransportMode::kAp;
        else
          throw ValidationError(
              "solver.transport_scheme must be auto, classic or ap, got '" + value +
              "'");
      } else if (key == "epsilon") cfg.epsilon = parse_number(value, field);
      else if (key == "epsilons") cfg.epsilons = parse_numbers(value, field);
      else if (key == "t_measure") cfg.t_measure = parse_number(value, field);
      else if (key == "ctot_t_variation")
        cfg.macro.tolerances.ctot_T_variation = parse_number(value, field);
      else if (key == "nonnegativity_floor") {
        const double f = parse_number(value, field);
        cfg.macro.tolerances.nonnegativity_floor = f;
        cfg.moment.nonnegativity_floor = f;
      } else if (key == "quadrature_order") {
        cfg.quadrature_order = static_cast<int>(parse_integer(value, field));
      } else {
        unknown.push_back(field);
      }
    } else if (section == "output") {
      if (key == "directory") cfg.output.directory = value;
      else if (key == "snapshot_times") {
        cfg.output.snapshot_times = parse_numbers(value, field);
        have_snapshots = true;
      } else if (key == "precision") {
        cfg.output.precision = static_cast<int>(parse_integer(value, field));
      } else {
        unknown.push_back(field);
      }
    } else {
      unknown.push_back(section.empty() ? key : field);
    }
  }

  if (!unknown.empty()) {
    std::string msg = "config: unknown keys:";
    for (const std::string& k : unknown) msg += " " + k;
    throw ValidationError(msg);
  }

  if (cfg.species.size() < 2)
    throw ValidationError("mixture: needs at least 2 species entries");
  if (cfg.scenario.profiles.empty()) {
    // Default: uniform unit profiles for every species.
    for (std::size_t s = 0; s < cfg.species.size(); ++s) {
      cfg.scenario.profiles.push_back(SpeciesProfile{});
      cfg.scenario.profile_species.push_back(cfg.species[s].name);
    }
  }
  if (cfg.scenario.profiles.size() != cfg.species.size())
    throw ValidationError("scenario: profile count does not match species count");
  // Reorder profiles to species order.
  {
    std::vector<SpeciesProfile> ordered(cfg.species.size());
    std::vector<bool> seen(cfg.species.size(), false);
    for (std::size_t p = 0; p < cfg.scenario.profiles.size(); ++p) {
      bool matched = false;
      for (std::size_t s = 0; s < cfg.species.size(); ++s) {
        if (cfg.scenario.profile_species[p] == cfg.species[s].name) {
          if (seen[s])
            throw ValidationError("scenario: duplicate profile for species '" +
                                  cfg.species[s].name + "'");
          ordered[s] = cfg.scenario.profiles[p];
          seen[s] = true;
          matched = true;
          break;
        }
      }
      if (!matched)
        throw ValidationError("scenario.profile references unknown species '" +
                              cfg.scenario.profile_species[p] + "'");
    }
    cfg.scenario.profiles = ordered;
    cfg.scenario.profile_species.clear();
    for (const Species& s : cfg.species)
      cfg.scenario.profile_species.push_back(s.name);
  }

  if (!have_snapshots) {
    cfg.output.snapshot_times = {0.0, cfg.macro.t_end};
    (void)have_t_end;
  }
  if (cfg.output.precision < 6 || cfg.output.precision > 17)
    throw ValidationError("output.precision must lie in [6, 17], got " +
                          std::to_string(cfg.output.precision));
  if (!(cfg.epsilon > 0.0)) throw ValidationError("solver.epsilon must be > 0");
  if (cfg.quadrature_order < 4)
    throw ValidationError("solver.quadrature_order must be >= 4");
  cfg.grid.validate();
  cfg.closure.validate();
  cfg.macro.validate();
  cfg.moment.validate();
  // Build once to surface mixture/kernel validation errors early.
  (void)cfg.build_mixture();
  return cfg;
}

RunConfig parse_config_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read config file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::string emit_config(const RunConfig& cfg) {
  std::ostringstream out;
  out << "[mixture]\n";
  out << "k_boltzmann = " << fmt(cfg.constants.k_boltzmann) << "\n";
  for (const Species& s : cfg.species)
    out << "species = " << s.name << " " << fmt(s.mass) << "\n";
  for (const KernelSpec& k : cfg.kernels) {
    out << "kernel = " << k.species_a << " " << k.species_b << " " << k.form;
    if (k.form == "table") {
      for (const auto& [eta, val] : k.table) out << " " << fmt(eta) << ":" << fmt(val);
    } else {
      for (double p : k.params) out << " " << fmt(p);
    }
    out << "\n";
  }
  out << "\n[grid]\n";
  out << "x_min = " << fmt(cfg.grid.x_min) << "\n";
  out << "x_max = " << fmt(cfg.grid.x_max) << "\n";
  out << "n_cells = " << cfg.grid.n_cells << "\n";
  out << "boundary = "
      << (cfg.grid.boundary == Boundary::kPeriodic ? "periodic" : "no-flux") << "\n";
  out << "\n[scenario]\n";
  out << "name = " << cfg.scenario.name << "\n";
  for (std::size_t s = 0; s < cfg.scenario.profiles.size(); ++s) {
    const SpeciesProfile& p = cfg.scenario.profiles[s];
    out << "profile = " << cfg.scenario.profile_species[s] << " "
        << profile_shape_name(p.shape) << " " << fmt(p.base);
    if (p.shape != ProfileShape::kUniform) {
      out << " " << fmt(p.amplitude) << " " << fmt(p.center) << " " << fmt(p.width);
      if (p.shape == ProfileShape::kTwoBump) out << " " << fmt(p.center2);
    }
    out << "\n";
  }
  out << "g0 = " << fmt(cfg.scenario.g0) << "\n";
  out << "temp_split = " << fmt(cfg.scenario.temp_split) << "\n";
  out << "velocity_init = "
      << (cfg.scenario.velocity_init == VelocityInit::kBalance ? "balance" : "zero")
      << "\n";
  out << "\n[solver]\n";
  out << "alpha = " << fmt(cfg.closure.alpha) << "\n";
  out << "dt = " << (cfg.macro.dt == 0.0 ? std::string("auto") : fmt(cfg.macro.dt))
      << "\n";
  out << "t_end = " << fmt(cfg.macro.t_end) << "\n";
  out << "cfl_safety = " << fmt(cfg.macro.cfl_safety) << "\n";
  out << "heat_scheme = "
      << (cfg.macro.heat_scheme == HeatScheme::kExplicit ? "explicit"
                                                         : "crank-nicolson")
      << "\n";
  out << "temperature_scheme = "
      << (cfg.macro.temperature_scheme == TemperatureScheme::kEulerianUpwind
              ? "eulerian-upwind"
              : "characteristics")
      << "\n";
  const char* transport = "auto";
  if (cfg.moment.transport == TransportMode::kClassic) transport = "classic";
  if (cfg.moment.transport == TransportMode::kAp) transport = "ap";
  out << "transport_scheme = " << transport << "\n";
  out << "epsilon = " << fmt(cfg.epsilon) << "\n";
  out << "epsilons =";
  for (double e : cfg.epsilons) out << " " << fmt(e);
  out << "\n";
  out << "t_measure = " << fmt(cfg.t_measure) << "\n";
  out << "ctot_t_variation = " << fmt(cfg.macro.tolerances.ctot_T_variation) << "\n";
  out << "nonnegativity_floor = " << fmt(cfg.macro.tolerances.nonnegativity_floor)
      << "\n";
  out << "quadrature_order = " << cfg.quadrature_order << "\n";
  out << "\n[output]\n";
  out << "directory = " << cfg.output.directory << "\n";
  out << "snapshot_times =";
  for (double t : cfg.output.snapshot_times) out << " " << fmt(t);
  out << "\n";
  out << "precision = " << cfg.output.precision << "\n";
  return out.str();
}

}  // namespace maxstef
