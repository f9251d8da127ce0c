#include "maxstef/macro_solver.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "maxstef/linalg.hpp"

namespace maxstef {

namespace {

// Tridiagonal Thomas solve; diagonally dominant inputs only.
Field thomas(const Field& sub, const Field& diag, const Field& sup, Field rhs) {
  const std::size_t n = diag.size();
  Field c(n, 0.0), x(n, 0.0);
  double beta = diag[0];
  x[0] = rhs[0] / beta;
  for (std::size_t i = 1; i < n; ++i) {
    c[i] = sup[i - 1] / beta;
    beta = diag[i] - sub[i] * c[i];
    x[i] = (rhs[i] - sub[i] * x[i - 1]) / beta;
  }
  for (std::size_t i = n - 1; i-- > 0;) x[i] -= c[i + 1] * x[i + 1];
  return x;
}

// Cyclic tridiagonal solve (equal corners) by Sherman-Morrison.
Field cyclic_thomas(double sub, double diag, double sup, double corner, Field rhs) {
  const std::size_t n = rhs.size();
  const double gamma = -diag;
  Field subv(n, sub), diagv(n, diag), supv(n, sup);
  diagv[0] = diag - gamma;
  diagv[n - 1] = diag - corner * corner / gamma;
  Field u(n, 0.0);
  u[0] = gamma;
  u[n - 1] = corner;
  Field y = thomas(subv, diagv, supv, std::move(rhs));
  Field z = thomas(subv, diagv, supv, std::move(u));
  const double vy = y[0] + corner / gamma * y[n - 1];
  const double vz = z[0] + corner / gamma * z[n - 1];
  const double f = vy / (1.0 + vz);
  for (std::size_t i = 0; i < n; ++i) y[i] -= f * z[i];
  return y;
}

double linear_interp(const Field& f, const Grid1D& grid, double x, long* clamped) {
  const double dx = grid.dx();
  double xi = (x - grid.x_min) / dx - 0.5;
  const long n = static_cast<long>(grid.n_cells);
  if (grid.boundary == Boundary::kPeriodic) {
    xi = std::fmod(xi, static_cast<double>(n));
    if (xi < 0.0) xi += static_cast<double>(n);
    const long i0 = static_cast<long>(std::floor(xi)) % n;
    const long i1 = (i0 + 1) % n;
    const double t = xi - std::floor(xi);
    return f[i0] * (1.0 - t) + f[i1] * t;
  }
  if (xi <= 0.0) {
    if (xi < -0.5 && clamped) ++(*clamped);
    return f[0];
  }
  if (xi >= static_cast<double>(n - 1)) {
    if (xi > static_cast<double>(n) - 0.5 && clamped) ++(*clamped);
    return f[n - 1];
  }
  const long i0 = static_cast<long>(std::floor(xi));
  const double t = xi - static_cast<double>(i0);
  return f[i0] * (1.0 - t) + f[i0 + 1] * t;
}

double wrap_position(const Grid1D& grid, double x, long* clamped) {
  if (grid.boundary == Boundary::kPeriodic) {
    const double len = grid.length();
    double y = std::fmod(x - grid.x_min, len);
    if (y < 0.0) y += len;
    return grid.x_min + y;
  }
  if (x < grid.x_min) {
    if (clamped) ++(*clamped);
    return grid.x_min;
  }
  if (x > grid.x_max) {
    if (clamped) ++(*clamped);
    return grid.x_max;
  }
  return x;
}

void check_positive_field(const Field& f, const char* what) {
  for (double v : f)
    if (!(v > 0.0) || !std::isfinite(v))
      throw NumericalError(std::string(what) + " lost positivity");
}

}  // namespace

Field MacroState::ctot() const {
  Field total(c.empty() ? 0 : c.front().size(), 0.0);
  for (const Field& ci : c)
    for (std::size_t i = 0; i < total.size(); ++i) total[i] += ci[i];
  return total;
}

double heat_step_max_dt(const Grid1D& grid, double alpha, HeatScheme scheme) {
  const double dx = grid.dx();
  const double r_max = scheme == HeatScheme::kExplicit ? 0.5 : 1.0;
  return r_max * dx * dx / alpha;
}

Field heat_step(const Field& ctot, const Grid1D& grid, double alpha,
                HeatScheme scheme, double dt) {
  grid.validate();
  const std::size_t n = grid.n_cells;
  if (ctot.size() != n) throw ValidationError("heat_step: field size mismatch");
  const double dx = grid.dx();
  const double r = alpha * dt / (dx * dx);
  const double r_max = scheme == HeatScheme::kExplicit ? 0.5 : 1.0;
  if (r > r_max * (1.0 + 1e-12)) {
    std::ostringstream os;
    os << "heat_step: dt = " << dt << " violates the "
       << (scheme == HeatScheme::kExplicit ? "stability" : "maximum-principle")
       << " bound; use dt <= " << heat_step_max_dt(grid, alpha, scheme);
    throw NumericalError(os.str());
  }

  auto laplacian = [&](const Field& f, std::size_t i) {
    const double fl = f[grid.left(i)];
    const double fr = f[grid.right(i)];
    return (fr - f[i]) - (f[i] - fl);  // flux form; no-flux walls via mirrored cells
  };

  if (scheme == HeatScheme::kExplicit) {
    Field out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = ctot[i] + r * laplacian(ctot, i);
    return out;
  }

  // Crank-Nicolson: (I - r/2 L) c_new = (I + r/2 L) c.
  Field rhs(n);
  for (std::size_t i = 0; i < n; ++i) rhs[i] = ctot[i] + 0.5 * r * laplacian(ctot, i);
  if (grid.boundary == Boundary::kPeriodic)
    return cyclic_thomas(-0.5 * r, 1.0 + r, -0.5 * r, -0.5 * r, std::move(rhs));
  Field sub(n, -0.5 * r), diag(n, 1.0 + r), sup(n, -0.5 * r);
  diag[0] = 1.0 + 0.5 * r;
  diag[n - 1] = 1.0 + 0.5 * r;
  return thomas(sub, diag, sup, std::move(rhs));
}

Field advection_velocity(const Field& ctot, const Grid1D& grid, double alpha) {
  const std::size_t n = grid.n_cells;
  const double dx = grid.dx();
  Field v(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double cl = ctot[grid.left(i)];
    const double cr = ctot[grid.right(i)];
    v[i] = -(5.0 * alpha / 3.0) * (std::log(cr) - std::log(cl)) / (2.0 * dx);
  }
  return v;
}

Field temperature_step_eulerian(const Field& temperature, const Field& ctot_old,
                                const Field& ctot_new, const Grid1D& grid,
                                double alpha, double dt) {
  const std::size_t n = grid.n_cells;
  const double dx = grid.dx();
  check_positive_field(ctot_old, "temperature step: c_tot");
  check_positive_field(ctot_new, "temperature step: c_tot");

  Field cmid(n);
  for (std::size_t i = 0; i < n; ++i) cmid[i] = 0.5 * (ctot_old[i] + ctot_new[i]);
  const Field v = advection_velocity(cmid, grid, alpha);
  double vmax = 0.0;
  for (double w : v) vmax = std::max(vmax, std::abs(w));
  if (vmax * dt / dx > 1.0 + 1e-12) {
    std::ostringstream os;
    os << "temperature step: advective CFL violated; use dt <= " << dx / vmax;
    throw NumericalError(os.str());
  }

  Field out(n);
  for (std::size_t i = 0; i < n; ++i) {
    // Transport form dT/dt + V dT/dx = source, upwinded against V.
    const double grad = v[i] > 0.0
                            ? (temperature[i] - temperature[grid.left(i)]) / dx
                            : (temperature[grid.right(i)] - temperature[i]) / dx;
    const double advected = temperature[i] - dt * v[i] * grad;
    // Exact integration of the local source (2/3 dt log ctot) T.
    out[i] = advected * std::pow(ctot_new[i] / ctot_old[i], 2.0 / 3.0);
  }
  return out;
}

CharacteristicsResult temperature_characteristics(const Field& initial_T,
                                                  const CtotHistory& history,
                                                  const Grid1D& grid, double alpha,
                                                  double t) {
  if (history.times.size() < 2 || history.times.size() != history.frames.size())
    throw ValidationError("characteristics: history needs >= 2 frames");
  if (t > history.times.back() + 1e-12)
    throw ValidationError("characteristics: requested time beyond stored history");
  for (const Field& f : history.frames)
    check_positive_field(f, "characteristics: c_tot history");

  const std::size_t n = grid.n_cells;
  const std::size_t n_frames = history.times.size();
  std::vector<Field> vel(n_frames);
  std::vector<Field> logc(n_frames);
  for (std::size_t k = 0; k < n_frames; ++k) {
    vel[k] = advection_velocity(history.frames[k], grid, alpha);
    logc[k].resize(n);
    for (std::size_t i = 0; i < n; ++i) logc[k][i] = std::log(history.frames[k][i]);
  }

  auto v_at = [&](double s, double x, long* clamped) {
    std::size_t k = 0;
    while (k + 2 < n_frames && history.times[k + 1] < s) ++k;
    const double t0 = history.times[k];
    const double t1 = history.times[k + 1];
    const double w = std::clamp((s - t0) / (t1 - t0), 0.0, 1.0);
    const double v0 = linear_interp(vel[k], grid, x, clamped);
    const double v1 = linear_interp(vel[k + 1], grid, x, clamped);
    return (1.0 - w) * v0 + w * v1;
  };

  CharacteristicsResult result;
  result.T.resize(n);

  for (std::size_t i = 0; i < n; ++i) {
    double x = grid.cell_center(i);
    double exponent = 0.0;
    // Walk backward through frame intervals; t lies in frame span.
    std::size_t hi = n_frames - 1;
    while (hi > 0 && history.times[hi - 1] >= t - 1e-15) --hi;
    double s_hi = std::min(t, history.times.back());
    for (std::size_t k = hi; k-- > 0;) {
      const double s_lo = history.times[k];
      const double h = s_hi - s_lo;
      if (h <= 0.0) {
        s_hi = s_lo;
        continue;
      }
      // Midpoint (RK2) backward step of dX/ds = V(s, X).
      const double v1 = v_at(s_hi, x, &result.clamped);
      const double xm = wrap_position(grid, x - 0.5 * h * v1, &result.clamped);
      const double vm = v_at(s_hi - 0.5 * h, xm, &result.clamped);
      const double x_new = wrap_position(grid, x - h * vm, &result.clamped);
      // Trapezoid of dt(log ctot) along the segment; the time derivative is
      // the frame difference over this interval.
      const double dl_hi = (linear_interp(logc[k + 1], grid, x, nullptr) -
                            linear_interp(logc[k], grid, x, nullptr));
      const double dl_lo = (linear_interp(logc[k + 1], grid, x_new, nullptr) -
                            linear_interp(logc[k], grid, x_new, nullptr));
      const double frame_h = history.times[k + 1] - history.times[k];
      exponent += 0.5 * (dl_hi + dl_lo) * (h / frame_h);
      x = x_new;
      s_hi = s_lo;
    }
    const double t_in = linear_interp(initial_T, grid, x, nullptr);
    result.T[i] = t_in * std::exp((2.0 / 3.0) * exponent);
  }
  return result;
}

MacroFluxes flux_solve(const MacroState& state, const Mixture& mixture,
                       const DiffusionMatrix& diffusion, const ClosureConfig& closure,
                       const Grid1D& grid, double nonnegativity_floor,
                       const Field* closure_gradient) {
  grid.validate();
  closure.validate();
  const std::size_t n_s = mixture.size();
  const std::size_t n = grid.n_cells;
  const double dx = grid.dx();
  if (state.c.size() != n_s)
    throw ValidationError("flux_solve: species count mismatch");

  // Drop the row of the species with the largest cell-averaged concentration.
  std::size_t drop = 0;
  double best = -1.0;
  for (std::size_t s = 0; s < n_s; ++s) {
    const double mean = field_sum(state.c[s]);
    if (mean > best) {
      best = mean;
      drop = s;
    }
  }

  MacroFluxes out;
  out.dropped_species = drop;
  out.J.assign(n_s, Field(n + 1, 0.0));

  const bool periodic = grid.boundary == Boundary::kPeriodic;
  const std::size_t f_begin = periodic ? 0 : 1;
  const std::size_t f_end = n;  // faces [f_begin, f_end); boundary handled after

  Field ctot = state.ctot();

  for (std::size_t f = f_begin; f < f_end; ++f) {
    const std::size_t r = f % n;
    const std::size_t l = (f + n - 1) % n;

    std::vector<double> cface(n_s), rhs(n_s);
    for (std::size_t s = 0; s < n_s; ++s) {
      cface[s] = std::max(0.5 * (state.c[s][l] + state.c[s][r]), nonnegativity_floor);
      rhs[s] = (state.c[s][r] * state.T[r] - state.c[s][l] * state.T[l]) / dx;
    }

    SmallMatrix m(n_s, n_s);
    for (std::size_t i = 0; i < n_s; ++i) {
      if (i == drop) continue;
      double diag = 0.0;
      for (std::size_t j = 0; j < n_s; ++j) {
        if (j == i) continue;
        diag -= cface[j] / diffusion(i, j);
        m(i, j) = cface[i] / diffusion(i, j);
      }
      m(i, i) = diag;
    }
    const double grad = closure_gradient
                            ? (*closure_gradient)[f]
                            : (ctot[r] - ctot[l]) / dx;
    for (std::size_t j = 0; j < n_s; ++j) m(drop, j) = 1.0;
    std::vector<double> b = rhs;
    b[drop] = -closure.alpha * grad;

    std::vector<double> j_face;
    try {
      j_face = lu_solve(m, b, "flux face " + std::to_string(f));
    } catch (const NumericalError&) {
      std::ostringstream os;
      os << "flux_solve: singular face system at face " << f << " (species "
         << mixture.species(drop).name << " row dropped)";
      throw NumericalError(os.str());
    }

    for (std::size_t s = 0; s < n_s; ++s) out.J[s][f] = j_face[s];

    // Residual of the omitted flux-gradient relation.
    double dropped = 0.0;
    for (std::size_t j = 0; j < n_s; ++j) {
      if (j == drop) continue;
      dropped += (cface[drop] * j_face[j] - cface[j] * j_face[drop]) / diffusion(drop, j);
    }
    out.max_dropped_residual =
        std::max(out.max_dropped_residual, std::abs(dropped - rhs[drop]));
    double sum_j = 0.0;
    for (std::size_t s = 0; s < n_s; ++s) sum_j += j_face[s];
    out.max_closure_residual =
        std::max(out.max_closure_residual, std::abs(sum_j + closure.alpha * grad));
  }

  if (periodic) {
    for (std::size_t s = 0; s < n_s; ++s) out.J[s][n] = out.J[s][0];
  }
  // No-flux walls keep J = 0 at faces 0 and n.
  return out;
}

SpeciesStepResult species_step(const std::vector<Field>& c,
                               const std::vector<Field>& fluxes, const Grid1D& grid,
                               double dt, double nonnegativity_floor) {
  const std::size_t n_s = c.size();
  const std::size_t n = grid.n_cells;
  const double dx = grid.dx();
  SpeciesStepResult out;
  out.c.resize(n_s);
  out.clipped_mass.assign(n_s, 0.0);

  for (std::size_t s = 0; s < n_s; ++s) {
    Field updated(n);
    for (std::size_t i = 0; i < n; ++i)
      updated[i] = c[s][i] - dt * (fluxes[s][i + 1] - fluxes[s][i]) / dx;

    double deficit = 0.0;
    double headroom = 0.0;
    for (double v : updated) {
      if (v < nonnegativity_floor)
        deficit += nonnegativity_floor - v;
      else
        headroom += v - nonnegativity_floor;
    }
    if (deficit > 0.0) {
      const double mass = field_sum(c[s]);
      if (deficit > 1e-6 * std::max(mass, 1e-300)) {
        std::ostringstream os;
        os << "species_step: clipping " << deficit * dx << " of species " << s
           << " mass in one step exceeds the 1e-6 budget";
        throw NumericalError(os.str());
      }
      const double scale = deficit / headroom;
      for (double& v : updated) {
        if (v < nonnegativity_floor)
          v = nonnegativity_floor;
        else
          v -= scale * (v - nonnegativity_floor);
      }
      out.clipped_mass[s] = deficit * dx;
    }
    out.c[s] = std::move(updated);
  }
  return out;
}

double relative_ctot_T_variation(const MacroState& state) {
  const Field ctot = state.ctot();
  double mean = 0.0;
  for (std::size_t i = 0; i < ctot.size(); ++i) mean += ctot[i] * state.T[i];
  mean /= static_cast<double>(ctot.size());
  double dev = 0.0;
  for (std::size_t i = 0; i < ctot.size(); ++i)
    dev = std::max(dev, std::abs(ctot[i] * state.T[i] - mean));
  return dev / std::abs(mean);
}

namespace {

MacroSnapshot make_snapshot(const MacroState& state, const Mixture& mixture,
                            const DiffusionMatrix& diffusion,
                            const ClosureConfig& closure, const Grid1D& grid,
                            double floor) {
  MacroSnapshot snap;
  snap.state = state;
  const MacroFluxes fluxes = flux_solve(state, mixture, diffusion, closure, grid, floor);
  snap.J_cells.assign(mixture.size(), Field(grid.n_cells, 0.0));
  for (std::size_t s = 0; s < mixture.size(); ++s)
    for (std::size_t i = 0; i < grid.n_cells; ++i)
      snap.J_cells[s][i] = 0.5 * (fluxes.J[s][i] + fluxes.J[s][i + 1]);
  return snap;
}

}  // namespace

MacroRunResult run_macro(const Mixture& mixture, const MacroState& initial,
                         const Grid1D& grid, const ClosureConfig& closure,
                         const MacroSolverConfig& config,
                         const std::vector<double>& snapshot_times,
                         std::size_t max_history_frames) {
  grid.validate();
  closure.validate();
  config.validate();
  const std::size_t n_s = mixture.size();
  const std::size_t n = grid.n_cells;
  if (initial.c.size() != n_s || initial.T.size() != n)
    throw ValidationError("run_macro: initial state does not match mixture/grid");
  for (const Field& ci : initial.c)
    if (ci.size() != n) throw ValidationError("run_macro: field size mismatch");
  check_positive_field(initial.T, "run_macro: initial T");

  const DiffusionMatrix diffusion = build_diffusion_matrix(mixture);
  const double dx = grid.dx();

  MacroRunResult result;
  result.well_prepared =
      relative_ctot_T_variation(initial) <= config.tolerances.ctot_T_variation;

  MacroState state = initial;
  Field ctot = state.ctot();

  // Time step from the binding stability bounds at the initial data.
  double dt = config.dt;
  if (dt == 0.0) {
    double bound = heat_step_max_dt(grid, closure.alpha, config.heat_scheme);
    const Field v0 = advection_velocity(ctot, grid, closure.alpha);
    double vmax = 0.0;
    for (double v : v0) vmax = std::max(vmax, std::abs(v));
    if (vmax > 0.0) bound = std::min(bound, dx / vmax);
    double d_species = 0.0;
    double t_max = 0.0;
    for (double t : state.T) t_max = std::max(t_max, t);
    for (std::size_t i = 0; i < n_s; ++i)
      for (std::size_t j = 0; j < n_s; ++j)
        if (i != j) d_species = std::max(d_species, diffusion(i, j) * t_max);
    if (d_species > 0.0) bound = std::min(bound, dx * dx / (2.0 * d_species));
    dt = config.cfl_safety * bound;
  }
  if (config.t_end > 0.0) dt = std::min(dt, config.t_end);
  result.dt = dt;

  // Snapshot schedule (sorted, deduplicated).
  std::vector<double> wanted = snapshot_times;
  std::sort(wanted.begin(), wanted.end());
  wanted.erase(std::unique(wanted.begin(), wanted.end()), wanted.end());
  std::size_t next_snap = 0;
  auto maybe_snapshot = [&](const MacroState& s) {
    while (next_snap < wanted.size() && s.time >= wanted[next_snap] - 1e-12) {
      result.snapshots.push_back(make_snapshot(s, mixture, diffusion, closure, grid,
                                               config.tolerances.nonnegativity_floor));
      ++next_snap;
    }
  };
  maybe_snapshot(state);

  const std::size_t est_steps =
      static_cast<std::size_t>(std::ceil(config.t_end / dt)) + 2;
  const std::size_t stride =
      std::max<std::size_t>(1, est_steps / std::max<std::size_t>(1, max_history_frames - 1));
  result.history.times.push_back(state.time);
  result.history.frames.push_back(ctot);

  auto record_diagnostics = [&](const MacroState& s, double closure_res,
                                double dropped_res, double clipped) {
    MacroDiagnosticsRow row;
    row.time = s.time;
    row.mass.resize(n_s);
    for (std::size_t sp = 0; sp < n_s; ++sp) row.mass[sp] = field_sum(s.c[sp]) * dx;
    const Field ct = s.ctot();
    row.min_ctot = *std::min_element(ct.begin(), ct.end());
    row.max_ctot = *std::max_element(ct.begin(), ct.end());
    row.ctot_T_variation = relative_ctot_T_variation(s);
    row.closure_residual = closure_res;
    row.dropped_row_residual = dropped_res;
    row.clipped_mass = clipped;
    result.diagnostics.push_back(row);
  };
  record_diagnostics(state, 0.0, 0.0, 0.0);

  std::size_t step_index = 0;
  while (state.time < config.t_end - 1e-12) {
    double step_dt = std::min(dt, config.t_end - state.time);
    if (next_snap < wanted.size())
      step_dt = std::min(step_dt, std::max(wanted[next_snap] - state.time, 1e-14));

    try {
    const Field ctot_new =
        heat_step(ctot, grid, closure.alpha, config.heat_scheme, step_dt);

    Field t_new;
    if (config.temperature_scheme == TemperatureScheme::kEulerianUpwind) {
      t_new = temperature_step_eulerian(state.T, ctot, ctot_new, grid, closure.alpha,
                                        step_dt);
    } else {
      CtotHistory local;
      local.times = {state.time, state.time + step_dt};
      local.frames = {ctot, ctot_new};
      CharacteristicsResult cr = temperature_characteristics(
          state.T, local, grid, closure.alpha, state.time + step_dt);
      result.characteristics_clamped += cr.clamped;
      t_new = std::move(cr.T);
    }
    check_positive_field(t_new, "run_macro: T");

    // Closure gradient consistent with the heat update so that the species
    // sum reproduces it exactly.
    Field closure_grad(n + 1, 0.0);
    const bool cn = config.heat_scheme == HeatScheme::kCrankNicolson;
    for (std::size_t f = 0; f <= n; ++f) {
      if (grid.boundary == Boundary::kNoFlux && (f == 0 || f == n)) continue;
      const std::size_t r = f % n;
      const std::size_t l = (f + n - 1) % n;
      const double gl = cn ? 0.5 * (ctot[l] + ctot_new[l]) : ctot[l];
      const double gr = cn ? 0.5 * (ctot[r] + ctot_new[r]) : ctot[r];
      closure_grad[f] = (gr - gl) / dx;
    }

    const MacroFluxes fluxes =
        flux_solve(state, mixture, diffusion, closure, grid,
                   config.tolerances.nonnegativity_floor, &closure_grad);
    SpeciesStepResult updated = species_step(
        state.c, fluxes.J, grid, step_dt, config.tolerances.nonnegativity_floor);

    state.c = std::move(updated.c);
    state.T = std::move(t_new);
    state.time += step_dt;
    ctot = state.ctot();

    ++step_index;
    if (step_index % stride == 0 || state.time >= config.t_end - 1e-12) {
      result.history.times.push_back(state.time);
      result.history.frames.push_back(ctot);
    }

    double clipped = 0.0;
    for (double v : updated.clipped_mass) clipped += v;
    record_diagnostics(state, fluxes.max_closure_residual,
                       fluxes.max_dropped_residual, clipped);
    maybe_snapshot(state);
    } catch (const NumericalError& err) {
      result.final_state = state;  // last valid state
      throw MacroAborted(std::string("run_macro aborted at t = ") +
                             std::to_string(state.time) + ": " + err.what(),
                         std::move(result));
    }
  }

  result.final_state = state;
  return result;
}

}  // namespace maxstef
