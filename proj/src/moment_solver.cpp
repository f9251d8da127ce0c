#include "maxstef/moment_solver.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "maxstef/linalg.hpp"

namespace maxstef {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// expm1(x)/x with the removable singularity handled.
double em1(double x) {
  if (std::abs(x) < 1e-8) return 1.0 + 0.5 * x + x * x / 6.0;
  return std::expm1(x) / x;
}

struct ExchangeCoeffs {
  std::size_t n = 0;
  std::vector<double> mass;
  double k = 1.0;
  std::vector<double> beta;   // [i*n+j] = 2 pi ||b_ij|| m_j / (m_i + m_j)
  std::vector<double> gamma;  // [i*n+j] = 2 pi ||b_ij|| m_i m_j / (m_i + m_j)^2
  bool any_friction = false;
};

ExchangeCoeffs exchange_coeffs(const Mixture& mixture) {
  ExchangeCoeffs co;
  co.n = mixture.size();
  co.k = mixture.constants().k_boltzmann;
  co.mass.resize(co.n);
  co.beta.assign(co.n * co.n, 0.0);
  co.gamma.assign(co.n * co.n, 0.0);
  for (std::size_t i = 0; i < co.n; ++i) co.mass[i] = mixture.species(i).mass;
  for (std::size_t i = 0; i < co.n; ++i) {
    for (std::size_t j = 0; j < co.n; ++j) {
      if (i == j) continue;
      const double norm = mixture.kernel_norm(i, j);
      const double msum = co.mass[i] + co.mass[j];
      co.beta[i * co.n + j] = kTwoPi * norm * co.mass[j] / msum;
      co.gamma[i * co.n + j] = kTwoPi * norm * co.mass[i] * co.mass[j] / (msum * msum);
      if (norm > 0.0) co.any_friction = true;
    }
  }
  return co;
}

struct ConsVars {
  Field c, w, e;
};

ConsVars to_conserved(const Field& c, const Field& u, const Field& t, double m,
                      double k, double eps) {
  const std::size_t n = c.size();
  ConsVars out{Field(n), Field(n), Field(n)};
  for (std::size_t i = 0; i < n; ++i) {
    out.c[i] = c[i];
    out.w[i] = c[i] * u[i];
    out.e[i] = 1.5 * k * c[i] * t[i] + 0.5 * eps * eps * m * c[i] * u[i] * u[i];
  }
  return out;
}

struct FluxTriple {
  double c, w, e;
};

FluxTriple physical_flux(double c, double u, double t, double m, double k, double eps,
                         bool include_pressure) {
  FluxTriple f;
  f.c = c * u;
  f.w = c * u * u;
  if (include_pressure) f.w += k / (m * eps * eps) * c * t;
  f.e = (2.5 * k * c * t + 0.5 * eps * eps * m * c * u * u) * u;
  return f;
}

double wave_speed(double u, double t, double m, double k, double eps,
                  bool include_pressure) {
  const double cs0 = std::sqrt(5.0 * k * t / (3.0 * m));
  return std::abs(u) + (include_pressure ? cs0 / eps : cs0);
}

void check_state(const KineticMomentState& state, const Mixture& mixture,
                 const Grid1D& grid) {
  const std::size_t n_s = mixture.size();
  if (state.c.size() != n_s || state.u.size() != n_s || state.T.size() != n_s)
    throw ValidationError("moment state: species count mismatch");
  for (std::size_t s = 0; s < n_s; ++s) {
    if (state.c[s].size() != grid.n_cells || state.u[s].size() != grid.n_cells ||
        state.T[s].size() != grid.n_cells)
      throw ValidationError("moment state: field size mismatch");
    for (std::size_t i = 0; i < grid.n_cells; ++i) {
      if (!(state.c[s][i] >= 0.0) || !std::isfinite(state.c[s][i]))
        throw NumericalError("moment state: concentration lost nonnegativity");
      if (!(state.T[s][i] > 0.0) || !std::isfinite(state.T[s][i]))
        throw NumericalError("moment state: temperature lost positivity");
    }
  }
  if (!(state.epsilon > 0.0))
    throw ValidationError("moment state: epsilon must be > 0");
}

}  // namespace

TransportMode resolve_transport_mode(TransportMode requested, double epsilon,
                                     const Mixture& mixture,
                                     const KineticMomentState& state) {
  (void)state;
  if (requested != TransportMode::kAuto) return requested;
  bool all_friction = true;
  for (std::size_t i = 0; i < mixture.size() && all_friction; ++i)
    for (std::size_t j = i + 1; j < mixture.size(); ++j)
      if (!(mixture.kernel_norm(i, j) > 0.0)) {
        all_friction = false;
        break;
      }
  return (epsilon <= 0.2 && all_friction) ? TransportMode::kAp
                                          : TransportMode::kClassic;
}

double transport_max_dt(const KineticMomentState& state, const Mixture& mixture,
                        const Grid1D& grid, TransportMode mode) {
  mode = resolve_transport_mode(mode, state.epsilon, mixture, state);
  const bool pressure = mode == TransportMode::kClassic;
  const double k = mixture.constants().k_boltzmann;
  double amax = 0.0;
  for (std::size_t s = 0; s < mixture.size(); ++s) {
    const double m = mixture.species(s).mass;
    for (std::size_t i = 0; i < grid.n_cells; ++i)
      amax = std::max(amax, wave_speed(state.u[s][i], state.T[s][i], m, k,
                                       state.epsilon, pressure));
  }
  return amax > 0.0 ? grid.dx() / amax : 1e300;
}

void transport_substep(KineticMomentState& state, const Mixture& mixture,
                       const Grid1D& grid, double dt, TransportMode mode,
                       const MomentSource& source) {
  grid.validate();
  check_state(state, mixture, grid);
  mode = resolve_transport_mode(mode, state.epsilon, mixture, state);
  const bool pressure = mode == TransportMode::kClassic;

  const double hard_bound = transport_max_dt(state, mixture, grid, mode);
  if (dt > hard_bound * (1.0 + 1e-12)) {
    std::ostringstream os;
    os << "transport_substep: CFL violation; use dt <= " << hard_bound;
    throw NumericalError(os.str());
  }

  const std::size_t n = grid.n_cells;
  const std::size_t n_s = mixture.size();
  const double dx = grid.dx();
  const double k = mixture.constants().k_boltzmann;
  const double eps = state.epsilon;
  const bool periodic = grid.boundary == Boundary::kPeriodic;

  // Manufactured sources for both Heun stages, evaluated once.
  std::vector<Field> src1_mass, src1_mom, src1_energy;
  std::vector<Field> src2_mass, src2_mom, src2_energy;
  const bool have_source = static_cast<bool>(source);
  if (have_source) {
    src1_mass.assign(n_s, Field(n, 0.0));
    src1_mom.assign(n_s, Field(n, 0.0));
    src1_energy.assign(n_s, Field(n, 0.0));
    source(state.time, src1_mass, src1_mom, src1_energy);
    src2_mass.assign(n_s, Field(n, 0.0));
    src2_mom.assign(n_s, Field(n, 0.0));
    src2_energy.assign(n_s, Field(n, 0.0));
    source(state.time + dt, src2_mass, src2_mom, src2_energy);
  }

  for (std::size_t s = 0; s < n_s; ++s) {
    const double m = mixture.species(s).mass;

    auto rhs = [&](const ConsVars& v, Field& dc, Field& dw, Field& de) {
      // Primitive recovery for flux evaluation.
      Field u(n), t(n);
      for (std::size_t i = 0; i < n; ++i) {
        const double cc = std::max(v.c[i], 1e-300);
        u[i] = v.w[i] / cc;
        t[i] = (v.e[i] - 0.5 * eps * eps * m * cc * u[i] * u[i]) * 2.0 / (3.0 * k * cc);
        if (!(t[i] > 0.0))
          throw NumericalError("transport_substep: temperature lost positivity");
      }
      // LLF face fluxes; face f between cells f-1 and f.
      Field fc(n + 1), fw(n + 1), fe(n + 1);
      for (std::size_t f = 0; f <= n; ++f) {
        std::size_t l, r;
        double cl, ul, tl, cr, ur, tr;
        if (periodic) {
          l = (f + n - 1) % n;
          r = f % n;
          cl = v.c[l]; ul = u[l]; tl = t[l];
          cr = v.c[r]; ur = u[r]; tr = t[r];
        } else if (f == 0) {
          // reflective ghost of cell 0
          cl = v.c[0]; ul = -u[0]; tl = t[0];
          cr = v.c[0]; ur = u[0]; tr = t[0];
        } else if (f == n) {
          cl = v.c[n - 1]; ul = u[n - 1]; tl = t[n - 1];
          cr = v.c[n - 1]; ur = -u[n - 1]; tr = t[n - 1];
        } else {
          l = f - 1; r = f;
          cl = v.c[l]; ul = u[l]; tl = t[l];
          cr = v.c[r]; ur = u[r]; tr = t[r];
        }
        const FluxTriple fl = physical_flux(cl, ul, tl, m, k, eps, pressure);
        const FluxTriple fr = physical_flux(cr, ur, tr, m, k, eps, pressure);
        const double a = std::max(wave_speed(ul, tl, m, k, eps, pressure),
                                  wave_speed(ur, tr, m, k, eps, pressure));
        const double el = 1.5 * k * cl * tl + 0.5 * eps * eps * m * cl * ul * ul;
        const double er = 1.5 * k * cr * tr + 0.5 * eps * eps * m * cr * ur * ur;
        fc[f] = 0.5 * (fl.c + fr.c) - 0.5 * a * (cr - cl);
        fw[f] = 0.5 * (fl.w + fr.w) - 0.5 * a * (cr * ur - cl * ul);
        fe[f] = 0.5 * (fl.e + fr.e) - 0.5 * a * (er - el);
      }
      for (std::size_t i = 0; i < n; ++i) {
        dc[i] = -(fc[i + 1] - fc[i]) / dx;
        dw[i] = -(fw[i + 1] - fw[i]) / dx;
        de[i] = -(fe[i + 1] - fe[i]) / dx;
      }
    };

    ConsVars v0 = to_conserved(state.c[s], state.u[s], state.T[s], m, k, eps);
    Field dc(n), dw(n), de(n);
    rhs(v0, dc, dw, de);
    ConsVars v1{Field(n), Field(n), Field(n)};
    for (std::size_t i = 0; i < n; ++i) {
      v1.c[i] = v0.c[i] + dt * dc[i];
      v1.w[i] = v0.w[i] + dt * dw[i];
      v1.e[i] = v0.e[i] + dt * de[i];
      if (have_source) {
        v1.c[i] += dt * src1_mass[s][i];
        v1.w[i] += dt * src1_mom[s][i];
        v1.e[i] += dt * src1_energy[s][i];
      }
    }
    rhs(v1, dc, dw, de);
    for (std::size_t i = 0; i < n; ++i) {
      double c2 = v1.c[i] + dt * dc[i];
      double w2 = v1.w[i] + dt * dw[i];
      double e2 = v1.e[i] + dt * de[i];
      if (have_source) {
        c2 += dt * src2_mass[s][i];
        w2 += dt * src2_mom[s][i];
        e2 += dt * src2_energy[s][i];
      }
      const double c_new = 0.5 * (v0.c[i] + c2);
      const double w_new = 0.5 * (v0.w[i] + w2);
      const double e_new = 0.5 * (v0.e[i] + e2);
      if (!(c_new > 0.0))
        throw NumericalError("transport_substep: concentration lost positivity");
      const double u_new = w_new / c_new;
      const double t_new =
          (e_new - 0.5 * eps * eps * m * c_new * u_new * u_new) * 2.0 /
          (3.0 * k * c_new);
      if (!(t_new > 0.0))
        throw NumericalError("transport_substep: temperature lost positivity");
      state.c[s][i] = c_new;
      state.u[s][i] = u_new;
      state.T[s][i] = t_new;
    }
  }
  state.time += dt;
}

std::vector<Field> pressure_forcing_fields(const KineticMomentState& state,
                                           const Mixture& mixture, const Grid1D& grid,
                                           double nonnegativity_floor) {
  const std::size_t n = grid.n_cells;
  const std::size_t n_s = mixture.size();
  const double dx = grid.dx();
  const double k = mixture.constants().k_boltzmann;
  std::vector<Field> h(n_s, Field(n, 0.0));
  for (std::size_t s = 0; s < n_s; ++s) {
    const double m = mixture.species(s).mass;
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t l = grid.left(i);
      const std::size_t r = grid.right(i);
      const double grad =
          (state.c[s][r] * state.T[s][r] - state.c[s][l] * state.T[s][l]) /
          (2.0 * dx);
      const double cc = std::max(state.c[s][i], nonnegativity_floor);
      h[s][i] = -k / (m * cc) * grad;
    }
  }
  return h;
}

RelaxationAudit relaxation_substep(KineticMomentState& state, const Mixture& mixture,
                                   double dt,
                                   const std::vector<Field>* pressure_forcing,
                                   double nonnegativity_floor) {
  const ExchangeCoeffs co = exchange_coeffs(mixture);
  const std::size_t n_s = co.n;
  const std::size_t n_cells = state.c.empty() ? 0 : state.c[0].size();
  const double eps = state.epsilon;
  const double e2 = eps * eps;
  const double k = co.k;

  RelaxationAudit audit;

  std::vector<long> singular_counts(n_cells, 0);
  std::vector<double> energy_defects(n_cells, 0.0);
  std::vector<double> momentum_defects(n_cells, 0.0);
  std::vector<char> lost_positivity(n_cells, 0);  // exceptions cannot cross omp

#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
  for (std::size_t cell = 0; cell < n_cells; ++cell) {
    std::vector<double> cf(n_s), u0(n_s), t0(n_s), h(n_s, 0.0);
    for (std::size_t s = 0; s < n_s; ++s) {
      cf[s] = std::max(state.c[s][cell], nonnegativity_floor);
      u0[s] = state.u[s][cell];
      t0[s] = state.T[s][cell];
      if (pressure_forcing) h[s] = (*pressure_forcing)[s][cell];
    }
    if (!co.any_friction) ++singular_counts[cell];

    // Velocity relaxation: du/dt = (A u + h)/eps^2, symmetrized by
    // D = diag(m_i c_i).
    std::vector<double> scale(n_s);
    for (std::size_t s = 0; s < n_s; ++s) scale[s] = std::sqrt(co.mass[s] * cf[s]);
    SmallMatrix sym(n_s, n_s);
    for (std::size_t i = 0; i < n_s; ++i) {
      double diag = 0.0;
      for (std::size_t j = 0; j < n_s; ++j) {
        if (j == i) continue;
        diag -= co.beta[i * n_s + j] * cf[j];
        sym(i, j) = co.beta[i * n_s + j] * cf[j] * scale[i] / scale[j];
      }
      sym(i, i) = diag;
    }
    const SymmetricEigen eig = jacobi_eigen(sym);

    std::vector<double> z0(n_s, 0.0), eta(n_s, 0.0);
    for (std::size_t kk = 0; kk < n_s; ++kk)
      for (std::size_t i = 0; i < n_s; ++i) {
        z0[kk] += eig.eigenvectors(i, kk) * scale[i] * u0[i];
        eta[kk] += eig.eigenvectors(i, kk) * scale[i] * h[i];
      }

    std::vector<double> z_end(n_s), z_int(n_s), mode_a(n_s, 0.0), mode_b(n_s, 0.0);
    for (std::size_t kk = 0; kk < n_s; ++kk) {
      const double lam = eig.eigenvalues[kk];
      if (lam == 0.0) {
        z_end[kk] = z0[kk] + eta[kk] * dt / e2;
        z_int[kk] = z0[kk] * dt + eta[kk] * dt * dt / (2.0 * e2);
      } else {
        const double theta = lam * dt / e2;
        mode_a[kk] = z0[kk] + eta[kk] / lam;
        mode_b[kk] = -eta[kk] / lam;
        z_end[kk] = mode_a[kk] * std::exp(theta) + mode_b[kk];
        z_int[kk] = mode_a[kk] * dt * em1(theta) + mode_b[kk] * dt;
      }
    }

    std::vector<double> u1(n_s, 0.0), u_int(n_s, 0.0);
    for (std::size_t i = 0; i < n_s; ++i)
      for (std::size_t kk = 0; kk < n_s; ++kk) {
        u1[i] += eig.eigenvectors(i, kk) * z_end[kk] / scale[i];
        u_int[i] += eig.eigenvectors(i, kk) * z_int[kk] / scale[i];
      }

    // Exact frictional heating: (2/3k) sum_j gamma_ij m_j c_j I_ij with
    // I_ij the time integral of |u_i - u_j|^2 along the relaxed trajectory.
    std::vector<double> heat(n_s, 0.0);
    for (std::size_t i = 0; i < n_s; ++i) {
      for (std::size_t j = i + 1; j < n_s; ++j) {
        const double g = co.gamma[i * n_s + j];
        if (!(g > 0.0)) continue;
        double iij = 0.0;
        for (std::size_t kk = 0; kk < n_s; ++kk) {
          const double lk = eig.eigenvalues[kk];
          if (lk == 0.0) continue;  // common modes cancel in differences
          const double dk = eig.eigenvectors(j, kk) / scale[j] -
                            eig.eigenvectors(i, kk) / scale[i];
          if (dk == 0.0) continue;
          const double tk = lk * dt / e2;
          for (std::size_t ll = 0; ll < n_s; ++ll) {
            const double ln = eig.eigenvalues[ll];
            if (ln == 0.0) continue;
            const double dl = eig.eigenvectors(j, ll) / scale[j] -
                              eig.eigenvectors(i, ll) / scale[i];
            if (dl == 0.0) continue;
            const double tl = ln * dt / e2;
            iij += dk * dl *
                   (mode_a[kk] * mode_a[ll] * dt * em1(tk + tl) +
                    mode_a[kk] * mode_b[ll] * dt * em1(tk) +
                    mode_b[kk] * mode_a[ll] * dt * em1(tl) +
                    mode_b[kk] * mode_b[ll] * dt);
          }
        }
        heat[i] += (2.0 / (3.0 * k)) * g * co.mass[j] * cf[j] * iij;
        heat[j] += (2.0 / (3.0 * k)) * g * co.mass[i] * cf[i] * iij;
      }
    }

    // Temperature exchange: dT/dt = (2/eps^2) sum_j gamma_ij c_j (T_j - T_i),
    // symmetrized by diag(c_i).
    std::vector<double> tscale(n_s);
    for (std::size_t s = 0; s < n_s; ++s) tscale[s] = std::sqrt(cf[s]);
    SmallMatrix tsym(n_s, n_s);
    for (std::size_t i = 0; i < n_s; ++i) {
      double diag = 0.0;
      for (std::size_t j = 0; j < n_s; ++j) {
        if (j == i) continue;
        diag -= 2.0 * co.gamma[i * n_s + j] * cf[j];
        tsym(i, j) = 2.0 * co.gamma[i * n_s + j] * tscale[i] * tscale[j];
      }
      tsym(i, i) = diag;
    }
    const SymmetricEigen teig = jacobi_eigen(tsym);
    std::vector<double> tz(n_s, 0.0);
    for (std::size_t kk = 0; kk < n_s; ++kk)
      for (std::size_t i = 0; i < n_s; ++i)
        tz[kk] += teig.eigenvectors(i, kk) * tscale[i] * t0[i];
    std::vector<double> t1(n_s, 0.0);
    for (std::size_t i = 0; i < n_s; ++i) {
      for (std::size_t kk = 0; kk < n_s; ++kk) {
        const double theta = teig.eigenvalues[kk] * dt / e2;
        t1[i] += teig.eigenvectors(i, kk) * std::exp(theta) * tz[kk] / tscale[i];
      }
    }

    // Pressure-forcing work is neutralized here; it enters through the
    // transport enthalpy flux as in the unsplit system.
    for (std::size_t i = 0; i < n_s; ++i) {
      t1[i] += heat[i];
      if (pressure_forcing)
        t1[i] -= (2.0 * co.mass[i] * h[i] / (3.0 * k)) * u_int[i];
      if (!(t1[i] > 0.0)) lost_positivity[cell] = 1;
    }

    // Collisional conservation audits.
    double mom0 = 0.0, mom1 = 0.0, impulse = 0.0, e0 = 0.0, e1 = 0.0;
    for (std::size_t i = 0; i < n_s; ++i) {
      mom0 += co.mass[i] * cf[i] * u0[i];
      mom1 += co.mass[i] * cf[i] * u1[i];
      impulse += co.mass[i] * cf[i] * h[i] * dt / e2;
      e0 += 1.5 * k * cf[i] * t0[i] + 0.5 * e2 * co.mass[i] * cf[i] * u0[i] * u0[i];
      e1 += 1.5 * k * cf[i] * t1[i] + 0.5 * e2 * co.mass[i] * cf[i] * u1[i] * u1[i];
    }
    momentum_defects[cell] = std::abs(mom1 - mom0 - impulse);
    energy_defects[cell] = std::abs(e1 - e0);

    for (std::size_t s = 0; s < n_s; ++s) {
      state.u[s][cell] = u1[s];
      state.T[s][cell] = t1[s];
    }
  }

  for (std::size_t cell = 0; cell < n_cells; ++cell) {
    if (lost_positivity[cell])
      throw NumericalError("relaxation_substep: temperature lost positivity at cell " +
                           std::to_string(cell));
    audit.singular_cells += singular_counts[cell];
    audit.max_energy_defect = std::max(audit.max_energy_defect, energy_defects[cell]);
    audit.max_momentum_defect =
        std::max(audit.max_momentum_defect, momentum_defects[cell]);
  }
  return audit;
}

RelaxationAudit moment_step(KineticMomentState& state, const Mixture& mixture,
                            const Grid1D& grid, double dt, TransportMode mode,
                            double nonnegativity_floor) {
  mode = resolve_transport_mode(mode, state.epsilon, mixture, state);
  RelaxationAudit total;
  auto accumulate = [&total](const RelaxationAudit& a) {
    total.max_energy_defect = std::max(total.max_energy_defect, a.max_energy_defect);
    total.max_momentum_defect =
        std::max(total.max_momentum_defect, a.max_momentum_defect);
    total.singular_cells += a.singular_cells;
  };

  if (mode == TransportMode::kAp) {
    std::vector<Field> h = pressure_forcing_fields(state, mixture, grid,
                                                   nonnegativity_floor);
    accumulate(relaxation_substep(state, mixture, 0.5 * dt, &h, nonnegativity_floor));
    transport_substep(state, mixture, grid, dt, mode);
    h = pressure_forcing_fields(state, mixture, grid, nonnegativity_floor);
    accumulate(relaxation_substep(state, mixture, 0.5 * dt, &h, nonnegativity_floor));
  } else {
    accumulate(relaxation_substep(state, mixture, 0.5 * dt, nullptr,
                                  nonnegativity_floor));
    transport_substep(state, mixture, grid, dt, mode);
    accumulate(relaxation_substep(state, mixture, 0.5 * dt, nullptr,
                                  nonnegativity_floor));
  }
  return total;
}

namespace {

double ap_damping_max_dt(const KineticMomentState& state, const Mixture& mixture,
                         const Grid1D& grid) {
  const ExchangeCoeffs co = exchange_coeffs(mixture);
  const double dx = grid.dx();
  const double k = co.k;
  double bound = 1e300;
  for (std::size_t cell = 0; cell < grid.n_cells; ++cell) {
    double r_min = 1e300;
    double cs2_max = 0.0;
    for (std::size_t i = 0; i < co.n; ++i) {
      double r = 0.0;
      for (std::size_t j = 0; j < co.n; ++j)
        if (j != i) r += co.beta[i * co.n + j] * state.c[j][cell];
      r_min = std::min(r_min, r);
      cs2_max = std::max(cs2_max, 5.0 * k * state.T[i][cell] / (3.0 * co.mass[i]));
    }
    if (!(r_min > 0.0)) return 0.0;
    bound = std::min(bound, 2.0 * r_min * (dx / std::numbers::pi) *
                                (dx / std::numbers::pi) / cs2_max);
  }
  return bound;
}

MomentDiagnosticsRow moment_diagnostics(const KineticMomentState& state,
                                        const Mixture& mixture, const Grid1D& grid,
                                        double energy_audit, double momentum_audit) {
  MomentDiagnosticsRow row;
  row.time = state.time;
  const double dx = grid.dx();
  const double k = mixture.constants().k_boltzmann;
  const double e2 = state.epsilon * state.epsilon;
  row.mass.resize(mixture.size());
  for (std::size_t s = 0; s < mixture.size(); ++s) {
    const double m = mixture.species(s).mass;
    row.mass[s] = field_sum(state.c[s]) * dx;
    for (std::size_t i = 0; i < grid.n_cells; ++i) {
      row.total_momentum += m * state.c[s][i] * state.u[s][i] * dx;
      row.total_energy += (3.0 * k * state.c[s][i] * state.T[s][i] +
                           e2 * m * state.c[s][i] * state.u[s][i] * state.u[s][i]) *
                          dx;
    }
  }
  for (std::size_t i = 0; i < grid.n_cells; ++i) {
    for (std::size_t a = 0; a < mixture.size(); ++a)
      for (std::size_t b = a + 1; b < mixture.size(); ++b) {
        row.max_temp_gap =
            std::max(row.max_temp_gap, std::abs(state.T[a][i] - state.T[b][i]));
        row.max_velocity_gap =
            std::max(row.max_velocity_gap, std::abs(state.u[a][i] - state.u[b][i]));
      }
  }
  row.energy_audit = energy_audit;
  row.momentum_audit = momentum_audit;
  return row;
}

}  // namespace

MomentRunResult run_moment(const Mixture& mixture, const KineticMomentState& initial,
                           const Grid1D& grid, const MomentSolverConfig& config,
                           const std::vector<double>& snapshot_times) {
  grid.validate();
  config.validate();
  check_state(initial, mixture, grid);

  MomentRunResult result;
  result.mode_used =
      resolve_transport_mode(config.transport, initial.epsilon, mixture, initial);

  KineticMomentState state = initial;

  double dt = config.dt;
  if (dt == 0.0) {
    double bound = transport_max_dt(state, mixture, grid, result.mode_used);
    if (result.mode_used == TransportMode::kAp) {
      const double damping = ap_damping_max_dt(state, mixture, grid);
      if (damping > 0.0) bound = std::min(bound, damping);
      // The friction-free total-momentum mode still needs its acoustic
      // frequency resolved by the frozen-forcing integration; this is the
      // classic-mode CFL and only binds below eps ~ 1e-3.
      bound = std::min(bound,
                       transport_max_dt(state, mixture, grid, TransportMode::kClassic));
      const DiffusionMatrix diff = build_diffusion_matrix(mixture);
      double t_max = 0.0;
      for (const Field& tf : state.T)
        for (double v : tf) t_max = std::max(t_max, v);
      double d_max = 0.0;
      for (std::size_t i = 0; i < mixture.size(); ++i)
        for (std::size_t j = 0; j < mixture.size(); ++j)
          if (i != j) d_max = std::max(d_max, diff(i, j) * t_max);
      if (d_max > 0.0)
        bound = std::min(bound, grid.dx() * grid.dx() / (2.0 * d_max));
    }
    dt = config.cfl_safety * bound;
  }
  if (config.t_end > 0.0) dt = std::min(dt, config.t_end);
  result.dt = dt;

  std::vector<double> wanted = snapshot_times;
  std::sort(wanted.begin(), wanted.end());
  wanted.erase(std::unique(wanted.begin(), wanted.end()), wanted.end());
  std::size_t next_snap = 0;
  auto maybe_snapshot = [&](const KineticMomentState& s) {
    while (next_snap < wanted.size() && s.time >= wanted[next_snap] - 1e-12) {
      result.snapshots.push_back(s);
      ++next_snap;
    }
  };
  maybe_snapshot(state);

  double energy_audit = 0.0, momentum_audit = 0.0;
  result.diagnostics.push_back(
      moment_diagnostics(state, mixture, grid, energy_audit, momentum_audit));

  const std::size_t est_steps =
      static_cast<std::size_t>(std::ceil(config.t_end / dt)) + 2;
  const std::size_t diag_stride = std::max<std::size_t>(1, est_steps / 4096);

  std::size_t step_index = 0;
  KineticMomentState last_valid = state;
  while (state.time < config.t_end - 1e-12) {
    double step_dt = std::min(dt, config.t_end - state.time);
    if (next_snap < wanted.size())
      step_dt = std::min(step_dt, std::max(wanted[next_snap] - state.time, 1e-14));

    try {
      const RelaxationAudit audit = moment_step(state, mixture, grid, step_dt,
                                                result.mode_used,
                                                config.nonnegativity_floor);
      energy_audit = std::max(energy_audit, audit.max_energy_defect);
      momentum_audit = std::max(momentum_audit, audit.max_momentum_defect);
      result.singular_relaxations += audit.singular_cells;
      last_valid = state;
    } catch (const NumericalError& err) {
      result.final_state = last_valid;
      throw MomentAborted(std::string("run_moment aborted at t = ") +
                              std::to_string(last_valid.time) + ": " + err.what(),
                          std::move(result));
    }

    ++step_index;
    if (step_index % diag_stride == 0 || state.time >= config.t_end - 1e-12)
      result.diagnostics.push_back(
          moment_diagnostics(state, mixture, grid, energy_audit, momentum_audit));
    maybe_snapshot(state);
  }

  result.final_state = state;
  return result;
}

double LimitDistances::max_c() const {
  return dist_c.empty() ? 0.0 : *std::max_element(dist_c.begin(), dist_c.end());
}
double LimitDistances::max_J() const {
  return dist_J.empty() ? 0.0 : *std::max_element(dist_J.begin(), dist_J.end());
}
double LimitDistances::max_T() const {
  return dist_T.empty() ? 0.0 : *std::max_element(dist_T.begin(), dist_T.end());
}

LimitDistances compare_to_limit(const KineticMomentState& moment_state,
                                const MacroSnapshot& macro_snapshot,
                                const Grid1D& grid) {
  const std::size_t n = grid.n_cells;
  const std::size_t n_s = moment_state.c.size();
  if (macro_snapshot.state.c.size() != n_s)
    throw ValidationError("compare_to_limit: species count mismatch");
  if (macro_snapshot.state.T.size() != n || moment_state.c.empty() ||
      moment_state.c[0].size() != n)
    throw ValidationError("compare_to_limit: grid mismatch");

  auto l2 = [n](const Field& f) {
    double s = 0.0;
    for (double v : f) s += v * v;
    return std::sqrt(s / static_cast<double>(n));
  };

  LimitDistances out;
  out.dist_c.resize(n_s);
  out.dist_J.resize(n_s);
  out.dist_T.resize(n_s);

  // Mean kinetic temperature for the triangle-inequality consistency check.
  Field t_mean(n, 0.0), ctot(n, 0.0);
  for (std::size_t s = 0; s < n_s; ++s)
    for (std::size_t i = 0; i < n; ++i) {
      t_mean[i] += moment_state.c[s][i] * moment_state.T[s][i];
      ctot[i] += moment_state.c[s][i];
    }
  for (std::size_t i = 0; i < n; ++i) t_mean[i] /= std::max(ctot[i], 1e-300);

  Field diff(n);
  for (std::size_t s = 0; s < n_s; ++s) {
    for (std::size_t i = 0; i < n; ++i)
      diff[i] = moment_state.c[s][i] - macro_snapshot.state.c[s][i];
    out.dist_c[s] = l2(diff) / std::max(l2(macro_snapshot.state.c[s]), 1e-300);

    for (std::size_t i = 0; i < n; ++i)
      diff[i] = moment_state.c[s][i] * moment_state.u[s][i] -
                macro_snapshot.J_cells[s][i];
    out.dist_J[s] = l2(diff) / std::max(l2(macro_snapshot.J_cells[s]), 1e-300);

    for (std::size_t i = 0; i < n; ++i)
      diff[i] = moment_state.T[s][i] - macro_snapshot.state.T[i];
    const double dist_t = l2(diff) / std::max(l2(macro_snapshot.state.T), 1e-300);
    out.dist_T[s] = dist_t;

    // ||T_s - T|| <= ||Tbar - T|| + ||T_s - Tbar|| to rounding.
    Field mean_diff(n), gap(n);
    for (std::size_t i = 0; i < n; ++i) {
      mean_diff[i] = t_mean[i] - macro_snapshot.state.T[i];
      gap[i] = moment_state.T[s][i] - t_mean[i];
    }
    const double bound =
        (l2(mean_diff) + l2(gap)) / std::max(l2(macro_snapshot.state.T), 1e-300);
    if (dist_t > bound + 1e-12) out.triangle_consistent = false;
  }
  return out;
}

void EpsSweepConfig::validate() const {
  if (epsilons.size() < 3)
    throw ValidationError("sweep: need at least 3 epsilon values");
  for (std::size_t i = 0; i < epsilons.size(); ++i) {
    if (!(epsilons[i] > 0.0))
      throw ValidationError("sweep: epsilons must be strictly positive");
    if (i > 0 && !(epsilons[i] < epsilons[i - 1]))
      throw ValidationError("sweep: epsilons must be strictly decreasing");
  }
  if (!(t_measure > 0.0)) throw ValidationError("sweep: t_measure must be > 0");
}

namespace {

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y,
                    std::size_t count) {
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < count; ++i) {
    const double lx = std::log(x[i]);
    const double ly = std::log(std::max(y[i], 1e-300));
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double d = count * sxx - sx * sx;
  return d != 0.0 ? (count * sxy - sx * sy) / d : 0.0;
}

}  // namespace

ConvergenceReport eps_sweep(const Mixture& mixture, const Grid1D& grid,
                            const KineticMomentState& initial_template,
                            const MomentSolverConfig& moment_config,
                            const MacroState& macro_initial,
                            const ClosureConfig& closure,
                            const MacroSolverConfig& macro_config,
                            const EpsSweepConfig& sweep) {
  sweep.validate();

  MacroSolverConfig ref_config = macro_config;
  ref_config.t_end = sweep.t_measure;
  const MacroRunResult macro_run = run_macro(mixture, macro_initial, grid, closure,
                                             ref_config, {sweep.t_measure});
  if (macro_run.snapshots.empty())
    throw NumericalError("sweep: macro reference produced no snapshot");
  const MacroSnapshot& reference = macro_run.snapshots.back();

  ConvergenceReport report;
  std::vector<double> gaps;
  for (double eps : sweep.epsilons) {
    KineticMomentState init = initial_template;
    init.epsilon = eps;
    init.time = 0.0;
    MomentSolverConfig cfg = moment_config;
    cfg.t_end = sweep.t_measure;
    const MomentRunResult run = run_moment(mixture, init, grid, cfg);

    ConvergenceReportRow row;
    row.epsilon = eps;
    row.temp_gap = run.diagnostics.back().max_temp_gap;
    gaps.push_back(row.temp_gap);
    const LimitDistances dist = compare_to_limit(run.final_state, reference, grid);
    row.dist_c = dist.max_c();
    row.dist_J = dist.max_J();
    row.dist_T = dist.max_T();
    row.fitted_order_running =
        report.rows.empty()
            ? 0.0
            : loglog_slope(sweep.epsilons, gaps, report.rows.size() + 1);
    report.rows.push_back(row);
  }

  report.gap_order = loglog_slope(sweep.epsilons, gaps, gaps.size());
  for (std::size_t i = 1; i < report.rows.size(); ++i) {
    if (!(report.rows[i].temp_gap < report.rows[i - 1].temp_gap))
      report.gap_monotone = false;
    if (!(report.rows[i].dist_c < report.rows[i - 1].dist_c &&
          report.rows[i].dist_J < report.rows[i - 1].dist_J &&
          report.rows[i].dist_T < report.rows[i - 1].dist_T))
      report.distances_monotone = false;
  }
  bool degenerate = false;
  for (double g : gaps)
    if (g < 1e-250) degenerate = true;
  report.inconclusive = degenerate || !report.gap_monotone;
  return report;
}

}  // namespace maxstef
