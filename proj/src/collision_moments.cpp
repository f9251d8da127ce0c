#include "maxstef/collision_moments.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "maxstef/errors.hpp"
#include "maxstef/quadrature.hpp"

namespace maxstef {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct KahanSum {
  double sum = 0.0;
  double carry = 0.0;

  void add(double x) {
    const double y = x - carry;
    const double t = sum + y;
    carry = (t - sum) - y;
    sum = t;
  }
};

inline Vec3 sub(const Vec3& a, const Vec3& b) {
  return {a[0] - b[0], a[1] - b[1], a[2] - b[2]};
}

// Sphere sums of the kernel against {1, sigma} in the local frame whose
// polar axis carries the relative velocity. These carry the full solid-angle
// measure, so s0 approximates 2*pi*||b||_L1.
struct SphereSums {
  double s0 = 0.0;     // sum w b
  double s_mu = 0.0;   // sum w b mu
  double s_c = 0.0;    // sum w b sin(theta) cos(phi)
  double s_s = 0.0;    // sum w b sin(theta) sin(phi)
};

SphereSums sphere_sums(const AngularKernel& kernel, int n_polar, int n_azimuth) {
  const SphereRule rule = sphere_rule(n_polar, n_azimuth);
  SphereSums s;
  for (const auto& node : rule.nodes) {
    const double wb = node.weight * kernel(node.mu);
    s.s0 += wb;
    s.s_mu += wb * node.mu;
    s.s_c += wb * node.s_cphi;
    s.s_s += wb * node.s_sphi;
  }
  return s;
}

struct SpeciesNodes {
  // Flattened 3D Gauss-Hermite grid: physical velocity and scalar weight.
  std::vector<Vec3> v;
  std::vector<double> w;
};

SpeciesNodes species_nodes(const QuadratureRule& gh, const Vec3& mean, double scale) {
  const std::size_t n = gh.size();
  SpeciesNodes out;
  out.v.reserve(n * n * n);
  out.w.reserve(n * n * n);
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b)
      for (std::size_t c = 0; c < n; ++c) {
        out.v.push_back({mean[0] + scale * gh.nodes[a],
                         mean[1] + scale * gh.nodes[b],
                         mean[2] + scale * gh.nodes[c]});
        out.w.push_back(gh.weights[a] * gh.weights[b] * gh.weights[c]);
      }
  return out;
}

void check_resolution(const OracleResolution& res) {
  if (res.hermite_per_axis < 4 || res.sphere_polar < 4 || res.sphere_azimuth < 4)
    throw ValidationError("oracle: resolution too small, need >= 4 nodes per axis");
}

void check_pair(const Mixture& mixture, std::size_t i, std::size_t j) {
  if (i >= mixture.size() || j >= mixture.size())
    throw ValidationError("oracle: species index out of range");
}

// Orthonormal frame with e parallel to g.
void local_frame(const Vec3& g, double gnorm, Vec3& e, Vec3& e1, Vec3& e2) {
  e = {g[0] / gnorm, g[1] / gnorm, g[2] / gnorm};
  int axis = 0;
  double amin = std::abs(e[0]);
  if (std::abs(e[1]) < amin) { axis = 1; amin = std::abs(e[1]); }
  if (std::abs(e[2]) < amin) axis = 2;
  Vec3 t{0.0, 0.0, 0.0};
  t[axis] = 1.0;
  const double proj = dot(t, e);
  e1 = {t[0] - proj * e[0], t[1] - proj * e[1], t[2] - proj * e[2]};
  const double n1 = std::sqrt(dot(e1, e1));
  e1 = {e1[0] / n1, e1[1] / n1, e1[2] / n1};
  e2 = {e[1] * e1[2] - e[2] * e1[1], e[2] * e1[0] - e[0] * e1[2],
        e[0] * e1[1] - e[1] * e1[0]};
}

}  // namespace

void validate_state(const Mixture& mixture, const MaxwellianState& state) {
  const std::size_t n = mixture.size();
  if (state.concentration.size() != n || state.velocity.size() != n ||
      state.temperature.size() != n)
    throw ValidationError("maxwellian state: field count does not match species count");
  for (std::size_t i = 0; i < n; ++i) {
    if (!(state.concentration[i] >= 0.0) || !std::isfinite(state.concentration[i])) {
      std::ostringstream os;
      os << "maxwellian state: concentration[" << i << "] must be >= 0";
      throw ValidationError(os.str());
    }
    if (!(state.temperature[i] > 0.0) || !std::isfinite(state.temperature[i])) {
      std::ostringstream os;
      os << "maxwellian state: temperature[" << i << "] must be > 0";
      throw ValidationError(os.str());
    }
  }
}

MaxwellianMoments maxwellian_moments(const Mixture& mixture,
                                     const MaxwellianState& state,
                                     std::size_t species, double epsilon) {
  validate_state(mixture, state);
  if (epsilon < 0.0) throw ValidationError("maxwellian_moments: epsilon must be >= 0");
  const double c = state.concentration[species];
  const Vec3& u = state.velocity[species];
  const double t = state.temperature[species];
  const double m = mixture.species(species).mass;
  const double k = mixture.constants().k_boltzmann;
  MaxwellianMoments out;
  out.zeroth = c;
  out.first = {epsilon * c * u[0], epsilon * c * u[1], epsilon * c * u[2]};
  out.second = 3.0 * k * c * t / m + epsilon * epsilon * c * dot(u, u);
  return out;
}

std::vector<Vec3> momentum_exchange_closed(const Mixture& mixture,
                                           const MaxwellianState& state) {
  validate_state(mixture, state);
  const std::size_t n = mixture.size();
  std::vector<Vec3> theta(n, Vec3{0.0, 0.0, 0.0});
  for (std::size_t i = 0; i < n; ++i) {
    const double mi = mixture.species(i).mass;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      const double mj = mixture.species(j).mass;
      const double coeff = kTwoPi * mixture.kernel_norm(i, j) * mj / (mi + mj) *
                           state.concentration[i] * state.concentration[j];
      for (int d = 0; d < 3; ++d)
        theta[i][d] += coeff * (state.velocity[j][d] - state.velocity[i][d]);
    }
  }
  return theta;
}

std::vector<double> energy_exchange_closed(const Mixture& mixture,
                                           const MaxwellianState& state,
                                           double epsilon) {
  validate_state(mixture, state);
  if (!(epsilon > 0.0))
    throw ValidationError("energy_exchange_closed: epsilon must be > 0");
  const std::size_t n = mixture.size();
  const double k = mixture.constants().k_boltzmann;
  std::vector<double> xi(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double mi = mixture.species(i).mass;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      const double mj = mixture.species(j).mass;
      const double msum = mi + mj;
      const double coeff = kTwoPi * mixture.kernel_norm(i, j) * mi * mj /
                           (msum * msum) * state.concentration[i] *
                           state.concentration[j];
      const Vec3 du = sub(state.velocity[j], state.velocity[i]);
      const Vec3 pu{mi * state.velocity[i][0] + mj * state.velocity[j][0],
                    mi * state.velocity[i][1] + mj * state.velocity[j][1],
                    mi * state.velocity[i][2] + mj * state.velocity[j][2]};
      xi[i] += coeff * (3.0 * k / epsilon *
                            (state.temperature[j] - state.temperature[i]) +
                        epsilon * dot(pu, du));
    }
  }
  return xi;
}

ExchangeRates exchange_rates(const Mixture& mixture, const MaxwellianState& state,
                             double epsilon) {
  ExchangeRates rates{momentum_exchange_closed(mixture, state),
                      energy_exchange_closed(mixture, state, epsilon)};
  for (std::size_t i = 0; i < rates.momentum.size(); ++i) {
    const double m = mixture.species(i).mass;
    for (int d = 0; d < 3; ++d) rates.momentum[i][d] *= m;
  }
  return rates;
}

std::array<double, 5> i_term_decomposition(const Mixture& mixture,
                                           const MaxwellianState& state,
                                           double epsilon, std::size_t i,
                                           std::size_t j) {
  validate_state(mixture, state);
  if (i == j) throw ValidationError("i_term_decomposition: species pair must differ");
  if (!(epsilon > 0.0))
    throw ValidationError("i_term_decomposition: epsilon must be > 0");
  check_pair(mixture, i, j);
  const double mi = mixture.species(i).mass;
  const double mj = mixture.species(j).mass;
  const double k = mixture.constants().k_boltzmann;
  const double s = (mi + mj) * (mi + mj);
  const double pref = 0.5 * mi / epsilon * kTwoPi * mixture.kernel_norm(i, j) *
                      state.concentration[i] * state.concentration[j];
  const Vec3& ui = state.velocity[i];
  const Vec3& uj = state.velocity[j];
  const double ti = state.temperature[i];
  const double tj = state.temperature[j];
  const double e2 = epsilon * epsilon;
  const Vec3 du = sub(uj, ui);
  std::array<double, 5> terms{};
  terms[0] = pref * (mi * mi / s - 1.0) * (3.0 * k * ti / mi + e2 * dot(ui, ui));
  terms[1] = pref * (mj * mj / s) * (3.0 * k * tj / mj + e2 * dot(uj, uj));
  terms[2] = pref * (2.0 * mi * mj / s) * e2 * dot(ui, uj);
  terms[3] = 0.0;  // odd sphere moment of an even kernel
  terms[4] = pref * (mj * mj / s) *
             (3.0 * k * ti / mi + 3.0 * k * tj / mj + e2 * dot(du, du));
  return terms;
}

OracleResult collision_moment_oracle(const Mixture& mixture,
                                     const MaxwellianState& state, std::size_t i,
                                     std::size_t j, OracleWeight weight,
                                     const OracleResolution& res, double epsilon) {
  validate_state(mixture, state);
  check_pair(mixture, i, j);
  check_resolution(res);
  if (epsilon < 0.0) throw ValidationError("oracle: epsilon must be >= 0");

  OracleResult out;
  if (weight == OracleWeight::kUnity) {
    // psi(v') - psi(v) vanishes pointwise; every quadrature term is zero.
    return out;
  }

  const double mi = mixture.species(i).mass;
  const double mj = mixture.species(j).mass;
  const double k = mixture.constants().k_boltzmann;
  const double kappa = mj / (mi + mj);
  const SphereSums sph = sphere_sums(mixture.kernel(i, j), res.sphere_polar,
                                     res.sphere_azimuth);
  const QuadratureRule gh = gauss_hermite(res.hermite_per_axis);
  const Vec3 mean_i{epsilon * state.velocity[i][0], epsilon * state.velocity[i][1],
                    epsilon * state.velocity[i][2]};
  const Vec3 mean_j{epsilon * state.velocity[j][0], epsilon * state.velocity[j][1],
                    epsilon * state.velocity[j][2]};
  const SpeciesNodes ni =
      species_nodes(gh, mean_i, std::sqrt(2.0 * k * state.temperature[i] / mi));
  const SpeciesNodes nj =
      species_nodes(gh, mean_j, std::sqrt(2.0 * k * state.temperature[j] / mj));
  const double norm = state.concentration[i] * state.concentration[j] /
                      std::pow(std::numbers::pi, 3.0);
  const bool want_velocity = weight == OracleWeight::kVelocity;

  const std::size_t n_outer = ni.v.size();
  int n_threads = 1;
#ifdef _OPENMP
  if (res.parallel) n_threads = omp_get_max_threads();
#endif
  std::vector<std::array<KahanSum, 4>> partial(n_threads);

#ifdef _OPENMP
#pragma omp parallel for schedule(static) num_threads(n_threads) if (res.parallel)
#endif
  for (std::size_t a = 0; a < n_outer; ++a) {
    int tid = 0;
#ifdef _OPENMP
    tid = omp_get_thread_num();
#endif
    auto& acc = partial[tid];
    const Vec3 v = ni.v[a];
    const double wa = ni.w[a];
    for (std::size_t b = 0; b < nj.v.size(); ++b) {
      const Vec3 g = sub(v, nj.v[b]);
      const double g2 = dot(g, g);
      if (g2 < 1e-300) continue;  // v' == v, zero contribution
      const double gn = std::sqrt(g2);
      Vec3 e, e1, e2v;
      local_frame(g, gn, e, e1, e2v);
      // Sphere sum of b*sigma in world coordinates.
      const Vec3 sv{sph.s_mu * e[0] + sph.s_c * e1[0] + sph.s_s * e2v[0],
                    sph.s_mu * e[1] + sph.s_c * e1[1] + sph.s_s * e2v[1],
                    sph.s_mu * e[2] + sph.s_c * e1[2] + sph.s_s * e2v[2]};
      const double w = norm * wa * nj.w[b];
      if (want_velocity) {
        acc[0].add(w * kappa * (gn * sv[0] - sph.s0 * g[0]));
        acc[1].add(w * kappa * (gn * sv[1] - sph.s0 * g[1]));
        acc[2].add(w * kappa * (gn * sv[2] - sph.s0 * g[2]));
      } else {
        const double gdotsphere =
            dot(g, e) * sph.s_mu + dot(g, e1) * sph.s_c + dot(g, e2v) * sph.s_s;
        const double lin = 2.0 * kappa * (gn * dot(v, sv) - sph.s0 * dot(v, g));
        const double quad = kappa * kappa * (2.0 * g2 * sph.s0 - 2.0 * gn * gdotsphere);
        acc[3].add(w * (lin + quad));
      }
    }
  }
  for (int t = 0; t < n_threads; ++t) {
    out.vector[0] += partial[t][0].sum;
    out.vector[1] += partial[t][1].sum;
    out.vector[2] += partial[t][2].sum;
    out.scalar += partial[t][3].sum;
  }
  return out;
}

double collision_zeroth_strong(const Mixture& mixture, const MaxwellianState& state,
                               std::size_t i, std::size_t j,
                               const OracleResolution& res, double epsilon) {
  validate_state(mixture, state);
  check_pair(mixture, i, j);
  check_resolution(res);

  const double mi = mixture.species(i).mass;
  const double mj = mixture.species(j).mass;
  const double k = mixture.constants().k_boltzmann;
  const double msum = mi + mj;
  const double kappa = mj / msum;   // enters v'
  const double kappas = mi / msum;  // enters v'*
  const double ai = mi / (2.0 * k * state.temperature[i]);
  const double aj = mj / (2.0 * k * state.temperature[j]);

  const SphereRule sph = sphere_rule(res.sphere_polar, res.sphere_azimuth);
  const QuadratureRule gh = gauss_hermite(res.hermite_per_axis);
  const Vec3 mean_i{epsilon * state.velocity[i][0], epsilon * state.velocity[i][1],
                    epsilon * state.velocity[i][2]};
  const Vec3 mean_j{epsilon * state.velocity[j][0], epsilon * state.velocity[j][1],
                    epsilon * state.velocity[j][2]};
  const SpeciesNodes ni =
      species_nodes(gh, mean_i, std::sqrt(2.0 * k * state.temperature[i] / mi));
  const SpeciesNodes nj =
      species_nodes(gh, mean_j, std::sqrt(2.0 * k * state.temperature[j] / mj));
  const double norm = state.concentration[i] * state.concentration[j] /
                      std::pow(std::numbers::pi, 3.0);
  const AngularKernel& kernel = mixture.kernel(i, j);

  std::vector<double> wb(sph.nodes.size());
  for (std::size_t s = 0; s < sph.nodes.size(); ++s)
    wb[s] = sph.nodes[s].weight * kernel(sph.nodes[s].mu);

  const std::size_t n_outer = ni.v.size();
  int n_threads = 1;
#ifdef _OPENMP
  if (res.parallel) n_threads = omp_get_max_threads();
#endif
  std::vector<KahanSum> partial(n_threads);

#ifdef _OPENMP
#pragma omp parallel for schedule(static) num_threads(n_threads) if (res.parallel)
#endif
  for (std::size_t a = 0; a < n_outer; ++a) {
    int tid = 0;
#ifdef _OPENMP
    tid = omp_get_thread_num();
#endif
    KahanSum& acc = partial[tid];
    const Vec3 v = ni.v[a];
    const Vec3 di = sub(v, mean_i);
    const double wa = ni.w[a];
    for (std::size_t b = 0; b < nj.v.size(); ++b) {
      const Vec3 g = sub(v, nj.v[b]);
      const double g2 = dot(g, g);
      if (g2 < 1e-300) continue;
      const double gn = std::sqrt(g2);
      const Vec3 dj = sub(nj.v[b], mean_j);
      // Gain/loss exponent: const + B.sigma, zero at sigma = g/|g|.
      const double c2 = ai * kappa * kappa + aj * kappas * kappas;
      const double cconst =
          2.0 * kappa * ai * dot(di, g) - 2.0 * kappas * aj * dot(dj, g) - 2.0 * g2 * c2;
      const Vec3 bvec{gn * (-2.0 * kappa * ai * di[0] + 2.0 * kappas * aj * dj[0] +
                            2.0 * c2 * g[0]),
                      gn * (-2.0 * kappa * ai * di[1] + 2.0 * kappas * aj * dj[1] +
                            2.0 * c2 * g[1]),
                      gn * (-2.0 * kappa * ai * di[2] + 2.0 * kappas * aj * dj[2] +
                            2.0 * c2 * g[2])};
      Vec3 e, e1, e2v;
      local_frame(g, gn, e, e1, e2v);
      const double b_mu = dot(bvec, e);
      const double b_c = dot(bvec, e1);
      const double b_s = dot(bvec, e2v);
      double inner = 0.0;
      for (std::size_t s = 0; s < sph.nodes.size(); ++s) {
        const auto& nd = sph.nodes[s];
        const double expo = cconst + b_mu * nd.mu + b_c * nd.s_cphi + b_s * nd.s_sphi;
        inner += wb[s] * std::expm1(expo);
      }
      acc.add(norm * wa * nj.w[b] * inner);
    }
  }
  double total = 0.0;
  for (int t = 0; t < n_threads; ++t) total += partial[t].sum;
  return total;
}

}  // namespace maxstef
