#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "maxstef/mixture.hpp"

namespace maxstef {

using Vec3 = std::array<double, 3>;

inline double dot(const Vec3& a, const Vec3& b) {
  return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}

// Per-species Maxwellian data at a single spatial point. The distribution of
// species i is a Gaussian with mean eps*u_i and variance k T_i / m_i per axis.
struct MaxwellianState {
  std::vector<double> concentration;  // c_i >= 0
  std::vector<Vec3> velocity;         // u_i
  std::vector<double> temperature;    // T_i > 0

  std::size_t size() const { return concentration.size(); }
};

void validate_state(const Mixture& mixture, const MaxwellianState& state);

// Velocity moments of the species-i Maxwellian:
//   zeroth = c_i, first = eps c_i u_i,
//   second = 3 k c_i T_i / m_i + eps^2 c_i |u_i|^2.
struct MaxwellianMoments {
  double zeroth;
  Vec3 first;
  double second;
};

MaxwellianMoments maxwellian_moments(const Mixture& mixture,
                                     const MaxwellianState& state,
                                     std::size_t species, double epsilon);

// Leading-order momentum exchange rates
//   Theta_i = sum_{j != i} 2 pi ||b_ij|| m_j/(m_i+m_j) c_i c_j (u_j - u_i).
// For velocity-independent kernels that are even in cos(theta) this is the
// exact first moment of the collision operator divided by eps (the formal
// O(eps) remainder vanishes identically).
std::vector<Vec3> momentum_exchange_closed(const Mixture& mixture,
                                           const MaxwellianState& state);

// Kinetic-energy exchange rates at mean free path eps:
//   Xi_i = sum_{j != i} 2 pi ||b_ij|| m_i m_j/(m_i+m_j)^2 c_i c_j
//          [ (3k/eps)(T_j - T_i) + eps (m_i u_i + m_j u_j) . (u_j - u_i) ].
// These are (m_i/2eps) times the |v|^2 moment of Q_ij and sum to zero over
// species for any masses (pairwise kinetic-energy conservation). Constants
// are validated against the quadrature oracle; see docs/constants.md.
std::vector<double> energy_exchange_closed(const Mixture& mixture,
                                           const MaxwellianState& state,
                                           double epsilon);

// Conserved exchange-rate bundle: momentum rates are the mass-weighted
// first moments m_i * Theta_i and energy rates the kinetic-energy moments,
// so both sum to zero over species for arbitrary masses (the velocity-moment
// rates Theta_i themselves only cancel pairwise under the mass weights).
struct ExchangeRates {
  std::vector<Vec3> momentum;  // sums to zero over species
  std::vector<double> energy;  // sums to zero over species
};

ExchangeRates exchange_rates(const Mixture& mixture, const MaxwellianState& state,
                             double epsilon);

// The five Gaussian integrals behind the pair (i,j) energy exchange, scaled
// like energy_exchange_closed. The fourth vanishes by the parity of the
// kernel; the five sum to the (i,j) term of energy_exchange_closed.
std::array<double, 5> i_term_decomposition(const Mixture& mixture,
                                           const MaxwellianState& state,
                                           double epsilon, std::size_t i,
                                           std::size_t j);

enum class OracleWeight { kUnity, kVelocity, kSpeedSquared };

struct OracleResolution {
  int hermite_per_axis = 16;
  int sphere_polar = 16;
  int sphere_azimuth = 16;
  bool parallel = true;  // OpenMP over outer velocity nodes when available
};

struct OracleResult {
  double scalar = 0.0;  // unity / speed-squared weights
  Vec3 vector{0.0, 0.0, 0.0};  // velocity weight
};

// Direct quadrature of the weak form
//   integral B_ij f_i(v) f_j(v*) [psi(v') - psi(v)] dsigma dv dv*
// with v' = (m_i v + m_j v* + m_j |v - v*| sigma)/(m_i + m_j), tensorized
// Gauss-Hermite in (v, v*) centered/scaled per species by (eps u, T/m), and
// Gauss-Legendre x trapezoid on the sphere. For psi = 1 the integrand is
// pointwise zero and the sum is exactly zero. For psi in {v, |v|^2} the
// integrand is linear in sigma, so the sphere factor is contracted against
// numerically precomputed sphere sums; the value equals the full tensor sum
// up to rounding.
OracleResult collision_moment_oracle(const Mixture& mixture,
                                     const MaxwellianState& state, std::size_t i,
                                     std::size_t j, OracleWeight weight,
                                     const OracleResolution& resolution,
                                     double epsilon);

// Strong-form number-conservation residual: quadrature of
//   integral B_ij [ f_i(v') f_j(v'*) - f_i(v) f_j(v*) ] dsigma dv dv*.
// Exactly zero in the continuum; the returned value measures pure quadrature
// error and is used as the conservation audit for the oracle machinery.
double collision_zeroth_strong(const Mixture& mixture, const MaxwellianState& state,
                               std::size_t i, std::size_t j,
                               const OracleResolution& resolution, double epsilon);

}  // namespace maxstef
