#include "maxstef/quadrature.hpp"

#include <cmath>
#include <numbers>

#include "maxstef/errors.hpp"

namespace maxstef {

// Newton iteration on the Legendre recurrence, seeded with the Chebyshev-like
// asymptotic root estimate. Double precision converges in a handful of steps.
QuadratureRule gauss_legendre(int n) {
  if (n < 1) throw ValidationError("gauss_legendre: order must be >= 1");
  QuadratureRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  const int m = (n + 1) / 2;
  for (int i = 0; i < m; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      // Evaluate P_n(x) and P_n'(x) by the three-term recurrence.
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    // One clean-up evaluation at the converged node.
    double p0 = 1.0, p1 = x;
    for (int k = 2; k <= n; ++k) {
      double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    dp = n * (x * p1 - p0) / (x * x - 1.0);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[i] = -x;
    rule.nodes[n - 1 - i] = x;
    rule.weights[i] = w;
    rule.weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
  return rule;
}

QuadratureRule gauss_hermite(int n) {
  if (n < 1) throw ValidationError("gauss_hermite: order must be >= 1");
  QuadratureRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  const double pim4 = 0.7511255444649425;  // pi^{-1/4}
  const int m = (n + 1) / 2;
  double x = 0.0;
  for (int i = 0; i < m; ++i) {
    // Root estimates from Numerical Recipes; refined by Newton on the
    // orthonormal Hermite recurrence.
    if (i == 0) {
      x = std::sqrt(2.0 * n + 1.0) - 1.85575 * std::pow(2.0 * n + 1.0, -1.0 / 6.0);
    } else if (i == 1) {
      x -= 1.14 * std::pow(static_cast<double>(n), 0.426) / x;
    } else if (i == 2) {
      x = 1.86 * x - 0.86 * rule.nodes[n - 1];
    } else if (i == 3) {
      x = 1.91 * x - 0.91 * rule.nodes[n - 2];
    } else {
      x = 2.0 * x - rule.nodes[n - i + 1];
    }
    double pp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p1 = pim4, p2 = 0.0;
      for (int k = 0; k < n; ++k) {
        double p3 = p2;
        p2 = p1;
        p1 = x * std::sqrt(2.0 / (k + 1.0)) * p2 -
             std::sqrt(static_cast<double>(k) / (k + 1.0)) * p3;
      }
      pp = std::sqrt(2.0 * n) * p2;
      double dx = p1 / pp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    rule.nodes[n - 1 - i] = x;
    rule.nodes[i] = -x;
    const double w = 2.0 / (pp * pp);
    rule.weights[n - 1 - i] = w;
    rule.weights[i] = w;
  }
  if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
  return rule;
}

SphereRule sphere_rule(int n_polar, int n_azimuth) {
  if (n_polar < 1 || n_azimuth < 1)
    throw ValidationError("sphere_rule: node counts must be >= 1");
  const QuadratureRule gl = gauss_legendre(n_polar);
  SphereRule rule;
  rule.nodes.reserve(static_cast<std::size_t>(n_polar) * n_azimuth);
  const double wphi = 2.0 * std::numbers::pi / n_azimuth;
  for (int a = 0; a < n_polar; ++a) {
    const double mu = gl.nodes[a];
    const double s = std::sqrt(std::max(0.0, 1.0 - mu * mu));
    for (int p = 0; p < n_azimuth; ++p) {
      const double phi = wphi * p;
      rule.nodes.push_back({mu, s * std::cos(phi), s * std::sin(phi),
                            gl.weights[a] * wphi});
    }
  }
  return rule;
}

}  // namespace maxstef
