#pragma once

#include <cstddef>
#include <vector>

namespace maxstef {

struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;

  std::size_t size() const { return nodes.size(); }
};

// Gauss-Legendre rule on [-1, 1]. Exact for polynomials of degree <= 2n-1.
QuadratureRule gauss_legendre(int n);

// Gauss-Hermite rule with weight exp(-x^2) on (-inf, inf), physicists'
// convention: sum_i w_i f(x_i) ~ integral exp(-x^2) f(x) dx.
QuadratureRule gauss_hermite(int n);

// Product rule on the unit sphere: Gauss-Legendre in cos(theta), uniform
// (trapezoid) in azimuth. Weights sum to 4*pi.
struct SphereRule {
  // Node direction in a local frame whose third axis is the polar axis.
  struct Node {
    double mu;      // cos(theta)
    double s_cphi;  // sin(theta) * cos(phi)
    double s_sphi;  // sin(theta) * sin(phi)
    double weight;
  };
  std::vector<Node> nodes;
};

SphereRule sphere_rule(int n_polar, int n_azimuth);

}  // namespace maxstef
