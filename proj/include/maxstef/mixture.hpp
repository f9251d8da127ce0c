#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace maxstef {

struct Species {
  std::string name;
  double mass = 0.0;  // molecular mass, nondimensional
};

// Angular collision kernel b(eta) on eta = cos(theta) in [-1, 1].
// Kernels are even in eta and nonnegative: polynomial forms reject odd-power
// coefficients, tabulated forms are symmetrized at evaluation time.
class AngularKernel {
 public:
  enum class Form { kConstant, kPolynomial, kTabulated };

  static AngularKernel constant(double value);
  // coeffs[p] multiplies eta^p; odd p must have coefficient exactly zero.
  static AngularKernel polynomial(std::vector<double> coeffs);
  // Piecewise-linear table; nodes must be strictly increasing and cover
  // [-1, 1]. Evaluation uses the symmetrized value (b(eta)+b(-eta))/2.
  static AngularKernel tabulated(std::vector<double> nodes,
                                 std::vector<double> values);

  double operator()(double eta) const;
  Form form() const { return form_; }
  const std::vector<double>& coefficients() const { return coeffs_; }
  const std::vector<double>& nodes() const { return nodes_; }
  const std::vector<double>& values() const { return values_; }

 private:
  AngularKernel() = default;
  Form form_ = Form::kConstant;
  std::vector<double> coeffs_;  // constant value lives in coeffs_[0]
  std::vector<double> nodes_;
  std::vector<double> values_;
};

struct PhysicalConstants {
  double k_boltzmann = 1.0;
};

// ||b||_L1 := integral of b(eta) over [-1, 1], by Gauss-Legendre quadrature.
// Exact to rounding for polynomial kernels of degree <= 2*order - 1.
double kernel_l1_norm(const AngularKernel& kernel, int quadrature_order);

// Inert monatomic gas mixture: n >= 2 species with a symmetric table of
// angular kernels (b_ij = b_ji by construction; diagonal entries optional,
// used only by the collision oracle).
class Mixture {
 public:
  Mixture(std::vector<Species> species,
          std::vector<std::pair<std::pair<std::size_t, std::size_t>, AngularKernel>>
              kernels,
          PhysicalConstants constants = {});

  std::size_t size() const { return species_.size(); }
  const Species& species(std::size_t i) const { return species_[i]; }
  const std::vector<Species>& all_species() const { return species_; }
  const PhysicalConstants& constants() const { return constants_; }

  bool has_kernel(std::size_t i, std::size_t j) const;
  const AngularKernel& kernel(std::size_t i, std::size_t j) const;

  // Cached ||b_ij||_L1 at the mixture's quadrature order (default 32).
  double kernel_norm(std::size_t i, std::size_t j) const;

  std::size_t index_of(const std::string& name) const;

 private:
  std::size_t slot(std::size_t i, std::size_t j) const;

  std::vector<Species> species_;
  std::vector<int> kernel_present_;        // upper-triangular incl. diagonal
  std::vector<AngularKernel> kernels_;     // same layout
  std::vector<double> kernel_norms_;       // same layout
  PhysicalConstants constants_;
};

// Symmetric positive off-diagonal matrix of binary diffusion coefficients.
class DiffusionMatrix {
 public:
  explicit DiffusionMatrix(std::size_t n) : n_(n), values_(n * n, 0.0) {}

  double operator()(std::size_t i, std::size_t j) const { return values_[i * n_ + j]; }
  double& at(std::size_t i, std::size_t j) { return values_[i * n_ + j]; }
  std::size_t size() const { return n_; }

 private:
  std::size_t n_;
  std::vector<double> values_;
};

// D_ij = k / (2 pi ||b_ij||) * (m_i + m_j) / (m_i m_j), i != j.
DiffusionMatrix build_diffusion_matrix(const Mixture& mixture);

}  // namespace maxstef
