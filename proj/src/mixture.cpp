#include "maxstef/mixture.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>
#include <sstream>

#include "maxstef/errors.hpp"
#include "maxstef/quadrature.hpp"

namespace maxstef {

AngularKernel AngularKernel::constant(double value) {
  if (!(value >= 0.0) || !std::isfinite(value))
    throw ValidationError("angular kernel: constant value must be >= 0 and finite");
  AngularKernel k;
  k.form_ = Form::kConstant;
  k.coeffs_ = {value};
  return k;
}

AngularKernel AngularKernel::polynomial(std::vector<double> coeffs) {
  if (coeffs.empty())
    throw ValidationError("angular kernel: polynomial needs at least one coefficient");
  for (std::size_t p = 1; p < coeffs.size(); p += 2) {
    if (coeffs[p] != 0.0) {
      std::ostringstream os;
      os << "angular kernel: odd power eta^" << p
         << " has nonzero coefficient " << coeffs[p]
         << "; kernels must be even in cos(theta)";
      throw ValidationError(os.str());
    }
  }
  AngularKernel k;
  k.form_ = Form::kPolynomial;
  k.coeffs_ = std::move(coeffs);
  // Nonnegativity screened on a dense grid; even polynomials of modest degree
  // cannot dip below between samples by more than rounding for valid input.
  for (int i = 0; i <= 2000; ++i) {
    const double eta = -1.0 + i * 1e-3;
    const double v = k(eta);
    if (!std::isfinite(v) || v < -1e-14)
      throw ValidationError("angular kernel: polynomial is negative on [-1, 1]");
  }
  return k;
}

AngularKernel AngularKernel::tabulated(std::vector<double> nodes,
                                       std::vector<double> values) {
  if (nodes.size() != values.size() || nodes.size() < 2)
    throw ValidationError("angular kernel: table needs >= 2 matching nodes/values");
  if (!(nodes.front() <= -1.0 + 1e-12) || !(nodes.back() >= 1.0 - 1e-12))
    throw ValidationError("angular kernel: table must cover [-1, 1]");
  for (std::size_t i = 0; i + 1 < nodes.size(); ++i)
    if (!(nodes[i] < nodes[i + 1]))
      throw ValidationError("angular kernel: table nodes must be strictly increasing");
  for (double v : values)
    if (!std::isfinite(v) || v < 0.0)
      throw ValidationError("angular kernel: table values must be >= 0 and finite");
  AngularKernel k;
  k.form_ = Form::kTabulated;
  k.nodes_ = std::move(nodes);
  k.values_ = std::move(values);
  return k;
}

double AngularKernel::operator()(double eta) const {
  switch (form_) {
    case Form::kConstant:
      return coeffs_[0];
    case Form::kPolynomial: {
      double v = 0.0;
      for (std::size_t p = coeffs_.size(); p-- > 0;) v = v * eta + coeffs_[p];
      return v;
    }
    case Form::kTabulated: {
      auto raw = [this](double x) {
        x = std::clamp(x, nodes_.front(), nodes_.back());
        auto it = std::upper_bound(nodes_.begin(), nodes_.end(), x);
        std::size_t hi = std::min<std::size_t>(nodes_.size() - 1,
                                               static_cast<std::size_t>(it - nodes_.begin()));
        if (hi == 0) hi = 1;
        const std::size_t lo = hi - 1;
        const double t = (x - nodes_[lo]) / (nodes_[hi] - nodes_[lo]);
        return values_[lo] + t * (values_[hi] - values_[lo]);
      };
      return 0.5 * (raw(eta) + raw(-eta));
    }
  }
  return 0.0;
}

double kernel_l1_norm(const AngularKernel& kernel, int quadrature_order) {
  if (quadrature_order < 2)
    throw ValidationError("kernel_l1_norm: quadrature_order must be >= 2");
  const QuadratureRule gl = gauss_legendre(quadrature_order);
  double sum = 0.0;
  for (std::size_t i = 0; i < gl.size(); ++i) {
    const double v = kernel(gl.nodes[i]);
    if (!std::isfinite(v)) {
      std::ostringstream os;
      os << "kernel_l1_norm: non-finite kernel value at eta = " << gl.nodes[i];
      throw NumericalError(os.str());
    }
    sum += gl.weights[i] * v;
  }
  return sum;
}

namespace {
constexpr int kMixtureNormOrder = 32;
}

Mixture::Mixture(
    std::vector<Species> species,
    std::vector<std::pair<std::pair<std::size_t, std::size_t>, AngularKernel>> kernels,
    PhysicalConstants constants)
    : species_(std::move(species)), constants_(constants) {
  const std::size_t n = species_.size();
  if (n < 2) throw ValidationError("mixture: needs at least 2 species");
  std::set<std::string> names;
  for (std::size_t i = 0; i < n; ++i) {
    if (!(species_[i].mass > 0.0) || !std::isfinite(species_[i].mass)) {
      std::ostringstream os;
      os << "mixture.species[" << i << "].mass must be > 0, got " << species_[i].mass;
      throw ValidationError(os.str());
    }
    if (!names.insert(species_[i].name).second)
      throw ValidationError("mixture: duplicate species name '" + species_[i].name + "'");
  }
  if (!(constants_.k_boltzmann > 0.0))
    throw ValidationError("mixture: k_boltzmann must be > 0");

  const std::size_t slots = n * (n + 1) / 2;
  kernel_present_.assign(slots, 0);
  kernels_.assign(slots, AngularKernel::constant(0.0));
  kernel_norms_.assign(slots, 0.0);
  for (auto& [pair, kernel] : kernels) {
    auto [i, j] = pair;
    if (i >= n || j >= n) throw ValidationError("mixture: kernel species index out of range");
    const std::size_t s = slot(i, j);
    if (kernel_present_[s])
      throw ValidationError("mixture: duplicate kernel for pair (" +
                            species_[std::min(i, j)].name + ", " +
                            species_[std::max(i, j)].name + ")");
    kernel_present_[s] = 1;
    kernels_[s] = std::move(kernel);
  }
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (!kernel_present_[slot(i, j)])
        throw ValidationError("mixture: missing kernel for pair (" + species_[i].name +
                              ", " + species_[j].name + ")");
  for (std::size_t s = 0; s < slots; ++s)
    if (kernel_present_[s]) kernel_norms_[s] = kernel_l1_norm(kernels_[s], kMixtureNormOrder);
}

std::size_t Mixture::slot(std::size_t i, std::size_t j) const {
  const std::size_t a = std::min(i, j);
  const std::size_t b = std::max(i, j);
  // Upper-triangular row-major packing.
  return a * species_.size() - a * (a + 1) / 2 + b;
}

bool Mixture::has_kernel(std::size_t i, std::size_t j) const {
  return kernel_present_[slot(i, j)] != 0;
}

const AngularKernel& Mixture::kernel(std::size_t i, std::size_t j) const {
  if (!has_kernel(i, j))
    throw ValidationError("mixture: no kernel stored for pair (" + species_[i].name +
                          ", " + species_[j].name + ")");
  return kernels_[slot(i, j)];
}

double Mixture::kernel_norm(std::size_t i, std::size_t j) const {
  return kernel_norms_[slot(i, j)];
}

std::size_t Mixture::index_of(const std::string& name) const {
  for (std::size_t i = 0; i < species_.size(); ++i)
    if (species_[i].name == name) return i;
  throw ValidationError("mixture: unknown species '" + name + "'");
}

DiffusionMatrix build_diffusion_matrix(const Mixture& mixture) {
  const std::size_t n = mixture.size();
  DiffusionMatrix d(n);
  const double k = mixture.constants().k_boltzmann;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double norm = mixture.kernel_norm(i, j);
      if (!(norm > 0.0))
        throw ValidationError("diffusion matrix: kernel norm for pair (" +
                              mixture.species(i).name + ", " + mixture.species(j).name +
                              ") is zero; binary diffusion coefficient is singular");
      const double mi = mixture.species(i).mass;
      const double mj = mixture.species(j).mass;
      const double value =
          k / (2.0 * std::numbers::pi * norm) * (mi + mj) / (mi * mj);
      d.at(i, j) = value;
      d.at(j, i) = value;
    }
  }
  return d;
}

}  // namespace maxstef
