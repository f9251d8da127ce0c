#include "maxstef/linalg.hpp"

#include <cmath>
#include <string>

#include "maxstef/errors.hpp"

namespace maxstef {

std::vector<double> lu_solve(SmallMatrix a, std::vector<double> b,
                             const std::string& context) {
  const std::size_t n = a.rows();
  if (a.cols() != n || b.size() != n)
    throw NumericalError("lu_solve: shape mismatch (" + context + ")");
  std::vector<std::size_t> perm(n);
  for (std::size_t i = 0; i < n; ++i) perm[i] = i;

  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    double best = std::abs(a(perm[col], col));
    for (std::size_t r = col + 1; r < n; ++r) {
      const double v = std::abs(a(perm[r], col));
      if (v > best) {
        best = v;
        pivot = r;
      }
    }
    if (!(best > 0.0) || !std::isfinite(best))
      throw NumericalError("singular linear system (" + context + ")");
    std::swap(perm[col], perm[pivot]);
    const std::size_t prow = perm[col];
    for (std::size_t r = col + 1; r < n; ++r) {
      const std::size_t row = perm[r];
      const double f = a(row, col) / a(prow, col);
      a(row, col) = 0.0;
      for (std::size_t j = col + 1; j < n; ++j) a(row, j) -= f * a(prow, j);
      b[row] -= f * b[prow];
    }
  }
  std::vector<double> x(n, 0.0);
  for (std::size_t ri = n; ri-- > 0;) {
    const std::size_t row = perm[ri];
    double s = b[row];
    for (std::size_t j = ri + 1; j < n; ++j) s -= a(row, j) * x[j];
    x[ri] = s / a(row, ri);
    if (!std::isfinite(x[ri]))
      throw NumericalError("non-finite solve result (" + context + ")");
  }
  return x;
}

SymmetricEigen jacobi_eigen(SmallMatrix a, double snap_tol) {
  const std::size_t n = a.rows();
  SmallMatrix q(n, n);
  for (std::size_t i = 0; i < n; ++i) q(i, i) = 1.0;

  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) off += a(i, j) * a(i, j);
    if (off < 1e-300) break;

    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t r = p + 1; r < n; ++r) {
        const double apq = a(p, r);
        if (apq == 0.0) continue;
        const double app = a(p, p);
        const double aqq = a(r, r);
        const double theta = 0.5 * (aqq - app) / apq;
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a(k, p);
          const double akq = a(k, r);
          a(k, p) = c * akp - s * akq;
          a(k, r) = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a(p, k);
          const double aqk = a(r, k);
          a(p, k) = c * apk - s * aqk;
          a(r, k) = s * apk + c * aqk;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double qkp = q(k, p);
          const double qkq = q(k, r);
          q(k, p) = c * qkp - s * qkq;
          q(k, r) = s * qkp + c * qkq;
        }
      }
    }
  }

  SymmetricEigen out;
  out.eigenvalues.resize(n);
  double amax = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    out.eigenvalues[i] = a(i, i);
    amax = std::max(amax, std::abs(a(i, i)));
  }
  for (std::size_t i = 0; i < n; ++i)
    if (std::abs(out.eigenvalues[i]) < snap_tol * amax) out.eigenvalues[i] = 0.0;
  out.eigenvectors = q;
  return out;
}

}  // namespace maxstef
