#pragma once

#include <cstddef>
#include <vector>

#include "maxstef/errors.hpp"

namespace maxstef {

using Field = std::vector<double>;

enum class Boundary { kPeriodic, kNoFlux };

// Uniform 1D slab of cell-centered values. Faces are indexed 0..n_cells with
// face f between cells f-1 and f; faces 0 and n_cells are the domain
// boundary (identified with each other when periodic).
struct Grid1D {
  double x_min = 0.0;
  double x_max = 1.0;
  std::size_t n_cells = 256;
  Boundary boundary = Boundary::kPeriodic;

  void validate() const {
    if (!(x_max > x_min)) throw ValidationError("grid.x_max must exceed grid.x_min");
    if (n_cells < 8) throw ValidationError("grid.n_cells must be >= 8");
  }

  double dx() const { return (x_max - x_min) / static_cast<double>(n_cells); }
  double length() const { return x_max - x_min; }
  double cell_center(std::size_t i) const {
    return x_min + (static_cast<double>(i) + 0.5) * dx();
  }

  std::size_t left(std::size_t i) const {
    if (i > 0) return i - 1;
    return boundary == Boundary::kPeriodic ? n_cells - 1 : 0;
  }
  std::size_t right(std::size_t i) const {
    if (i + 1 < n_cells) return i + 1;
    return boundary == Boundary::kPeriodic ? 0 : n_cells - 1;
  }
};

inline double field_sum(const Field& f) {
  double s = 0.0;
  for (double v : f) s += v;
  return s;
}

}  // namespace maxstef
