#include <cmath>

#include "doctest.h"
#include "maxstef/errors.hpp"
#include "maxstef/linalg.hpp"

using namespace maxstef;

TEST_CASE("lu_solve recovers a known solution") {
  SmallMatrix a(3, 3);
  a(0, 0) = 2; a(0, 1) = 1;  a(0, 2) = -1;
  a(1, 0) = -3; a(1, 1) = -1; a(1, 2) = 2;
  a(2, 0) = -2; a(2, 1) = 1;  a(2, 2) = 2;
  // b for x = (2, 3, -1)
  std::vector<double> b{8.0, -11.0, -3.0};
  auto x = lu_solve(a, b, "test");
  CHECK(x[0] == doctest::Approx(2.0).epsilon(1e-13));
  CHECK(x[1] == doctest::Approx(3.0).epsilon(1e-13));
  CHECK(x[2] == doctest::Approx(-1.0).epsilon(1e-13));
}

TEST_CASE("lu_solve flags singular systems with context") {
  SmallMatrix a(2, 2);
  a(0, 0) = 1; a(0, 1) = 2;
  a(1, 0) = 2; a(1, 1) = 4;
  std::vector<double> b{1.0, 2.0};
  CHECK_THROWS_AS(lu_solve(a, b, "face 3"), NumericalError);
}

TEST_CASE("jacobi eigen reproduces a symmetric matrix") {
  SmallMatrix a(3, 3);
  a(0, 0) = 4; a(0, 1) = 1; a(0, 2) = -2;
  a(1, 0) = 1; a(1, 1) = 2; a(1, 2) = 0;
  a(2, 0) = -2; a(2, 1) = 0; a(2, 2) = 3;
  auto eig = jacobi_eigen(a);
  // Reassemble q diag(lambda) q^T.
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = 0; j < 3; ++j) {
      double v = 0.0;
      for (std::size_t k = 0; k < 3; ++k)
        v += eig.eigenvectors(i, k) * eig.eigenvalues[k] * eig.eigenvectors(j, k);
      CHECK(v == doctest::Approx(a(i, j)).epsilon(1e-12));
    }
  }
}

TEST_CASE("jacobi eigen snaps structural zero modes") {
  // Graph-Laplacian-like matrix with exact null vector (1,1).
  SmallMatrix a(2, 2);
  a(0, 0) = -1; a(0, 1) = 1;
  a(1, 0) = 1; a(1, 1) = -1;
  auto eig = jacobi_eigen(a);
  int zeros = 0;
  for (double l : eig.eigenvalues)
    if (l == 0.0) ++zeros;
  CHECK(zeros == 1);
}
