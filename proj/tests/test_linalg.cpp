#include "doctest.h"

#include <cmath>
#include <stdexcept>

#include "dll/linalg.hpp"
#include "dll/rng.hpp"

using namespace dll::linalg;

namespace {
Matrix random_symmetric(std::size_t n, dll::rng::Stream& rng) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) {
      const double v = rng.normal();
      m(i, j) = v;
      m(j, i) = v;
    }
  return m;
}

Matrix reconstruct(const SymEigen& e) {
  const std::size_t n = e.values.size();
  Matrix r(n, n);
  for (std::size_t t = 0; t < n; ++t)
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        r(i, j) += e.values[t] * e.vectors(i, t) * e.vectors(j, t);
  return r;
}
}  // namespace

TEST_CASE("sym_eigen identity and diagonal cases") {
  const auto e1 = sym_eigen(Matrix::identity(2));
  CHECK(e1.values[0] == doctest::Approx(1.0));
  CHECK(e1.values[1] == doctest::Approx(1.0));

  Matrix d(2, 2);
  d(0, 0) = 2.0;
  d(1, 1) = -1.0;
  const auto e2 = sym_eigen(d);
  CHECK(e2.values[0] == doctest::Approx(2.0));
  CHECK(e2.values[1] == doctest::Approx(-1.0));
  // eigenvectors are the axes up to sign
  CHECK(std::abs(e2.vectors(0, 0)) == doctest::Approx(1.0));
  CHECK(std::abs(e2.vectors(1, 1)) == doctest::Approx(1.0));
}

TEST_CASE("sym_eigen reconstructs random symmetric matrices") {
  dll::rng::Stream rng(42);
  for (int trial = 0; trial < 25; ++trial) {
    const std::size_t n = 1 + static_cast<std::size_t>(rng.uniform_int(0, 7));
    const Matrix x = random_symmetric(n, rng);
    const auto e = sym_eigen(x);
    const Matrix r = reconstruct(e);
    double resid = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        resid = std::max(resid, std::abs(r(i, j) - x(i, j)));
    CHECK(resid < 1e-9 * (1.0 + x.frobenius_norm()));
    for (std::size_t k = 0; k + 1 < n; ++k)
      CHECK(e.values[k] >= e.values[k + 1]);

    // V'V = I
    double ortho = 0.0;
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t b = 0; b < n; ++b) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i)
          s += e.vectors(i, a) * e.vectors(i, b);
        ortho = std::max(ortho, std::abs(s - (a == b ? 1.0 : 0.0)));
      }
    CHECK(ortho < 1e-9);
  }
}

TEST_CASE("sym_eigen rejects non-symmetric input") {
  Matrix m(2, 2);
  m(0, 1) = 1.0;
  m(1, 0) = 0.5;
  CHECK_THROWS_AS(sym_eigen(m), std::invalid_argument);
}

TEST_CASE("lambda_min basics and shift identity") {
  CHECK(lambda_min(Matrix::identity(3)) == doctest::Approx(1.0));

  Matrix d(3, 3);
  d(0, 0) = 4.0;
  d(1, 1) = 0.0;
  d(2, 2) = -3.0;
  CHECK(lambda_min(d) == doctest::Approx(-3.0));

  dll::rng::Stream rng(7);
  for (int trial = 0; trial < 10; ++trial) {
    const Matrix x = random_symmetric(4, rng);
    const double base = lambda_min(x);
    const double c = rng.uniform(-3.0, 3.0);
    Matrix shifted = x;
    for (std::size_t i = 0; i < 4; ++i) shifted(i, i) += c;
    CHECK(std::abs(lambda_min(shifted) - (base + c)) <= 1e-9);
    // agrees with the full decomposition minimum
    const auto e = sym_eigen(x);
    CHECK(std::abs(base - e.values.back()) < 1e-10);
  }
}

TEST_CASE("solve_linear identity and diagonal") {
  const Vec rhs{3.0, -1.0};
  CHECK(solve_linear(Matrix::identity(2), rhs) == rhs);

  Matrix d(2, 2);
  d(0, 0) = 2.0;
  d(1, 1) = 4.0;
  const Vec x = solve_linear(d, {2.0, 8.0});
  CHECK(x[0] == doctest::Approx(1.0));
  CHECK(x[1] == doctest::Approx(2.0));
}

TEST_CASE("solve_linear residual on random well-conditioned systems") {
  dll::rng::Stream rng(123);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 8;
    Matrix m(n, n);
    for (double& v : m.data()) v = rng.normal();
    for (std::size_t i = 0; i < n; ++i) m(i, i) += 6.0;  // diagonally dominant
    Vec rhs(n);
    for (double& v : rhs) v = rng.normal();
    const Vec x = solve_linear(m, rhs);
    const Vec mx = m.apply(x);
    double resid = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      resid = std::max(resid, std::abs(mx[i] - rhs[i]));
    CHECK(resid <= 1e-8 * (1.0 + norm_inf(rhs)));
  }
}

TEST_CASE("solve_linear names the failing pivot") {
  Matrix sing(2, 2);
  sing(0, 0) = 1.0;
  sing(0, 1) = 2.0;
  sing(1, 0) = 2.0;
  sing(1, 1) = 4.0;
  CHECK_THROWS_WITH_AS(solve_linear(sing, {1.0, 1.0}),
                       doctest::Contains("pivot"), std::runtime_error);
}

TEST_CASE("lu solve_transpose matches transposed system") {
  dll::rng::Stream rng(5);
  Matrix m(5, 5);
  for (double& v : m.data()) v = rng.normal();
  for (std::size_t i = 0; i < 5; ++i) m(i, i) += 4.0;
  Vec rhs(5);
  for (double& v : rhs) v = rng.normal();
  const auto lu = LuFactors::factor(m);
  const Vec x = lu.solve_transpose(rhs);
  const Vec check = m.apply_transpose(x);
  for (std::size_t i = 0; i < 5; ++i)
    CHECK(std::abs(check[i] - rhs[i]) <= 1e-9);
}
