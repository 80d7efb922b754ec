#pragma once

#include <cstddef>
#include <vector>

namespace dll::linalg {

using Vec = std::vector<double>;

double dot(const Vec& a, const Vec& b);
double norm2(const Vec& a);
double norm_inf(const Vec& a);
Vec add(const Vec& a, const Vec& b);
Vec sub(const Vec& a, const Vec& b);
Vec scale(const Vec& a, double s);
// y += s * x
void axpy(double s, const Vec& x, Vec& y);

/// Dense row-major matrix of doubles.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  static Matrix identity(std::size_t n);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  double& operator()(std::size_t i, std::size_t j) {
    return data_[i * cols_ + j];
  }
  double operator()(std::size_t i, std::size_t j) const {
    return data_[i * cols_ + j];
  }

  const std::vector<double>& data() const { return data_; }
  std::vector<double>& data() { return data_; }

  Vec apply(const Vec& x) const;            // A x
  Vec apply_transpose(const Vec& x) const;  // A^T x
  Matrix transposed() const;

  double frobenius_norm() const;
  bool all_finite() const;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

bool is_symmetric(const Matrix& x, double abs_tol = 1e-12);

/// Eigendecomposition of a symmetric matrix: values sorted descending,
/// eigenvectors stored as the matching columns of `vectors`.
struct SymEigen {
  Vec values;
  Matrix vectors;
};

// Cyclic Jacobi rotations. Throws std::invalid_argument when the input is
// not symmetric to within 1e-12 absolute.
SymEigen sym_eigen(const Matrix& x);

double lambda_min(const Matrix& x);

/// LU factorization with partial pivoting, reusable for several right-hand
/// sides. Declares the matrix singular when a pivot magnitude drops below
/// 1e-12 and throws std::runtime_error naming the offending pivot.
class LuFactors {
 public:
  static LuFactors factor(const Matrix& m);
  Vec solve(const Vec& rhs) const;            // M x = rhs
  Vec solve_transpose(const Vec& rhs) const;  // M^T x = rhs
  std::size_t order() const { return lu_.rows(); }

 private:
  Matrix lu_;
  std::vector<std::size_t> perm_;
};

Vec solve_linear(const Matrix& m, const Vec& rhs);

}  // namespace dll::linalg
