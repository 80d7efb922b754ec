#include "dll/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace dll::linalg {

namespace {
constexpr double kPivotThreshold = 1e-12;

void check_same_size(const Vec& a, const Vec& b, const char* what) {
  if (a.size() != b.size()) {
    throw std::invalid_argument(std::string(what) + ": size mismatch (" +
                                std::to_string(a.size()) + " vs " +
                                std::to_string(b.size()) + ")");
  }
}
}  // namespace

double dot(const Vec& a, const Vec& b) {
  check_same_size(a, b, "dot");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm2(const Vec& a) { return std::sqrt(dot(a, a)); }

double norm_inf(const Vec& a) {
  double m = 0.0;
  for (double v : a) m = std::max(m, std::abs(v));
  return m;
}

Vec add(const Vec& a, const Vec& b) {
  check_same_size(a, b, "add");
  Vec out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] + b[i];
  return out;
}

Vec sub(const Vec& a, const Vec& b) {
  check_same_size(a, b, "sub");
  Vec out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] - b[i];
  return out;
}

Vec scale(const Vec& a, double s) {
  Vec out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] * s;
  return out;
}

void axpy(double s, const Vec& x, Vec& y) {
  check_same_size(x, y, "axpy");
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += s * x[i];
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Vec Matrix::apply(const Vec& x) const {
  if (x.size() != cols_) {
    throw std::invalid_argument("Matrix::apply: expected vector of size " +
                                std::to_string(cols_) + ", got " +
                                std::to_string(x.size()));
  }
  Vec out(rows_, 0.0);
  for (std::size_t i = 0; i < rows_; ++i) {
    double s = 0.0;
    const double* row = data_.data() + i * cols_;
    for (std::size_t j = 0; j < cols_; ++j) s += row[j] * x[j];
    out[i] = s;
  }
  return out;
}

Vec Matrix::apply_transpose(const Vec& x) const {
  if (x.size() != rows_) {
    throw std::invalid_argument(
        "Matrix::apply_transpose: expected vector of size " +
        std::to_string(rows_) + ", got " + std::to_string(x.size()));
  }
  Vec out(cols_, 0.0);
  for (std::size_t i = 0; i < rows_; ++i) {
    const double* row = data_.data() + i * cols_;
    const double xi = x[i];
    for (std::size_t j = 0; j < cols_; ++j) out[j] += row[j] * xi;
  }
  return out;
}

Matrix Matrix::transposed() const {
  Matrix t(cols_, rows_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
  return t;
}

double Matrix::frobenius_norm() const {
  double s = 0.0;
  for (double v : data_) s += v * v;
  return std::sqrt(s);
}

bool Matrix::all_finite() const {
  return std::all_of(data_.begin(), data_.end(),
                     [](double v) { return std::isfinite(v); });
}

bool is_symmetric(const Matrix& x, double abs_tol) {
  if (x.rows() != x.cols()) return false;
  for (std::size_t i = 0; i < x.rows(); ++i)
    for (std::size_t j = i + 1; j < x.cols(); ++j)
      if (std::abs(x(i, j) - x(j, i)) > abs_tol) return false;
  return true;
}

SymEigen sym_eigen(const Matrix& x) {
  if (x.rows() != x.cols() || x.rows() == 0) {
    throw std::invalid_argument("sym_eigen: matrix must be square, n >= 1");
  }
  if (!x.all_finite()) {
    throw std::invalid_argument("sym_eigen: non-finite entries");
  }
  if (!is_symmetric(x)) {
    throw std::invalid_argument("sym_eigen: matrix is not symmetric");
  }
  const std::size_t n = x.rows();

  // Work on the symmetrized copy to kill sub-tolerance asymmetry.
  Matrix a(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) a(i, j) = 0.5 * (x(i, j) + x(j, i));
  Matrix v = Matrix::identity(n);

  const double scale = std::max(a.frobenius_norm(), 1e-300);
  const int max_sweeps = 64;
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
    if (std::sqrt(off) <= 1e-15 * scale) break;

    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (std::abs(apq) <= 1e-18 * scale) {
          a(p, q) = a(q, p) = 0.0;
          continue;
        }
        const double tau = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (tau >= 0.0)
                             ? 1.0 / (tau + std::sqrt(1.0 + tau * tau))
                             : -1.0 / (-tau + std::sqrt(1.0 + tau * tau));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;

        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a(k, p);
          const double akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a(p, k);
          const double aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = v(k, p);
          const double vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
        a(p, q) = a(q, p) = 0.0;
      }
    }
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) {
    return a(i, i) > a(j, j);
  });

  SymEigen out;
  out.values.resize(n);
  out.vectors = Matrix(n, n);
  for (std::size_t k = 0; k < n; ++k) {
    out.values[k] = a(order[k], order[k]);
    for (std::size_t i = 0; i < n; ++i) out.vectors(i, k) = v(i, order[k]);
  }
  return out;
}

double lambda_min(const Matrix& x) {
  const SymEigen e = sym_eigen(x);
  return e.values.back();
}

LuFactors LuFactors::factor(const Matrix& m) {
  if (m.rows() != m.cols()) {
    throw std::invalid_argument("LuFactors: matrix must be square");
  }
  const std::size_t n = m.rows();
  LuFactors f;
  f.lu_ = m;
  f.perm_.resize(n);
  std::iota(f.perm_.begin(), f.perm_.end(), std::size_t{0});
  Matrix& lu = f.lu_;

  for (std::size_t k = 0; k < n; ++k) {
    std::size_t piv = k;
    double best = std::abs(lu(k, k));
    for (std::size_t i = k + 1; i < n; ++i) {
      const double v = std::abs(lu(i, k));
      if (v > best) {
        best = v;
        piv = i;
      }
    }
    if (best <= kPivotThreshold) {
      throw std::runtime_error("singular matrix: pivot " + std::to_string(k) +
                               " has magnitude " + std::to_string(best));
    }
    if (piv != k) {
      for (std::size_t j = 0; j < n; ++j) std::swap(lu(k, j), lu(piv, j));
      std::swap(f.perm_[k], f.perm_[piv]);
    }
    for (std::size_t i = k + 1; i < n; ++i) {
      lu(i, k) /= lu(k, k);
      const double lik = lu(i, k);
      if (lik == 0.0) continue;
      for (std::size_t j = k + 1; j < n; ++j) lu(i, j) -= lik * lu(k, j);
    }
  }
  return f;
}

Vec LuFactors::solve(const Vec& rhs) const {
  const std::size_t n = lu_.rows();
  if (rhs.size() != n) {
    throw std::invalid_argument("LuFactors::solve: rhs size mismatch");
  }
  Vec y(n);
  for (std::size_t i = 0; i < n; ++i) {
    double s = rhs[perm_[i]];
    for (std::size_t j = 0; j < i; ++j) s -= lu_(i, j) * y[j];
    y[i] = s;
  }
  Vec x(n);
  for (std::size_t ii = n; ii-- > 0;) {
    double s = y[ii];
    for (std::size_t j = ii + 1; j < n; ++j) s -= lu_(ii, j) * x[j];
    x[ii] = s / lu_(ii, ii);
  }
  return x;
}

Vec LuFactors::solve_transpose(const Vec& rhs) const {
  // M^T x = rhs with P M = L U gives M^T = U^T L^T P, solved in two
  // triangular sweeps followed by undoing the row permutation.
  const std::size_t n = lu_.rows();
  if (rhs.size() != n) {
    throw std::invalid_argument("LuFactors::solve_transpose: size mismatch");
  }
  Vec y(n);
  for (std::size_t i = 0; i < n; ++i) {
    double s = rhs[i];
    for (std::size_t j = 0; j < i; ++j) s -= lu_(j, i) * y[j];
    y[i] = s / lu_(i, i);
  }
  Vec z(n);
  for (std::size_t ii = n; ii-- > 0;) {
    double s = y[ii];
    for (std::size_t j = ii + 1; j < n; ++j) s -= lu_(j, ii) * z[j];
    z[ii] = s;
  }
  Vec x(n);
  for (std::size_t i = 0; i < n; ++i) x[perm_[i]] = z[i];
  return x;
}

Vec solve_linear(const Matrix& m, const Vec& rhs) {
  return LuFactors::factor(m).solve(rhs);
}

}  // namespace dll::linalg
