#include "dll/cones.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "dll/linalg.hpp"

namespace dll::cones {

using linalg::Matrix;

namespace {

void check_dim(const ConeSpec& k, const Vec& x) {
  if (x.size() != k.dim) {
    throw std::invalid_argument("cone " + k.name() + " expects dimension " +
                                std::to_string(k.dim) + ", got point of size " +
                                std::to_string(x.size()));
  }
}

double tail_norm(const Vec& x, std::size_t from) {
  double s = 0.0;
  for (std::size_t i = from; i < x.size(); ++i) s += x[i] * x[i];
  return std::sqrt(s);
}

// Orthogonal involution mapping the RSOC onto the SOC:
// (x1, x2, tail) -> ((x1+x2)/sqrt2, (x1-x2)/sqrt2, tail).
Vec rsoc_rotate(const Vec& x) {
  constexpr double inv_sqrt2 = 0.70710678118654752440;
  Vec u = x;
  u[0] = (x[0] + x[1]) * inv_sqrt2;
  u[1] = (x[0] - x[1]) * inv_sqrt2;
  return u;
}

void require(bool cond, const std::string& msg) {
  if (!cond) throw std::domain_error(msg);
}

double pow_surface(double x2, double x3, double alpha) {
  // Smallest x1 with x1^alpha * x2^(1-alpha) >= |x3|, for x2 > 0.
  if (x3 == 0.0) return 0.0;
  return std::pow(x2, (alpha - 1.0) / alpha) *
         std::pow(std::abs(x3), 1.0 / alpha);
}

}  // namespace

ConeSpec ConeSpec::nonneg_orthant(std::size_t n) {
  if (n < 1) throw std::invalid_argument("orthant requires n >= 1");
  return ConeSpec{ConeKind::NonnegOrthant, n, 0, 0.0, false};
}

ConeSpec ConeSpec::soc(std::size_t n) {
  if (n < 2) throw std::invalid_argument("SOC requires n >= 2");
  return ConeSpec{ConeKind::Soc, n, 0, 0.0, false};
}

ConeSpec ConeSpec::rsoc(std::size_t n) {
  if (n < 3) throw std::invalid_argument("RSOC requires n >= 3");
  return ConeSpec{ConeKind::Rsoc, n, 0, 0.0, false};
}

ConeSpec ConeSpec::psd(std::size_t order) {
  if (order < 1) throw std::invalid_argument("PSD requires order >= 1");
  return ConeSpec{ConeKind::Psd, packed_size(order), order, 0.0, false};
}

ConeSpec ConeSpec::exponential() {
  return ConeSpec{ConeKind::Exp, 3, 0, 0.0, false};
}

ConeSpec ConeSpec::dual_exponential() {
  return ConeSpec{ConeKind::DualExp, 3, 0, 0.0, false};
}

ConeSpec ConeSpec::power(double alpha, bool dual_scaled) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw std::invalid_argument("power cone requires 0 < alpha < 1");
  }
  return ConeSpec{ConeKind::Power, 3, 0, alpha, dual_scaled};
}

std::string ConeSpec::name() const {
  switch (kind) {
    case ConeKind::NonnegOrthant:
      return "orthant(" + std::to_string(dim) + ")";
    case ConeKind::Soc:
      return "soc(" + std::to_string(dim) + ")";
    case ConeKind::Rsoc:
      return "rsoc(" + std::to_string(dim) + ")";
    case ConeKind::Psd:
      return "psd(" + std::to_string(order) + ")";
    case ConeKind::Exp:
      return "exp";
    case ConeKind::DualExp:
      return "dualexp";
    case ConeKind::Power:
      return std::string(dual_scaled ? "dualpower(" : "power(") +
             std::to_string(alpha) + ")";
  }
  return "?";
}

ConeSpec dual_cone(const ConeSpec& k) {
  switch (k.kind) {
    case ConeKind::NonnegOrthant:
    case ConeKind::Soc:
    case ConeKind::Rsoc:
    case ConeKind::Psd:
      return k;  // self-dual
    case ConeKind::Exp:
      return ConeSpec::dual_exponential();
    case ConeKind::DualExp:
      return ConeSpec::exponential();
    case ConeKind::Power:
      return ConeSpec::power(k.alpha, !k.dual_scaled);
  }
  throw std::logic_error("dual_cone: unknown cone kind");
}

std::size_t packed_size(std::size_t order) { return order * (order + 1) / 2; }

Vec pack_symmetric(const Matrix& x) {
  if (x.rows() != x.cols()) {
    throw std::invalid_argument("pack_symmetric: matrix must be square");
  }
  const std::size_t n = x.rows();
  Vec out;
  out.reserve(packed_size(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) out.push_back(x(i, j));
  return out;
}

Matrix unpack_symmetric(const Vec& packed, std::size_t order) {
  if (packed.size() != packed_size(order)) {
    throw std::invalid_argument("unpack_symmetric: packed size " +
                                std::to_string(packed.size()) +
                                " does not match order " +
                                std::to_string(order));
  }
  Matrix x(order, order);
  std::size_t idx = 0;
  for (std::size_t i = 0; i < order; ++i)
    for (std::size_t j = i; j < order; ++j) {
      x(i, j) = packed[idx];
      x(j, i) = packed[idx];
      ++idx;
    }
  return x;
}

double inner(const ConeSpec& k, const Vec& a, const Vec& b) {
  if (a.size() != b.size()) {
    throw std::invalid_argument("inner: size mismatch");
  }
  if (k.kind != ConeKind::Psd) return linalg::dot(a, b);
  double s = 0.0;
  std::size_t idx = 0;
  for (std::size_t i = 0; i < k.order; ++i)
    for (std::size_t j = i; j < k.order; ++j) {
      const double w = (i == j) ? 1.0 : 2.0;
      s += w * a[idx] * b[idx];
      ++idx;
    }
  return s;
}

double membership_slack(const ConeSpec& k, const Vec& x) {
  check_dim(k, x);
  switch (k.kind) {
    case ConeKind::NonnegOrthant: {
      double worst = x.empty() ? 0.0 : x[0];
      for (double v : x) worst = std::min(worst, v);
      return worst;
    }
    case ConeKind::Soc:
      return x[0] - tail_norm(x, 1);
    case ConeKind::Rsoc: {
      double t2 = 0.0;
      for (std::size_t i = 2; i < x.size(); ++i) t2 += x[i] * x[i];
      return std::min({x[0], x[1], 2.0 * x[0] * x[1] - t2});
    }
    case ConeKind::Psd:
      return linalg::lambda_min(unpack_symmetric(x, k.order));
    case ConeKind::Exp: {
      // cl{ x1 >= x2 exp(x3/x2), x2 > 0 }; the closure adds
      // { x2 = 0, x1 >= 0, x3 <= 0 }.
      if (x[1] > 0.0) {
        const double t = x[2] / x[1];
        if (t > 700.0) return -std::numeric_limits<double>::infinity();
        return x[0] - x[1] * std::exp(t);
      }
      return std::min({x[1], x[0], -x[2]});
    }
    case ConeKind::DualExp: {
      // cl{ y1 >= -y3 exp(y2/y3 - 1), y1 > 0, y3 < 0 }; closure adds
      // { y3 = 0, y1 >= 0, y2 >= 0 }.
      if (x[2] < 0.0) {
        const double t = x[1] / x[2] - 1.0;
        if (t > 700.0) return -std::numeric_limits<double>::infinity();
        return std::min(x[0], x[0] - (-x[2]) * std::exp(t));
      }
      return std::min({-x[2], x[0], x[1]});
    }
    case ConeKind::Power: {
      Vec y = x;
      if (k.dual_scaled) {
        y[0] = x[0] / k.alpha;
        y[1] = x[1] / (1.0 - k.alpha);
      }
      const double a1 = std::max(y[0], 0.0);
      const double a2 = std::max(y[1], 0.0);
      const double surf =
          std::pow(a1, k.alpha) * std::pow(a2, 1.0 - k.alpha) - std::abs(y[2]);
      return std::min({y[0], y[1], surf});
    }
  }
  throw std::logic_error("membership_slack: unknown cone kind");
}

bool contains(const ConeSpec& k, const Vec& x, double tol) {
  if (tol < 0.0) throw std::invalid_argument("contains: tol must be >= 0");
  const double scale = 1.0 + std::sqrt(std::max(inner(k, x, x), 0.0));
  return membership_slack(k, x) >= -tol * scale;
}

Vec project_euclidean(const ConeSpec& k, const Vec& x) {
  check_dim(k, x);
  switch (k.kind) {
    case ConeKind::NonnegOrthant: {
      Vec p = x;
      for (double& v : p) v = std::max(0.0, v);
      return p;
    }
    case ConeKind::Soc: {
      const double delta = tail_norm(x, 1);
      if (x[0] >= delta) return x;
      if (x[0] <= -delta) return Vec(x.size(), 0.0);
      const double coef = (x[0] + delta) / (2.0 * delta);
      Vec p = x;
      p[0] = coef * delta;
      for (std::size_t i = 1; i < x.size(); ++i) p[i] = coef * x[i];
      return p;
    }
    case ConeKind::Rsoc: {
      const Vec u = rsoc_rotate(x);
      const Vec pu = project_euclidean(ConeSpec::soc(k.dim), u);
      return rsoc_rotate(pu);
    }
    case ConeKind::Psd: {
      const Matrix xm = unpack_symmetric(x, k.order);
      const linalg::SymEigen e = linalg::sym_eigen(xm);
      Matrix p(k.order, k.order);
      for (std::size_t t = 0; t < k.order; ++t) {
        const double lam = std::max(0.0, e.values[t]);
        if (lam == 0.0) continue;
        for (std::size_t i = 0; i < k.order; ++i)
          for (std::size_t j = 0; j < k.order; ++j)
            p(i, j) += lam * e.vectors(i, t) * e.vectors(j, t);
      }
      return pack_symmetric(p);
    }
    case ConeKind::Exp:
    case ConeKind::DualExp:
    case ConeKind::Power:
      throw std::logic_error("no closed-form Euclidean projection onto " +
                             k.name() + "; use the radial projection");
  }
  throw std::logic_error("project_euclidean: unknown cone kind");
}

RadialProjection project_radial_step(const ConeSpec& k, const Vec& x) {
  check_dim(k, x);
  RadialProjection out;
  switch (k.kind) {
    case ConeKind::NonnegOrthant: {
      out.point = x;
      for (double& v : out.point) {
        const double shifted = std::max(0.0, v);
        out.step = std::max(out.step, shifted - v);
        v = shifted;
      }
      return out;
    }
    case ConeKind::Soc: {
      out.point = x;
      out.step = std::max(0.0, tail_norm(x, 1) - x[0]);
      out.point[0] = x[0] + out.step;
      return out;
    }
    case ConeKind::Rsoc: {
      const Vec u = rsoc_rotate(x);
      double t2 = 0.0;
      for (std::size_t i = 1; i < u.size(); ++i) t2 += u[i] * u[i];
      out.step = std::max(0.0, std::sqrt(t2) - u[0]);
      Vec pu = u;
      pu[0] = u[0] + out.step;
      out.point = rsoc_rotate(pu);
      return out;
    }
    case ConeKind::Psd: {
      const double lmin = linalg::lambda_min(unpack_symmetric(x, k.order));
      out.step = std::max(0.0, -lmin);
      out.point = x;
      if (out.step > 0.0) {
        std::size_t idx = 0;
        for (std::size_t i = 0; i < k.order; ++i) {
          out.point[idx] += out.step;
          idx += k.order - i;
        }
      }
      return out;
    }
    case ConeKind::Exp: {
      require(x[0] > 0.0,
              "exp radial projection requires x1 > 0 (got x1 = " +
                  std::to_string(x[0]) + ")");
      require(x[1] > 0.0,
              "exp radial projection requires x2 > 0 (got x2 = " +
                  std::to_string(x[1]) + ")");
      const double cap = x[1] * std::log(x[0] / x[1]);
      out.point = x;
      out.point[2] = std::min(x[2], cap);
      out.step = x[2] - out.point[2];  // ray (0, 0, -1)
      return out;
    }
    case ConeKind::DualExp: {
      require(x[0] > 0.0,
              "dual-exp radial projection requires y1 > 0 (got y1 = " +
                  std::to_string(x[0]) + ")");
      require(x[2] < 0.0,
              "dual-exp radial projection requires y3 < 0 (got y3 = " +
                  std::to_string(x[2]) + ")");
      const double floor = x[2] + x[2] * std::log(x[0] / (-x[2]));
      out.point = x;
      out.point[1] = std::max(x[1], floor);
      out.step = out.point[1] - x[1];  // ray (0, 1, 0)
      return out;
    }
    case ConeKind::Power: {
      if (!k.dual_scaled) {
        require(x[1] > 0.0,
                "power radial projection requires x2 > 0 (got x2 = " +
                    std::to_string(x[1]) + ")");
        const double h = pow_surface(x[1], x[2], k.alpha);
        out.point = x;
        out.point[0] = std::max(x[0], h);
        out.step = out.point[0] - x[0];  // ray (1, 0, 0)
        return out;
      }
      require(x[1] > 0.0,
              "dual-power radial projection requires y2 > 0 (got y2 = " +
                  std::to_string(x[1]) + ")");
      const double h =
          k.alpha * pow_surface(x[1] / (1.0 - k.alpha), x[2], k.alpha);
      out.point = x;
      out.point[0] = std::max(x[0], h);
      out.step = out.point[0] - x[0];
      return out;
    }
  }
  throw std::logic_error("project_radial: unknown cone kind");
}

Vec project_radial(const ConeSpec& k, const Vec& x) {
  return project_radial_step(k, x).point;
}

Vec project_dual_radial(const ConeSpec& k, const Vec& y) {
  return project_radial(dual_cone(k), y);
}

Vec project_nonpositive(const Vec& y) {
  Vec out = y;
  for (double& v : out) v = std::min(0.0, v);
  return out;
}

std::pair<Vec, Vec> moreau_decompose(const ConeSpec& k, const Vec& x) {
  const Vec p = project_euclidean(k, x);
  return {p, linalg::sub(p, x)};
}

Vec radial_vjp(const ConeSpec& k, const Vec& x, const Vec& cotangent) {
  check_dim(k, x);
  if (cotangent.size() != x.size()) {
    throw std::invalid_argument("radial_vjp: cotangent size mismatch");
  }
  switch (k.kind) {
    case ConeKind::NonnegOrthant: {
      Vec out = cotangent;
      for (std::size_t i = 0; i < x.size(); ++i)
        if (x[i] < 0.0) out[i] = 0.0;
      return out;
    }
    case ConeKind::Soc: {
      const double delta = tail_norm(x, 1);
      if (x[0] >= delta) return cotangent;  // identity branch (incl. ties)
      Vec out = cotangent;
      const double c1 = cotangent[0];
      out[0] = 0.0;
      if (delta > 0.0) {
        for (std::size_t i = 1; i < x.size(); ++i)
          out[i] += c1 * x[i] / delta;
      }
      return out;
    }
    case ConeKind::Rsoc: {
      // J = T J_soc T with T the symmetric rotation, so J^T c = T J_soc^T T c.
      const Vec u = rsoc_rotate(x);
      const Vec cu = rsoc_rotate(cotangent);
      const Vec vu = radial_vjp(ConeSpec::soc(k.dim), u, cu);
      return rsoc_rotate(vu);
    }
    case ConeKind::Psd: {
      const Matrix xm = unpack_symmetric(x, k.order);
      const linalg::SymEigen e = linalg::sym_eigen(xm);
      const double lmin = e.values.back();
      if (lmin >= 0.0) return cotangent;
      // xhat = x - lambda_min(x) * pack(I); the packed gradient of
      // lambda_min is (v_i^2 on diagonal entries, 2 v_i v_j off-diagonal).
      const std::size_t n = k.order;
      Vec v(n);
      for (std::size_t i = 0; i < n; ++i) v[i] = e.vectors(i, n - 1);
      double diag_cot = 0.0;
      std::size_t idx = 0;
      for (std::size_t i = 0; i < n; ++i) {
        diag_cot += cotangent[idx];
        idx += n - i;
      }
      Vec out = cotangent;
      idx = 0;
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i; j < n; ++j) {
          const double g = (i == j) ? v[i] * v[i] : 2.0 * v[i] * v[j];
          out[idx] -= diag_cot * g;
          ++idx;
        }
      return out;
    }
    case ConeKind::Exp: {
      require(x[0] > 0.0 && x[1] > 0.0,
              "exp radial vjp requires x1 > 0 and x2 > 0");
      const double cap = x[1] * std::log(x[0] / x[1]);
      if (x[2] <= cap) return cotangent;
      Vec out = cotangent;
      const double c3 = cotangent[2];
      out[0] += c3 * x[1] / x[0];
      out[1] += c3 * (std::log(x[0] / x[1]) - 1.0);
      out[2] = 0.0;
      return out;
    }
    case ConeKind::DualExp: {
      require(x[0] > 0.0 && x[2] < 0.0,
              "dual-exp radial vjp requires y1 > 0 and y3 < 0");
      const double floor = x[2] + x[2] * std::log(x[0] / (-x[2]));
      if (x[1] >= floor) return cotangent;
      Vec out = cotangent;
      const double c2 = cotangent[1];
      out[0] += c2 * x[2] / x[0];
      out[1] = 0.0;
      out[2] += c2 * std::log(x[0] / (-x[2]));
      return out;
    }
    case ConeKind::Power: {
      require(x[1] > 0.0, "power radial vjp requires the second coordinate "
                          "to be positive");
      const double scale2 = k.dual_scaled ? 1.0 / (1.0 - k.alpha) : 1.0;
      const double front = k.dual_scaled ? k.alpha : 1.0;
      const double h = front * pow_surface(x[1] * scale2, x[2], k.alpha);
      if (x[0] >= h) return cotangent;
      Vec out = cotangent;
      const double c1 = cotangent[0];
      out[0] = 0.0;
      out[1] += c1 * ((k.alpha - 1.0) / k.alpha) * h / x[1];
      out[2] += (x[2] != 0.0) ? c1 * (1.0 / k.alpha) * h / x[2] : 0.0;
      return out;
    }
  }
  throw std::logic_error("radial_vjp: unknown cone kind");
}

}  // namespace dll::cones
