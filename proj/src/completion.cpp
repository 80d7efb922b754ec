#include "dll/completion.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace dll::completion {

namespace {

void check_finite(const Vec& v, const char* what) {
  for (double x : v) {
    if (!std::isfinite(x)) {
      throw std::invalid_argument(std::string(what) + ": non-finite entry");
    }
  }
}

// s = c - A'y
Vec reduced_cost(const Vec& c, const Matrix& a, const Vec& y) {
  if (a.rows() != y.size() || a.cols() != c.size()) {
    throw std::invalid_argument(
        "completion: A is " + std::to_string(a.rows()) + "x" +
        std::to_string(a.cols()) + " but |y| = " + std::to_string(y.size()) +
        ", |c| = " + std::to_string(c.size()));
  }
  return linalg::sub(c, a.apply_transpose(y));
}

}  // namespace

void ConicProblemData::validate() const {
  if (a.rows() != b.size() || a.cols() != c.size()) {
    throw std::invalid_argument("ConicProblemData: A/b/c dimensions mismatch");
  }
  if (h_mat.rows() != h.size() || h_mat.cols() != c.size()) {
    throw std::invalid_argument("ConicProblemData: H/h/c dimensions mismatch");
  }
  if (cone_k.dim != b.size()) {
    throw std::invalid_argument("ConicProblemData: cone K dim != |b|");
  }
  std::size_t total = 0;
  for (const auto& blk : cone_c) total += blk.dim;
  if (total != h.size()) {
    throw std::invalid_argument("ConicProblemData: cone C dims != |h|");
  }
  check_finite(b, "ConicProblemData.b");
  check_finite(h, "ConicProblemData.h");
  check_finite(c, "ConicProblemData.c");
  if (!a.all_finite() || !h_mat.all_finite()) {
    throw std::invalid_argument("ConicProblemData: non-finite matrix entry");
  }
}

double lagrangian_bound(const ConicProblemData& xi, const Vec& y,
                        const Vec& z) {
  if (y.size() != xi.b.size() || z.size() != xi.h.size()) {
    throw std::invalid_argument("lagrangian_bound: dimension mismatch");
  }
  return linalg::dot(xi.b, y) + linalg::dot(xi.h, z);
}

// --------------------------------------------------------------- bounded ---

BoundedCompletion complete_bounded(const Vec& c, const Matrix& a, const Vec& l,
                                   const Vec& u, const Vec& b, const Vec& y) {
  if (l.size() != c.size() || u.size() != c.size()) {
    throw std::invalid_argument("complete_bounded: bounds size mismatch");
  }
  for (std::size_t j = 0; j < l.size(); ++j) {
    if (!(l[j] < u[j])) {
      throw std::invalid_argument("complete_bounded: requires l < u, violated "
                                  "at coordinate " + std::to_string(j));
    }
  }
  const Vec s = reduced_cost(c, a, y);
  BoundedCompletion out;
  out.z_lower.resize(s.size());
  out.z_upper.resize(s.size());
  for (std::size_t j = 0; j < s.size(); ++j) {
    out.z_lower[j] = std::max(0.0, s[j]);
    out.z_upper[j] = std::max(0.0, -s[j]);
  }
  out.bound = linalg::dot(b, y) + linalg::dot(l, out.z_lower) -
              linalg::dot(u, out.z_upper);
  return out;
}

double bounded_bound(const Vec& c, const Matrix& a, const Vec& l, const Vec& u,
                     const Vec& b, const Vec& y) {
  return complete_bounded(c, a, l, u, b, y).bound;
}

Vec bounded_completion_vjp(const Vec& c, const Matrix& a, const Vec& l,
                           const Vec& u, const Vec& b, const Vec& y,
                           double bound_cotangent) {
  const Vec s = reduced_cost(c, a, y);
  // bound = b'y + sum_j (l_j [s_j > 0] + u_j [s_j < 0]) s_j, and
  // ds/dy = -A, so d(bound)/dy = b - A * (l.[s>0] + u.[s<0]).
  Vec weight(s.size(), 0.0);
  for (std::size_t j = 0; j < s.size(); ++j) {
    if (s[j] > 0.0) weight[j] = l[j];
    else if (s[j] < 0.0) weight[j] = u[j];
  }
  Vec grad = b;
  const Vec aw = a.apply(weight);
  for (std::size_t i = 0; i < grad.size(); ++i) grad[i] -= aw[i];
  return linalg::scale(grad, bound_cotangent);
}

// ---------------------------------------------------------- trust region ---

TrustRegionCompletion complete_trust_region(const Vec& c, const Matrix& a,
                                            const Vec& b, const Vec& y,
                                            double radius,
                                            TrustRegionNorm norm) {
  if (radius < 0.0) {
    throw std::invalid_argument("complete_trust_region: radius must be >= 0");
  }
  TrustRegionCompletion out;
  out.z = reduced_cost(c, a, y);
  switch (norm) {
    case TrustRegionNorm::L2:
      out.z0 = linalg::norm2(out.z);
      break;
    case TrustRegionNorm::L1:  // primal l1 ball, dual norm linf
      out.z0 = linalg::norm_inf(out.z);
      break;
    case TrustRegionNorm::LInf: {  // primal linf ball, dual norm l1
      double s = 0.0;
      for (double v : out.z) s += std::abs(v);
      out.z0 = s;
      break;
    }
  }
  out.bound = linalg::dot(b, y) - radius * out.z0;
  return out;
}

Vec trust_region_completion_vjp(const Vec& c, const Matrix& a, const Vec& b,
                                const Vec& y, double radius,
                                TrustRegionNorm norm, double bound_cotangent) {
  const Vec z = reduced_cost(c, a, y);
  // bound = b'y - r |z|_*.
  Vec g;  // d|z|_*/dz, subgradient conventions: first max index, sign(0) = 0
  g.assign(z.size(), 0.0);
  switch (norm) {
    case TrustRegionNorm::L2: {
      const double nz = linalg::norm2(z);
      if (nz > 0.0) g = linalg::scale(z, 1.0 / nz);
      break;
    }
    case TrustRegionNorm::L1: {
      std::size_t best = 0;
      for (std::size_t j = 1; j < z.size(); ++j)
        if (std::abs(z[j]) > std::abs(z[best])) best = j;
      if (!z.empty() && z[best] != 0.0) g[best] = (z[best] > 0.0) ? 1.0 : -1.0;
      break;
    }
    case TrustRegionNorm::LInf: {
      for (std::size_t j = 0; j < z.size(); ++j)
        g[j] = (z[j] > 0.0) ? 1.0 : (z[j] < 0.0 ? -1.0 : 0.0);
      break;
    }
  }
  // d(b'y - r|z|_*)/dy = b + r A g since dz/dy = -A.
  Vec grad = b;
  const Vec ag = a.apply(g);
  for (std::size_t i = 0; i < grad.size(); ++i) grad[i] += radius * ag[i];
  return linalg::scale(grad, bound_cotangent);
}

// ------------------------------------------------------------- quadratic ---

QuadraticCompletion complete_quadratic(const Vec& c, const Matrix& a,
                                       const Matrix& f, const Vec& b,
                                       const Vec& y) {
  const Vec s = reduced_cost(c, a, y);
  if (f.rows() != f.cols() || f.cols() != c.size()) {
    throw std::invalid_argument("complete_quadratic: F must be square n x n");
  }
  QuadraticCompletion out;
  // F'z = c - A'y
  out.z = linalg::LuFactors::factor(f).solve_transpose(s);
  out.z0 = 0.5 * linalg::dot(out.z, out.z);
  out.bound = linalg::dot(b, y) - out.z0;
  return out;
}

Vec quadratic_completion_vjp(const Vec& c, const Matrix& a, const Matrix& f,
                             const Vec& b, const Vec& y,
                             double bound_cotangent) {
  const Vec s = reduced_cost(c, a, y);
  const auto lu = linalg::LuFactors::factor(f);
  const Vec z = lu.solve_transpose(s);
  // bound = b'y - 1/2 |F^{-T}(c - A'y)|^2, so grad = b + A F^{-1} z.
  const Vec fz = lu.solve(z);
  Vec grad = b;
  const Vec afz = a.apply(fz);
  for (std::size_t i = 0; i < grad.size(); ++i) grad[i] += afz[i];
  return linalg::scale(grad, bound_cotangent);
}

// -------------------------------------------------------------- knapsack ---

namespace {
void check_knapsack_args(const Vec& p, const Matrix& w, const Vec& b,
                         const Vec& y) {
  if (w.rows() != b.size() || w.cols() != p.size() || y.size() != w.rows()) {
    throw std::invalid_argument("knapsack completion: dimension mismatch");
  }
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (y[i] > 0.0) {
      throw std::invalid_argument(
          "knapsack completion requires y <= 0; component " +
          std::to_string(i) + " is " + std::to_string(y[i]) +
          " (project first)");
    }
  }
}
}  // namespace

KnapsackCompletion complete_knapsack(const Vec& p, const Matrix& w,
                                     const Vec& b, const Vec& y) {
  check_knapsack_args(p, w, b, y);
  // s = -p - W'y; z_l = s+, z_u = s-.
  const Vec wty = w.apply_transpose(y);
  KnapsackCompletion out;
  out.z_lower.resize(p.size());
  out.z_upper.resize(p.size());
  double sum_zu = 0.0;
  for (std::size_t j = 0; j < p.size(); ++j) {
    const double s = -p[j] - wty[j];
    out.z_lower[j] = std::max(0.0, s);
    out.z_upper[j] = std::max(0.0, -s);
    sum_zu += out.z_upper[j];
  }
  out.bound = linalg::dot(b, y) - sum_zu;
  return out;
}

double knapsack_bound(const Vec& p, const Matrix& w, const Vec& b,
                      const Vec& y) {
  check_knapsack_args(p, w, b, y);
  const Vec wty = w.apply_transpose(y);
  double bound = linalg::dot(b, y);
  for (std::size_t j = 0; j < p.size(); ++j) {
    bound += std::min(0.0, -p[j] - wty[j]);
  }
  return bound;
}

Vec knapsack_completion_vjp(const Vec& p, const Matrix& w, const Vec& b,
                            const Vec& y, double bound_cotangent) {
  check_knapsack_args(p, w, b, y);
  const Vec wty = w.apply_transpose(y);
  // bound = b'y + sum_j min(0, s_j), s_j = -p_j - (W'y)_j; active where
  // s_j < 0 with ds_j/dy_i = -W_ij.
  Vec mask(p.size(), 0.0);
  for (std::size_t j = 0; j < p.size(); ++j) {
    if (-p[j] - wty[j] < 0.0) mask[j] = 1.0;
  }
  Vec grad = b;
  const Vec wm = w.apply(mask);
  for (std::size_t i = 0; i < grad.size(); ++i) grad[i] -= wm[i];
  return linalg::scale(grad, bound_cotangent);
}

// -------------------------------------------------------------- prodplan ---

namespace {
void check_prodplan_args(const Vec& d, const Vec& f, const Vec& r, double b,
                         double y) {
  if (d.size() != f.size() || d.size() != r.size() || d.empty()) {
    throw std::invalid_argument("prodplan completion: dimension mismatch");
  }
  for (std::size_t j = 0; j < d.size(); ++j) {
    if (!(d[j] > 0.0 && f[j] > 0.0 && r[j] > 0.0)) {
      throw std::invalid_argument(
          "prodplan completion requires d, f, r > 0 (coordinate " +
          std::to_string(j) + ")");
    }
  }
  if (!(b > 0.0)) {
    throw std::invalid_argument("prodplan completion requires b > 0");
  }
  if (y > 0.0) {
    throw std::invalid_argument("prodplan completion requires y <= 0, got " +
                                std::to_string(y) + " (project first)");
  }
}
}  // namespace

ProdPlanCompletion complete_prodplan(const Vec& d, const Vec& f, const Vec& r,
                                     double b, double y) {
  check_prodplan_args(d, f, r, b, y);
  const std::size_t n = d.size();
  ProdPlanCompletion out;
  out.pi.resize(n);
  out.tau = f;
  out.sigma.resize(n);
  double sum = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    out.pi[j] = d[j] - r[j] * y;
    out.sigma[j] = -std::sqrt(2.0 * out.pi[j] * out.tau[j]);
    sum += std::sqrt(out.pi[j] * out.tau[j]);
  }
  out.bound = b * y + 2.0 * sum;
  return out;
}

double prodplan_bound(const Vec& d, const Vec& f, const Vec& r, double b,
                      double y) {
  check_prodplan_args(d, f, r, b, y);
  double sum = 0.0;
  for (std::size_t j = 0; j < d.size(); ++j) {
    sum += std::sqrt(f[j] * (d[j] - r[j] * y));
  }
  return b * y + 2.0 * sum;
}

double prodplan_completion_vjp(const Vec& d, const Vec& f, const Vec& r,
                               double b, double y, double bound_cotangent) {
  check_prodplan_args(d, f, r, b, y);
  double g = b;
  for (std::size_t j = 0; j < d.size(); ++j) {
    g -= r[j] * std::sqrt(f[j] / (d[j] - r[j] * y));
  }
  return g * bound_cotangent;
}

}  // namespace dll::completion
