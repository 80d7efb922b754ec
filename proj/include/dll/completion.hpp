#pragma once

#include <utility>
#include <vector>

#include "dll/cones.hpp"
#include "dll/linalg.hpp"

namespace dll::completion {

using linalg::Matrix;
using linalg::Vec;

/// Instance data xi = (A, b, H, h, c) of the primal-dual pair
///   min  c'x  s.t.  Ax >=_K b,  Hx >=_C h
///   max  b'y + h'z  s.t.  A'y + H'z = c,  y in K*,  z in C*,
/// with C a product of blocks (one entry of cone_c per block).
struct ConicProblemData {
  Matrix a;
  Vec b;
  Matrix h_mat;
  Vec h;
  Vec c;
  cones::ConeSpec cone_k;
  std::vector<cones::ConeSpec> cone_c;

  std::size_t num_rows_k() const { return b.size(); }
  std::size_t num_rows_c() const { return h.size(); }
  std::size_t num_vars() const { return c.size(); }
  void validate() const;  // dimension consistency + finiteness
};

/// L(y, z) = b'y + h'z. Feasibility of (y, z) is the caller's concern.
double lagrangian_bound(const ConicProblemData& xi, const Vec& y, const Vec& z);

// ---------------------------------------------------------------------------
// Closed-form optimal completions. Each is exposed as a full solution (for
// certification and serialization) and as a bound-only fast path plus its
// gradient in y (for training).
// ---------------------------------------------------------------------------

/// Bounded-variable problems: min c'x s.t. Ax >=_K b, l <= x < = u.
/// Completion z_l = |c - A'y|+, z_u = |c - A'y|-, giving the y-fixed dual
/// optimum with bound b'y + l'z_l - u'z_u.
struct BoundedCompletion {
  Vec z_lower;
  Vec z_upper;
  double bound = 0.0;
};
BoundedCompletion complete_bounded(const Vec& c, const Matrix& a, const Vec& l,
                                   const Vec& u, const Vec& b, const Vec& y);
double bounded_bound(const Vec& c, const Matrix& a, const Vec& l, const Vec& u,
                     const Vec& b, const Vec& y);
/// d(bound)/dy scaled by `bound_cotangent`. Kink conventions:
/// d|s|+/ds = 1 if s > 0 else 0, d|s|-/ds = -1 if s < 0 else 0.
Vec bounded_completion_vjp(const Vec& c, const Matrix& a, const Vec& l,
                           const Vec& u, const Vec& b, const Vec& y,
                           double bound_cotangent);

enum class TrustRegionNorm { L2, L1, LInf };

/// Trust region: min c'x s.t. Ax >=_K b, |x| <= r. Completion
/// z = c - A'y with z0 the dual norm of z; bound b'y - r z0.
struct TrustRegionCompletion {
  double z0 = 0.0;
  Vec z;
  double bound = 0.0;
};
TrustRegionCompletion complete_trust_region(const Vec& c, const Matrix& a,
                                            const Vec& b, const Vec& y,
                                            double radius,
                                            TrustRegionNorm norm);
Vec trust_region_completion_vjp(const Vec& c, const Matrix& a, const Vec& b,
                                const Vec& y, double radius,
                                TrustRegionNorm norm, double bound_cotangent);

/// Convex quadratic objective 1/2 x'Qx + c'x with Q = F'F positive definite.
/// Completion z = F^{-T}(c - A'y), z0 = 1/2 |z|^2; bound b'y - z0.
struct QuadraticCompletion {
  double z0 = 0.0;
  Vec z;
  double bound = 0.0;
};
QuadraticCompletion complete_quadratic(const Vec& c, const Matrix& a,
                                       const Matrix& f, const Vec& b,
                                       const Vec& y);
Vec quadratic_completion_vjp(const Vec& c, const Matrix& a, const Matrix& f,
                             const Vec& b, const Vec& y,
                             double bound_cotangent);

/// Multi-dimensional knapsack relaxation (min -p'x, Wx <= b, x in [0,1]^n)
/// with duals y <= 0: z_l = |-p - W'y|+, z_u = |-p - W'y|-, bound
/// b'y - e'z_u. Throws when y has a positive component.
struct KnapsackCompletion {
  Vec z_lower;
  Vec z_upper;
  double bound = 0.0;
};
KnapsackCompletion complete_knapsack(const Vec& p, const Matrix& w,
                                     const Vec& b, const Vec& y);
double knapsack_bound(const Vec& p, const Matrix& w, const Vec& b,
                      const Vec& y);
Vec knapsack_completion_vjp(const Vec& p, const Matrix& w, const Vec& b,
                            const Vec& y, double bound_cotangent);

/// Production planning duals for scalar y <= 0: pi = d - r y, tau = f,
/// sigma_j = -sqrt(2 pi_j tau_j); bound b y + 2 sum_j sqrt(pi_j tau_j).
struct ProdPlanCompletion {
  Vec pi;
  Vec tau;
  Vec sigma;
  double bound = 0.0;
};
ProdPlanCompletion complete_prodplan(const Vec& d, const Vec& f, const Vec& r,
                                     double b, double y);
double prodplan_bound(const Vec& d, const Vec& f, const Vec& r, double b,
                      double y);
/// d(bound)/dy = b - sum_j r_j sqrt(f_j / (d_j - r_j y)), times the cotangent.
double prodplan_completion_vjp(const Vec& d, const Vec& f, const Vec& r,
                               double b, double y, double bound_cotangent);

}  // namespace dll::completion
