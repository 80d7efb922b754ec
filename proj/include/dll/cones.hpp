#pragma once

#include <cstddef>
#include <string>
#include <utility>

#include "dll/linalg.hpp"

namespace dll::cones {

using linalg::Vec;

enum class ConeKind {
  NonnegOrthant,
  Soc,
  Rsoc,
  Psd,
  Exp,
  DualExp,
  Power,
};

/// A proper cone identifier.
///
/// `dim` is the stored vector length of a point: n for the orthant/SOC/RSOC,
/// order*(order+1)/2 for PSD (upper triangle packed row-major:
/// (0,0),(0,1),...,(0,n-1),(1,1),...), and 3 for Exp/DualExp/Power.
/// Power cones carry the exponent alpha in (0,1); `dual_scaled` marks the
/// dual power cone, whose membership is tested as
/// (y1/alpha, y2/(1-alpha), y3) in the primal power cone.
struct ConeSpec {
  ConeKind kind = ConeKind::NonnegOrthant;
  std::size_t dim = 0;
  std::size_t order = 0;  // PSD only
  double alpha = 0.0;     // Power only
  bool dual_scaled = false;

  static ConeSpec nonneg_orthant(std::size_t n);
  static ConeSpec soc(std::size_t n);   // n >= 2
  static ConeSpec rsoc(std::size_t n);  // n >= 3
  static ConeSpec psd(std::size_t order);
  static ConeSpec exponential();
  static ConeSpec dual_exponential();
  static ConeSpec power(double alpha, bool dual_scaled = false);

  std::string name() const;
};

ConeSpec dual_cone(const ConeSpec& k);

/// Membership with relative slack: each defining inequality must hold with
/// slack >= -tol * (1 + |x|), where |x| is the cone's natural norm
/// (Frobenius for PSD).
bool contains(const ConeSpec& k, const Vec& x, double tol);

/// Signed worst-case slack of the defining inequalities (negative outside).
double membership_slack(const ConeSpec& k, const Vec& x);

/// Nearest point in the cone. Supported for the orthant, SOC, RSOC and PSD;
/// the exponential and power cones have no closed form and throw.
Vec project_euclidean(const ConeSpec& k, const Vec& x);

struct RadialProjection {
  Vec point;
  // Multiple of the documented interior ray. The orthant acts
  // coordinate-wise (a product of 1-d cones); `step` is then the largest
  // per-coordinate shift.
  double step = 0.0;
};

/// Radial projection along the cone's fixed interior ray:
///   orthant: ray e, coordinate-wise (equals the Euclidean projection)
///   SOC:     ray e1,                x1 <- max(x1, |tail|)
///   RSOC:    ray (1,1,0,...)/sqrt2, via the rotation to SOC form
///   PSD:     ray I,                 X  <- X + max(0, -lambda_min(X)) I
///   Exp:     ray -e3 (requires x1, x2 > 0)
///   DualExp: ray  e2 (requires y1 > 0, y3 < 0)
///   Power:   ray  e1 (requires x2 > 0)
RadialProjection project_radial_step(const ConeSpec& k, const Vec& x);
Vec project_radial(const ConeSpec& k, const Vec& x);

/// Radial projection onto the dual cone K*.
Vec project_dual_radial(const ConeSpec& k, const Vec& y);

/// Negative-orthant convention used by duals of `<=` rows (knapsack y):
/// min(0, y), i.e. the orthant projection composed with negation.
Vec project_nonpositive(const Vec& y);

/// Moreau split x = p - q with p in K, q in K*, <p, q> = 0.
std::pair<Vec, Vec> moreau_decompose(const ConeSpec& k, const Vec& x);

/// J^T c for the almost-everywhere Jacobian J of project_radial at x. At a
/// max/min tie the identity branch is used.
Vec radial_vjp(const ConeSpec& k, const Vec& x, const Vec& cotangent);

/// Cone-natural inner product: plain dot, except PSD packed points pair in
/// the Frobenius sense (off-diagonal entries weighted twice).
double inner(const ConeSpec& k, const Vec& a, const Vec& b);

// Packed symmetric storage used by PSD points.
Vec pack_symmetric(const linalg::Matrix& x);
linalg::Matrix unpack_symmetric(const Vec& packed, std::size_t order);
std::size_t packed_size(std::size_t order);

}  // namespace dll::cones
