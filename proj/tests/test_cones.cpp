#include "doctest.h"

#include <cmath>
#include <stdexcept>

#include "dll/cones.hpp"
#include "dll/rng.hpp"
#include "support/test_support.hpp"

using namespace dll::cones;
using dll::linalg::Vec;
using testsupport::sample_for;
using testsupport::sample_inside;

namespace {
void check_close(const Vec& got, const Vec& want, double tol = 1e-12) {
  REQUIRE(got.size() == want.size());
  for (std::size_t i = 0; i < got.size(); ++i)
    CHECK(std::abs(got[i] - want[i]) <= tol);
}

// Branch margin used to keep finite-difference checks away from kinks.
double kink_margin(const ConeSpec& k, const Vec& x) {
  switch (k.kind) {
    case ConeKind::NonnegOrthant: {
      double m = 1e9;
      for (double v : x) m = std::min(m, std::abs(v));
      return m;
    }
    case ConeKind::Soc: {
      double tail = 0.0;
      for (std::size_t i = 1; i < x.size(); ++i) tail += x[i] * x[i];
      return std::abs(x[0] - std::sqrt(tail));
    }
    case ConeKind::Rsoc: {
      const double u0 = (x[0] + x[1]) / std::sqrt(2.0);
      double tail = (x[0] - x[1]) * (x[0] - x[1]) / 2.0;
      for (std::size_t i = 2; i < x.size(); ++i) tail += x[i] * x[i];
      return std::abs(u0 - std::sqrt(tail));
    }
    case ConeKind::Psd:
      return std::abs(dll::linalg::lambda_min(unpack_symmetric(x, k.order)));
    case ConeKind::Exp:
      return std::abs(x[2] - x[1] * std::log(x[0] / x[1]));
    case ConeKind::DualExp:
      return std::abs(x[1] - (x[2] + x[2] * std::log(x[0] / (-x[2]))));
    case ConeKind::Power: {
      const double s2 = k.dual_scaled ? x[1] / (1.0 - k.alpha) : x[1];
      const double front = k.dual_scaled ? k.alpha : 1.0;
      const double h = front * std::pow(s2, (k.alpha - 1.0) / k.alpha) *
                       std::pow(std::abs(x[2]), 1.0 / k.alpha);
      return std::abs(x[0] - h);
    }
  }
  return 1e9;
}

std::vector<ConeSpec> all_test_cones() {
  return {ConeSpec::nonneg_orthant(5), ConeSpec::soc(4),
          ConeSpec::rsoc(5),           ConeSpec::psd(3),
          ConeSpec::exponential(),     ConeSpec::dual_exponential(),
          ConeSpec::power(0.3),        ConeSpec::power(0.7, true)};
}
}  // namespace

TEST_CASE("contains: worked examples") {
  CHECK(contains(ConeSpec::soc(3), {5.0, 3.0, 4.0}, 1e-9));  // boundary
  CHECK_FALSE(contains(ConeSpec::nonneg_orthant(2), {1.0, -0.1}, 1e-9));
  // 1 >= 1 * e^0 holds with equality
  CHECK(contains(ConeSpec::exponential(), {1.0, 1.0, 0.0}, 1e-9));
  CHECK_THROWS_AS(contains(ConeSpec::soc(3), {1.0, 2.0}, 1e-9),
                  std::invalid_argument);
}

TEST_CASE("dual_cone mappings") {
  CHECK(dual_cone(ConeSpec::soc(5)).kind == ConeKind::Soc);
  CHECK(dual_cone(ConeSpec::soc(5)).dim == 5);
  CHECK(dual_cone(ConeSpec::rsoc(4)).kind == ConeKind::Rsoc);
  CHECK(dual_cone(ConeSpec::psd(3)).kind == ConeKind::Psd);
  CHECK(dual_cone(ConeSpec::nonneg_orthant(2)).kind ==
        ConeKind::NonnegOrthant);
  CHECK(dual_cone(ConeSpec::exponential()).kind == ConeKind::DualExp);
  CHECK(dual_cone(ConeSpec::dual_exponential()).kind == ConeKind::Exp);
  const ConeSpec dual_pow = dual_cone(ConeSpec::power(0.3));
  CHECK(dual_pow.kind == ConeKind::Power);
  CHECK(dual_pow.alpha == doctest::Approx(0.3));
  CHECK(dual_pow.dual_scaled);
  CHECK_FALSE(dual_cone(dual_pow).dual_scaled);
}

TEST_CASE("project_euclidean: worked examples") {
  check_close(project_euclidean(ConeSpec::nonneg_orthant(3), {1.0, -2.0, 0.0}),
              {1.0, 0.0, 0.0});
  check_close(project_euclidean(ConeSpec::soc(3), {0.0, 3.0, 4.0}),
              {2.5, 1.5, 2.0});
  // PSD diag(1,-2) -> diag(1,0), packed (x11, x12, x22)
  check_close(project_euclidean(ConeSpec::psd(2), {1.0, 0.0, -2.0}),
              {1.0, 0.0, 0.0}, 1e-10);
  CHECK_THROWS_AS(project_euclidean(ConeSpec::exponential(), {1.0, 1.0, 1.0}),
                  std::logic_error);
  CHECK_THROWS_AS(project_euclidean(ConeSpec::power(0.5), {1.0, 1.0, 1.0}),
                  std::logic_error);
}

TEST_CASE("project_euclidean is the nearest point (sampling oracle)") {
  dll::rng::Stream rng(99);
  for (const ConeSpec k : {ConeSpec::soc(4), ConeSpec::rsoc(4),
                           ConeSpec::nonneg_orthant(4), ConeSpec::psd(3)}) {
    for (int trial = 0; trial < 50; ++trial) {
      const Vec x = sample_for(k, rng);
      const Vec p = project_euclidean(k, x);
      const double dist =
          inner(k, dll::linalg::sub(p, x), dll::linalg::sub(p, x));
      for (int probe = 0; probe < 40; ++probe) {
        const Vec w = sample_inside(k, rng);
        REQUIRE(contains(k, w, 1e-8));
        const double d2 =
            inner(k, dll::linalg::sub(w, x), dll::linalg::sub(w, x));
        CHECK(d2 >= dist - 1e-8 * (1.0 + d2));
      }
    }
  }
}

TEST_CASE("project_radial: worked examples") {
  check_close(project_radial(ConeSpec::soc(3), {0.0, 3.0, 4.0}),
              {5.0, 3.0, 4.0});
  // PSD diag(1,-2): shift by 2 along I -> diag(3,0)
  check_close(project_radial(ConeSpec::psd(2), {1.0, 0.0, -2.0}),
              {3.0, 0.0, 0.0}, 1e-12);
  // exp: cap x3 at x2 log(x1/x2) = 0
  check_close(project_radial(ConeSpec::exponential(), {1.0, 1.0, 1.0}),
              {1.0, 1.0, 0.0});
  // power(1/2): floor x1 at x2^{-1} |x3|^{2} = 4, and 4^.5 * 1^.5 >= 2
  check_close(project_radial(ConeSpec::power(0.5), {1.0, 1.0, 2.0}),
              {4.0, 1.0, 2.0});
  CHECK(contains(ConeSpec::power(0.5), {4.0, 1.0, 2.0}, 1e-9));
}

TEST_CASE("project_radial precondition violations name the coordinate") {
  CHECK_THROWS_WITH_AS(
      project_radial(ConeSpec::exponential(), {-1.0, 1.0, 0.0}),
      doctest::Contains("x1"), std::domain_error);
  CHECK_THROWS_WITH_AS(
      project_radial(ConeSpec::exponential(), {1.0, -1.0, 0.0}),
      doctest::Contains("x2"), std::domain_error);
  CHECK_THROWS_WITH_AS(
      project_radial(ConeSpec::dual_exponential(), {1.0, 1.0, 0.5}),
      doctest::Contains("y3"), std::domain_error);
  CHECK_THROWS_WITH_AS(project_radial(ConeSpec::power(0.5), {1.0, -1.0, 0.5}),
                       doctest::Contains("x2"), std::domain_error);
}

TEST_CASE("project_dual_radial: conventions and worked examples") {
  // negative-orthant convention for knapsack duals
  check_close(project_nonpositive({-1.0, 2.0}), {-1.0, 0.0});

  // (1, 5, -1) is already in the dual exponential cone: identity.
  const Vec in_cone{1.0, 5.0, -1.0};
  CHECK(contains(ConeSpec::dual_exponential(), in_cone, 1e-9));
  check_close(project_dual_radial(ConeSpec::exponential(), in_cone), in_cone);

  // (1, -5, -1) lies below the y2 floor y3 + y3 ln(y1/-y3) = -1.
  const Vec fixed =
      project_dual_radial(ConeSpec::exponential(), {1.0, -5.0, -1.0});
  check_close(fixed, {1.0, -1.0, -1.0});
  CHECK(contains(ConeSpec::dual_exponential(), fixed, 1e-9));

  // self-dual cones: dual radial == radial
  dll::rng::Stream rng(3);
  for (const ConeSpec k : {ConeSpec::soc(4), ConeSpec::nonneg_orthant(3)}) {
    const Vec x = sample_for(k, rng);
    check_close(project_dual_radial(k, x), project_radial(k, x));
  }

  // dual power scaling: output satisfies dual membership
  const ConeSpec pow03 = ConeSpec::power(0.3);
  const Vec y = project_dual_radial(pow03, {0.1, 2.0, -3.0});
  CHECK(contains(dual_cone(pow03), y, 1e-9));
}

TEST_CASE("moreau_decompose: worked example and trivial cases") {
  const ConeSpec soc3 = ConeSpec::soc(3);
  const auto [p, q] = moreau_decompose(soc3, {0.0, 3.0, 4.0});
  check_close(p, {2.5, 1.5, 2.0});
  check_close(q, {2.5, -1.5, -2.0});
  CHECK(std::abs(inner(soc3, p, q)) < 1e-12);

  // x in K -> (x, 0)
  const Vec inside{5.0, 1.0, 2.0};
  const auto [p2, q2] = moreau_decompose(soc3, inside);
  check_close(p2, inside);
  check_close(q2, {0.0, 0.0, 0.0});

  // x in -K* (polar): projection vanishes -> (0, -x)
  const Vec polar{-5.0, 1.0, 2.0};
  const auto [p3, q3] = moreau_decompose(soc3, polar);
  check_close(p3, {0.0, 0.0, 0.0});
  check_close(q3, {5.0, -1.0, -2.0});
}

TEST_CASE("moreau identity over random points") {
  dll::rng::Stream rng(11);
  for (const ConeSpec k : {ConeSpec::nonneg_orthant(6), ConeSpec::soc(5),
                           ConeSpec::rsoc(5), ConeSpec::psd(3)}) {
    for (int trial = 0; trial < 400; ++trial) {
      const Vec x = sample_for(k, rng);
      const auto [p, q] = moreau_decompose(k, x);
      CHECK(contains(k, p, 1e-8));
      CHECK(contains(dual_cone(k), q, 1e-8));
      const double scale = 1.0 + inner(k, x, x);
      CHECK(std::abs(inner(k, p, q)) <= 1e-8 * scale);
      for (std::size_t i = 0; i < x.size(); ++i)
        CHECK(std::abs(p[i] - q[i] - x[i]) <= 1e-10);
    }
  }
}

TEST_CASE("euclidean dual-projection consistency on self-dual cones") {
  // Pi_{K*}(x) = -Pi_{K polar}(-x) reduces to Pi_K(x) = x + Pi_K(-x).
  dll::rng::Stream rng(17);
  for (const ConeSpec k : {ConeSpec::nonneg_orthant(6), ConeSpec::soc(5),
                           ConeSpec::rsoc(4), ConeSpec::psd(3)}) {
    for (int trial = 0; trial < 200; ++trial) {
      const Vec x = sample_for(k, rng);
      const Vec lhs = project_euclidean(k, x);
      const Vec rhs = dll::linalg::add(
          x, project_euclidean(k, dll::linalg::scale(x, -1.0)));
      check_close(lhs, rhs, 1e-9);
    }
  }
}

TEST_CASE("radial projections: membership, idempotence, minimality") {
  dll::rng::Stream rng(23);
  for (const ConeSpec& k : all_test_cones()) {
    for (int trial = 0; trial < 500; ++trial) {
      const Vec x = sample_for(k, rng);
      const RadialProjection rp = project_radial_step(k, x);
      CHECK(contains(k, rp.point, 1e-8));
      const Vec again = project_radial(k, rp.point);
      const double scale = 1.0 + std::sqrt(inner(k, rp.point, rp.point));
      for (std::size_t i = 0; i < x.size(); ++i)
        CHECK(std::abs(again[i] - rp.point[i]) <= 1e-9 * scale);

      // shrinking the step must break membership
      if (k.kind == ConeKind::NonnegOrthant) {
        Vec shrunk = x;
        bool any = false;
        for (std::size_t i = 0; i < x.size(); ++i) {
          const double lam = rp.point[i] - x[i];
          if (lam > 1e-8 * scale) {
            shrunk[i] = x[i] + (1.0 - 1e-6) * lam;
            any = true;
          } else {
            shrunk[i] = rp.point[i];
          }
        }
        if (any) CHECK_FALSE(contains(k, shrunk, 0.0));
      } else if (rp.step > 1e-8 * scale) {
        Vec shrunk = x;
        const double lam = (1.0 - 1e-6) * rp.step;
        switch (k.kind) {
          case ConeKind::Soc:
            shrunk[0] = x[0] + lam;
            break;
          case ConeKind::Rsoc: {
            const double c = lam / std::sqrt(2.0);
            shrunk[0] = x[0] + c;
            shrunk[1] = x[1] + c;
            break;
          }
          case ConeKind::Psd: {
            std::size_t idx = 0;
            for (std::size_t i = 0; i < k.order; ++i) {
              shrunk[idx] += lam;
              idx += k.order - i;
            }
            break;
          }
          case ConeKind::Exp:
            shrunk[2] = x[2] - lam;
            break;
          case ConeKind::DualExp:
            shrunk[1] = x[1] + lam;
            break;
          case ConeKind::Power:
            shrunk[0] = x[0] + lam;
            break;
          default:
            break;
        }
        CHECK_FALSE(contains(k, shrunk, 0.0));
      }
    }
  }
}

TEST_CASE("radial_vjp: worked examples") {
  // strictly inside: identity
  const Vec inside{5.0, 1.0, 1.0};
  check_close(radial_vjp(ConeSpec::soc(3), inside, {0.3, -0.7, 2.0}),
              {0.3, -0.7, 2.0});
  // active branch at (0,3,4) with cotangent e1: gradient of |tail|
  check_close(radial_vjp(ConeSpec::soc(3), {0.0, 3.0, 4.0}, {1.0, 0.0, 0.0}),
              {0.0, 0.6, 0.8});
  // zero cotangent stays zero
  check_close(radial_vjp(ConeSpec::psd(2), {1.0, 0.0, -2.0}, {0.0, 0.0, 0.0}),
              {0.0, 0.0, 0.0});
}

TEST_CASE("radial_vjp matches finite differences away from kinks") {
  dll::rng::Stream rng(31);
  for (const ConeSpec& k : all_test_cones()) {
    int done = 0;
    while (done < 60) {
      const Vec x = sample_for(k, rng);
      if (kink_margin(k, x) < 1e-3) continue;
      Vec cot(x.size());
      for (double& v : cot) v = rng.normal();
      const Vec got = radial_vjp(k, x, cot);
      const Vec want = testsupport::fd_vjp(
          [&](const Vec& p) { return project_radial(k, p); }, x, cot);
      CHECK(testsupport::rel_inf_error(got, want) < 1e-5);
      ++done;
    }
  }
}

TEST_CASE("psd radial vjp on the diagonal matches finite differences") {
  dll::rng::Stream rng(37);
  const ConeSpec k = ConeSpec::psd(3);
  int done = 0;
  while (done < 20) {
    const Vec x = testsupport::sample_psd_point(3, rng);
    if (kink_margin(k, x) < 1e-3) continue;
    Vec cot(x.size(), 0.0);
    std::size_t idx = 0;
    for (std::size_t i = 0; i < 3; ++i) {
      cot[idx] = rng.normal();
      idx += 3 - i;
    }
    const Vec got = radial_vjp(k, x, cot);
    const Vec want = testsupport::fd_vjp(
        [&](const Vec& p) { return project_radial(k, p); }, x, cot);
    CHECK(testsupport::rel_inf_error(got, want) < 1e-5);
    ++done;
  }
}

TEST_CASE("packed symmetric round trip") {
  dll::rng::Stream rng(41);
  const Vec packed = testsupport::sample_psd_point(4, rng);
  const auto m = unpack_symmetric(packed, 4);
  check_close(pack_symmetric(m), packed);
  CHECK_THROWS_AS(unpack_symmetric(packed, 3), std::invalid_argument);
}
