#include "dll/refsolve.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <thread>

#include "dll/cones.hpp"

namespace dll::refsolve {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kPivotTol = 1e-9;
constexpr double kCertTol = 1e-8;
constexpr int kMaxIterations = 200000;

enum class VarStatus { Basic, AtLower, AtUpper };

// Working tableau for the bounded-variable simplex. Variables are laid out
// as [structural | slack | artificial]; slack i has column +e_i, artificial
// i has column -e_i.
struct SimplexWork {
  const LpStandardForm* lp = nullptr;
  std::size_t n = 0;  // structural
  std::size_t m = 0;  // rows
  std::vector<double> lower, upper;    // per variable
  std::vector<int> artificial_row;     // -1 for non-artificials
  std::vector<VarStatus> status;
  std::vector<std::size_t> basis;      // size m
  Vec values;                          // current value of every variable
  int iterations = 0;

  std::size_t num_vars() const { return lower.size(); }

  Vec column(std::size_t var) const {
    Vec col(m, 0.0);
    if (var < n) {
      for (std::size_t i = 0; i < m; ++i) col[i] = (*lp).a(i, var);
    } else if (var < n + m) {
      col[var - n] = 1.0;
    } else {
      col[artificial_row[var]] = -1.0;
    }
    return col;
  }

  // pi' col_j for every structural column at once, then slacks/artificials.
  double price(const Vec& pi, std::size_t var, const Vec& at_pi) const {
    if (var < n) return at_pi[var];
    if (var < n + m) return pi[var - n];
    return -pi[artificial_row[var]];
  }
};

linalg::LuFactors factor_basis(const SimplexWork& w) {
  Matrix basis_matrix(w.m, w.m);
  for (std::size_t k = 0; k < w.m; ++k) {
    const Vec col = w.column(w.basis[k]);
    for (std::size_t i = 0; i < w.m; ++i) basis_matrix(i, k) = col[i];
  }
  return linalg::LuFactors::factor(basis_matrix);
}

// Recompute basic values from scratch: B x_B = rhs - N x_N.
void refresh_values(SimplexWork& w, const linalg::LuFactors& lu) {
  Vec residual = w.lp->rhs;
  for (std::size_t var = 0; var < w.num_vars(); ++var) {
    if (w.status[var] == VarStatus::Basic) continue;
    const double xv = w.values[var];
    if (xv == 0.0) continue;
    if (var < w.n) {
      for (std::size_t i = 0; i < w.m; ++i)
        residual[i] -= w.lp->a(i, var) * xv;
    } else if (var < w.n + w.m) {
      residual[var - w.n] -= xv;
    } else {
      residual[w.artificial_row[var]] += xv;
    }
  }
  const Vec xb = lu.solve(residual);
  for (std::size_t k = 0; k < w.m; ++k) w.values[w.basis[k]] = xb[k];
}

struct PhaseResult {
  bool optimal = false;
  bool unbounded = false;
};

// Runs Bland-rule iterations for the given cost vector until optimality or
// unboundedness. Costs cover all variables.
PhaseResult run_simplex(SimplexWork& w, const Vec& costs) {
  const double cost_scale = 1.0 + linalg::norm_inf(costs);
  const double dj_tol = 1e-9 * cost_scale;

  while (true) {
    if (++w.iterations > kMaxIterations) {
      throw std::runtime_error("simplex: iteration limit exceeded");
    }
    const linalg::LuFactors lu = factor_basis(w);
    refresh_values(w, lu);

    Vec cb(w.m);
    for (std::size_t k = 0; k < w.m; ++k) cb[k] = costs[w.basis[k]];
    const Vec pi = lu.solve_transpose(cb);
    const Vec at_pi = w.lp->a.apply_transpose(pi);

    // Bland: smallest eligible index enters.
    std::size_t entering = w.num_vars();
    bool from_lower = true;
    for (std::size_t var = 0; var < w.num_vars(); ++var) {
      if (w.status[var] == VarStatus::Basic) continue;
      if (w.lower[var] == w.upper[var]) continue;  // fixed
      const double dj = costs[var] - w.price(pi, var, at_pi);
      if (w.status[var] == VarStatus::AtLower && dj < -dj_tol) {
        entering = var;
        from_lower = true;
        break;
      }
      if (w.status[var] == VarStatus::AtUpper && dj > dj_tol) {
        entering = var;
        from_lower = false;
        break;
      }
    }
    if (entering == w.num_vars()) return {true, false};

    const Vec direction = lu.solve(w.column(entering));

    // Ratio test. The entering variable moves by t >= 0 away from its bound;
    // basic variable k changes by -sign * t * direction[k]. The candidate
    // set includes the entering variable's own opposite bound (a flip);
    // ties go to the smallest variable index (Bland).
    const double sign = from_lower ? 1.0 : -1.0;
    double t_best = w.upper[entering] - w.lower[entering];
    std::size_t best_var = entering;
    std::size_t leaving = w.num_vars();  // num_vars() marks a bound flip
    bool leaving_to_lower = true;
    for (std::size_t k = 0; k < w.m; ++k) {
      const double dk = sign * direction[k];
      const std::size_t var = w.basis[k];
      double ratio;
      bool to_lower;
      if (dk > kPivotTol) {
        ratio = (w.values[var] - w.lower[var]) / dk;
        to_lower = true;
      } else if (dk < -kPivotTol) {
        if (w.upper[var] == kInf) continue;
        ratio = (w.upper[var] - w.values[var]) / (-dk);
        to_lower = false;
      } else {
        continue;
      }
      if (ratio < 0.0) ratio = 0.0;  // degeneracy guard
      if (ratio < t_best || (ratio == t_best && var < best_var)) {
        t_best = ratio;
        best_var = var;
        leaving = k;
        leaving_to_lower = to_lower;
      }
    }

    if (t_best == kInf) return {false, true};

    // Apply the step.
    for (std::size_t k = 0; k < w.m; ++k) {
      w.values[w.basis[k]] -= sign * t_best * direction[k];
    }
    w.values[entering] =
        (from_lower ? w.lower[entering] : w.upper[entering]) + sign * t_best;

    if (leaving == w.num_vars()) {
      // Bound flip: entering variable crossed to its other bound.
      w.status[entering] =
          from_lower ? VarStatus::AtUpper : VarStatus::AtLower;
      w.values[entering] = from_lower ? w.upper[entering] : w.lower[entering];
      continue;
    }

    const std::size_t leaving_var = w.basis[leaving];
    w.status[leaving_var] =
        leaving_to_lower ? VarStatus::AtLower : VarStatus::AtUpper;
    w.values[leaving_var] =
        leaving_to_lower ? w.lower[leaving_var] : w.upper[leaving_var];
    w.basis[leaving] = entering;
    w.status[entering] = VarStatus::Basic;
  }
}

}  // namespace

void LpStandardForm::validate() const {
  const std::size_t m = a.rows();
  const std::size_t n = a.cols();
  if (rhs.size() != m || objective.size() != n || lower.size() != n ||
      upper.size() != n) {
    throw std::invalid_argument("LpStandardForm: inconsistent dimensions");
  }
  if (!a.all_finite()) {
    throw std::invalid_argument("LpStandardForm: non-finite matrix");
  }
  for (std::size_t j = 0; j < n; ++j) {
    if (!std::isfinite(lower[j]) || !std::isfinite(upper[j]) ||
        lower[j] > upper[j]) {
      throw std::invalid_argument("LpStandardForm: bad bounds at column " +
                                  std::to_string(j));
    }
  }
  for (double v : rhs)
    if (!std::isfinite(v))
      throw std::invalid_argument("LpStandardForm: non-finite rhs");
  for (double v : objective)
    if (!std::isfinite(v))
      throw std::invalid_argument("LpStandardForm: non-finite objective");
}

std::string status_name(SolveStatus s) {
  switch (s) {
    case SolveStatus::Optimal: return "optimal";
    case SolveStatus::Infeasible: return "infeasible";
    case SolveStatus::Unbounded: return "unbounded";
  }
  return "?";
}

OracleSolution solve_lp(const LpStandardForm& lp) {
  lp.validate();
  const std::size_t m = lp.a.rows();
  const std::size_t n = lp.a.cols();

  SimplexWork w;
  w.lp = &lp;
  w.n = n;
  w.m = m;

  // Structural variables start at their lower bound; slacks absorb the
  // residual, with artificials covering rows where the residual is negative.
  w.lower = lp.lower;
  w.upper = lp.upper;
  w.status.assign(n, VarStatus::AtLower);
  w.values = lp.lower;
  for (std::size_t i = 0; i < m; ++i) {
    w.lower.push_back(0.0);
    w.upper.push_back(kInf);
    w.status.push_back(VarStatus::AtLower);
    w.values.push_back(0.0);
  }
  w.artificial_row.assign(n + m, -1);

  Vec residual = lp.rhs;
  {
    const Vec ax = lp.a.apply(lp.lower);
    for (std::size_t i = 0; i < m; ++i) residual[i] -= ax[i];
  }
  w.basis.resize(m);
  std::size_t num_artificial = 0;
  for (std::size_t i = 0; i < m; ++i) {
    if (residual[i] >= 0.0) {
      const std::size_t slack = n + i;
      w.basis[i] = slack;
      w.status[slack] = VarStatus::Basic;
      w.values[slack] = residual[i];
    } else {
      const std::size_t art = n + m + num_artificial;
      w.lower.push_back(0.0);
      w.upper.push_back(kInf);
      w.status.push_back(VarStatus::Basic);
      w.values.push_back(-residual[i]);
      w.artificial_row.push_back(static_cast<int>(i));
      w.basis[i] = art;
      ++num_artificial;
    }
  }

  OracleSolution out;

  if (num_artificial > 0) {
    Vec phase1_costs(w.num_vars(), 0.0);
    for (std::size_t v = n + m; v < w.num_vars(); ++v) phase1_costs[v] = 1.0;
    run_simplex(w, phase1_costs);  // cannot be unbounded (costs >= 0)

    double infeasibility = 0.0;
    for (std::size_t v = n + m; v < w.num_vars(); ++v)
      infeasibility += w.values[v];
    const double scale = 1.0 + linalg::norm_inf(lp.rhs);
    if (infeasibility > 1e-7 * scale) {
      out.status = SolveStatus::Infeasible;
      out.value = infeasibility;
      out.iterations = w.iterations;
      return out;
    }

    // Pivot zero-valued artificials out of the basis where possible; fix
    // every artificial at zero either way.
    for (std::size_t k = 0; k < m; ++k) {
      const std::size_t var = w.basis[k];
      if (var < n + m) continue;
      const linalg::LuFactors lu = factor_basis(w);
      bool pivoted = false;
      for (std::size_t cand = 0; cand < n + m && !pivoted; ++cand) {
        if (w.status[cand] != VarStatus::Basic &&
            w.lower[cand] != w.upper[cand]) {
          const Vec dir = lu.solve(w.column(cand));
          if (std::abs(dir[k]) > kPivotTol) {
            w.basis[k] = cand;
            w.status[cand] = VarStatus::Basic;
            w.status[var] = VarStatus::AtLower;
            w.values[var] = 0.0;
            pivoted = true;
          }
        }
      }
      // A redundant row keeps its artificial basic at value zero.
    }
    for (std::size_t v = n + m; v < w.num_vars(); ++v) {
      w.lower[v] = 0.0;
      w.upper[v] = 0.0;
      if (w.status[v] != VarStatus::Basic) w.values[v] = 0.0;
    }
  }

  Vec phase2_costs(w.num_vars(), 0.0);
  for (std::size_t j = 0; j < n; ++j) phase2_costs[j] = lp.objective[j];
  const PhaseResult res = run_simplex(w, phase2_costs);
  if (res.unbounded) {
    out.status = SolveStatus::Unbounded;
    out.iterations = w.iterations;
    return out;
  }

  // Extract the certificate.
  const linalg::LuFactors lu = factor_basis(w);
  refresh_values(w, lu);
  Vec cb(m);
  for (std::size_t k = 0; k < m; ++k) cb[k] = phase2_costs[w.basis[k]];
  Vec pi = lu.solve_transpose(cb);
  // `<=` rows in a minimization have nonpositive duals; clamp roundoff so
  // downstream sign preconditions hold exactly.
  for (double& v : pi) v = std::min(v, 0.0);

  out.primal.assign(w.values.begin(), w.values.begin() + n);
  out.dual = pi;
  out.reduced_lower.resize(n);
  out.reduced_upper.resize(n);
  const Vec at_pi = lp.a.apply_transpose(pi);
  for (std::size_t j = 0; j < n; ++j) {
    const double dj = lp.objective[j] - at_pi[j];
    out.reduced_lower[j] = std::max(0.0, dj);
    out.reduced_upper[j] = std::max(0.0, -dj);
  }
  out.value = linalg::dot(lp.objective, out.primal);
  out.status = SolveStatus::Optimal;
  out.iterations = w.iterations;

  // Certify: primal feasibility, dual feasibility by construction, and the
  // primal-dual gap (equivalently complementary slackness).
  const double feas_scale = 1.0 + linalg::norm_inf(lp.rhs);
  const Vec ax = lp.a.apply(out.primal);
  for (std::size_t i = 0; i < m; ++i) {
    if (ax[i] > lp.rhs[i] + kCertTol * feas_scale) {
      throw std::runtime_error("simplex certificate: row " +
                               std::to_string(i) + " infeasible");
    }
  }
  for (std::size_t j = 0; j < n; ++j) {
    const double span = 1.0 + std::abs(lp.lower[j]) + std::abs(lp.upper[j]);
    if (out.primal[j] < lp.lower[j] - kCertTol * span ||
        out.primal[j] > lp.upper[j] + kCertTol * span) {
      throw std::runtime_error("simplex certificate: bound violated at " +
                               std::to_string(j));
    }
  }
  const double dual_value = linalg::dot(lp.rhs, pi) +
                            linalg::dot(lp.lower, out.reduced_lower) -
                            linalg::dot(lp.upper, out.reduced_upper);
  if (std::abs(dual_value - out.value) >
      kCertTol * (1.0 + std::abs(out.value))) {
    throw std::runtime_error("simplex certificate: duality gap " +
                             std::to_string(dual_value - out.value));
  }
  return out;
}

OracleSolution solve_knapsack_lp(const problems::KnapsackInstance& inst) {
  inst.validate();
  LpStandardForm lp;
  lp.a = inst.w;
  lp.rhs = inst.b;
  lp.objective = linalg::scale(inst.p, -1.0);
  lp.lower.assign(inst.n, 0.0);
  lp.upper.assign(inst.n, 1.0);
  return solve_lp(lp);
}

namespace {
double prodplan_dual_value(const problems::ProdPlanInstance& inst, double y) {
  double sum = 0.0;
  for (std::size_t j = 0; j < inst.n; ++j)
    sum += std::sqrt(inst.f[j] * (inst.d[j] - y * inst.r[j]));
  return inst.b * y + 2.0 * sum;
}

double prodplan_dual_slope(const problems::ProdPlanInstance& inst, double y) {
  double sum = 0.0;
  for (std::size_t j = 0; j < inst.n; ++j)
    sum += inst.r[j] * std::sqrt(inst.f[j] / (inst.d[j] - y * inst.r[j]));
  return inst.b - sum;
}
}  // namespace

OracleSolution solve_prodplan(const problems::ProdPlanInstance& inst) {
  inst.validate();
  OracleSolution out;
  double y_star = 0.0;
  int iterations = 0;

  if (prodplan_dual_slope(inst, 0.0) < 0.0) {
    // Bracket: g' is strictly decreasing in y and tends to b > 0 as
    // y -> -inf, so double the left end until the slope turns positive.
    double lo = -1.0;
    while (prodplan_dual_slope(inst, lo) < 0.0) {
      lo *= 2.0;
      if (++iterations > 200) {
        throw std::runtime_error("solve_prodplan: bracketing failed");
      }
    }
    double hi = 0.0;
    for (int it = 0; it < 200; ++it) {
      ++iterations;
      const double mid = 0.5 * (lo + hi);
      const double slope = prodplan_dual_slope(inst, mid);
      if (std::abs(slope) <= 1e-10 && hi - lo <= 1e-9) {
        lo = hi = mid;
        break;
      }
      if (slope > 0.0) lo = mid;
      else hi = mid;
      if (hi - lo <= 1e-14 * (1.0 + std::abs(lo))) break;
    }
    y_star = 0.5 * (lo + hi);
  }

  out.dual = {y_star};
  out.value = prodplan_dual_value(inst, y_star);
  out.iterations = iterations;
  out.status = SolveStatus::Optimal;

  Vec x(inst.n), t(inst.n);
  for (std::size_t j = 0; j < inst.n; ++j) {
    x[j] = std::sqrt(inst.f[j] / (inst.d[j] - y_star * inst.r[j]));
    t[j] = 1.0 / x[j];
  }
  const double primal_value = problems::prodplan_objective(inst, x, t);
  if (std::abs(primal_value - out.value) >
      1e-8 * (1.0 + std::abs(out.value))) {
    throw std::runtime_error("solve_prodplan: primal-dual gap " +
                             std::to_string(primal_value - out.value));
  }
  out.primal = x;
  out.primal.insert(out.primal.end(), t.begin(), t.end());
  return out;
}

double optimality_gap(double l_star, double l_hat) {
  if (l_star == 0.0) {
    throw std::domain_error("optimality_gap: undefined for L* = 0");
  }
  return (l_star - l_hat) / std::abs(l_star);
}

void annotate_with_oracles(problems::Dataset& ds, int jobs) {
  if (jobs < 1) jobs = 1;
  auto solve_one = [&](problems::Record& rec) {
    problems::OracleInfo info;
    if (ds.family == problems::Family::Knapsack) {
      const auto sol =
          solve_knapsack_lp(std::get<problems::KnapsackInstance>(rec.instance));
      info.value = sol.value;
      info.dual = sol.dual;
    } else {
      const auto sol =
          solve_prodplan(std::get<problems::ProdPlanInstance>(rec.instance));
      info.value = sol.value;
      info.dual = sol.dual;
    }
    rec.oracle = std::move(info);
  };
  if (jobs == 1) {
    for (auto& rec : ds.records) solve_one(rec);
    return;
  }
  std::vector<std::thread> workers;
  std::size_t chunk = (ds.records.size() + jobs - 1) / jobs;
  for (int t = 0; t < jobs; ++t) {
    const std::size_t begin = t * chunk;
    const std::size_t end = std::min(ds.records.size(), begin + chunk);
    if (begin >= end) break;
    workers.emplace_back([&, begin, end] {
      for (std::size_t i = begin; i < end; ++i) solve_one(ds.records[i]);
    });
  }
  for (auto& th : workers) th.join();
}

// ------------------------------------------------------ completion oracles --

OracleCompletion oracle_complete_box(const Vec& c, const Matrix& a,
                                     const Vec& l, const Vec& u, const Vec& b,
                                     const Vec& y) {
  const std::size_t n = c.size();
  if (l.size() != n || u.size() != n || a.cols() != n || a.rows() != y.size()) {
    throw std::invalid_argument("oracle_complete_box: dimension mismatch");
  }
  // Inner problem: min (c - A'y)'x over l <= x <= u, posed with explicit
  // rows so the duals come out of the simplex pricing machinery.
  const Vec s = linalg::sub(c, a.apply_transpose(y));
  LpStandardForm lp;
  lp.a = Matrix(2 * n, n);
  lp.rhs.resize(2 * n);
  for (std::size_t j = 0; j < n; ++j) {
    lp.a(j, j) = 1.0;
    lp.rhs[j] = u[j];
    lp.a(n + j, j) = -1.0;
    lp.rhs[n + j] = -l[j];
  }
  lp.objective = s;
  lp.lower.resize(n);
  lp.upper.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double pad = 1.0 + (u[j] - l[j]);
    lp.lower[j] = l[j] - pad;
    lp.upper[j] = u[j] + pad;
  }
  const OracleSolution sol = solve_lp(lp);
  if (sol.status != SolveStatus::Optimal) {
    throw std::runtime_error("oracle_complete_box: inner problem " +
                             status_name(sol.status));
  }
  OracleCompletion out;
  out.z.resize(2 * n);
  for (std::size_t j = 0; j < n; ++j) {
    out.z[j] = -sol.dual[n + j];      // z_l from the -x <= -l rows
    out.z[n + j] = -sol.dual[j];      // z_u from the x <= u rows
  }
  out.bound = linalg::dot(b, y);
  for (std::size_t j = 0; j < n; ++j) {
    out.bound += l[j] * out.z[j] - u[j] * out.z[n + j];
  }
  return out;
}

OracleCompletion oracle_complete_prodplan(const problems::ProdPlanInstance& inst,
                                          double y) {
  inst.validate();
  if (y > 0.0) {
    throw std::invalid_argument("oracle_complete_prodplan: requires y <= 0");
  }
  const auto rsoc3 = cones::ConeSpec::rsoc(3);
  OracleCompletion out;
  out.z.resize(3 * inst.n);
  out.bound = inst.b * y;
  for (std::size_t j = 0; j < inst.n; ++j) {
    const double pi = inst.d[j] - inst.r[j] * y;
    const double tau = inst.f[j];
    // sigma only enters the conic constraint and carries cost -sqrt2, so
    // push it down by bisection on RSOC membership.
    double hi = 0.0;  // feasible (pi, tau, 0)
    double lo = -1.0;
    while (cones::contains(rsoc3, {pi, tau, lo}, 0.0)) {
      hi = lo;
      lo *= 2.0;
      if (lo < -1e18) break;
    }
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (cones::contains(rsoc3, {pi, tau, mid}, 0.0)) hi = mid;
      else lo = mid;
      if (hi - lo <= 1e-13 * (1.0 + std::abs(hi))) break;
    }
    const double sigma = hi;
    out.z[3 * j] = pi;
    out.z[3 * j + 1] = tau;
    out.z[3 * j + 2] = sigma;
    out.bound += -std::sqrt(2.0) * sigma;
  }
  return out;
}

completion::ConicProblemData knapsack_conic(
    const problems::KnapsackInstance& inst) {
  completion::ConicProblemData xi;
  const std::size_t m = inst.m;
  const std::size_t n = inst.n;
  xi.a = Matrix(m, n);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) xi.a(i, j) = -inst.w(i, j);
  xi.b = linalg::scale(inst.b, -1.0);
  xi.h_mat = Matrix(2 * n, n);
  xi.h.assign(2 * n, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    xi.h_mat(j, j) = 1.0;         // x >= 0
    xi.h_mat(n + j, j) = -1.0;    // -x >= -1
    xi.h[n + j] = -1.0;
  }
  xi.c = linalg::scale(inst.p, -1.0);
  xi.cone_k = cones::ConeSpec::nonneg_orthant(m);
  xi.cone_c = {cones::ConeSpec::nonneg_orthant(2 * n)};
  xi.validate();
  return xi;
}

completion::ConicProblemData prodplan_conic(
    const problems::ProdPlanInstance& inst) {
  completion::ConicProblemData xi;
  const std::size_t n = inst.n;
  xi.a = Matrix(1, 2 * n);
  for (std::size_t j = 0; j < n; ++j) xi.a(0, j) = -inst.r[j];
  xi.b = {-inst.b};
  xi.h_mat = Matrix(3 * n, 2 * n);
  xi.h.assign(3 * n, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    xi.h_mat(3 * j, j) = 1.0;          // x_j
    xi.h_mat(3 * j + 1, n + j) = 1.0;  // t_j
    xi.h[3 * j + 2] = -std::sqrt(2.0);
  }
  xi.c = inst.d;
  xi.c.insert(xi.c.end(), inst.f.begin(), inst.f.end());
  xi.cone_k = cones::ConeSpec::nonneg_orthant(1);
  xi.cone_c.assign(n, cones::ConeSpec::rsoc(3));
  xi.validate();
  return xi;
}

OracleCompletion oracle_complete(const completion::ConicProblemData& xi,
                                 const Vec& y) {
  xi.validate();
  if (y.size() != xi.b.size()) {
    throw std::invalid_argument("oracle_complete: |y| != |b|");
  }
  const std::size_t n = xi.num_vars();

  const bool box_layout =
      xi.cone_c.size() == 1 &&
      xi.cone_c[0].kind == cones::ConeKind::NonnegOrthant &&
      xi.h.size() == 2 * n;
  if (box_layout) {
    // Expect H = [I; -I] with h = [l; -u].
    bool pattern = true;
    for (std::size_t i = 0; i < 2 * n && pattern; ++i) {
      for (std::size_t j = 0; j < n && pattern; ++j) {
        const double expect =
            (i < n) ? (i == j ? 1.0 : 0.0) : ((i - n) == j ? -1.0 : 0.0);
        if (xi.h_mat(i, j) != expect) pattern = false;
      }
    }
    if (pattern) {
      Vec l(xi.h.begin(), xi.h.begin() + n);
      Vec u(n);
      for (std::size_t j = 0; j < n; ++j) u[j] = -xi.h[n + j];
      return oracle_complete_box(xi.c, xi.a, l, u, xi.b, y);
    }
  }

  const bool rsoc_layout =
      !xi.cone_c.empty() &&
      std::all_of(xi.cone_c.begin(), xi.cone_c.end(), [](const auto& k) {
        return k.kind == cones::ConeKind::Rsoc && k.dim == 3;
      });
  if (rsoc_layout) {
    // Components pinned by the dual equalities H'z = c - A'y; the third
    // block entry is free and recovered by membership bisection.
    const Vec s = linalg::sub(xi.c, xi.a.apply_transpose(y));
    const std::size_t blocks = xi.cone_c.size();
    if (xi.h.size() != 3 * blocks || n != 2 * blocks) {
      throw std::invalid_argument("oracle_complete: unexpected RSOC layout");
    }
    const auto rsoc3 = cones::ConeSpec::rsoc(3);
    OracleCompletion out;
    out.z.resize(3 * blocks);
    out.bound = linalg::dot(xi.b, y);
    for (std::size_t j = 0; j < blocks; ++j) {
      const double pi = s[j];
      const double tau = s[blocks + j];
      if (!(pi > 0.0 && tau > 0.0)) {
        throw std::runtime_error(
            "oracle_complete: y-fixed inner problem unbounded (block " +
            std::to_string(j) + ")");
      }
      double hi = 0.0;
      double lo = -1.0;
      while (cones::contains(rsoc3, {pi, tau, lo}, 0.0)) {
        hi = lo;
        lo *= 2.0;
        if (lo < -1e18) break;
      }
      for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (cones::contains(rsoc3, {pi, tau, mid}, 0.0)) hi = mid;
        else lo = mid;
        if (hi - lo <= 1e-13 * (1.0 + std::abs(hi))) break;
      }
      out.z[3 * j] = pi;
      out.z[3 * j + 1] = tau;
      out.z[3 * j + 2] = hi;
      out.bound += xi.h[3 * j + 2] * hi;
    }
    return out;
  }

  throw std::logic_error(
      "oracle_complete: only box-bounded and RSOC-block structures are "
      "supported");
}

}  // namespace dll::refsolve
