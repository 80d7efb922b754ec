#pragma once

#include <cstddef>
#include <string>

#include "dll/completion.hpp"
#include "dll/linalg.hpp"
#include "dll/problems.hpp"

namespace dll::refsolve {

using linalg::Matrix;
using linalg::Vec;

/// min objective'x  s.t.  a x <= rhs,  lower <= x <= upper (finite bounds).
struct LpStandardForm {
  Matrix a;
  Vec rhs;
  Vec objective;
  Vec lower;
  Vec upper;
  void validate() const;
};

enum class SolveStatus { Optimal, Infeasible, Unbounded };

std::string status_name(SolveStatus s);

/// Certified solve result. When status is Optimal the constructor-side
/// checks guarantee primal feasibility <= 1e-8, dual feasibility <= 1e-8
/// and a primal-dual objective gap <= 1e-8 * (1 + |value|).
struct OracleSolution {
  Vec primal;
  Vec dual;           // row duals (<= 0 for `<=` rows); prodplan: {y*}
  Vec reduced_lower;  // z_l >= 0
  Vec reduced_upper;  // z_u >= 0
  double value = 0.0;
  SolveStatus status = SolveStatus::Optimal;
  int iterations = 0;
};

/// Dense bounded-variable revised simplex with Bland's rule.
OracleSolution solve_lp(const LpStandardForm& lp);

/// Reference optimum of the knapsack relaxation in min form (value is
/// negative); duals satisfy y <= 0, z_l, z_u >= 0, W'y + z_l - z_u = -p.
OracleSolution solve_knapsack_lp(const problems::KnapsackInstance& inst);

/// Maximizes the concave scalar dual g(y) = b y + 2 sum_j sqrt(f_j (d_j -
/// y r_j)) over y <= 0 by bisection on g'; recovers the primal x_j =
/// sqrt(f_j / (d_j - y r_j)), t_j = 1/x_j, and asserts the primal-dual gap.
/// primal = concat(x, t); dual = {y*}.
OracleSolution solve_prodplan(const problems::ProdPlanInstance& inst);

/// (l_star - l_hat) / |l_star|; throws for l_star = 0.
double optimality_gap(double l_star, double l_hat);

/// Solves each instance and caches {value, dual} in the record.
void annotate_with_oracles(problems::Dataset& ds, int jobs = 1);

// ---------------------------------------------------------------------------
// Test-scoped completion oracles (Theorem-2 checks). These recover z for a
// fixed y through independent machinery (an LP solve / membership bisection)
// rather than the closed-form completions.
// ---------------------------------------------------------------------------

struct OracleCompletion {
  Vec z;  // laid out like the corresponding cone-C blocks
  double bound = 0.0;
};

/// y-fixed inner problem of a box-bounded conic program, solved as a
/// 2n-row LP whose row duals give (z_l, z_u); z = concat(z_l, z_u).
OracleCompletion oracle_complete_box(const Vec& c, const Matrix& a,
                                     const Vec& l, const Vec& u, const Vec& b,
                                     const Vec& y);

/// Per-block recovery of (pi, tau, sigma) for the production-planning dual:
/// pi and tau are pinned by the equalities; each sigma_j is found by
/// bisection on RSOC membership. z = concat of (pi_j, tau_j, sigma_j) blocks.
OracleCompletion oracle_complete_prodplan(const problems::ProdPlanInstance& inst,
                                          double y);

/// Structure-dispatching version over ConicProblemData: recognizes the
/// box-bounded layout (C = orthant, H = [I; -I]) and the production-planning
/// layout (C = RSOC^3 blocks); throws for anything else.
OracleCompletion oracle_complete(const completion::ConicProblemData& xi,
                                 const Vec& y);

// ConicProblemData builders for the two experiment families (template
// convention: Ax >=_K b with y in K*, so knapsack uses y_template = -y).
completion::ConicProblemData knapsack_conic(const problems::KnapsackInstance& inst);
completion::ConicProblemData prodplan_conic(const problems::ProdPlanInstance& inst);

}  // namespace dll::refsolve
