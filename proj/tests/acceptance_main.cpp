// Acceptance suite: one pass/fail line per criterion, exit code = number of
// failures. Criterion numbers can be passed as arguments to run a subset.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <set>
#include <string>
#include <vector>

#include "dll/cones.hpp"
#include "dll/completion.hpp"
#include "dll/neural.hpp"
#include "dll/problems.hpp"
#include "dll/refsolve.hpp"
#include "dll/rng.hpp"
#include "dll/training.hpp"
#include "support/test_support.hpp"

namespace {

using dll::cones::ConeSpec;
using dll::linalg::Vec;
namespace cones = dll::cones;
namespace completion = dll::completion;
namespace neural = dll::neural;
namespace problems = dll::problems;
namespace refsolve = dll::refsolve;
namespace training = dll::training;

struct Criterion {
  int id = 0;
  std::string name;
  bool pass = true;
  std::string detail;
  double seconds = 0.0;

  void fail(const std::string& why) {
    pass = false;
    if (!detail.empty()) detail += "; ";
    detail += why;
  }
};

struct WeakDualityLedger {
  long checks = 0;
  long violations = 0;
  void observe(double l_star, double l_hat) {
    ++checks;
    if (l_hat > l_star + 1e-7 * (1.0 + std::abs(l_star))) ++violations;
  }
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

// --------------------------------------------------------------------- C1 --

void shrink_step(const ConeSpec& k, const Vec& x, double lam, Vec& out) {
  out = x;
  switch (k.kind) {
    case cones::ConeKind::Soc:
      out[0] = x[0] + lam;
      break;
    case cones::ConeKind::Rsoc: {
      const double c = lam / std::sqrt(2.0);
      out[0] = x[0] + c;
      out[1] = x[1] + c;
      break;
    }
    case cones::ConeKind::Psd: {
      std::size_t idx = 0;
      for (std::size_t i = 0; i < k.order; ++i) {
        out[idx] += lam;
        idx += k.order - i;
      }
      break;
    }
    case cones::ConeKind::Exp:
      out[2] = x[2] - lam;
      break;
    case cones::ConeKind::DualExp:
      out[1] = x[1] + lam;
      break;
    case cones::ConeKind::Power:
      out[0] = x[0] + lam;
      break;
    default:
      break;
  }
}

Criterion run_projection_suite() {
  Criterion crit{1, "projection suite (membership, idempotence, minimality, Moreau)"};
  const auto t0 = std::chrono::steady_clock::now();
  const int samples = 10000;
  dll::rng::Stream rng(0xC1);

  struct Config {
    std::string label;
    std::function<ConeSpec(int)> make;
    bool euclidean;
  };
  std::vector<Config> configs = {
      {"orthant", [](int i) { return ConeSpec::nonneg_orthant(1 + i % 50); },
       true},
      {"soc", [](int i) { return ConeSpec::soc(3 + i % 48); }, true},
      {"rsoc", [](int i) { return ConeSpec::rsoc(3 + i % 48); }, true},
      {"psd", [](int i) { return ConeSpec::psd(2 + i % 9); }, true},
      {"exp", [](int) { return ConeSpec::exponential(); }, false},
      {"dualexp", [](int) { return ConeSpec::dual_exponential(); }, false},
      {"power(0.25)", [](int) { return ConeSpec::power(0.25); }, false},
      {"power(0.5)", [](int) { return ConeSpec::power(0.5); }, false},
      {"power(0.75)", [](int) { return ConeSpec::power(0.75); }, false},
  };

  long failures = 0;
  for (const Config& config : configs) {
    long bad_member = 0, bad_idem = 0, bad_minimal = 0, bad_moreau = 0;
    for (int i = 0; i < samples; ++i) {
      const ConeSpec k = config.make(i);
      const Vec x = testsupport::sample_for(k, rng);
      const auto rp = cones::project_radial_step(k, x);
      if (!cones::contains(k, rp.point, 1e-8)) ++bad_member;

      const Vec again = cones::project_radial(k, rp.point);
      const double scale =
          1.0 + std::sqrt(cones::inner(k, rp.point, rp.point));
      for (std::size_t c = 0; c < x.size(); ++c) {
        if (std::abs(again[c] - rp.point[c]) > 1e-9 * scale) {
          ++bad_idem;
          break;
        }
      }

      if (k.kind == cones::ConeKind::NonnegOrthant) {
        Vec shrunk = x;
        bool any = false;
        for (std::size_t c = 0; c < x.size(); ++c) {
          const double lam = rp.point[c] - x[c];
          if (lam > 1e-8 * scale) {
            shrunk[c] = x[c] + (1.0 - 1e-6) * lam;
            any = true;
          } else {
            shrunk[c] = rp.point[c];
          }
        }
        if (any && cones::contains(k, shrunk, 0.0)) ++bad_minimal;
      } else if (rp.step > 1e-8 * scale) {
        Vec shrunk;
        shrink_step(k, x, (1.0 - 1e-6) * rp.step, shrunk);
        if (cones::contains(k, shrunk, 0.0)) ++bad_minimal;
      }

      if (config.euclidean) {
        const auto [p, q] = cones::moreau_decompose(k, x);
        const double xs = 1.0 + cones::inner(k, x, x);
        bool ok = cones::contains(k, p, 1e-8) &&
                  cones::contains(cones::dual_cone(k), q, 1e-8) &&
                  std::abs(cones::inner(k, p, q)) <= 1e-8 * xs;
        for (std::size_t c = 0; ok && c < x.size(); ++c) {
          ok = std::abs(p[c] - q[c] - x[c]) <= 1e-8 * xs;
        }
        if (!ok) ++bad_moreau;
        const Vec pp = cones::project_euclidean(k, p);
        for (std::size_t c = 0; c < x.size(); ++c) {
          if (std::abs(pp[c] - p[c]) > 1e-9 * scale) {
            ++bad_idem;
            break;
          }
        }
      }
    }
    if (bad_member + bad_idem + bad_minimal + bad_moreau > 0) {
      crit.fail(config.label + ": member=" + std::to_string(bad_member) +
                " idem=" + std::to_string(bad_idem) +
                " minimal=" + std::to_string(bad_minimal) +
                " moreau=" + std::to_string(bad_moreau));
      ++failures;
    }
  }
  crit.seconds = seconds_since(t0);
  if (crit.seconds >= 60.0) crit.fail("runtime " + fmt(crit.seconds) + "s >= 60s");
  if (crit.pass) {
    crit.detail = std::to_string(configs.size()) + " cones x " +
                  std::to_string(samples) + " points, " + fmt(crit.seconds) +
                  "s";
  }
  return crit;
}

// --------------------------------------------------------------------- C2 --

Criterion run_completion_optimality() {
  Criterion crit{2, "completion optimality vs y-fixed oracle"};
  const auto t0 = std::chrono::steady_clock::now();
  dll::rng::Stream rng(0xC2);

  long worst_count = 0;
  double worst = 0.0;

  const auto prod = problems::gen_prodplan(20, 200, 2001);
  for (const auto& rec : prod.records) {
    const auto& inst = std::get<problems::ProdPlanInstance>(rec.instance);
    const double y = -std::abs(rng.normal()) * 40.0;
    const double closed =
        completion::prodplan_bound(inst.d, inst.f, inst.r, inst.b, y);
    const auto oracle = refsolve::oracle_complete_prodplan(inst, y);
    const double rel =
        std::abs(closed - oracle.bound) / (1.0 + std::abs(closed));
    worst = std::max(worst, rel);
    if (rel > 1e-7) ++worst_count;
  }

  const auto knap = problems::gen_knapsack(5, 20, 200, 2002);
  for (const auto& rec : knap.records) {
    const auto& inst = std::get<problems::KnapsackInstance>(rec.instance);
    Vec y(inst.m);
    for (double& v : y) v = -std::abs(rng.normal());
    const double closed =
        completion::knapsack_bound(inst.p, inst.w, inst.b, y);
    const auto xi = refsolve::knapsack_conic(inst);
    const auto oracle =
        refsolve::oracle_complete(xi, dll::linalg::scale(y, -1.0));
    const double rel =
        std::abs(closed - oracle.bound) / (1.0 + std::abs(closed));
    worst = std::max(worst, rel);
    if (rel > 1e-7) ++worst_count;
  }

  crit.seconds = seconds_since(t0);
  if (worst_count > 0) {
    crit.fail(std::to_string(worst_count) + " pairs above 1e-7 (worst " +
              fmt(worst) + ")");
  }
  if (crit.seconds >= 120.0) {
    crit.fail("runtime " + fmt(crit.seconds) + "s >= 120s");
  }
  if (crit.pass) {
    crit.detail = "200 pairs per family, worst rel err " + fmt(worst) + ", " +
                  fmt(crit.seconds) + "s";
  }
  return crit;
}

// --------------------------------------------------------------------- C3 --

void weak_duality_sweep(WeakDualityLedger& ledger) {
  dll::rng::Stream rng(0xC3);
  const auto prod = problems::gen_prodplan(10, 300, 3001);
  for (const auto& rec : prod.records) {
    const auto& inst = std::get<problems::ProdPlanInstance>(rec.instance);
    const double l_star = refsolve::solve_prodplan(inst).value;
    for (int k = 0; k < 10; ++k) {
      const double y = -std::abs(rng.normal()) * 100.0;
      ledger.observe(l_star,
                     completion::prodplan_bound(inst.d, inst.f, inst.r,
                                                inst.b, y));
    }
  }
  const auto knap = problems::gen_knapsack(5, 30, 200, 3002);
  for (const auto& rec : knap.records) {
    const auto& inst = std::get<problems::KnapsackInstance>(rec.instance);
    const double l_star = refsolve::solve_knapsack_lp(inst).value;
    for (int k = 0; k < 10; ++k) {
      Vec y(inst.m);
      for (double& v : y) v = -std::abs(rng.normal()) * 3.0;
      ledger.observe(l_star,
                     completion::knapsack_bound(inst.p, inst.w, inst.b, y));
    }
  }
}

// --------------------------------------------------------------------- C4 --

Criterion run_oracle_correctness() {
  Criterion crit{4, "oracle correctness (simplex vs brute force, prodplan duality)"};
  const auto t0 = std::chrono::steady_clock::now();
  dll::rng::Stream rng(0xC4);

  long lp_bad = 0;
  double lp_worst = 0.0;
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t m = 1 + static_cast<std::size_t>(rng.uniform_int(0, 3));
    const std::size_t n = 2 + static_cast<std::size_t>(rng.uniform_int(0, 6));
    refsolve::LpStandardForm lp;
    lp.a = dll::linalg::Matrix(m, n);
    for (double& v : lp.a.data()) v = rng.normal();
    lp.lower.resize(n);
    lp.upper.resize(n);
    Vec x0(n);
    for (std::size_t j = 0; j < n; ++j) {
      lp.lower[j] = rng.uniform(-2.0, 0.0);
      lp.upper[j] = lp.lower[j] + rng.uniform(0.5, 3.0);
      x0[j] = rng.uniform(lp.lower[j], lp.upper[j]);
    }
    lp.rhs = lp.a.apply(x0);
    for (double& v : lp.rhs) v += rng.uniform(0.0, 2.0);
    lp.objective.resize(n);
    for (double& v : lp.objective) v = rng.normal();

    const auto brute = testsupport::brute_force_lp(lp.a, lp.rhs, lp.objective,
                                                   lp.lower, lp.upper);
    const auto sol = refsolve::solve_lp(lp);
    if (!brute.feasible || sol.status != refsolve::SolveStatus::Optimal) {
      ++lp_bad;
      continue;
    }
    const double err =
        std::abs(sol.value - brute.value) / (1.0 + std::abs(brute.value));
    lp_worst = std::max(lp_worst, err);
    if (err > 1e-9) ++lp_bad;
  }
  if (lp_bad > 0) {
    crit.fail(std::to_string(lp_bad) + "/500 LPs disagree with brute force "
              "(worst " + fmt(lp_worst) + ")");
  }

  long pp_bad = 0;
  const auto prod = problems::gen_prodplan(12, 500, 4001);
  for (const auto& rec : prod.records) {
    const auto& inst = std::get<problems::ProdPlanInstance>(rec.instance);
    try {
      const auto sol = refsolve::solve_prodplan(inst);  // asserts the gap
      Vec x(sol.primal.begin(), sol.primal.begin() + inst.n);
      Vec t(sol.primal.begin() + inst.n, sol.primal.end());
      const double primal = problems::prodplan_objective(inst, x, t);
      if (std::abs(primal - sol.value) > 1e-8 * (1.0 + std::abs(sol.value))) {
        ++pp_bad;
      }
    } catch (const std::exception&) {
      ++pp_bad;
    }
  }
  if (pp_bad > 0) {
    crit.fail(std::to_string(pp_bad) + "/500 prodplan primal-dual gaps open");
  }

  problems::ProdPlanInstance worked;
  worked.n = 1;
  worked.d = {2.0};
  worked.f = {8.0};
  worked.r = {1.0};
  worked.b = 1.0;
  const auto sol = refsolve::solve_prodplan(worked);
  if (std::abs(sol.value - 10.0) > 1e-9 || std::abs(sol.dual[0] + 6.0) > 1e-9) {
    crit.fail("worked example: value " + fmt(sol.value) + ", y* " +
              fmt(sol.dual[0]));
  }

  crit.seconds = seconds_since(t0);
  if (crit.pass) {
    crit.detail = "500 LPs (worst " + fmt(lp_worst) +
                  "), 500 prodplan solves, worked example exact, " +
                  fmt(crit.seconds) + "s";
  }
  return crit;
}

// --------------------------------------------------------------------- C5 --

Criterion run_gradient_suite() {
  Criterion crit{5, "gradient suite vs central finite differences"};
  const auto t0 = std::chrono::steady_clock::now();
  dll::rng::Stream rng(0xC5);

  // mlp_backward on 100 random nets
  long mlp_bad = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t in = 2 + trial % 4;
    const std::size_t hidden = 3 + trial % 5;
    const std::size_t out = 1 + trial % 3;
    auto model = neural::make_mlp(
        in, {hidden}, out, neural::Activation::Sigmoid,
        (trial % 2) ? neural::Activation::Linear
                    : neural::Activation::NegatedSoftplus,
        5000 + trial);
    Vec x(in), cot(out);
    for (double& v : x) v = rng.normal();
    for (double& v : cot) v = rng.normal();
    neural::ForwardCache cache;
    neural::mlp_forward(model, x, &cache);
    auto grads = neural::Gradients::zeros_like(model);
    neural::mlp_backward(model, cache, cot, grads);
    auto probe = model;
    const Vec fd = testsupport::fd_gradient(
        [&](const Vec& params) {
          testsupport::unflatten_model(probe, params);
          const Vec o = neural::mlp_forward(probe, x);
          double s = 0.0;
          for (std::size_t i = 0; i < o.size(); ++i) s += o[i] * cot[i];
          return s;
        },
        testsupport::flatten_model(model));
    if (testsupport::rel_inf_error(testsupport::flatten_grads(grads), fd) >
        1e-4) {
      ++mlp_bad;
    }
  }
  if (mlp_bad > 0) crit.fail(std::to_string(mlp_bad) + "/100 mlp grads off");

  // radial vjps, off-kink, across every cone
  long vjp_done = 0, vjp_bad = 0;
  const std::vector<ConeSpec> specs = {
      ConeSpec::nonneg_orthant(6), ConeSpec::soc(5),
      ConeSpec::rsoc(5),           ConeSpec::psd(3),
      ConeSpec::exponential(),     ConeSpec::dual_exponential(),
      ConeSpec::power(0.25),       ConeSpec::power(0.5),
      ConeSpec::power(0.75)};
  for (const auto& k : specs) {
    int done = 0;
    int guard = 0;
    while (done < 15 && ++guard < 1000) {
      const Vec x = testsupport::sample_for(k, rng);
      // keep a margin from the projection's max/min switch
      const auto rp = cones::project_radial_step(k, x);
      const double scale = 1.0 + std::sqrt(cones::inner(k, x, x));
      if (rp.step > 0.0 && rp.step < 1e-3 * scale) continue;
      if (rp.step == 0.0 && cones::membership_slack(k, x) < 1e-3) continue;
      Vec cot(x.size());
      for (double& v : cot) v = rng.normal();
      const Vec got = cones::radial_vjp(k, x, cot);
      const Vec want = testsupport::fd_vjp(
          [&](const Vec& p) { return cones::project_radial(k, p); }, x, cot);
      if (testsupport::rel_inf_error(got, want) > 1e-4) ++vjp_bad;
      ++done;
      ++vjp_done;
    }
  }
  if (vjp_done < 100) crit.fail("only " + std::to_string(vjp_done) + " vjp points");
  if (vjp_bad > 0) crit.fail(std::to_string(vjp_bad) + " radial vjps off");

  // completion vjps
  long comp_bad = 0, comp_done = 0;
  const auto prod = problems::gen_prodplan(6, 60, 5001);
  for (const auto& rec : prod.records) {
    const auto& inst = std::get<problems::ProdPlanInstance>(rec.instance);
    const double y = -std::abs(rng.normal()) * 20.0 - 0.05;
    const double got =
        completion::prodplan_completion_vjp(inst.d, inst.f, inst.r, inst.b, y,
                                            1.0);
    const Vec fd = testsupport::fd_gradient(
        [&](const Vec& p) {
          return completion::prodplan_bound(inst.d, inst.f, inst.r, inst.b,
                                            std::min(p[0], 0.0));
        },
        {y});
    if (std::abs(got - fd[0]) > 1e-4 * (1.0 + std::abs(fd[0]))) ++comp_bad;
    ++comp_done;
  }
  const auto knap = problems::gen_knapsack(4, 12, 60, 5002);
  for (const auto& rec : knap.records) {
    const auto& inst = std::get<problems::KnapsackInstance>(rec.instance);
    Vec y(inst.m);
    for (double& v : y) v = -std::abs(rng.normal()) - 0.05;
    const Vec wty = inst.w.apply_transpose(y);
    bool near_kink = false;
    for (std::size_t j = 0; j < inst.n; ++j) {
      if (std::abs(-inst.p[j] - wty[j]) < 1e-3) near_kink = true;
    }
    if (near_kink) continue;
    const Vec got =
        completion::knapsack_completion_vjp(inst.p, inst.w, inst.b, y, 1.0);
    const Vec fd = testsupport::fd_gradient(
        [&](const Vec& p) {
          return completion::knapsack_bound(inst.p, inst.w, inst.b,
                                            cones::project_nonpositive(p));
        },
        y);
    if (testsupport::rel_inf_error(got, fd) > 1e-4) ++comp_bad;
    ++comp_done;
  }
  if (comp_done < 100) crit.fail("only " + std::to_string(comp_done) + " completion vjps");
  if (comp_bad > 0) crit.fail(std::to_string(comp_bad) + " completion vjps off");

  // end-to-end DLL loss gradients on 2-instance batches
  long e2e_bad = 0, e2e_done = 0;
  for (int config = 0; config < 50; ++config) {
    auto ds = problems::gen_prodplan(3, 4, 6000 + config);
    problems::assign_splits(ds, 2, 1, 1);
    training::TrainConfig cfg =
        training::default_config(problems::Family::ProdPlan,
                                 training::Method::Dll, 0, 3);
    cfg.hidden = {4};
    cfg.max_epochs = 1;
    cfg.batch_size = 2;
    cfg.seed = config;
    auto result = training::dll_train(ds, cfg);
    auto tm = result.best;
    auto grads = neural::Gradients::zeros_like(tm.model);
    for (int s = 0; s < 2; ++s)
      training::sample_loss_grad(tm, ds.records[s], &grads);
    auto probe = tm;
    const Vec fd = testsupport::fd_gradient(
        [&](const Vec& params) {
          testsupport::unflatten_model(probe.model, params);
          double l = 0.0;
          for (int s = 0; s < 2; ++s)
            l += training::sample_loss_grad(probe, ds.records[s], nullptr);
          return l;
        },
        testsupport::flatten_model(tm.model));
    if (testsupport::rel_inf_error(testsupport::flatten_grads(grads), fd) >
        1e-4) {
      ++e2e_bad;
    }
    ++e2e_done;
  }
  for (int config = 0; config < 50; ++config) {
    auto ds = problems::gen_knapsack(2, 4, 4, 7000 + config);
    problems::assign_splits(ds, 2, 1, 1);
    training::TrainConfig cfg =
        training::default_config(problems::Family::Knapsack,
                                 training::Method::Dll, 2, 4);
    cfg.hidden = {4};
    cfg.max_epochs = 1;
    cfg.batch_size = 2;
    cfg.seed = config;
    auto result = training::dll_train(ds, cfg);
    auto tm = result.best;
    auto grads = neural::Gradients::zeros_like(tm.model);
    for (int s = 0; s < 2; ++s)
      training::sample_loss_grad(tm, ds.records[s], &grads);
    auto probe = tm;
    const Vec fd = testsupport::fd_gradient(
        [&](const Vec& params) {
          testsupport::unflatten_model(probe.model, params);
          double l = 0.0;
          for (int s = 0; s < 2; ++s)
            l += training::sample_loss_grad(probe, ds.records[s], nullptr);
          return l;
        },
        testsupport::flatten_model(tm.model));
    if (testsupport::rel_inf_error(testsupport::flatten_grads(grads), fd) >
        1e-4) {
      ++e2e_bad;
    }
    ++e2e_done;
  }
  if (e2e_done < 100) crit.fail("only " + std::to_string(e2e_done) + " e2e configs");
  if (e2e_bad > 0) crit.fail(std::to_string(e2e_bad) + " e2e grads off");

  crit.seconds = seconds_since(t0);
  if (crit.pass) {
    crit.detail = "mlp 100, radial vjp " + std::to_string(vjp_done) +
                  ", completion " + std::to_string(comp_done) + ", e2e " +
                  std::to_string(e2e_done) + ", " + fmt(crit.seconds) + "s";
  }
  return crit;
}

// ----------------------------------------------------------------- C6-C8 --

struct BenchmarkRun {
  training::EvalReport dll;
  training::EvalReport dc3;
  double dll_seconds = 0.0;
};

BenchmarkRun run_benchmark(problems::Family family, WeakDualityLedger& ledger,
                           bool with_dc3) {
  problems::Dataset ds;
  int patience = 0;
  if (family == problems::Family::ProdPlan) {
    ds = problems::gen_prodplan(10, 3072, 1);
    patience = 64;
  } else {
    ds = problems::gen_knapsack(5, 50, 3072, 1);
    patience = 32;
  }
  problems::assign_splits(ds, 2048, 512, 512);
  refsolve::annotate_with_oracles(ds);

  std::size_t m = 0, n = 0;
  if (family == problems::Family::Knapsack) {
    m = 5;
    n = 50;
  } else {
    n = 10;
  }

  BenchmarkRun out;
  {
    training::TrainConfig cfg =
        training::default_config(family, training::Method::Dll, m, n);
    cfg.patience = patience;
    cfg.max_epochs = 512;
    cfg.seed = 3;
    const auto t0 = std::chrono::steady_clock::now();
    const auto result = training::dll_train(ds, cfg);
    out.dll = training::evaluate(result.best, ds);
    out.dll_seconds = seconds_since(t0);
    for (const auto& row : out.dll.rows) ledger.observe(row.l_star, row.l_hat);
  }
  if (with_dc3) {
    training::TrainConfig cfg =
        training::default_config(family, training::Method::Dc3, m, n);
    cfg.patience = patience;
    cfg.max_epochs = 512;
    cfg.seed = 3;
    const auto result = training::dc3_train(ds, cfg);
    out.dc3 = training::evaluate(result.best, ds);
    for (const auto& row : out.dc3.rows) ledger.observe(row.l_star, row.l_hat);
  }
  return out;
}

// --------------------------------------------------------------------- C9 --

Criterion run_determinism() {
  Criterion crit{9, "determinism (datasets byte-equal, histories bit-equal)"};
  const auto t0 = std::chrono::steady_clock::now();

  {
    auto a = problems::gen_prodplan(6, 64, 11);
    auto b = problems::gen_prodplan(6, 64, 11);
    problems::assign_splits(a, 48, 8, 8);
    problems::assign_splits(b, 48, 8, 8);
    refsolve::annotate_with_oracles(a, 1);
    refsolve::annotate_with_oracles(b, 4);
    if (problems::serialize(a) != problems::serialize(b)) {
      crit.fail("prodplan dataset bytes differ");
    }
  }
  {
    const auto a = problems::gen_knapsack(3, 12, 32, 5);
    const auto b = problems::gen_knapsack(3, 12, 32, 5);
    if (problems::serialize(a) != problems::serialize(b)) {
      crit.fail("knapsack dataset bytes differ");
    }
  }
  {
    auto ds = problems::gen_prodplan(6, 64, 21);
    problems::assign_splits(ds, 48, 8, 8);
    refsolve::annotate_with_oracles(ds);
    training::TrainConfig cfg = training::default_config(
        problems::Family::ProdPlan, training::Method::Dll, 0, 6);
    cfg.hidden = {16};
    cfg.max_epochs = 12;
    cfg.seed = 9;
    const auto r1 = training::dll_train(ds, cfg);
    const auto r2 = training::dll_train(ds, cfg);
    bool same = r1.history.size() == r2.history.size();
    for (std::size_t i = 0; same && i < r1.history.size(); ++i) {
      same = r1.history[i].train_loss == r2.history[i].train_loss &&
             r1.history[i].val_loss == r2.history[i].val_loss &&
             r1.history[i].lr == r2.history[i].lr;
    }
    if (!same) crit.fail("training histories differ bitwise");

    const auto e1 = training::evaluate(r1.best, ds);
    const auto e2 = training::evaluate(r2.best, ds);
    for (std::size_t i = 0; i < e1.rows.size(); ++i) {
      if (e1.rows[i].l_hat != e2.rows[i].l_hat) {
        crit.fail("evaluation rows differ");
        break;
      }
    }
  }
  crit.seconds = seconds_since(t0);
  if (crit.pass) crit.detail = fmt(crit.seconds) + "s";
  return crit;
}

}  // namespace

int main(int argc, char** argv) {
  std::set<int> wanted;
  for (int i = 1; i < argc; ++i) wanted.insert(std::atoi(argv[i]));
  const auto want = [&](int id) { return wanted.empty() || wanted.count(id); };

  std::vector<Criterion> results;
  WeakDualityLedger ledger;

  if (want(1)) results.push_back(run_projection_suite());
  if (want(2)) results.push_back(run_completion_optimality());
  if (want(4)) results.push_back(run_oracle_correctness());
  if (want(5)) results.push_back(run_gradient_suite());

  const bool need_prod = want(6) || want(8);
  const bool need_knap = want(7) || want(8);
  BenchmarkRun prod, knap;
  double prod_gen_t = 0.0, knap_gen_t = 0.0;
  if (need_prod) {
    const auto t0 = std::chrono::steady_clock::now();
    prod = run_benchmark(problems::Family::ProdPlan, ledger, want(8));
    prod_gen_t = seconds_since(t0);
  }
  if (need_knap) {
    const auto t0 = std::chrono::steady_clock::now();
    knap = run_benchmark(problems::Family::Knapsack, ledger, want(8));
    knap_gen_t = seconds_since(t0);
  }

  if (want(6)) {
    Criterion crit{6, "desk-scale DLL quality, prodplan n=10"};
    crit.seconds = prod_gen_t;
    if (prod.dll.avg_gap_pct > 5.0) {
      crit.fail("avg gap " + fmt(prod.dll.avg_gap_pct) + "% > 5%");
    }
    if (prod.dll.max_gap_pct > 25.0) {
      crit.fail("max gap " + fmt(prod.dll.max_gap_pct) + "% > 25%");
    }
    if (prod.dll_seconds > 1800.0) {
      crit.fail("training " + fmt(prod.dll_seconds) + "s > 30min");
    }
    if (crit.pass) {
      crit.detail = "avg " + fmt(prod.dll.avg_gap_pct) + "%, max " +
                    fmt(prod.dll.max_gap_pct) + "%, train " +
                    fmt(prod.dll_seconds) + "s";
    }
    results.push_back(crit);
  }
  if (want(7)) {
    Criterion crit{7, "desk-scale DLL quality, knapsack m=5 n=50"};
    crit.seconds = knap_gen_t;
    if (knap.dll.avg_gap_pct > 5.0) {
      crit.fail("avg gap " + fmt(knap.dll.avg_gap_pct) + "% > 5%");
    }
    if (knap.dll_seconds > 1800.0) {
      crit.fail("training " + fmt(knap.dll_seconds) + "s > 30min");
    }
    if (crit.pass) {
      crit.detail = "avg " + fmt(knap.dll.avg_gap_pct) + "%, max " +
                    fmt(knap.dll.max_gap_pct) + "%, train " +
                    fmt(knap.dll_seconds) + "s";
    }
    results.push_back(crit);
  }
  if (want(8)) {
    Criterion crit{8, "method ordering: DLL beats DC3 on both benchmarks"};
    if (!(prod.dll.avg_gap_pct < prod.dc3.avg_gap_pct)) {
      crit.fail("prodplan: dll " + fmt(prod.dll.avg_gap_pct) + "% vs dc3 " +
                fmt(prod.dc3.avg_gap_pct) + "%");
    }
    if (!(knap.dll.avg_gap_pct < knap.dc3.avg_gap_pct)) {
      crit.fail("knapsack: dll " + fmt(knap.dll.avg_gap_pct) + "% vs dc3 " +
                fmt(knap.dc3.avg_gap_pct) + "%");
    }
    if (crit.pass) {
      crit.detail = "prodplan " + fmt(prod.dll.avg_gap_pct) + "% < " +
                    fmt(prod.dc3.avg_gap_pct) + "%; knapsack " +
                    fmt(knap.dll.avg_gap_pct) + "% < " +
                    fmt(knap.dc3.avg_gap_pct) + "%";
    }
    results.push_back(crit);
  }

  if (want(3)) {
    Criterion crit{3, "weak duality, absolute"};
    const auto t0 = std::chrono::steady_clock::now();
    weak_duality_sweep(ledger);
    crit.seconds = seconds_since(t0);
    if (ledger.violations > 0) {
      crit.fail(std::to_string(ledger.violations) + "/" +
                std::to_string(ledger.checks) + " bounds above the optimum");
    } else {
      crit.detail = std::to_string(ledger.checks) +
                    " certified bounds checked, 0 violations, " +
                    fmt(crit.seconds) + "s";
    }
    results.push_back(crit);
  }

  if (want(9)) results.push_back(run_determinism());

  std::sort(results.begin(), results.end(),
            [](const Criterion& a, const Criterion& b) { return a.id < b.id; });
  int failures = 0;
  for (const Criterion& crit : results) {
    if (!crit.pass) ++failures;
    std::cout << (crit.pass ? "[PASS] " : "[FAIL] ") << "criterion " << crit.id
              << ": " << crit.name;
    if (!crit.detail.empty()) std::cout << " -- " << crit.detail;
    std::cout << "\n";
  }
  std::cout << (failures == 0 ? "all criteria passed"
                              : std::to_string(failures) + " criteria failed")
            << "\n";
  return failures;
}
