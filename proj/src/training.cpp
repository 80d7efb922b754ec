#include "dll/training.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "dll/refsolve.hpp"
#include "dll/rng.hpp"

namespace dll::training {

using nlohmann::json;
using problems::Family;
using problems::KnapsackInstance;
using problems::ProdPlanInstance;
using problems::Record;

std::string method_name(Method m) { return m == Method::Dll ? "dll" : "dc3"; }

Method method_from_name(const std::string& name) {
  if (name == "dll") return Method::Dll;
  if (name == "dc3") return Method::Dc3;
  throw std::invalid_argument("unknown method: " + name);
}

TrainConfig default_config(Family family, Method method, std::size_t m,
                           std::size_t n) {
  TrainConfig cfg;
  cfg.family = family;
  cfg.method = method;
  if (family == Family::Knapsack) {
    cfg.hidden = {2 * (m + n), 2 * (m + n)};
    cfg.correction_rate = 1e-4;
    cfg.patience = 32;
    cfg.max_epochs = 1024;
  } else {
    const std::size_t width = std::max<std::size_t>(128, 4 * n);
    cfg.hidden = {width, width};
    cfg.correction_rate = 1e-5;
    cfg.patience = 128;
    cfg.max_epochs = 4096;
  }
  return cfg;
}

json config_to_json(const TrainConfig& cfg) {
  return json{{"family", problems::family_name(cfg.family)},
              {"method", method_name(cfg.method)},
              {"hidden", cfg.hidden},
              {"lr0", cfg.lr0},
              {"patience", cfg.patience},
              {"max_epochs", cfg.max_epochs},
              {"warmup", cfg.warmup},
              {"batch_size", cfg.batch_size},
              {"seed", cfg.seed},
              {"correction_steps", cfg.correction_steps},
              {"correction_rate", cfg.correction_rate},
              {"penalty_rho", cfg.penalty_rho}};
}

TrainConfig config_from_json(const json& j) {
  TrainConfig cfg;
  cfg.family = problems::family_from_name(j.at("family"));
  cfg.method = method_from_name(j.at("method"));
  cfg.hidden = j.at("hidden").get<std::vector<std::size_t>>();
  cfg.lr0 = j.at("lr0");
  cfg.patience = j.at("patience");
  cfg.max_epochs = j.at("max_epochs");
  cfg.warmup = j.at("warmup");
  cfg.batch_size = j.at("batch_size");
  cfg.seed = j.at("seed");
  cfg.correction_steps = j.at("correction_steps");
  cfg.correction_rate = j.at("correction_rate");
  cfg.penalty_rho = j.at("penalty_rho");
  return cfg;
}

void FeatureScaler::fit(const std::vector<Vec>& rows) {
  if (rows.empty()) throw std::invalid_argument("FeatureScaler: no rows");
  min = rows.front();
  max = rows.front();
  for (const Vec& r : rows) {
    if (r.size() != min.size()) {
      throw std::invalid_argument("FeatureScaler: ragged feature rows");
    }
    for (std::size_t i = 0; i < r.size(); ++i) {
      min[i] = std::min(min[i], r[i]);
      max[i] = std::max(max[i], r[i]);
    }
  }
}

Vec FeatureScaler::apply(const Vec& x) const {
  if (x.size() != min.size()) {
    throw std::invalid_argument("FeatureScaler: feature size mismatch");
  }
  Vec out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double span = max[i] - min[i];
    out[i] = span > 0.0 ? (x[i] - min[i]) / span : 0.0;
  }
  return out;
}

Vec knapsack_features(const KnapsackInstance& inst) {
  Vec f;
  f.reserve(inst.m + inst.n + inst.m * inst.n);
  f.insert(f.end(), inst.b.begin(), inst.b.end());
  f.insert(f.end(), inst.p.begin(), inst.p.end());
  f.insert(f.end(), inst.w.data().begin(), inst.w.data().end());
  return f;
}

Vec prodplan_features(const ProdPlanInstance& inst) {
  Vec f;
  f.reserve(3 * inst.n + 1);
  f.insert(f.end(), inst.d.begin(), inst.d.end());
  f.insert(f.end(), inst.f.begin(), inst.f.end());
  f.insert(f.end(), inst.r.begin(), inst.r.end());
  f.push_back(inst.b);
  return f;
}

namespace {

Vec record_features(Family family, const Record& rec) {
  if (family == Family::Knapsack) {
    return knapsack_features(std::get<KnapsackInstance>(rec.instance));
  }
  return prodplan_features(std::get<ProdPlanInstance>(rec.instance));
}

std::size_t model_output_dim(Family family, Method method, std::size_t m,
                             std::size_t n) {
  if (family == Family::Knapsack) {
    return method == Method::Dll ? m : m + n;
  }
  return method == Method::Dll ? 1 : 1 + n;
}

// ---------------------------------------------------------------- DC3 ---

struct Dc3KnapsackTrace {
  std::vector<Vec> y;   // iterates 0..K
  std::vector<Vec> zl;
};

void dc3_knapsack_phi_grad(const KnapsackInstance& inst, const Vec& y,
                           const Vec& zl, Vec& gy, Vec& gzl) {
  // phi = |max(0,y)|^2 + |min(0,zl)|^2 + |min(0,zu)|^2,
  // zu = p + W'y + zl.
  const Vec wty = inst.w.apply_transpose(y);
  Vec mu(inst.n);
  for (std::size_t j = 0; j < inst.n; ++j) {
    const double zu = inst.p[j] + wty[j] + zl[j];
    mu[j] = std::min(0.0, zu);
  }
  gy = inst.w.apply(mu);
  for (std::size_t i = 0; i < inst.m; ++i) {
    gy[i] = 2.0 * std::max(0.0, y[i]) + 2.0 * gy[i];
  }
  gzl.resize(inst.n);
  for (std::size_t j = 0; j < inst.n; ++j) {
    gzl[j] = 2.0 * std::min(0.0, zl[j]) + 2.0 * mu[j];
  }
}

double dc3_knapsack_phi(const KnapsackInstance& inst, const Vec& y,
                        const Vec& zl) {
  const Vec wty = inst.w.apply_transpose(y);
  double phi = 0.0;
  for (std::size_t i = 0; i < inst.m; ++i) {
    const double v = std::max(0.0, y[i]);
    phi += v * v;
  }
  for (std::size_t j = 0; j < inst.n; ++j) {
    const double l = std::min(0.0, zl[j]);
    const double zu = inst.p[j] + wty[j] + zl[j];
    const double u = std::min(0.0, zu);
    phi += l * l + u * u;
  }
  return phi;
}

Dc3KnapsackTrace dc3_knapsack_correct(const KnapsackInstance& inst,
                                      const TrainConfig& cfg, Vec y, Vec zl) {
  Dc3KnapsackTrace trace;
  trace.y.push_back(y);
  trace.zl.push_back(zl);
  Vec gy, gzl;
  for (int k = 0; k < cfg.correction_steps; ++k) {
    dc3_knapsack_phi_grad(inst, y, zl, gy, gzl);
    for (std::size_t i = 0; i < y.size(); ++i) y[i] -= cfg.correction_rate * gy[i];
    for (std::size_t j = 0; j < zl.size(); ++j)
      zl[j] -= cfg.correction_rate * gzl[j];
    trace.y.push_back(y);
    trace.zl.push_back(zl);
  }
  return trace;
}

// v <- (I - gamma * Hphi) v at the iterate (y, zl); Hphi is symmetric.
void dc3_knapsack_hvp_step(const KnapsackInstance& inst, double gamma,
                           const Vec& y, const Vec& zl, Vec& vy, Vec& vzl) {
  const Vec wty = inst.w.apply_transpose(y);
  const Vec wtvy = inst.w.apply_transpose(vy);
  Vec mixed(inst.n);  // Mu .* (W'vy + vzl)
  for (std::size_t j = 0; j < inst.n; ++j) {
    const double zu = inst.p[j] + wty[j] + zl[j];
    mixed[j] = (zu < 0.0) ? (wtvy[j] + vzl[j]) : 0.0;
  }
  const Vec wmixed = inst.w.apply(mixed);
  Vec hvy(inst.m), hvzl(inst.n);
  for (std::size_t i = 0; i < inst.m; ++i) {
    hvy[i] = 2.0 * ((y[i] > 0.0) ? vy[i] : 0.0) + 2.0 * wmixed[i];
  }
  for (std::size_t j = 0; j < inst.n; ++j) {
    hvzl[j] = 2.0 * ((zl[j] < 0.0) ? vzl[j] : 0.0) + 2.0 * mixed[j];
  }
  for (std::size_t i = 0; i < inst.m; ++i) vy[i] -= gamma * hvy[i];
  for (std::size_t j = 0; j < inst.n; ++j) vzl[j] -= gamma * hvzl[j];
}

struct Dc3ProdTrace {
  std::vector<double> y;
  std::vector<Vec> sigma;
};

void dc3_prod_phi_grad(const ProdPlanInstance& inst, double y,
                       const Vec& sigma, double& gy, Vec& gsigma) {
  gy = 2.0 * std::max(0.0, y);
  gsigma.assign(inst.n, 0.0);
  for (std::size_t j = 0; j < inst.n; ++j) {
    const double pi = inst.d[j] - inst.r[j] * y;
    const double tau = inst.f[j];
    gy += -2.0 * inst.r[j] * std::min(0.0, pi);
    const double u = sigma[j] * sigma[j] - 2.0 * pi * tau;
    const double v = std::max(0.0, u);
    gy += 4.0 * v * tau * inst.r[j];
    gsigma[j] = 4.0 * v * sigma[j];
  }
}

double dc3_prod_phi(const ProdPlanInstance& inst, double y, const Vec& sigma) {
  double phi = std::max(0.0, y) * std::max(0.0, y);
  for (std::size_t j = 0; j < inst.n; ++j) {
    const double pi = inst.d[j] - inst.r[j] * y;
    const double mp = std::min(0.0, pi);
    const double u = sigma[j] * sigma[j] - 2.0 * pi * inst.f[j];
    const double v = std::max(0.0, u);
    phi += mp * mp + v * v;
  }
  return phi;
}

Dc3ProdTrace dc3_prod_correct(const ProdPlanInstance& inst,
                              const TrainConfig& cfg, double y, Vec sigma) {
  Dc3ProdTrace trace;
  trace.y.push_back(y);
  trace.sigma.push_back(sigma);
  double gy;
  Vec gsigma;
  for (int k = 0; k < cfg.correction_steps; ++k) {
    dc3_prod_phi_grad(inst, y, sigma, gy, gsigma);
    y -= cfg.correction_rate * gy;
    for (std::size_t j = 0; j < sigma.size(); ++j)
      sigma[j] -= cfg.correction_rate * gsigma[j];
    trace.y.push_back(y);
    trace.sigma.push_back(sigma);
  }
  return trace;
}

void dc3_prod_hvp_step(const ProdPlanInstance& inst, double gamma, double y,
                       const Vec& sigma, double& vy, Vec& vsigma) {
  double hyy = 2.0 * ((y > 0.0) ? 1.0 : 0.0);
  double hv_y = 0.0;
  Vec hv_sigma(inst.n, 0.0);
  for (std::size_t j = 0; j < inst.n; ++j) {
    const double pi = inst.d[j] - inst.r[j] * y;
    const double tau = inst.f[j];
    if (pi < 0.0) hyy += 2.0 * inst.r[j] * inst.r[j];
    const double u = sigma[j] * sigma[j] - 2.0 * pi * tau;
    if (u > 0.0) {
      const double cross = 8.0 * tau * inst.r[j] * sigma[j];
      hyy += 8.0 * tau * tau * inst.r[j] * inst.r[j];
      hv_y += cross * vsigma[j];
      hv_sigma[j] += cross * vy;
      hv_sigma[j] += (8.0 * sigma[j] * sigma[j] + 4.0 * u) * vsigma[j];
    }
  }
  hv_y += hyy * vy;
  vy -= gamma * hv_y;
  for (std::size_t j = 0; j < inst.n; ++j)
    vsigma[j] -= gamma * hv_sigma[j];
}

// ------------------------------------------------------------- samples ---

struct SampleEval {
  double loss = 0.0;
  Vec output_cotangent;  // wrt the network output (post-activation)
};

SampleEval dll_sample(const TrainedModel& tm, const Record& rec,
                      const Vec& output, bool want_grad) {
  SampleEval out;
  if (tm.config.family == Family::Knapsack) {
    const auto& inst = std::get<KnapsackInstance>(rec.instance);
    out.loss = -completion::knapsack_bound(inst.p, inst.w, inst.b, output);
    if (want_grad) {
      out.output_cotangent = completion::knapsack_completion_vjp(
          inst.p, inst.w, inst.b, output, -1.0);
    }
  } else {
    const auto& inst = std::get<ProdPlanInstance>(rec.instance);
    const double y = output[0];
    out.loss = -completion::prodplan_bound(inst.d, inst.f, inst.r, inst.b, y);
    if (want_grad) {
      out.output_cotangent = {completion::prodplan_completion_vjp(
          inst.d, inst.f, inst.r, inst.b, y, -1.0)};
    }
  }
  return out;
}

SampleEval dc3_sample(const TrainedModel& tm, const Record& rec,
                      const Vec& output, bool want_grad) {
  SampleEval out;
  const TrainConfig& cfg = tm.config;
  const double rho = cfg.penalty_rho;
  if (cfg.family == Family::Knapsack) {
    const auto& inst = std::get<KnapsackInstance>(rec.instance);
    Vec y0(output.begin(), output.begin() + inst.m);
    Vec zl0(output.begin() + inst.m, output.end());
    const Dc3KnapsackTrace trace = dc3_knapsack_correct(inst, cfg, y0, zl0);
    const Vec& y = trace.y.back();
    const Vec& zl = trace.zl.back();
    const Vec wty = inst.w.apply_transpose(y);
    double obj = linalg::dot(inst.b, y);
    for (std::size_t j = 0; j < inst.n; ++j) {
      obj -= inst.p[j] + wty[j] + zl[j];  // -e'zu
    }
    out.loss = -obj + rho * dc3_knapsack_phi(inst, y, zl);
    if (want_grad) {
      // d loss / dy = -b + W e + rho grad_phi_y; d/dzl = e + rho grad_phi_zl
      Vec gy, gzl;
      dc3_knapsack_phi_grad(inst, y, zl, gy, gzl);
      Vec ones(inst.n, 1.0);
      const Vec we = inst.w.apply(ones);
      Vec vy(inst.m), vzl(inst.n);
      for (std::size_t i = 0; i < inst.m; ++i)
        vy[i] = -inst.b[i] + we[i] + rho * gy[i];
      for (std::size_t j = 0; j < inst.n; ++j) vzl[j] = 1.0 + rho * gzl[j];
      for (int k = cfg.correction_steps - 1; k >= 0; --k) {
        dc3_knapsack_hvp_step(inst, cfg.correction_rate, trace.y[k],
                              trace.zl[k], vy, vzl);
      }
      out.output_cotangent = vy;
      out.output_cotangent.insert(out.output_cotangent.end(), vzl.begin(),
                                  vzl.end());
    }
  } else {
    const auto& inst = std::get<ProdPlanInstance>(rec.instance);
    const double y0 = output[0];
    Vec sigma0(output.begin() + 1, output.end());
    const Dc3ProdTrace trace = dc3_prod_correct(inst, cfg, y0, sigma0);
    const double y = trace.y.back();
    const Vec& sigma = trace.sigma.back();
    double obj = inst.b * y;
    for (double s : sigma) obj -= std::sqrt(2.0) * s;
    out.loss = -obj + rho * dc3_prod_phi(inst, y, sigma);
    if (want_grad) {
      double gy;
      Vec gsigma;
      dc3_prod_phi_grad(inst, y, sigma, gy, gsigma);
      double vy = -inst.b + rho * gy;
      Vec vsigma(inst.n);
      for (std::size_t j = 0; j < inst.n; ++j)
        vsigma[j] = std::sqrt(2.0) + rho * gsigma[j];
      for (int k = cfg.correction_steps - 1; k >= 0; --k) {
        dc3_prod_hvp_step(inst, cfg.correction_rate, trace.y[k],
                          trace.sigma[k], vy, vsigma);
      }
      out.output_cotangent = {vy};
      out.output_cotangent.insert(out.output_cotangent.end(), vsigma.begin(),
                                  vsigma.end());
    }
  }
  return out;
}

SampleEval eval_sample(const TrainedModel& tm, const Record& rec,
                       const Vec& output, bool want_grad) {
  return tm.config.method == Method::Dll
             ? dll_sample(tm, rec, output, want_grad)
             : dc3_sample(tm, rec, output, want_grad);
}

void instance_dims(const problems::Dataset& ds, std::size_t& m,
                   std::size_t& n) {
  if (ds.records.empty()) {
    throw std::invalid_argument("dataset has no records");
  }
  if (ds.family == Family::Knapsack) {
    const auto& inst = std::get<KnapsackInstance>(ds.records[0].instance);
    m = inst.m;
    n = inst.n;
  } else {
    const auto& inst = std::get<ProdPlanInstance>(ds.records[0].instance);
    m = 0;
    n = inst.n;
  }
}

TrainResult train_impl(const problems::Dataset& ds, const TrainConfig& cfg) {
  ds.validate();
  std::vector<std::size_t> train_idx, val_idx;
  for (std::size_t i = 0; i < ds.records.size(); ++i) {
    if (ds.records[i].split == problems::Split::Train) train_idx.push_back(i);
    if (ds.records[i].split == problems::Split::Validation)
      val_idx.push_back(i);
  }
  if (train_idx.empty()) {
    throw std::invalid_argument("dataset is missing the train split");
  }
  if (val_idx.empty()) {
    throw std::invalid_argument("dataset is missing the validation split");
  }
  if (cfg.family != ds.family) {
    throw std::invalid_argument("config family does not match dataset");
  }

  std::size_t m = 0, n = 0;
  instance_dims(ds, m, n);

  TrainResult result;
  TrainedModel tm;
  tm.config = cfg;
  tm.m = m;
  tm.n = n;

  std::vector<Vec> features(ds.records.size());
  for (std::size_t i = 0; i < ds.records.size(); ++i) {
    features[i] = record_features(ds.family, ds.records[i]);
  }
  std::vector<Vec> train_rows;
  train_rows.reserve(train_idx.size());
  for (std::size_t i : train_idx) train_rows.push_back(features[i]);
  tm.scaler.fit(train_rows);
  for (Vec& f : features) f = tm.scaler.apply(f);

  const std::size_t out_dim = model_output_dim(ds.family, cfg.method, m, n);
  const neural::Activation out_act = cfg.method == Method::Dll
                                         ? neural::Activation::NegatedSoftplus
                                         : neural::Activation::Linear;
  tm.model = neural::make_mlp(features[0].size(), cfg.hidden, out_dim,
                              neural::Activation::Sigmoid, out_act, cfg.seed);

  neural::AdamState adam = neural::AdamState::zeros_like(tm.model);
  neural::LrSchedule sched;
  sched.lr = cfg.lr0;
  sched.patience = cfg.patience;
  sched.warmup = cfg.warmup;

  TrainedModel best = tm;
  const std::size_t batch =
      std::max<std::size_t>(1, std::min(cfg.batch_size, train_idx.size()));

  for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    // Deterministic per-epoch shuffle.
    auto shuffle_stream = rng::field_stream(cfg.seed, epoch, 0x73687566ULL);
    std::vector<std::size_t> order = train_idx;
    for (std::size_t i = order.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(
          shuffle_stream.uniform_int(0, static_cast<std::int64_t>(i) - 1));
      std::swap(order[i - 1], order[j]);
    }

    double epoch_loss = 0.0;
    std::size_t cursor = 0;
    std::size_t batch_index = 0;
    while (cursor < order.size()) {
      const std::size_t end = std::min(order.size(), cursor + batch);
      neural::Gradients grads = neural::Gradients::zeros_like(tm.model);
      double batch_loss = 0.0;
      for (std::size_t t = cursor; t < end; ++t) {
        const std::size_t i = order[t];
        neural::ForwardCache cache;
        const Vec output = neural::mlp_forward(tm.model, features[i], &cache);
        SampleEval se = eval_sample(tm, ds.records[i], output, true);
        if (!std::isfinite(se.loss)) {
          throw std::runtime_error(
              "training aborted: non-finite loss at epoch " +
              std::to_string(epoch) + ", batch " + std::to_string(batch_index) +
              ", instance " + std::to_string(ds.records[i].index));
        }
        batch_loss += se.loss;
        neural::mlp_backward(tm.model, cache, se.output_cotangent, grads);
      }
      const double inv = 1.0 / static_cast<double>(end - cursor);
      grads.scale_in_place(inv);
      neural::adam_step(tm.model, grads, adam, sched.lr);
      epoch_loss += batch_loss;
      cursor = end;
      ++batch_index;
    }
    epoch_loss /= static_cast<double>(order.size());

    double val_loss = 0.0;
    for (std::size_t i : val_idx) {
      const Vec output = neural::mlp_forward(tm.model, features[i], nullptr);
      val_loss += eval_sample(tm, ds.records[i], output, false).loss;
    }
    val_loss /= static_cast<double>(val_idx.size());
    if (!std::isfinite(val_loss)) {
      throw std::runtime_error("training aborted: non-finite validation loss "
                               "at epoch " + std::to_string(epoch));
    }

    const neural::ScheduleDecision dec =
        neural::schedule_update(sched, val_loss, epoch, cfg.max_epochs);
    if (dec.improved) best.model = tm.model;
    result.history.push_back({epoch, epoch_loss, val_loss, sched.lr});
    if (dec.stop) break;
  }

  best.scaler = tm.scaler;
  best.config = cfg;
  best.m = m;
  best.n = n;
  result.best = std::move(best);
  result.adam = std::move(adam);
  result.schedule = sched;
  return result;
}

Vec model_output_for(const TrainedModel& tm, const Record& rec) {
  const Vec raw = record_features(tm.config.family, rec);
  return neural::mlp_forward(tm.model, tm.scaler.apply(raw), nullptr);
}

}  // namespace

TrainResult dll_train(const problems::Dataset& ds, const TrainConfig& cfg) {
  if (cfg.method != Method::Dll) {
    throw std::invalid_argument("dll_train: config method must be dll");
  }
  return train_impl(ds, cfg);
}

TrainResult dc3_train(const problems::Dataset& ds, const TrainConfig& cfg) {
  if (cfg.method != Method::Dc3) {
    throw std::invalid_argument("dc3_train: config method must be dc3");
  }
  return train_impl(ds, cfg);
}

DualSolution dll_infer(const TrainedModel& tm, const Record& rec) {
  const Vec output = model_output_for(tm, rec);
  DualSolution sol;
  if (tm.config.family == Family::Knapsack) {
    const auto& inst = std::get<KnapsackInstance>(rec.instance);
    sol.y = output;
    const auto comp =
        completion::complete_knapsack(inst.p, inst.w, inst.b, sol.y);
    sol.z = comp.z_lower;
    sol.z.insert(sol.z.end(), comp.z_upper.begin(), comp.z_upper.end());
    sol.bound = comp.bound;
  } else {
    const auto& inst = std::get<ProdPlanInstance>(rec.instance);
    sol.y = {output[0]};
    const auto comp = completion::complete_prodplan(inst.d, inst.f, inst.r,
                                                    inst.b, output[0]);
    sol.z.reserve(3 * inst.n);
    for (std::size_t j = 0; j < inst.n; ++j) {
      sol.z.push_back(comp.pi[j]);
      sol.z.push_back(comp.tau[j]);
      sol.z.push_back(comp.sigma[j]);
    }
    sol.bound = comp.bound;
  }
  return sol;
}

Dc3Output dc3_forward_corrected(const TrainedModel& tm, const Record& rec) {
  const Vec output = model_output_for(tm, rec);
  Dc3Output out;
  if (tm.config.family == Family::Knapsack) {
    const auto& inst = std::get<KnapsackInstance>(rec.instance);
    Vec y0(output.begin(), output.begin() + inst.m);
    Vec zl0(output.begin() + inst.m, output.end());
    const auto trace = dc3_knapsack_correct(inst, tm.config, y0, zl0);
    out.y = trace.y.back();
    out.partial = trace.zl.back();
  } else {
    const auto& inst = std::get<ProdPlanInstance>(rec.instance);
    Vec sigma0(output.begin() + 1, output.end());
    const auto trace = dc3_prod_correct(inst, tm.config, output[0], sigma0);
    out.y = {trace.y.back()};
    out.partial = trace.sigma.back();
  }
  return out;
}

DualSolution dc3_infer(const TrainedModel& tm, const Record& rec) {
  const Dc3Output corrected = dc3_forward_corrected(tm, rec);
  DualSolution sol;
  if (tm.config.family == Family::Knapsack) {
    const auto& inst = std::get<KnapsackInstance>(rec.instance);
    sol.y = cones::project_nonpositive(corrected.y);
    const auto comp =
        completion::complete_knapsack(inst.p, inst.w, inst.b, sol.y);
    sol.z = comp.z_lower;
    sol.z.insert(sol.z.end(), comp.z_upper.begin(), comp.z_upper.end());
    sol.bound = comp.bound;
  } else {
    const auto& inst = std::get<ProdPlanInstance>(rec.instance);
    const double y = std::min(0.0, corrected.y[0]);
    sol.y = {y};
    const auto comp =
        completion::complete_prodplan(inst.d, inst.f, inst.r, inst.b, y);
    sol.z.reserve(3 * inst.n);
    for (std::size_t j = 0; j < inst.n; ++j) {
      sol.z.push_back(comp.pi[j]);
      sol.z.push_back(comp.tau[j]);
      sol.z.push_back(comp.sigma[j]);
    }
    sol.bound = comp.bound;
  }
  return sol;
}

double sample_loss_grad(const TrainedModel& tm, const Record& rec,
                        neural::Gradients* grads) {
  const Vec raw = record_features(tm.config.family, rec);
  neural::ForwardCache cache;
  const Vec output =
      neural::mlp_forward(tm.model, tm.scaler.apply(raw), &cache);
  SampleEval se = eval_sample(tm, rec, output, grads != nullptr);
  if (grads) neural::mlp_backward(tm.model, cache, se.output_cotangent, *grads);
  return se.loss;
}

EvalReport evaluate(const TrainedModel& tm, const problems::Dataset& ds,
                    int jobs) {
  if (tm.config.family != ds.family) {
    throw std::invalid_argument("evaluate: checkpoint family " +
                                problems::family_name(tm.config.family) +
                                " does not match dataset family " +
                                problems::family_name(ds.family));
  }
  std::size_t m = 0, n = 0;
  instance_dims(ds, m, n);
  if (m != tm.m || n != tm.n) {
    throw std::invalid_argument(
        "evaluate: checkpoint was trained for (m=" + std::to_string(tm.m) +
        ", n=" + std::to_string(tm.n) + ") but dataset has (m=" +
        std::to_string(m) + ", n=" + std::to_string(n) + ")");
  }
  const auto test = ds.split_view(problems::Split::Test);
  if (test.empty()) {
    throw std::invalid_argument("evaluate: dataset has no test split");
  }
  for (const Record* rec : test) {
    if (!rec->oracle) {
      throw std::invalid_argument(
          "evaluate: missing oracle value for instance " +
          std::to_string(rec->index));
    }
  }

  EvalReport rep;
  rep.family = ds.family;
  rep.method = tm.config.method;
  rep.m = m;
  rep.n = n;
  rep.rows.resize(test.size());

  std::vector<double> bounds(test.size());
  const auto t0 = std::chrono::steady_clock::now();
  auto run_range = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const DualSolution sol = tm.config.method == Method::Dll
                                   ? dll_infer(tm, *test[i])
                                   : dc3_infer(tm, *test[i]);
      bounds[i] = sol.bound;
    }
  };
  if (jobs <= 1) {
    run_range(0, test.size());
  } else {
    std::vector<std::thread> workers;
    const std::size_t chunk = (test.size() + jobs - 1) / jobs;
    for (int t = 0; t < jobs; ++t) {
      const std::size_t begin = t * chunk;
      const std::size_t end = std::min(test.size(), begin + chunk);
      if (begin >= end) break;
      workers.emplace_back(run_range, begin, end);
    }
    for (auto& th : workers) th.join();
  }
  const auto t1 = std::chrono::steady_clock::now();
  rep.infer_seconds = std::chrono::duration<double>(t1 - t0).count();

  double sum = 0.0, sum_sq = 0.0, opt_sum = 0.0;
  for (std::size_t i = 0; i < test.size(); ++i) {
    const double l_star = test[i]->oracle->value;
    const double gap_pct =
        100.0 * refsolve::optimality_gap(l_star, bounds[i]);
    rep.rows[i] = {test[i]->index, l_star, bounds[i], gap_pct};
    sum += gap_pct;
    sum_sq += gap_pct * gap_pct;
    opt_sum += l_star;
    rep.max_gap_pct = std::max(rep.max_gap_pct, gap_pct);
    if (bounds[i] > l_star + 1e-7 * (1.0 + std::abs(l_star))) {
      rep.weak_duality_violations += 1;
    }
  }
  const double count = static_cast<double>(test.size());
  rep.avg_gap_pct = sum / count;
  rep.std_gap_pct =
      std::sqrt(std::max(0.0, sum_sq / count - rep.avg_gap_pct * rep.avg_gap_pct));
  rep.opt_val_mean = opt_sum / count;
  return rep;
}

namespace {
std::string format_double(double v) {
  std::ostringstream ss;
  ss.precision(17);
  ss << v;
  return ss.str();
}
}  // namespace

std::string report_csv(const EvalReport& rep) {
  std::ostringstream ss;
  ss << "family,m,n,method,avg_gap_pct,std_gap_pct,max_gap_pct,opt_val_mean,"
        "infer_seconds\n";
  ss << problems::family_name(rep.family) << ',' << rep.m << ',' << rep.n
     << ',' << method_name(rep.method) << ',' << format_double(rep.avg_gap_pct)
     << ',' << format_double(rep.std_gap_pct) << ','
     << format_double(rep.max_gap_pct) << ','
     << format_double(rep.opt_val_mean) << ','
     << format_double(rep.infer_seconds) << '\n';
  return ss.str();
}

std::string report_rows_csv(const EvalReport& rep) {
  std::ostringstream ss;
  ss << "index,l_star,l_hat,gap_pct\n";
  for (const EvalRow& row : rep.rows) {
    ss << row.index << ',' << format_double(row.l_star) << ','
       << format_double(row.l_hat) << ',' << format_double(row.gap_pct)
       << '\n';
  }
  return ss.str();
}

json report_json(const EvalReport& rep) {
  json rows = json::array();
  for (const EvalRow& row : rep.rows) {
    rows.push_back({{"index", row.index},
                    {"l_star", row.l_star},
                    {"l_hat", row.l_hat},
                    {"gap_pct", row.gap_pct}});
  }
  return json{{"family", problems::family_name(rep.family)},
              {"method", method_name(rep.method)},
              {"m", rep.m},
              {"n", rep.n},
              {"avg_gap_pct", rep.avg_gap_pct},
              {"std_gap_pct", rep.std_gap_pct},
              {"max_gap_pct", rep.max_gap_pct},
              {"opt_val_mean", rep.opt_val_mean},
              {"infer_seconds", rep.infer_seconds},
              {"weak_duality_violations", rep.weak_duality_violations},
              {"rows", rows}};
}

void write_history_csv(const std::vector<EpochStats>& history,
                       const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << "epoch,train_loss,val_loss,lr\n";
  for (const EpochStats& e : history) {
    out << e.epoch << ',' << format_double(e.train_loss) << ','
        << format_double(e.val_loss) << ',' << format_double(e.lr) << '\n';
  }
}

void save_checkpoint(const TrainResult& result, const std::string& path) {
  json j;
  j["format"] = "dll-checkpoint-v1";
  j["model"] = neural::model_to_json(result.best.model);
  j["adam"] = neural::adam_to_json(result.adam);
  j["schedule"] = neural::schedule_to_json(result.schedule);
  j["scaler"] = {{"min", result.best.scaler.min},
                 {"max", result.best.scaler.max}};
  j["config"] = config_to_json(result.best.config);
  j["dims"] = {{"m", result.best.m}, {"n", result.best.n}};
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << j.dump(2) << '\n';
}

TrainedModel load_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open for reading: " + path);
  json j;
  in >> j;
  if (j.at("format") != "dll-checkpoint-v1") {
    throw std::invalid_argument("unsupported checkpoint format");
  }
  TrainedModel tm;
  tm.model = neural::model_from_json(j.at("model"));
  tm.scaler.min = j.at("scaler").at("min").get<Vec>();
  tm.scaler.max = j.at("scaler").at("max").get<Vec>();
  tm.config = config_from_json(j.at("config"));
  tm.m = j.at("dims").at("m");
  tm.n = j.at("dims").at("n");
  return tm;
}

}  // namespace dll::training
