#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

#include "dll/completion.hpp"
#include "dll/neural.hpp"
#include "dll/problems.hpp"

namespace dll::training {

using linalg::Vec;

enum class Method { Dll, Dc3 };

std::string method_name(Method m);
Method method_from_name(const std::string& name);

struct TrainConfig {
  problems::Family family = problems::Family::Knapsack;
  Method method = Method::Dll;
  std::vector<std::size_t> hidden;
  double lr0 = 1e-4;
  int patience = 32;
  int max_epochs = 512;
  int warmup = 0;
  // Mini-batch gradients are averaged. Small batches matter at desk scale:
  // Adam moves each weight by at most lr0 per step, so the step count
  // (epochs * train/batch) caps how far the output head can travel.
  std::size_t batch_size = 8;
  std::uint64_t seed = 0;
  // DC3
  int correction_steps = 10;
  double correction_rate = 1e-4;
  double penalty_rho = 10.0;
};

/// Protocol defaults per family: two hidden layers of 2(m+n) / patience 32 /
/// 1024 epochs for knapsack, max(128, 4n) / patience 128 / 4096 epochs for
/// production planning; DC3 correction rates 1e-4 / 1e-5.
TrainConfig default_config(problems::Family family, Method method,
                           std::size_t m, std::size_t n);

nlohmann::json config_to_json(const TrainConfig& cfg);
TrainConfig config_from_json(const nlohmann::json& j);

/// Min-max feature normalization fitted on the training split and stored in
/// the checkpoint.
struct FeatureScaler {
  Vec min;
  Vec max;
  void fit(const std::vector<Vec>& rows);
  Vec apply(const Vec& x) const;
};

Vec knapsack_features(const problems::KnapsackInstance& inst);
Vec prodplan_features(const problems::ProdPlanInstance& inst);

struct TrainedModel {
  neural::MlpModel model;
  FeatureScaler scaler;
  TrainConfig config;
  std::size_t m = 0;  // knapsack resources (0 for prodplan)
  std::size_t n = 0;  // items
};

/// Dual solution (y, z) with its Lagrangian bound. z layout: knapsack
/// concat(z_l, z_u); prodplan interleaved (pi_j, tau_j, sigma_j) blocks.
struct DualSolution {
  Vec y;
  Vec z;
  double bound = 0.0;
};

struct EpochStats {
  int epoch = 0;
  double train_loss = 0.0;
  double val_loss = 0.0;
  double lr = 0.0;
};

struct TrainResult {
  TrainedModel best;
  std::vector<EpochStats> history;
  neural::AdamState adam;
  neural::LrSchedule schedule;
};

TrainResult dll_train(const problems::Dataset& ds, const TrainConfig& cfg);
TrainResult dc3_train(const problems::Dataset& ds, const TrainConfig& cfg);

DualSolution dll_infer(const TrainedModel& tm, const problems::Record& rec);
/// DC3 inference runs the correction steps, then repairs the prediction
/// through the optimal completion (y projected to the nonpositive orthant)
/// so the reported bound is always valid.
DualSolution dc3_infer(const TrainedModel& tm, const problems::Record& rec);

/// Corrected network outputs before the test-time repair (for tests).
struct Dc3Output {
  Vec y;
  Vec partial;  // z_l (knapsack) or sigma (prodplan)
};
Dc3Output dc3_forward_corrected(const TrainedModel& tm,
                                const problems::Record& rec);

/// Per-sample training loss; when `grads` is non-null the parameter
/// gradients are accumulated through the full method-specific path.
double sample_loss_grad(const TrainedModel& tm, const problems::Record& rec,
                        neural::Gradients* grads);

struct EvalRow {
  std::size_t index = 0;
  double l_star = 0.0;
  double l_hat = 0.0;
  double gap_pct = 0.0;
};

struct EvalReport {
  problems::Family family = problems::Family::Knapsack;
  Method method = Method::Dll;
  std::size_t m = 0;
  std::size_t n = 0;
  std::vector<EvalRow> rows;
  double avg_gap_pct = 0.0;
  double std_gap_pct = 0.0;
  double max_gap_pct = 0.0;
  double opt_val_mean = 0.0;
  double infer_seconds = 0.0;
  int weak_duality_violations = 0;
};

/// Evaluates on the dataset's test split (oracle values required).
EvalReport evaluate(const TrainedModel& tm, const problems::Dataset& ds,
                    int jobs = 1);

std::string report_csv(const EvalReport& rep);        // aggregate row
std::string report_rows_csv(const EvalReport& rep);   // per-instance rows
nlohmann::json report_json(const EvalReport& rep);

void write_history_csv(const std::vector<EpochStats>& history,
                       const std::string& path);

// Versioned JSON checkpoint: model, Adam and schedule state, scaler, config.
void save_checkpoint(const TrainResult& result, const std::string& path);
TrainedModel load_checkpoint(const std::string& path);

}  // namespace dll::training
