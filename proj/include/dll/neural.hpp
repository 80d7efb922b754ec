#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

#include "dll/linalg.hpp"

namespace dll::neural {

using linalg::Matrix;
using linalg::Vec;

enum class Activation { Sigmoid, Softplus, NegatedSoftplus, Linear, Relu };

std::string activation_name(Activation a);
Activation activation_from_name(const std::string& name);
double activate(Activation a, double z);
double activate_derivative(Activation a, double z);

struct Layer {
  Matrix weights;  // out x in
  Vec bias;        // out
  Activation activation = Activation::Linear;
};

struct MlpModel {
  std::vector<Layer> layers;
  std::size_t input_dim() const {
    return layers.empty() ? 0 : layers.front().weights.cols();
  }
  std::size_t output_dim() const {
    return layers.empty() ? 0 : layers.back().weights.rows();
  }
  std::size_t parameter_count() const;
};

/// Fully-connected net with Glorot-uniform weights, zero biases, seeded.
MlpModel make_mlp(std::size_t input_dim, const std::vector<std::size_t>& hidden,
                  std::size_t output_dim, Activation hidden_activation,
                  Activation output_activation, std::uint64_t seed);

struct ForwardCache {
  Vec input;
  std::vector<Vec> pre_activations;
  std::vector<Vec> activations;
};

Vec mlp_forward(const MlpModel& model, const Vec& x,
                ForwardCache* cache = nullptr);

struct Gradients {
  std::vector<Matrix> weights;
  std::vector<Vec> bias;
  static Gradients zeros_like(const MlpModel& model);
  void scale_in_place(double s);
};

/// Backpropagation through a cached forward pass. `output_cotangent` is
/// dLoss/d(output), i.e. with respect to post-activation outputs. Returns
/// dLoss/d(input) and accumulates parameter gradients into `grads`.
Vec mlp_backward(const MlpModel& model, const ForwardCache& cache,
                 const Vec& output_cotangent, Gradients& grads);

struct AdamState {
  std::vector<Matrix> m_w, v_w;
  std::vector<Vec> m_b, v_b;
  long step = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  static AdamState zeros_like(const MlpModel& model);
};

/// One Adam update with bias correction. Throws on non-finite gradients.
void adam_step(MlpModel& model, const Gradients& grads, AdamState& state,
               double lr);

/// Patience schedule: halve the learning rate after `patience` consecutive
/// non-improving validation epochs (patience is inactive during warmup);
/// stop once the rate would drop below lr_min or max_epochs is reached.
struct LrSchedule {
  double lr = 1e-4;
  double lr_min = 1e-7;
  double factor = 2.0;
  int patience = 32;
  int warmup = 0;
  double best_loss = 0.0;
  bool has_best = false;
  int since_improvement = 0;
};

struct ScheduleDecision {
  bool improved = false;
  bool reduced = false;
  bool stop = false;
};

ScheduleDecision schedule_update(LrSchedule& sched, double validation_loss,
                                 int epoch, int max_epochs);

// Checkpoint pieces (format handled by the training-level checkpoint).
nlohmann::json model_to_json(const MlpModel& model);
MlpModel model_from_json(const nlohmann::json& j);
nlohmann::json adam_to_json(const AdamState& s);
AdamState adam_from_json(const nlohmann::json& j);
nlohmann::json schedule_to_json(const LrSchedule& s);
LrSchedule schedule_from_json(const nlohmann::json& j);

}  // namespace dll::neural
