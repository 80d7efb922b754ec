#include "dll/neural.hpp"

#include <cmath>
#include <stdexcept>

#include "dll/rng.hpp"

namespace dll::neural {

using nlohmann::json;

std::string activation_name(Activation a) {
  switch (a) {
    case Activation::Sigmoid: return "sigmoid";
    case Activation::Softplus: return "softplus";
    case Activation::NegatedSoftplus: return "negated_softplus";
    case Activation::Linear: return "linear";
    case Activation::Relu: return "relu";
  }
  return "?";
}

Activation activation_from_name(const std::string& name) {
  if (name == "sigmoid") return Activation::Sigmoid;
  if (name == "softplus") return Activation::Softplus;
  if (name == "negated_softplus") return Activation::NegatedSoftplus;
  if (name == "linear") return Activation::Linear;
  if (name == "relu") return Activation::Relu;
  throw std::invalid_argument("unknown activation: " + name);
}

namespace {
double stable_sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double stable_softplus(double z) {
  return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z)));
}
}  // namespace

double activate(Activation a, double z) {
  switch (a) {
    case Activation::Sigmoid: return stable_sigmoid(z);
    case Activation::Softplus: return stable_softplus(z);
    case Activation::NegatedSoftplus: return -stable_softplus(z);
    case Activation::Linear: return z;
    case Activation::Relu: return std::max(0.0, z);
  }
  return z;
}

double activate_derivative(Activation a, double z) {
  switch (a) {
    case Activation::Sigmoid: {
      const double s = stable_sigmoid(z);
      return s * (1.0 - s);
    }
    case Activation::Softplus: return stable_sigmoid(z);
    case Activation::NegatedSoftplus: return -stable_sigmoid(z);
    case Activation::Linear: return 1.0;
    case Activation::Relu: return z > 0.0 ? 1.0 : 0.0;
  }
  return 1.0;
}

std::size_t MlpModel::parameter_count() const {
  std::size_t total = 0;
  for (const Layer& l : layers) {
    total += l.weights.rows() * l.weights.cols() + l.bias.size();
  }
  return total;
}

MlpModel make_mlp(std::size_t input_dim, const std::vector<std::size_t>& hidden,
                  std::size_t output_dim, Activation hidden_activation,
                  Activation output_activation, std::uint64_t seed) {
  if (input_dim == 0 || output_dim == 0) {
    throw std::invalid_argument("make_mlp: zero layer size");
  }
  std::vector<std::size_t> dims;
  dims.push_back(input_dim);
  for (std::size_t h : hidden) {
    if (h == 0) throw std::invalid_argument("make_mlp: zero hidden size");
    dims.push_back(h);
  }
  dims.push_back(output_dim);

  MlpModel model;
  for (std::size_t li = 0; li + 1 < dims.size(); ++li) {
    Layer layer;
    const std::size_t fan_in = dims[li];
    const std::size_t fan_out = dims[li + 1];
    layer.weights = Matrix(fan_out, fan_in);
    layer.bias.assign(fan_out, 0.0);
    layer.activation =
        (li + 2 == dims.size()) ? output_activation : hidden_activation;
    const double limit =
        std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    auto stream = rng::field_stream(seed, li, 0x6d6c70ULL);
    for (double& w : layer.weights.data()) {
      w = stream.uniform(-limit, limit);
    }
    model.layers.push_back(std::move(layer));
  }
  return model;
}

Vec mlp_forward(const MlpModel& model, const Vec& x, ForwardCache* cache) {
  if (model.layers.empty()) throw std::invalid_argument("empty model");
  if (x.size() != model.input_dim()) {
    throw std::invalid_argument("mlp_forward: input size " +
                                std::to_string(x.size()) + " != model input " +
                                std::to_string(model.input_dim()));
  }
  if (cache) {
    cache->input = x;
    cache->pre_activations.clear();
    cache->activations.clear();
  }
  Vec a = x;
  for (const Layer& layer : model.layers) {
    Vec z = layer.weights.apply(a);
    for (std::size_t i = 0; i < z.size(); ++i) z[i] += layer.bias[i];
    Vec out(z.size());
    for (std::size_t i = 0; i < z.size(); ++i)
      out[i] = activate(layer.activation, z[i]);
    if (cache) {
      cache->pre_activations.push_back(std::move(z));
      cache->activations.push_back(out);
    }
    a = std::move(out);
  }
  return a;
}

Gradients Gradients::zeros_like(const MlpModel& model) {
  Gradients g;
  for (const Layer& l : model.layers) {
    g.weights.emplace_back(l.weights.rows(), l.weights.cols());
    g.bias.emplace_back(l.bias.size(), 0.0);
  }
  return g;
}

void Gradients::scale_in_place(double s) {
  for (Matrix& w : weights)
    for (double& v : w.data()) v *= s;
  for (Vec& b : bias)
    for (double& v : b) v *= s;
}

Vec mlp_backward(const MlpModel& model, const ForwardCache& cache,
                 const Vec& output_cotangent, Gradients& grads) {
  const std::size_t num_layers = model.layers.size();
  if (cache.pre_activations.size() != num_layers ||
      cache.activations.size() != num_layers ||
      cache.input.size() != model.input_dim()) {
    throw std::invalid_argument(
        "mlp_backward: cache does not match this model (stale cache?)");
  }
  if (grads.weights.size() != num_layers) {
    throw std::invalid_argument("mlp_backward: gradient shape mismatch");
  }
  if (output_cotangent.size() != model.output_dim()) {
    throw std::invalid_argument("mlp_backward: cotangent size mismatch");
  }
  for (std::size_t li = 0; li < num_layers; ++li) {
    if (cache.pre_activations[li].size() != model.layers[li].bias.size()) {
      throw std::invalid_argument(
          "mlp_backward: cache does not match this model (stale cache?)");
    }
  }

  Vec da = output_cotangent;
  for (std::size_t li = num_layers; li-- > 0;) {
    const Layer& layer = model.layers[li];
    const Vec& z = cache.pre_activations[li];
    const Vec& prev =
        (li == 0) ? cache.input : cache.activations[li - 1];

    Vec dz(z.size());
    for (std::size_t i = 0; i < z.size(); ++i)
      dz[i] = da[i] * activate_derivative(layer.activation, z[i]);

    Matrix& gw = grads.weights[li];
    Vec& gb = grads.bias[li];
    for (std::size_t i = 0; i < dz.size(); ++i) {
      gb[i] += dz[i];
      for (std::size_t j = 0; j < prev.size(); ++j)
        gw(i, j) += dz[i] * prev[j];
    }
    da = layer.weights.apply_transpose(dz);
  }
  return da;
}

AdamState AdamState::zeros_like(const MlpModel& model) {
  AdamState s;
  for (const Layer& l : model.layers) {
    s.m_w.emplace_back(l.weights.rows(), l.weights.cols());
    s.v_w.emplace_back(l.weights.rows(), l.weights.cols());
    s.m_b.emplace_back(l.bias.size(), 0.0);
    s.v_b.emplace_back(l.bias.size(), 0.0);
  }
  return s;
}

namespace {
void adam_update(std::vector<double>& params, const std::vector<double>& g,
                 std::vector<double>& m, std::vector<double>& v,
                 const AdamState& s, double lr, double bc1, double bc2) {
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (!std::isfinite(g[i])) {
      throw std::runtime_error("adam_step: non-finite gradient");
    }
    m[i] = s.beta1 * m[i] + (1.0 - s.beta1) * g[i];
    v[i] = s.beta2 * v[i] + (1.0 - s.beta2) * g[i] * g[i];
    const double mhat = m[i] / bc1;
    const double vhat = v[i] / bc2;
    params[i] -= lr * mhat / (std::sqrt(vhat) + s.epsilon);
  }
}
}  // namespace

void adam_step(MlpModel& model, const Gradients& grads, AdamState& state,
               double lr) {
  if (grads.weights.size() != model.layers.size() ||
      state.m_w.size() != model.layers.size()) {
    throw std::invalid_argument("adam_step: shape mismatch");
  }
  state.step += 1;
  const double bc1 = 1.0 - std::pow(state.beta1, state.step);
  const double bc2 = 1.0 - std::pow(state.beta2, state.step);
  for (std::size_t li = 0; li < model.layers.size(); ++li) {
    adam_update(model.layers[li].weights.data(), grads.weights[li].data(),
                state.m_w[li].data(), state.v_w[li].data(), state, lr, bc1,
                bc2);
    adam_update(model.layers[li].bias, grads.bias[li], state.m_b[li],
                state.v_b[li], state, lr, bc1, bc2);
  }
}

ScheduleDecision schedule_update(LrSchedule& sched, double validation_loss,
                                 int epoch, int max_epochs) {
  ScheduleDecision out;
  const double margin =
      sched.has_best ? 1e-8 * std::max(1e-12, std::abs(sched.best_loss)) : 0.0;
  if (!sched.has_best || validation_loss < sched.best_loss - margin) {
    sched.best_loss = validation_loss;
    sched.has_best = true;
    sched.since_improvement = 0;
    out.improved = true;
  } else if (epoch > sched.warmup) {
    sched.since_improvement += 1;
    if (sched.since_improvement >= sched.patience) {
      sched.lr /= sched.factor;
      sched.since_improvement = 0;
      out.reduced = true;
      if (sched.lr < sched.lr_min) {
        out.stop = true;
        sched.lr = sched.lr_min;
      }
    }
  }
  if (epoch >= max_epochs) out.stop = true;
  return out;
}

json model_to_json(const MlpModel& model) {
  json layers = json::array();
  for (const Layer& l : model.layers) {
    layers.push_back({{"in", l.weights.cols()},
                      {"out", l.weights.rows()},
                      {"activation", activation_name(l.activation)},
                      {"weights", l.weights.data()},
                      {"bias", l.bias}});
  }
  return json{{"layers", layers}};
}

MlpModel model_from_json(const json& j) {
  MlpModel model;
  for (const json& lj : j.at("layers")) {
    Layer l;
    const std::size_t in = lj.at("in");
    const std::size_t out = lj.at("out");
    l.weights = Matrix(out, in);
    const std::vector<double> w = lj.at("weights").get<std::vector<double>>();
    if (w.size() != in * out) {
      throw std::invalid_argument("checkpoint layer weight size mismatch");
    }
    l.weights.data() = w;
    l.bias = lj.at("bias").get<Vec>();
    if (l.bias.size() != out) {
      throw std::invalid_argument("checkpoint layer bias size mismatch");
    }
    l.activation = activation_from_name(lj.at("activation"));
    model.layers.push_back(std::move(l));
  }
  return model;
}

json adam_to_json(const AdamState& s) {
  json j;
  j["step"] = s.step;
  j["beta1"] = s.beta1;
  j["beta2"] = s.beta2;
  j["epsilon"] = s.epsilon;
  json mw = json::array(), vw = json::array(), mb = json::array(),
       vb = json::array();
  for (const Matrix& m : s.m_w) mw.push_back(m.data());
  for (const Matrix& m : s.v_w) vw.push_back(m.data());
  for (const Vec& v : s.m_b) mb.push_back(v);
  for (const Vec& v : s.v_b) vb.push_back(v);
  j["m_w"] = mw;
  j["v_w"] = vw;
  j["m_b"] = mb;
  j["v_b"] = vb;
  return j;
}

AdamState adam_from_json(const json& j) {
  AdamState s;
  s.step = j.at("step");
  s.beta1 = j.at("beta1");
  s.beta2 = j.at("beta2");
  s.epsilon = j.at("epsilon");
  const auto mb = j.at("m_b").get<std::vector<Vec>>();
  const auto vb = j.at("v_b").get<std::vector<Vec>>();
  const auto mw = j.at("m_w").get<std::vector<std::vector<double>>>();
  const auto vw = j.at("v_w").get<std::vector<std::vector<double>>>();
  for (std::size_t i = 0; i < mb.size(); ++i) {
    const std::size_t out = mb[i].size();
    const std::size_t in = out == 0 ? 0 : mw[i].size() / out;
    Matrix m(out, in), v(out, in);
    m.data() = mw[i];
    v.data() = vw[i];
    s.m_w.push_back(std::move(m));
    s.v_w.push_back(std::move(v));
    s.m_b.push_back(mb[i]);
    s.v_b.push_back(vb[i]);
  }
  return s;
}

json schedule_to_json(const LrSchedule& s) {
  return json{{"lr", s.lr},
              {"lr_min", s.lr_min},
              {"factor", s.factor},
              {"patience", s.patience},
              {"warmup", s.warmup},
              {"best_loss", s.best_loss},
              {"has_best", s.has_best},
              {"since_improvement", s.since_improvement}};
}

LrSchedule schedule_from_json(const json& j) {
  LrSchedule s;
  s.lr = j.at("lr");
  s.lr_min = j.at("lr_min");
  s.factor = j.at("factor");
  s.patience = j.at("patience");
  s.warmup = j.at("warmup");
  s.best_loss = j.at("best_loss");
  s.has_best = j.at("has_best");
  s.since_improvement = j.at("since_improvement");
  return s;
}

}  // namespace dll::neural
