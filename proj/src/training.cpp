#include "dcat/training.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "dcat/ops.hpp"

namespace dcat {

namespace {

Index argmax(const Tensor& probs) {
  Index best = 0;
  probs.data().maxCoeff(&best);
  return best;
}

// Distinct seed per evaluated sample; mc_forward then splits it per pass.
std::uint64_t sample_seed(std::uint64_t seed, std::size_t i) {
  return seed ^ (0x9E3779B97F4A7C15ULL * (static_cast<std::uint64_t>(i) + 1));
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

}  // namespace

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be positive");
  if (!(weight_decay >= 0.0)) throw ConfigError("weight_decay must be non-negative");
  if (batch_size < 1) throw ConfigError("batch_size must be at least 1");
  if (max_epochs < 1) throw ConfigError("max_epochs must be at least 1");
  if (!(dropout_rate >= 0.0 && dropout_rate < 1.0)) throw ConfigError("dropout_rate must lie in [0, 1)");
  if (mc_passes < 1) throw ConfigError("mc_passes must be at least 1");
  if (optimizer != "adam") throw ConfigError("unsupported optimizer '" + optimizer + "'");
  if (common_width < 1) throw ConfigError("common_width must be positive");
  if (input_size < 1) throw ConfigError("input_size must be positive");
}

template <typename S>
void AdamState<S>::reset(const std::vector<NamedParam<S>>& params) {
  m.clear();
  v.clear();
  for (const auto& p : params) {
    m.push_back(Array::Zero(p.tensor->size()));
    v.push_back(Array::Zero(p.tensor->size()));
  }
  t = 0;
}

template <typename S>
void adam_step(const std::vector<NamedParam<S>>& params, AdamState<S>& state, double lr,
               double weight_decay) {
  if (state.m.empty() && state.t == 0) state.reset(params);
  if (state.m.size() != params.size() || state.v.size() != params.size()) {
    throw ContractError("optimizer state holds " + std::to_string(state.m.size()) +
                        " tensors, model has " + std::to_string(params.size()));
  }
  ++state.t;
  const double c1 = 1.0 - std::pow(AdamState<S>::kBeta1, double(state.t));
  const double c2 = 1.0 - std::pow(AdamState<S>::kBeta2, double(state.t));
  const S decay = static_cast<S>(1.0 - lr * weight_decay);
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto& w = params[i].tensor->mutable_data();
    auto& m = state.m[i];
    auto& v = state.v[i];
    if (m.size() != w.size() || v.size() != w.size()) {
      throw ContractError("optimizer state for '" + params[i].name + "' has the wrong size");
    }
    const auto& g = params[i].tensor->grad();
    if (g.size() != 0 && g.size() != w.size()) {
      throw ContractError("gradient for '" + params[i].name + "' has the wrong size");
    }
    w *= decay;
    if (g.size() == 0) {
      m *= static_cast<S>(AdamState<S>::kBeta1);
      v *= static_cast<S>(AdamState<S>::kBeta2);
    } else {
      m = static_cast<S>(AdamState<S>::kBeta1) * m + static_cast<S>(1.0 - AdamState<S>::kBeta1) * g;
      v = static_cast<S>(AdamState<S>::kBeta2) * v +
          static_cast<S>(1.0 - AdamState<S>::kBeta2) * g.square();
    }
    const auto m_hat = m / static_cast<S>(c1);
    const auto v_hat = v / static_cast<S>(c2);
    w -= static_cast<S>(lr) * m_hat / (v_hat.sqrt() + static_cast<S>(AdamState<S>::kEpsilon));
  }
}

StepResult train_step(DcatModel<float>& model, std::span<const Sample* const> batch,
                      AdamState<float>& state, const TrainConfig& cfg, Rng& dropout_rng) {
  if (batch.empty()) throw ContractError("train_step needs a non-empty batch");
  auto params = model.parameters();
  for (auto& p : params) p.tensor->zero_grad();
  const bool stochastic = model.config().dropout_rate > 0.0;
  const float inv_batch = 1.0f / static_cast<float>(batch.size());
  StepResult out;
  for (const Sample* s : batch) {
    GradTape tape;
    const Tensor probs = model.forward(s->image, stochastic ? &dropout_rng : nullptr);
    const Tensor loss = cross_entropy(probs, s->label);
    out.loss += static_cast<double>(loss.item());
    if (argmax(probs) == s->label) ++out.correct;
    backward(scale(loss, inv_batch), tape);
  }
  out.loss /= static_cast<double>(batch.size());
  if (!std::isfinite(out.loss)) throw NumericError("loss is not finite");
  adam_step(params, state, cfg.learning_rate, cfg.weight_decay);
  for (const auto& p : params) {
    if (!p.tensor->data().isFinite().all()) {
      throw NumericError("parameter '" + p.name + "' became non-finite");
    }
  }
  return out;
}

double deterministic_accuracy(const DcatModel<float>& model, const Dataset& data) {
  if (data.samples.empty()) return 0.0;
  Index correct = 0;
  for (const auto& s : data.samples) {
    if (argmax(model.forward(s.image, nullptr)) == s.label) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(data.samples.size());
}

TrainResult train(DcatModel<float>& model, const SplitDataset& data, const TrainConfig& cfg,
                  const EpochCallback& on_epoch) {
  cfg.validate();
  data.train.validate();
  data.test.validate();
  if (data.train.num_classes() != model.config().num_classes) {
    throw ConfigError("dataset has " + std::to_string(data.train.num_classes()) +
                      " classes, model expects " + std::to_string(model.config().num_classes));
  }
  const Index size = model.config().input_size();
  if (data.train.samples.front().image.shape() != Shape{3, size, size}) {
    throw ConfigError("images have shape " + shape_string(data.train.samples.front().image.shape()) +
                      ", model expects " + shape_string({3, size, size}));
  }

  TrainResult result;
  AdamState<float> state;
  state.reset(model.parameters());
  std::vector<const Sample*> order;
  for (const auto& s : data.train.samples) order.push_back(&s);
  const Index n = static_cast<Index>(order.size());

  for (Index epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    const auto start = std::chrono::steady_clock::now();
    Rng rng = make_rng(cfg.seed, 0x10000 + static_cast<std::uint64_t>(epoch));
    std::shuffle(order.begin(), order.end(), rng);
    double loss_sum = 0.0;
    Index correct = 0;
    Index step = 0;
    for (Index b = 0; b < n; b += cfg.batch_size, ++step) {
      const Index len = std::min(cfg.batch_size, n - b);
      std::span<const Sample* const> batch(order.data() + b, static_cast<std::size_t>(len));
      StepResult r;
      try {
        r = train_step(model, batch, state, cfg, rng);
      } catch (const NumericError& e) {
        throw NumericError("training diverged at epoch " + std::to_string(epoch) + ", step " +
                           std::to_string(step) + ": " + e.what());
      }
      loss_sum += r.loss * static_cast<double>(len);
      correct += r.correct;
    }
    EpochLog row;
    row.epoch = epoch;
    row.loss = loss_sum / static_cast<double>(n);
    row.train_accuracy = static_cast<double>(correct) / static_cast<double>(n);
    row.test_accuracy = deterministic_accuracy(model, data.test);
    row.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    result.log.push_back(row);
    if (row.test_accuracy > result.best_test_accuracy) {
      result.best_test_accuracy = row.test_accuracy;
      result.best_epoch = epoch;
      result.best_parameters = model.export_parameters();
      result.best_optimizer = state;
    }
    if (on_epoch) on_epoch(row);
  }
  return result;
}

Evaluation evaluate(const DcatModel<float>& model, const Dataset& data, Index mc_passes,
                    std::uint64_t seed) {
  if (mc_passes < 1) throw ParameterError("MC pass count must be at least 1");
  data.validate();
  if (data.num_classes() != model.config().num_classes) {
    throw ConfigError("dataset has " + std::to_string(data.num_classes()) +
                      " classes, model expects " + std::to_string(model.config().num_classes));
  }
  Evaluation out;
  out.mc_passes = mc_passes;
  for (std::size_t i = 0; i < data.samples.size(); ++i) {
    const Sample& s = data.samples[i];
    const auto dist = mc_forward(model, s.image, mc_passes, sample_seed(seed, i));
    const Index pred = dist.predicted_label();
    out.scored.push_back({s.label, dist.posterior});
    out.predicted.push_back(pred);
    UncertaintyRecord rec;
    rec.sample_id = s.id;
    rec.posterior = dist.posterior;
    rec.entropy = dist.entropy;
    rec.predicted_label = pred;
    rec.true_label = s.label;
    out.records.push_back(std::move(rec));
  }
  return out;
}

std::vector<TensorRecord> checkpoint_records(const std::vector<TensorRecord>& parameters,
                                             const std::vector<NamedParam<float>>& layout,
                                             const AdamState<float>& optimizer,
                                             const std::string& config_json) {
  if (optimizer.m.size() != layout.size() || optimizer.v.size() != layout.size()) {
    throw ContractError("optimizer state does not match the parameter layout");
  }
  std::vector<TensorRecord> out = parameters;
  for (std::size_t i = 0; i < layout.size(); ++i) {
    const Shape& shape = layout[i].tensor->shape();
    out.push_back({"adam_m/" + layout[i].name, Tensor(shape, optimizer.m[i])});
    out.push_back({"adam_v/" + layout[i].name, Tensor(shape, optimizer.v[i])});
  }
  out.push_back({"adam_t", Tensor::scalar(static_cast<float>(optimizer.t))});
  out.push_back({"config.json", text_to_tensor(config_json)});
  return out;
}

std::string checkpoint_config(const std::vector<TensorRecord>& records) {
  for (const auto& r : records) {
    if (r.key == "config.json") return tensor_to_text(r.tensor);
  }
  throw FormatError("checkpoint has no config.json record");
}

void write_log_csv(const std::filesystem::path& path, const std::vector<EpochLog>& log) {
  std::string out = "epoch,loss,train_acc,test_acc,wall_ms\n";
  for (const auto& r : log) {
    out += std::to_string(r.epoch) + "," + format_double(r.loss) + "," +
           format_double(r.train_accuracy) + "," + format_double(r.test_accuracy) + "," +
           format_double(r.wall_ms) + "\n";
  }
  write_file_atomic(path, out);
}

template struct AdamState<float>;
template struct AdamState<double>;
template void adam_step(const std::vector<NamedParam<float>>&, AdamState<float>&, double, double);
template void adam_step(const std::vector<NamedParam<double>>&, AdamState<double>&, double, double);

}  // namespace dcat
