#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "dcat/dataset.hpp"
#include "dcat/metrics.hpp"
#include "dcat/model.hpp"
#include "dcat/parameters.hpp"
#include "dcat/uncertainty.hpp"

namespace dcat {

struct TrainConfig {
  double learning_rate = 3e-4;
  double weight_decay = 1e-4;
  Index batch_size = 32;
  Index max_epochs = 200;
  double dropout_rate = 0.5;
  Index mc_passes = 100;
  std::uint64_t seed = 0;
  std::string optimizer = "adam";
  Index common_width = 128;
  Index input_size = 224;

  void validate() const;
};

template <typename S>
struct AdamState {
  using Array = typename BasicTensor<S>::Array;
  static constexpr double kBeta1 = 0.9;
  static constexpr double kBeta2 = 0.999;
  static constexpr double kEpsilon = 1e-8;

  std::vector<Array> m;
  std::vector<Array> v;
  std::int64_t t = 0;

  /// Zero moments sized to `params`.
  void reset(const std::vector<NamedParam<S>>& params);
};

/// One Adam update from the gradients currently held by `params`. Weight
/// decay is decoupled: p <- p (1 - lr wd) before the moment step. A
/// parameter without a gradient is treated as having a zero one.
template <typename S>
void adam_step(const std::vector<NamedParam<S>>& params, AdamState<S>& state, double lr,
               double weight_decay);

struct StepResult {
  double loss = 0.0;  // mean cross-entropy before the update
  Index correct = 0;
};

/// Forward/backward for every sample in `batch`, then one optimizer step.
/// Dropout masks come from `dropout_rng` when the model's rate is non-zero.
StepResult train_step(DcatModel<float>& model, std::span<const Sample* const> batch,
                      AdamState<float>& state, const TrainConfig& cfg, Rng& dropout_rng);

struct EpochLog {
  Index epoch = 0;
  double loss = 0.0;
  double train_accuracy = 0.0;
  double test_accuracy = 0.0;
  double wall_ms = 0.0;
};

struct TrainResult {
  std::vector<EpochLog> log;
  Index best_epoch = 0;
  double best_test_accuracy = -1.0;
  std::vector<TensorRecord> best_parameters;  // "param/..." records
  AdamState<float> best_optimizer;
};

using EpochCallback = std::function<void(const EpochLog&)>;

/// Mini-batch training over data.train with a fresh shuffle each epoch. After
/// every epoch the test split is scored without dropout; the parameters of
/// the first epoch reaching the highest test accuracy are retained.
TrainResult train(DcatModel<float>& model, const SplitDataset& data, const TrainConfig& cfg,
                  const EpochCallback& on_epoch = {});

/// Argmax accuracy without dropout.
double deterministic_accuracy(const DcatModel<float>& model, const Dataset& data);

struct Evaluation {
  std::vector<ScoredSample> scored;  // posterior per sample
  std::vector<Index> predicted;      // argmax of the posterior
  std::vector<UncertaintyRecord> records;
  Index mc_passes = 0;
};

/// MC-dropout inference over every sample; sample i uses seed stream i.
Evaluation evaluate(const DcatModel<float>& model, const Dataset& data, Index mc_passes,
                    std::uint64_t seed);

// Checkpoints are containers holding "param/<name>", "adam_m/<name>",
// "adam_v/<name>", "adam_t" and the run configuration under "config.json".
std::vector<TensorRecord> checkpoint_records(const std::vector<TensorRecord>& parameters,
                                             const std::vector<NamedParam<float>>& layout,
                                             const AdamState<float>& optimizer,
                                             const std::string& config_json);
std::string checkpoint_config(const std::vector<TensorRecord>& records);

void write_log_csv(const std::filesystem::path& path, const std::vector<EpochLog>& log);

}  // namespace dcat
