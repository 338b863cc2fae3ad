#pragma once

#include <Eigen/Core>

#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "dcat/model.hpp"
#include "dcat/random.hpp"

namespace dcat {

struct PredictiveDistribution {
  Eigen::MatrixXd passes;     // M x N_cl, one softmax output per row
  Eigen::VectorXd posterior;  // column mean of passes
  double entropy = 0.0;       // nats

  Index num_passes() const { return passes.rows(); }
  Index predicted_label() const;
};

/// One stochastic softmax output; the engine is the pass's private stream.
using StochasticPass = std::function<Eigen::VectorXd(Rng&)>;

/// Runs M passes, pass m drawing from make_rng(seed, m).
PredictiveDistribution mc_forward(const StochasticPass& pass, Index passes, std::uint64_t seed);

/// MC-dropout over a model. Only the head is stochastic, so the trunk runs
/// once and the M passes re-sample the dropout mask on the pooled features.
template <typename S>
PredictiveDistribution mc_forward(const DcatModel<S>& model, const BasicTensor<S>& image,
                                  Index passes, std::uint64_t seed);
template <typename S>
PredictiveDistribution mc_forward_pooled(const DcatModel<S>& model, const BasicTensor<S>& pooled,
                                         Index passes, std::uint64_t seed);

/// -sum p ln p with 0 ln 0 = 0. Throws InputError for negative entries or a
/// total further than 1e-4 from one.
double predictive_entropy(const Eigen::Ref<const Eigen::VectorXd>& p);

struct UncertaintyRecord {
  std::string sample_id;
  Eigen::VectorXd posterior;
  double entropy = 0.0;
  Index predicted_label = 0;
  std::optional<Index> true_label;
  bool flagged = false;

  double max_prob() const { return posterior.size() ? posterior.maxCoeff() : 0.0; }
};

struct UncertaintySummary {
  double mean_entropy = 0.0;
  double std_entropy = 0.0;  // population standard deviation
  Index hus_count = 0;
  Index misclassified_count = 0;
};

struct FlagResult {
  std::vector<UncertaintyRecord> flagged;  // descending entropy
  UncertaintySummary summary;
};

/// Marks records with entropy > threshold. Sets `flagged` on the input records.
FlagResult flag_high_uncertainty(std::vector<UncertaintyRecord>& records, double threshold);

/// Half the maximum entropy for the class count.
inline double default_hus_threshold(Index num_classes) {
  return 0.5 * std::log(static_cast<double>(num_classes));
}

}  // namespace dcat
