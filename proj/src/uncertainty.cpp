#include "dcat/uncertainty.hpp"

#include <algorithm>
#include <cmath>

namespace dcat {

Index PredictiveDistribution::predicted_label() const {
  Index best = 0;
  posterior.maxCoeff(&best);
  return best;
}

PredictiveDistribution mc_forward(const StochasticPass& pass, Index passes, std::uint64_t seed) {
  if (passes < 1) throw ParameterError("MC pass count must be at least 1");
  PredictiveDistribution out;
  for (Index m = 0; m < passes; ++m) {
    Rng rng = make_rng(seed, static_cast<std::uint64_t>(m));
    Eigen::VectorXd p = pass(rng);
    if (m == 0) out.passes.resize(passes, p.size());
    if (p.size() != out.passes.cols()) throw DimensionError("MC pass produced a different class count");
    out.passes.row(m) = p.transpose();
  }
  out.posterior = out.passes.colwise().mean().transpose();
  out.entropy = predictive_entropy(out.posterior);
  return out;
}

template <typename S>
PredictiveDistribution mc_forward_pooled(const DcatModel<S>& model, const BasicTensor<S>& pooled,
                                         Index passes, std::uint64_t seed) {
  return mc_forward(
      [&](Rng& rng) -> Eigen::VectorXd {
        return model.head(pooled, &rng).data().template cast<double>().matrix();
      },
      passes, seed);
}

template <typename S>
PredictiveDistribution mc_forward(const DcatModel<S>& model, const BasicTensor<S>& image,
                                  Index passes, std::uint64_t seed) {
  if (passes < 1) throw ParameterError("MC pass count must be at least 1");
  return mc_forward_pooled(model, model.features(image), passes, seed);
}

double predictive_entropy(const Eigen::Ref<const Eigen::VectorXd>& p) {
  if (p.size() == 0) throw InputError("entropy of an empty distribution");
  double total = 0.0;
  for (Index i = 0; i < p.size(); ++i) {
    if (!(p[i] >= 0.0)) throw InputError("probability vector has a negative or NaN entry");
    total += p[i];
  }
  if (std::abs(total - 1.0) > 1e-4) {
    throw InputError("probability vector sums to " + std::to_string(total));
  }
  double h = 0.0;
  for (Index i = 0; i < p.size(); ++i) {
    if (p[i] > 0.0) h -= p[i] * std::log(p[i]);
  }
  return std::max(h, 0.0);
}

FlagResult flag_high_uncertainty(std::vector<UncertaintyRecord>& records, double threshold) {
  if (!(threshold >= 0.0)) throw ParameterError("threshold must be non-negative");
  FlagResult out;
  if (records.empty()) return out;
  double sum = 0.0;
  for (auto& r : records) {
    r.flagged = r.entropy > threshold;
    sum += r.entropy;
    if (r.flagged) out.flagged.push_back(r);
    if (r.true_label && *r.true_label != r.predicted_label) ++out.summary.misclassified_count;
  }
  const double n = static_cast<double>(records.size());
  out.summary.mean_entropy = sum / n;
  double sq = 0.0;
  for (const auto& r : records) sq += (r.entropy - out.summary.mean_entropy) * (r.entropy - out.summary.mean_entropy);
  out.summary.std_entropy = std::sqrt(sq / n);
  out.summary.hus_count = static_cast<Index>(out.flagged.size());
  std::stable_sort(out.flagged.begin(), out.flagged.end(),
                   [](const auto& a, const auto& b) { return a.entropy > b.entropy; });
  return out;
}

template PredictiveDistribution mc_forward(const DcatModel<float>&, const BasicTensor<float>&,
                                           Index, std::uint64_t);
template PredictiveDistribution mc_forward(const DcatModel<double>&, const BasicTensor<double>&,
                                           Index, std::uint64_t);
template PredictiveDistribution mc_forward_pooled(const DcatModel<float>&,
                                                  const BasicTensor<float>&, Index, std::uint64_t);
template PredictiveDistribution mc_forward_pooled(const DcatModel<double>&,
                                                  const BasicTensor<double>&, Index,
                                                  std::uint64_t);

}  // namespace dcat
