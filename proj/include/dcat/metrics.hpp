#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "dcat/tensor.hpp"

namespace dcat {

/// Value of a ratio metric. A zero denominator yields 0 with `degenerate` set.
struct MetricValue {
  double value = 0.0;
  bool degenerate = false;
};

using CountMatrix = Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic>;

/// Rows are true classes, columns predicted classes.
class ConfusionMatrix {
 public:
  explicit ConfusionMatrix(Index num_classes);
  explicit ConfusionMatrix(CountMatrix counts);
  static ConfusionMatrix from_labels(std::span<const Index> truth, std::span<const Index> predicted,
                                     Index num_classes);

  void add(Index truth, Index predicted);
  Index num_classes() const { return counts_.rows(); }
  std::int64_t total() const { return counts_.sum(); }
  const CountMatrix& counts() const { return counts_; }
  std::int64_t operator()(Index truth, Index predicted) const { return counts_(truth, predicted); }

 private:
  CountMatrix counts_;
};

struct BinaryCounts {
  std::int64_t tp = 0, fp = 0, fn = 0, tn = 0;
};

/// One-vs-rest counts for `cls`.
BinaryCounts binary_counts(const ConfusionMatrix& cm, Index cls);

double accuracy(const ConfusionMatrix& cm);
MetricValue precision(const ConfusionMatrix& cm, Index cls);
MetricValue recall(const ConfusionMatrix& cm, Index cls);
MetricValue specificity(const ConfusionMatrix& cm, Index cls);
MetricValue f1(const ConfusionMatrix& cm, Index cls);

/// Unweighted mean over classes; degenerate if any class was.
MetricValue macro_average(const ConfusionMatrix& cm, MetricValue (*metric)(const ConfusionMatrix&, Index));

/// Matthews correlation. Binary matrices use (TP TN - FP FN) over
/// sqrt((TP+FP)(TP+FN)(TN+FP)(TN+FN)); larger ones use the covariance
/// generalisation, which reduces to the same value for two classes.
MetricValue mcc(const ConfusionMatrix& cm);

/// (p0 - pe) / (1 - pe); 0 and degenerate when pe == 1.
MetricValue cohen_kappa(const ConfusionMatrix& cm);

struct ScoredSample {
  Index true_label = 0;
  Eigen::VectorXd scores;  // probability vector over classes
};

struct CurvePoint {
  double threshold = 0.0;
  double x = 0.0;  // ROC: false positive rate; PR: recall
  double y = 0.0;  // ROC: true positive rate; PR: precision
};

class UndefinedCurveError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// One-vs-rest threshold sweep over distinct scores, highest first. Samples
/// sharing a score enter together. Throws UndefinedCurveError unless `cls`
/// has both positive and negative samples.
std::vector<CurvePoint> roc_curve(std::span<const ScoredSample> samples, Index cls);
std::vector<CurvePoint> pr_curve(std::span<const ScoredSample> samples, Index cls);

/// Trapezoidal area under the ROC curve.
double auroc(std::span<const ScoredSample> samples, Index cls);
/// Step-interpolated PR area: sum over thresholds of (R_k - R_{k-1}) P_k.
double aupr(std::span<const ScoredSample> samples, Index cls);

/// Mean over classes whose curves are defined; nullopt when none are.
std::optional<double> macro_auroc(std::span<const ScoredSample> samples, Index num_classes);
std::optional<double> macro_aupr(std::span<const ScoredSample> samples, Index num_classes);

}  // namespace dcat
