#include "dcat/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace dcat {

namespace {

MetricValue ratio(double num, double den) {
  if (den == 0.0) return {0.0, true};
  return {num / den, false};
}

void check_class(const ConfusionMatrix& cm, Index cls) {
  if (cls < 0 || cls >= cm.num_classes()) {
    throw std::out_of_range("class " + std::to_string(cls) + " outside confusion matrix");
  }
}

struct SweepStep {
  double threshold;
  std::int64_t tp;
  std::int64_t fp;
};

// Cumulative TP/FP after each distinct score, highest first.
std::vector<SweepStep> sweep(std::span<const ScoredSample> samples, Index cls, std::int64_t& pos,
                             std::int64_t& neg) {
  std::vector<std::pair<double, bool>> scored;
  scored.reserve(samples.size());
  pos = neg = 0;
  for (const auto& s : samples) {
    if (cls < 0 || cls >= s.scores.size()) throw std::out_of_range("class outside score vector");
    const bool positive = s.true_label == cls;
    scored.emplace_back(s.scores[cls], positive);
    positive ? ++pos : ++neg;
  }
  if (pos == 0 || neg == 0) {
    throw UndefinedCurveError("curve for class " + std::to_string(cls) +
                              " needs positive and negative samples");
  }
  std::sort(scored.begin(), scored.end(),
            [](const auto& a, const auto& b) { return a.first > b.first; });
  std::vector<SweepStep> steps;
  std::int64_t tp = 0, fp = 0;
  for (std::size_t i = 0; i < scored.size();) {
    const double t = scored[i].first;
    for (; i < scored.size() && scored[i].first == t; ++i) scored[i].second ? ++tp : ++fp;
    steps.push_back({t, tp, fp});
  }
  return steps;
}

template <typename Fn>
std::optional<double> macro_curve_metric(std::span<const ScoredSample> samples, Index num_classes,
                                         Fn fn) {
  double total = 0.0;
  Index defined = 0;
  for (Index c = 0; c < num_classes; ++c) {
    try {
      total += fn(samples, c);
      ++defined;
    } catch (const UndefinedCurveError&) {
    }
  }
  if (defined == 0) return std::nullopt;
  return total / static_cast<double>(defined);
}

}  // namespace

ConfusionMatrix::ConfusionMatrix(Index num_classes) {
  if (num_classes < 1) throw std::invalid_argument("confusion matrix needs at least one class");
  counts_ = CountMatrix::Zero(num_classes, num_classes);
}

ConfusionMatrix::ConfusionMatrix(CountMatrix counts) : counts_(std::move(counts)) {
  if (counts_.rows() != counts_.cols() || counts_.rows() < 1) {
    throw std::invalid_argument("confusion matrix must be square and non-empty");
  }
  if ((counts_.array() < 0).any()) throw std::invalid_argument("negative confusion count");
}

ConfusionMatrix ConfusionMatrix::from_labels(std::span<const Index> truth,
                                             std::span<const Index> predicted,
                                             Index num_classes) {
  if (truth.size() != predicted.size()) throw std::invalid_argument("label vectors differ in length");
  ConfusionMatrix cm(num_classes);
  for (std::size_t i = 0; i < truth.size(); ++i) cm.add(truth[i], predicted[i]);
  return cm;
}

void ConfusionMatrix::add(Index truth, Index predicted) {
  if (truth < 0 || truth >= num_classes() || predicted < 0 || predicted >= num_classes()) {
    throw std::out_of_range("label outside confusion matrix");
  }
  ++counts_(truth, predicted);
}

BinaryCounts binary_counts(const ConfusionMatrix& cm, Index cls) {
  check_class(cm, cls);
  const auto& m = cm.counts();
  BinaryCounts b;
  b.tp = m(cls, cls);
  b.fp = m.col(cls).sum() - b.tp;
  b.fn = m.row(cls).sum() - b.tp;
  b.tn = cm.total() - b.tp - b.fp - b.fn;
  return b;
}

double accuracy(const ConfusionMatrix& cm) {
  const auto n = cm.total();
  return n == 0 ? 0.0 : static_cast<double>(cm.counts().trace()) / static_cast<double>(n);
}

MetricValue precision(const ConfusionMatrix& cm, Index cls) {
  const auto b = binary_counts(cm, cls);
  return ratio(double(b.tp), double(b.tp + b.fp));
}

MetricValue recall(const ConfusionMatrix& cm, Index cls) {
  const auto b = binary_counts(cm, cls);
  return ratio(double(b.tp), double(b.tp + b.fn));
}

MetricValue specificity(const ConfusionMatrix& cm, Index cls) {
  const auto b = binary_counts(cm, cls);
  return ratio(double(b.tn), double(b.tn + b.fp));
}

MetricValue f1(const ConfusionMatrix& cm, Index cls) {
  const auto p = precision(cm, cls);
  const auto r = recall(cm, cls);
  auto out = ratio(2.0 * p.value * r.value, p.value + r.value);
  out.degenerate = out.degenerate || p.degenerate || r.degenerate;
  return out;
}

MetricValue macro_average(const ConfusionMatrix& cm,
                          MetricValue (*metric)(const ConfusionMatrix&, Index)) {
  MetricValue out;
  for (Index c = 0; c < cm.num_classes(); ++c) {
    const auto v = metric(cm, c);
    out.value += v.value;
    out.degenerate = out.degenerate || v.degenerate;
  }
  out.value /= static_cast<double>(cm.num_classes());
  return out;
}

MetricValue mcc(const ConfusionMatrix& cm) {
  if (cm.num_classes() == 2) {
    const auto b = binary_counts(cm, 1);
    const double den = double(b.tp + b.fp) * double(b.tp + b.fn) * double(b.tn + b.fp) *
                       double(b.tn + b.fn);
    return ratio(double(b.tp) * double(b.tn) - double(b.fp) * double(b.fn), std::sqrt(den));
  }
  const Eigen::MatrixXd m = cm.counts().cast<double>();
  const double s = m.sum();
  const double c = m.trace();
  const Eigen::VectorXd t = m.rowwise().sum();
  const Eigen::VectorXd p = m.colwise().sum().transpose();
  const double den = (s * s - p.squaredNorm()) * (s * s - t.squaredNorm());
  return ratio(c * s - p.dot(t), std::sqrt(den));
}

MetricValue cohen_kappa(const ConfusionMatrix& cm) {
  const double n = static_cast<double>(cm.total());
  if (n == 0.0) return {0.0, true};
  const Eigen::MatrixXd m = cm.counts().cast<double>();
  const double p0 = m.trace() / n;
  const double pe = m.rowwise().sum().dot(m.colwise().sum().transpose()) / (n * n);
  if (pe == 1.0) return {0.0, true};
  return {(p0 - pe) / (1.0 - pe), false};
}

std::vector<CurvePoint> roc_curve(std::span<const ScoredSample> samples, Index cls) {
  std::int64_t pos = 0, neg = 0;
  const auto steps = sweep(samples, cls, pos, neg);
  std::vector<CurvePoint> out;
  out.push_back({std::numeric_limits<double>::infinity(), 0.0, 0.0});
  for (const auto& s : steps) {
    out.push_back({s.threshold, double(s.fp) / double(neg), double(s.tp) / double(pos)});
  }
  return out;
}

std::vector<CurvePoint> pr_curve(std::span<const ScoredSample> samples, Index cls) {
  std::int64_t pos = 0, neg = 0;
  const auto steps = sweep(samples, cls, pos, neg);
  std::vector<CurvePoint> out;
  out.push_back({std::numeric_limits<double>::infinity(), 0.0, 1.0});
  for (const auto& s : steps) {
    out.push_back({s.threshold, double(s.tp) / double(pos), double(s.tp) / double(s.tp + s.fp)});
  }
  return out;
}

double auroc(std::span<const ScoredSample> samples, Index cls) {
  const auto pts = roc_curve(samples, cls);
  double area = 0.0;
  for (std::size_t i = 1; i < pts.size(); ++i) {
    area += (pts[i].x - pts[i - 1].x) * 0.5 * (pts[i].y + pts[i - 1].y);
  }
  return area;
}

double aupr(std::span<const ScoredSample> samples, Index cls) {
  const auto pts = pr_curve(samples, cls);
  double area = 0.0;
  for (std::size_t i = 1; i < pts.size(); ++i) area += (pts[i].x - pts[i - 1].x) * pts[i].y;
  return area;
}

std::optional<double> macro_auroc(std::span<const ScoredSample> samples, Index num_classes) {
  return macro_curve_metric(samples, num_classes, auroc);
}

std::optional<double> macro_aupr(std::span<const ScoredSample> samples, Index num_classes) {
  return macro_curve_metric(samples, num_classes, aupr);
}

}  // namespace dcat
