#include "oracles.hpp"

#include <algorithm>
#include <cmath>

namespace dcat::testing {

namespace {

double safe_div(double num, double den) { return den == 0.0 ? 0.0 : num / den; }

double count_if(const LabelSet& s, auto pred) {
  double n = 0;
  for (std::size_t i = 0; i < s.truth.size(); ++i) {
    if (pred(s.truth[i], s.predicted[i])) n += 1;
  }
  return n;
}

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace

double oracle_accuracy(const LabelSet& s) {
  if (s.truth.empty()) return 0.0;
  return count_if(s, [](Index t, Index p) { return t == p; }) / double(s.truth.size());
}

double oracle_precision(const LabelSet& s, Index c) {
  const double tp = count_if(s, [c](Index t, Index p) { return t == c && p == c; });
  return safe_div(tp, count_if(s, [c](Index, Index p) { return p == c; }));
}

double oracle_recall(const LabelSet& s, Index c) {
  const double tp = count_if(s, [c](Index t, Index p) { return t == c && p == c; });
  return safe_div(tp, count_if(s, [c](Index t, Index) { return t == c; }));
}

double oracle_specificity(const LabelSet& s, Index c) {
  const double tn = count_if(s, [c](Index t, Index p) { return t != c && p != c; });
  return safe_div(tn, count_if(s, [c](Index t, Index) { return t != c; }));
}

double oracle_f1(const LabelSet& s, Index c) {
  const double p = oracle_precision(s, c);
  const double r = oracle_recall(s, c);
  return safe_div(2 * p * r, p + r);
}

double oracle_mcc(const LabelSet& s) {
  const Index n = static_cast<Index>(s.truth.size());
  const Index k = s.num_classes;
  MatrixXd x = MatrixXd::Zero(n, k), y = MatrixXd::Zero(n, k);
  for (Index i = 0; i < n; ++i) {
    x(i, s.truth[i]) = 1;
    y(i, s.predicted[i]) = 1;
  }
  auto cov = [&](const MatrixXd& a, const MatrixXd& b) {
    double total = 0;
    for (Index j = 0; j < k; ++j) {
      const double ma = a.col(j).mean(), mb = b.col(j).mean();
      for (Index i = 0; i < n; ++i) total += (a(i, j) - ma) * (b(i, j) - mb);
    }
    return total;
  };
  return safe_div(cov(x, y), std::sqrt(cov(x, x) * cov(y, y)));
}

double oracle_kappa(const LabelSet& s) {
  const double n = double(s.truth.size());
  if (n == 0) return 0.0;
  const double p0 = oracle_accuracy(s);
  double pe = 0;
  for (Index c = 0; c < s.num_classes; ++c) {
    pe += count_if(s, [c](Index t, Index) { return t == c; }) / n *
          (count_if(s, [c](Index, Index p) { return p == c; }) / n);
  }
  return pe == 1.0 ? 0.0 : (p0 - pe) / (1 - pe);
}

double oracle_auroc(const std::vector<ScoredSample>& samples, Index cls) {
  double good = 0, pairs = 0;
  for (const auto& p : samples) {
    if (p.true_label != cls) continue;
    for (const auto& q : samples) {
      if (q.true_label == cls) continue;
      pairs += 1;
      if (p.scores[cls] > q.scores[cls]) good += 1;
      else if (p.scores[cls] == q.scores[cls]) good += 0.5;
    }
  }
  return good / pairs;
}

MatrixXd oracle_attention_weights(const MatrixXd& q, const MatrixXd& k) {
  const Index n = q.rows(), m = k.rows(), c = q.cols();
  MatrixXd a(n, m);
  for (Index i = 0; i < n; ++i) {
    double top = -INFINITY;
    for (Index j = 0; j < m; ++j) {
      double dot = 0;
      for (Index t = 0; t < c; ++t) dot += q(i, t) * k(j, t);
      a(i, j) = dot / std::sqrt(double(c));
      top = std::max(top, a(i, j));
    }
    double z = 0;
    for (Index j = 0; j < m; ++j) z += a(i, j) = std::exp(a(i, j) - top);
    for (Index j = 0; j < m; ++j) a(i, j) /= z;
  }
  return a;
}

MatrixXd oracle_attention(const MatrixXd& q, const MatrixXd& k, const MatrixXd& v) {
  const MatrixXd a = oracle_attention_weights(q, k);
  MatrixXd out = MatrixXd::Zero(q.rows(), v.cols());
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < a.cols(); ++j)
      for (Index t = 0; t < v.cols(); ++t) out(i, t) += a(i, j) * v(j, t);
  return out;
}

PlainMap to_plain(const BasicTensor<double>& t) {
  PlainMap m{t.dim(0), t.dim(1), t.dim(2), MatrixXd(t.dim(0), t.dim(1) * t.dim(2))};
  for (Index c = 0; c < m.channels; ++c)
    for (Index p = 0; p < m.height * m.width; ++p) m.values(c, p) = t[c * m.height * m.width + p];
  return m;
}

VectorXd oracle_channel_gate(const PlainMap& f, const MatrixXd& w1, const MatrixXd& w2) {
  VectorXd s(f.channels);
  for (Index c = 0; c < f.channels; ++c) {
    double total = 0, top = -INFINITY;
    for (Index p = 0; p < f.values.cols(); ++p) {
      total += f.values(c, p);
      top = std::max(top, f.values(c, p));
    }
    s[c] = total / double(f.values.cols()) + top;
  }
  VectorXd hidden(w1.rows());
  for (Index r = 0; r < w1.rows(); ++r) {
    double acc = 0;
    for (Index c = 0; c < f.channels; ++c) acc += w1(r, c) * s[c];
    hidden[r] = std::max(acc, 0.0);
  }
  VectorXd gate(w2.rows());
  for (Index c = 0; c < w2.rows(); ++c) {
    double acc = 0;
    for (Index r = 0; r < w2.cols(); ++r) acc += w2(c, r) * hidden[r];
    gate[c] = sigmoid(acc);
  }
  return gate;
}

VectorXd oracle_spatial_gate(const PlainMap& f, const BasicTensor<double>& kernel) {
  const Index h = f.height, w = f.width, k = kernel.dim(2), pad = k / 2;
  MatrixXd pooled(2, h * w);
  for (Index p = 0; p < h * w; ++p) {
    pooled(0, p) = f.values.col(p).mean();
    pooled(1, p) = f.values.col(p).maxCoeff();
  }
  VectorXd gate(h * w);
  for (Index y = 0; y < h; ++y) {
    for (Index x = 0; x < w; ++x) {
      double acc = 0;
      for (Index ch = 0; ch < 2; ++ch)
        for (Index dy = 0; dy < k; ++dy)
          for (Index dx = 0; dx < k; ++dx) {
            const Index yy = y + dy - pad, xx = x + dx - pad;
            if (yy < 0 || yy >= h || xx < 0 || xx >= w) continue;
            acc += kernel.at({0, ch, dy, dx}) * pooled(ch, yy * w + xx);
          }
      gate[y * w + x] = sigmoid(acc);
    }
  }
  return gate;
}

PlainMap oracle_refine(const PlainMap& f, const MatrixXd& w1, const MatrixXd& w2,
                       const BasicTensor<double>& kernel) {
  const VectorXd mc = oracle_channel_gate(f, w1, w2);
  PlainMap gated = f;
  for (Index c = 0; c < f.channels; ++c) gated.values.row(c) *= mc[c];
  const VectorXd ms = oracle_spatial_gate(gated, kernel);
  PlainMap out = gated;
  for (Index p = 0; p < f.values.cols(); ++p) out.values.col(p) *= ms[p];
  return out;
}

double oracle_entropy(const VectorXd& p) {
  double h = 0;
  for (Index i = 0; i < p.size(); ++i) {
    if (p[i] > 0) h -= p[i] * std::log(p[i]);
  }
  return h;
}

VectorXd random_simplex(Index n, Rng& rng) {
  std::exponential_distribution<double> e(1.0);
  VectorXd p(n);
  for (Index i = 0; i < n; ++i) p[i] = e(rng);
  return p / p.sum();
}

LabelSet random_label_set(Index max_n, Index max_classes, Rng& rng) {
  LabelSet s;
  s.num_classes = std::uniform_int_distribution<Index>(2, max_classes)(rng);
  const Index n = std::uniform_int_distribution<Index>(1, max_n)(rng);
  std::uniform_int_distribution<Index> label(0, s.num_classes - 1);
  std::bernoulli_distribution agree(0.5);
  for (Index i = 0; i < n; ++i) {
    const Index t = label(rng);
    s.truth.push_back(t);
    s.predicted.push_back(agree(rng) ? t : label(rng));
  }
  return s;
}

std::vector<ScoredSample> random_scored(Index n, Index num_classes, Rng& rng) {
  std::uniform_int_distribution<Index> label(0, num_classes - 1);
  std::uniform_int_distribution<int> tenth(0, 10);
  std::vector<ScoredSample> out;
  for (Index i = 0; i < n; ++i) {
    ScoredSample s;
    s.true_label = label(rng);
    s.scores.resize(num_classes);
    for (Index c = 0; c < num_classes; ++c) s.scores[c] = tenth(rng) / 10.0;
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace dcat::testing
