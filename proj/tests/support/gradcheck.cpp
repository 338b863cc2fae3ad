#include "gradcheck.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <random>

#include "dcat/ops.hpp"

namespace dcat::testing {

GradCheckResult gradcheck(const LossFn& loss, const std::vector<NamedInput>& inputs,
                          GradCheckOptions opts) {
  for (const auto& [name, t] : inputs) {
    t->set_requires_grad(true);
    t->zero_grad();
  }
  {
    BasicGradTape<double> tape;
    tape.backward(loss());
  }
  GradCheckResult out;
  for (const auto& [name, t] : inputs) {
    const typename DTensor::Array analytic =
        t->has_grad() ? t->grad() : DTensor::Array::Zero(t->size());
    auto& v = t->mutable_data();
    // Loss at x + k*h/4, k = -4..4. The central difference at h uses the
    // ends; fourth differences across the stencil are ~0 for a smooth loss
    // and at least delta*dslope/2 when a ReLU / max kink sits inside it.
    const double delta = opts.h / 4;
    std::array<double, 9> f{};
    for (Index i = 0; i < t->size(); ++i) {
      const double saved = v[i];
      for (int k = -4; k <= 4; ++k) {
        v[i] = saved + k * delta;
        f[k + 4] = loss().item();
      }
      v[i] = saved;
      const double n = (f[8] - f[0]) / (2.0 * opts.h);
      double d4 = 0.0;
      for (int k = 2; k <= 6; ++k) {
        d4 = std::max(d4, std::abs(f[k - 2] - 4 * f[k - 1] + 6 * f[k] - 4 * f[k + 1] + f[k + 2]));
      }
      if (d4 > opts.kink_tolerance * delta * std::max(std::abs(n), 1e-5)) {
        ++out.skipped;
        continue;
      }
      const double a = analytic[i];
      const double err = std::abs(a - n) / std::max({std::abs(a), std::abs(n), 1e-6});
      ++out.checked;
      if (err > out.max_rel_error) {
        out.max_rel_error = err;
        out.worst = name + "[" + std::to_string(i) + "]";
      }
    }
  }
  return out;
}

DTensor weighted_sum(const DTensor& x, unsigned salt) {
  std::mt19937_64 rng(0xC0FFEE + salt);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  DTensor::Array w(x.size());
  for (Index i = 0; i < w.size(); ++i) w[i] = dist(rng);
  return sum(mul(x, DTensor(x.shape(), w)));
}

}  // namespace dcat::testing
