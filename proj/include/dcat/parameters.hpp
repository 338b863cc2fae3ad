#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "dcat/random.hpp"
#include "dcat/tensor.hpp"

namespace dcat {

template <typename S>
struct NamedParam {
  std::string name;
  BasicTensor<S>* tensor;
};

/// He-uniform: U(-sqrt(6 / fan_in), sqrt(6 / fan_in)). Drawn in double so
/// float and double models built from one seed hold the same values.
template <typename S>
BasicTensor<S> he_uniform(Shape shape, Index fan_in, Rng& rng) {
  const double bound = std::sqrt(6.0 / static_cast<double>(fan_in));
  std::uniform_real_distribution<double> dist(-bound, bound);
  typename BasicTensor<S>::Array v(shape_size(shape));
  for (Index i = 0; i < v.size(); ++i) v[i] = static_cast<S>(dist(rng));
  return BasicTensor<S>(std::move(shape), std::move(v), true);
}

/// U(-1/sqrt(fan_in), 1/sqrt(fan_in)); used for the output layer so initial
/// predictions start close to uniform.
template <typename S>
BasicTensor<S> fan_in_uniform(Shape shape, Index fan_in, Rng& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
  std::uniform_real_distribution<double> dist(-bound, bound);
  typename BasicTensor<S>::Array v(shape_size(shape));
  for (Index i = 0; i < v.size(); ++i) v[i] = static_cast<S>(dist(rng));
  return BasicTensor<S>(std::move(shape), std::move(v), true);
}

template <typename S>
BasicTensor<S> zero_param(Shape shape) {
  return BasicTensor<S>::zeros(std::move(shape), true);
}

}  // namespace dcat
