#pragma once

#include <random>
#include <vector>

#include "dcat/tensor.hpp"

// Differentiable operations over BasicTensor. Feature maps are C x H x W,
// matrices are rows x cols, all row-major.

namespace dcat {

enum class PoolMode { kAvg, kMax };

// Elementwise binary ops broadcast numpy-style between tensors of equal rank
// whose dimensions are equal or 1.
template <typename S> BasicTensor<S> add(const BasicTensor<S>& a, const BasicTensor<S>& b);
template <typename S> BasicTensor<S> sub(const BasicTensor<S>& a, const BasicTensor<S>& b);
template <typename S> BasicTensor<S> mul(const BasicTensor<S>& a, const BasicTensor<S>& b);

template <typename S> BasicTensor<S> scale(const BasicTensor<S>& a, S factor);
template <typename S> BasicTensor<S> add_scalar(const BasicTensor<S>& a, S offset);

template <typename S> BasicTensor<S> relu(const BasicTensor<S>& x);
template <typename S> BasicTensor<S> sigmoid(const BasicTensor<S>& x);

template <typename S> BasicTensor<S> sum(const BasicTensor<S>& x);
template <typename S> BasicTensor<S> mean(const BasicTensor<S>& x);

template <typename S> BasicTensor<S> matmul(const BasicTensor<S>& a, const BasicTensor<S>& b);
template <typename S> BasicTensor<S> transpose(const BasicTensor<S>& a);
template <typename S> BasicTensor<S> reshape(const BasicTensor<S>& a, Shape shape);
template <typename S>
BasicTensor<S> concat(const std::vector<BasicTensor<S>>& parts, int axis);

/// Max-subtracted softmax along `axis`.
template <typename S> BasicTensor<S> softmax(const BasicTensor<S>& x, int axis);

/// -ln p[label] for a probability vector; p is clamped at 1e-30 from below.
template <typename S> BasicTensor<S> cross_entropy(const BasicTensor<S>& probs, Index label);

/// Cross-correlation of a C_in x H x W map with C_out x C_in x k x k weights.
/// Throws DimensionError when (H + 2 padding - k) is not a multiple of stride.
template <typename S>
BasicTensor<S> conv2d(const BasicTensor<S>& x, const BasicTensor<S>& w, Index stride,
                      Index padding);

template <typename S> BasicTensor<S> avg_pool_spatial(const BasicTensor<S>& f);
/// Gradient goes to the first maximum in row-major order.
template <typename S> BasicTensor<S> max_pool_spatial(const BasicTensor<S>& f);
template <typename S> BasicTensor<S> channel_pool(const BasicTensor<S>& f, PoolMode mode);
/// Averages over bins [floor(i*H/oh), ceil((i+1)*H/oh)), as in the usual
/// adaptive pooling layers.
template <typename S>
BasicTensor<S> adaptive_avg_pool(const BasicTensor<S>& f, Index out_h, Index out_w);

/// Inverted dropout: zeroes with probability `rate`, scales survivors by
/// 1/(1-rate). rate == 0 returns `x` unchanged.
template <typename S>
BasicTensor<S> dropout(const BasicTensor<S>& x, double rate, std::mt19937_64& rng);

}  // namespace dcat
