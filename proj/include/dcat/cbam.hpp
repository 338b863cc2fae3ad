#pragma once

#include <string>
#include <vector>

#include "dcat/parameters.hpp"
#include "dcat/tensor.hpp"

namespace dcat {

// Channel gate, then spatial gate, then pooled linear classifier.
//
// The channel gate sums the average- and max-pooled descriptors before the
// shared MLP: sigma(W2 relu(W1 (avg + max))). Classic CBAM runs the MLP on
// each descriptor separately and sums afterwards; this module does not.

template <typename S>
struct CbamParams {
  BasicTensor<S> mlp_reduce;      // C/r x C
  BasicTensor<S> mlp_expand;      // C x C/r
  BasicTensor<S> spatial_kernel;  // 1 x 2 x k x k, k odd
  BasicTensor<S> classifier_w;    // N_cl x C
  BasicTensor<S> classifier_b;    // N_cl

  static CbamParams init(Index channels, Index reduction, Index spatial_kernel,
                         Index num_classes, Rng& rng);
  Index channels() const { return mlp_reduce.dim(1); }
  Index num_classes() const { return classifier_w.dim(0); }
  std::vector<NamedParam<S>> parameters(const std::string& prefix);
};

/// M_c, C x 1 x 1 with entries in (0, 1).
template <typename S>
BasicTensor<S> channel_attention(const BasicTensor<S>& f, const CbamParams<S>& p);

/// M_s, 1 x H x W: sigmoid(conv([mean_c F ; max_c F])) with "same" padding.
template <typename S>
BasicTensor<S> spatial_attention(const BasicTensor<S>& f, const CbamParams<S>& p);

/// F'' = M_s(F') * F' where F' = M_c(F) * F.
template <typename S>
BasicTensor<S> refine(const BasicTensor<S>& f, const CbamParams<S>& p);

/// Adaptive average pool to 1x1, flattened to a length-C vector.
template <typename S>
BasicTensor<S> pool_features(const BasicTensor<S>& f);

/// softmax(W_c x + b) for a pooled length-C vector.
template <typename S>
BasicTensor<S> classifier_head(const BasicTensor<S>& pooled, const CbamParams<S>& p);

template <typename S>
BasicTensor<S> classify(const BasicTensor<S>& refined, const CbamParams<S>& p) {
  return classifier_head(pool_features(refined), p);
}

}  // namespace dcat
