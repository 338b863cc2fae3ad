#pragma once

#include <array>
#include <string>
#include <vector>

#include "dcat/backbone.hpp"
#include "dcat/parameters.hpp"
#include "dcat/tensor.hpp"

namespace dcat {

/// A feature map viewed as N = H*W spatial tokens of C channels each.
template <typename S>
struct TokenizedMap {
  BasicTensor<S> tokens;  // N x C
  Shape origin_shape;     // C, H, W
};

template <typename S>
TokenizedMap<S> tokenize(const BasicTensor<S>& map);
template <typename S>
BasicTensor<S> detokenize(const TokenizedMap<S>& tokens);
/// Re-shapes an N x C token matrix onto a C x H x W grid.
template <typename S>
BasicTensor<S> detokenize(const BasicTensor<S>& tokens, Index height, Index width);

/// Query/key/value projections, each C x C, for one attention direction.
template <typename S>
struct DirectionWeights {
  BasicTensor<S> query, key, value;
};

/// Per-scale parameters. `attend_a` takes its keys and values from network A
/// and its queries from network B; `attend_b` is the mirror image.
template <typename S>
struct ScaleAttentionParams {
  BasicTensor<S> proj_a;  // C x C_a, applied as a 1x1 convolution
  BasicTensor<S> proj_b;  // C x C_b
  DirectionWeights<S> attend_a;
  DirectionWeights<S> attend_b;
};

template <typename S>
struct FusionParams {
  Index width = 0;  // common width C, also d_k
  std::array<ScaleAttentionParams<S>, 2> scales;

  static FusionParams init(Index width, Index a_fine, Index a_coarse, Index b_fine,
                           Index b_coarse, Rng& rng);
  std::vector<NamedParam<S>> parameters(const std::string& prefix);
};

template <typename S>
struct ProjectedPair {
  BasicTensor<S> a;
  BasicTensor<S> b;
};

/// Applies a C_out x C_in matrix at every position of a C_in x H x W map.
template <typename S>
BasicTensor<S> project_1x1(const BasicTensor<S>& map, const BasicTensor<S>& weight);

template <typename S>
std::array<ProjectedPair<S>, 2> project_common(const FeatureMapSet<S>& fs,
                                               const FusionParams<S>& params);

/// Row-wise softmax(Q K^T / sqrt(C)).
template <typename S>
BasicTensor<S> attention_weights(const BasicTensor<S>& q, const BasicTensor<S>& k);

/// softmax(Q K^T / sqrt(C)) V over N x C token matrices.
template <typename S>
BasicTensor<S> scaled_dot_product_attention(const BasicTensor<S>& q, const BasicTensor<S>& k,
                                            const BasicTensor<S>& v);

/// Queries from `query_source`, keys and values from `attended`; both C x H x W.
template <typename S>
BasicTensor<S> cross_attend(const BasicTensor<S>& query_source, const BasicTensor<S>& attended,
                            const DirectionWeights<S>& weights);

/// Sum of the two directional cross-attention outputs at one scale.
template <typename S>
BasicTensor<S> bidirectional_fuse(const BasicTensor<S>& x_a, const BasicTensor<S>& x_b,
                                  const ScaleAttentionParams<S>& params);

/// Fuses both scales and returns [downsampled scale-1 fusion ; scale-2 fusion],
/// a 2C x H2 x W2 map.
template <typename S>
BasicTensor<S> multiscale_fuse(const FeatureMapSet<S>& fs, const FusionParams<S>& params);

/// Brings a scale-1 map down to the scale-2 grid by average pooling.
template <typename S>
BasicTensor<S> downsample_to(const BasicTensor<S>& map, Index height, Index width);

}  // namespace dcat
