#include "dcat/cbam.hpp"

#include "dcat/ops.hpp"

namespace dcat {

template <typename S>
CbamParams<S> CbamParams<S>::init(Index channels, Index reduction, Index spatial_kernel,
                                  Index num_classes, Rng& rng) {
  if (reduction < 1 || channels % reduction != 0) {
    throw ConfigError("channel count " + std::to_string(channels) +
                      " is not divisible by reduction ratio " + std::to_string(reduction));
  }
  if (spatial_kernel < 1 || spatial_kernel % 2 == 0) {
    throw ConfigError("spatial kernel size must be odd");
  }
  if (num_classes < 2) throw ConfigError("need at least two classes");
  const Index hidden = channels / reduction;
  CbamParams p;
  p.mlp_reduce = he_uniform<S>({hidden, channels}, channels, rng);
  p.mlp_expand = he_uniform<S>({channels, hidden}, hidden, rng);
  p.spatial_kernel =
      he_uniform<S>({1, 2, spatial_kernel, spatial_kernel}, 2 * spatial_kernel * spatial_kernel, rng);
  p.classifier_w = fan_in_uniform<S>({num_classes, channels}, channels, rng);
  p.classifier_b = zero_param<S>({num_classes});
  return p;
}

template <typename S>
std::vector<NamedParam<S>> CbamParams<S>::parameters(const std::string& prefix) {
  return {{prefix + ".mlp_reduce", &mlp_reduce},
          {prefix + ".mlp_expand", &mlp_expand},
          {prefix + ".spatial_kernel", &spatial_kernel},
          {prefix + ".classifier_w", &classifier_w},
          {prefix + ".classifier_b", &classifier_b}};
}

template <typename S>
BasicTensor<S> channel_attention(const BasicTensor<S>& f, const CbamParams<S>& p) {
  if (f.rank() != 3 || f.dim(0) != p.channels()) {
    throw DimensionError("channel_attention: map " + shape_string(f.shape()) +
                         " does not have " + std::to_string(p.channels()) + " channels");
  }
  const Index c = f.dim(0);
  auto pooled = reshape(add(avg_pool_spatial(f), max_pool_spatial(f)), {c, 1});
  auto hidden = relu(matmul(p.mlp_reduce, pooled));
  return reshape(sigmoid(matmul(p.mlp_expand, hidden)), {c, 1, 1});
}

template <typename S>
BasicTensor<S> spatial_attention(const BasicTensor<S>& f, const CbamParams<S>& p) {
  if (f.rank() != 3) throw DimensionError("spatial_attention: expected C x H x W");
  auto stacked = concat<S>({channel_pool(f, PoolMode::kAvg), channel_pool(f, PoolMode::kMax)}, 0);
  const Index pad = p.spatial_kernel.dim(2) / 2;
  return sigmoid(conv2d(stacked, p.spatial_kernel, 1, pad));
}

template <typename S>
BasicTensor<S> refine(const BasicTensor<S>& f, const CbamParams<S>& p) {
  auto gated = mul(channel_attention(f, p), f);
  return mul(spatial_attention(gated, p), gated);
}

template <typename S>
BasicTensor<S> pool_features(const BasicTensor<S>& f) {
  if (f.rank() != 3) throw DimensionError("pool_features: expected C x H x W");
  return reshape(adaptive_avg_pool(f, 1, 1), {f.dim(0)});
}

template <typename S>
BasicTensor<S> classifier_head(const BasicTensor<S>& pooled, const CbamParams<S>& p) {
  if (pooled.size() != p.channels()) {
    throw DimensionError("classifier: pooled features " + shape_string(pooled.shape()) +
                         " do not match " + std::to_string(p.channels()) + " inputs");
  }
  auto column = reshape(pooled, {p.channels(), 1});
  auto logits = add(reshape(matmul(p.classifier_w, column), {p.num_classes()}), p.classifier_b);
  return softmax(logits, 0);
}

#define DCAT_INSTANTIATE_CBAM(S)                                                          \
  template struct CbamParams<S>;                                                          \
  template BasicTensor<S> channel_attention(const BasicTensor<S>&, const CbamParams<S>&); \
  template BasicTensor<S> spatial_attention(const BasicTensor<S>&, const CbamParams<S>&); \
  template BasicTensor<S> refine(const BasicTensor<S>&, const CbamParams<S>&);            \
  template BasicTensor<S> pool_features(const BasicTensor<S>&);                           \
  template BasicTensor<S> classifier_head(const BasicTensor<S>&, const CbamParams<S>&);

DCAT_INSTANTIATE_CBAM(float)
DCAT_INSTANTIATE_CBAM(double)

}  // namespace dcat
