#include "dcat/fusion.hpp"

#include <cmath>

#include "dcat/ops.hpp"

namespace dcat {

template <typename S>
TokenizedMap<S> tokenize(const BasicTensor<S>& map) {
  if (map.rank() != 3) throw DimensionError("tokenize: expected C x H x W, got " + shape_string(map.shape()));
  const Index c = map.dim(0), n = map.dim(1) * map.dim(2);
  return {transpose(reshape(map, {c, n})), map.shape()};
}

template <typename S>
BasicTensor<S> detokenize(const TokenizedMap<S>& tokens) {
  const Shape& o = tokens.origin_shape;
  if (o.size() != 3 || tokens.tokens.rank() != 2 || tokens.tokens.dim(0) != o[1] * o[2] ||
      tokens.tokens.dim(1) != o[0]) {
    throw DimensionError("detokenize: tokens " + shape_string(tokens.tokens.shape()) +
                         " do not match origin " + shape_string(o));
  }
  return reshape(transpose(tokens.tokens), o);
}

template <typename S>
BasicTensor<S> detokenize(const BasicTensor<S>& tokens, Index height, Index width) {
  if (tokens.rank() != 2) throw DimensionError("detokenize: expected N x C tokens");
  return detokenize(TokenizedMap<S>{tokens, {tokens.dim(1), height, width}});
}

template <typename S>
FusionParams<S> FusionParams<S>::init(Index width, Index a_fine, Index a_coarse, Index b_fine,
                                      Index b_coarse, Rng& rng) {
  if (width <= 0) throw ConfigError("fusion width must be positive");
  FusionParams p;
  p.width = width;
  const Index a_in[2] = {a_fine, a_coarse};
  const Index b_in[2] = {b_fine, b_coarse};
  for (int s = 0; s < 2; ++s) {
    auto& sp = p.scales[s];
    sp.proj_a = he_uniform<S>({width, a_in[s]}, a_in[s], rng);
    sp.proj_b = he_uniform<S>({width, b_in[s]}, b_in[s], rng);
    for (DirectionWeights<S>* d : {&sp.attend_a, &sp.attend_b}) {
      d->query = he_uniform<S>({width, width}, width, rng);
      d->key = he_uniform<S>({width, width}, width, rng);
      d->value = he_uniform<S>({width, width}, width, rng);
    }
  }
  return p;
}

template <typename S>
std::vector<NamedParam<S>> FusionParams<S>::parameters(const std::string& prefix) {
  std::vector<NamedParam<S>> out;
  for (int s = 0; s < 2; ++s) {
    const std::string p = prefix + ".scale" + std::to_string(s + 1);
    auto& sp = scales[s];
    out.push_back({p + ".proj_a", &sp.proj_a});
    out.push_back({p + ".proj_b", &sp.proj_b});
    for (auto [name, d] : {std::pair{".attend_a", &sp.attend_a}, std::pair{".attend_b", &sp.attend_b}}) {
      out.push_back({p + name + ".query", &d->query});
      out.push_back({p + name + ".key", &d->key});
      out.push_back({p + name + ".value", &d->value});
    }
  }
  return out;
}

template <typename S>
BasicTensor<S> project_1x1(const BasicTensor<S>& map, const BasicTensor<S>& weight) {
  if (map.rank() != 3 || weight.rank() != 2 || weight.dim(1) != map.dim(0)) {
    throw DimensionError("project_1x1: weight " + shape_string(weight.shape()) +
                         " cannot project map " + shape_string(map.shape()));
  }
  const Index h = map.dim(1), w = map.dim(2);
  auto flat = reshape(map, {map.dim(0), h * w});
  return reshape(matmul(weight, flat), {weight.dim(0), h, w});
}

template <typename S>
std::array<ProjectedPair<S>, 2> project_common(const FeatureMapSet<S>& fs,
                                               const FusionParams<S>& params) {
  return {ProjectedPair<S>{project_1x1(fs.a1, params.scales[0].proj_a),
                           project_1x1(fs.b1, params.scales[0].proj_b)},
          ProjectedPair<S>{project_1x1(fs.a2, params.scales[1].proj_a),
                           project_1x1(fs.b2, params.scales[1].proj_b)}};
}

template <typename S>
BasicTensor<S> attention_weights(const BasicTensor<S>& q, const BasicTensor<S>& k) {
  if (q.rank() != 2 || k.rank() != 2 || q.dim(1) != k.dim(1)) {
    throw DimensionError("attention: query " + shape_string(q.shape()) + " and key " +
                         shape_string(k.shape()) + " disagree");
  }
  const S inv_sqrt_dk = S(1) / std::sqrt(static_cast<S>(q.dim(1)));
  return softmax(scale(matmul(q, transpose(k)), inv_sqrt_dk), 1);
}

template <typename S>
BasicTensor<S> scaled_dot_product_attention(const BasicTensor<S>& q, const BasicTensor<S>& k,
                                            const BasicTensor<S>& v) {
  if (v.rank() != 2 || k.rank() != 2 || v.dim(0) != k.dim(0) || v.dim(1) != q.dim(1)) {
    throw DimensionError("attention: value " + shape_string(v.shape()) + " does not match key " +
                         shape_string(k.shape()) + " / query " + shape_string(q.shape()));
  }
  return matmul(attention_weights(q, k), v);
}

template <typename S>
BasicTensor<S> cross_attend(const BasicTensor<S>& query_source, const BasicTensor<S>& attended,
                            const DirectionWeights<S>& weights) {
  if (query_source.shape() != attended.shape()) {
    throw DimensionError("cross_attend: maps at different scales " +
                         shape_string(query_source.shape()) + " vs " +
                         shape_string(attended.shape()));
  }
  auto q = tokenize(project_1x1(query_source, weights.query));
  auto k = tokenize(project_1x1(attended, weights.key));
  auto v = tokenize(project_1x1(attended, weights.value));
  return detokenize(TokenizedMap<S>{scaled_dot_product_attention(q.tokens, k.tokens, v.tokens),
                                    v.origin_shape});
}

template <typename S>
BasicTensor<S> bidirectional_fuse(const BasicTensor<S>& x_a, const BasicTensor<S>& x_b,
                                  const ScaleAttentionParams<S>& params) {
  return add(cross_attend(x_b, x_a, params.attend_a), cross_attend(x_a, x_b, params.attend_b));
}

template <typename S>
BasicTensor<S> downsample_to(const BasicTensor<S>& map, Index height, Index width) {
  if (map.dim(1) == height && map.dim(2) == width) return map;
  return adaptive_avg_pool(map, height, width);
}

template <typename S>
BasicTensor<S> multiscale_fuse(const FeatureMapSet<S>& fs, const FusionParams<S>& params) {
  auto pairs = project_common(fs, params);
  auto fine = bidirectional_fuse(pairs[0].a, pairs[0].b, params.scales[0]);
  auto coarse = bidirectional_fuse(pairs[1].a, pairs[1].b, params.scales[1]);
  return concat<S>({downsample_to(fine, coarse.dim(1), coarse.dim(2)), coarse}, 0);
}

#define DCAT_INSTANTIATE_FUSION(S)                                                             \
  template struct FusionParams<S>;                                                             \
  template TokenizedMap<S> tokenize(const BasicTensor<S>&);                                    \
  template BasicTensor<S> detokenize(const TokenizedMap<S>&);                                  \
  template BasicTensor<S> detokenize(const BasicTensor<S>&, Index, Index);                     \
  template BasicTensor<S> project_1x1(const BasicTensor<S>&, const BasicTensor<S>&);           \
  template std::array<ProjectedPair<S>, 2> project_common(const FeatureMapSet<S>&,             \
                                                          const FusionParams<S>&);             \
  template BasicTensor<S> attention_weights(const BasicTensor<S>&, const BasicTensor<S>&);     \
  template BasicTensor<S> scaled_dot_product_attention(                                        \
      const BasicTensor<S>&, const BasicTensor<S>&, const BasicTensor<S>&);                    \
  template BasicTensor<S> cross_attend(const BasicTensor<S>&, const BasicTensor<S>&,           \
                                       const DirectionWeights<S>&);                            \
  template BasicTensor<S> bidirectional_fuse(const BasicTensor<S>&, const BasicTensor<S>&,     \
                                             const ScaleAttentionParams<S>&);                  \
  template BasicTensor<S> downsample_to(const BasicTensor<S>&, Index, Index);                  \
  template BasicTensor<S> multiscale_fuse(const FeatureMapSet<S>&, const FusionParams<S>&);

DCAT_INSTANTIATE_FUSION(float)
DCAT_INSTANTIATE_FUSION(double)

}  // namespace dcat
