#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dcat/backbone.hpp"
#include "dcat/cbam.hpp"
#include "dcat/fusion.hpp"
#include "dcat/random.hpp"
#include "dcat/tensor_io.hpp"

namespace dcat {

enum class FusionMode {
  kCrossAttention,  // both networks, bidirectional cross-attention per scale
  kSingleBackbone,  // ablation: network A's projected maps, no attention
};

struct ModelConfig {
  BackboneConfig backbone_a = default_backbone_config(NetworkId::kA);
  BackboneConfig backbone_b = default_backbone_config(NetworkId::kB);
  Index fusion_width = 128;
  Index reduction = 8;
  Index spatial_kernel = 7;
  Index num_classes = 4;
  // Single dropout layer between the pooled features and the classifier.
  double dropout_rate = 0.5;
  FusionMode fusion_mode = FusionMode::kCrossAttention;

  void validate() const;
  Index input_size() const { return backbone_a.input_size; }
  Index fused_channels() const { return 2 * fusion_width; }
};

template <typename S>
class DcatModel {
 public:
  using T = BasicTensor<S>;

  DcatModel() = default;
  DcatModel(ModelConfig cfg, std::uint64_t seed);

  /// 2C x H2 x W2 fused map for a set of backbone taps.
  T fuse(const FeatureMapSet<S>& fs) const;
  /// Deterministic trunk: backbones, fusion, refinement, pooling -> length 2C.
  T features(const T& image) const;
  T features_from_maps(const FeatureMapSet<S>& fs) const;
  /// Class probabilities from pooled features; dropout is active iff rng is set.
  T head(const T& pooled, Rng* dropout_rng) const;
  T forward(const T& image, Rng* dropout_rng) const { return head(features(image), dropout_rng); }

  const ModelConfig& config() const { return cfg_; }
  Backbone<S>& backbone_a() { return net_a_; }
  Backbone<S>& backbone_b() { return net_b_; }
  FusionParams<S>& fusion() { return fusion_; }
  CbamParams<S>& cbam() { return cbam_; }
  const CbamParams<S>& cbam() const { return cbam_; }

  /// Trainable tensors in a fixed order. The ablation omits network B and
  /// the attention projections, which it never touches.
  std::vector<NamedParam<S>> parameters();

  std::vector<TensorRecord> export_parameters();
  /// Overwrites parameter values from records keyed "param/<name>".
  void import_parameters(const std::vector<TensorRecord>& records);

 private:
  ModelConfig cfg_;
  Backbone<S> net_a_;
  Backbone<S> net_b_;
  FusionParams<S> fusion_;
  CbamParams<S> cbam_;
};

}  // namespace dcat
