#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "dcat/parameters.hpp"
#include "dcat/random.hpp"
#include "dcat/tensor.hpp"

namespace dcat {

// Two small CNNs play the roles of the heterogeneous pretrained extractors:
// network A is a plain conv stack, network B adds identity skips. Each stage
// is conv3x3 -> ReLU -> 2x downsample; the last two stages are the taps, so
// a 224 input yields 28x28 and 14x14 maps.

enum class NetworkId { kA, kB };

struct BackboneConfig {
  NetworkId network_id = NetworkId::kA;
  std::vector<Index> stage_channels{16, 32, 64, 128};
  Index input_size = 224;
  Index in_channels = 3;
  bool use_residual = false;

  /// Throws ConfigError when the stride schedule cannot produce both taps.
  void validate() const;
  Index fine_size() const;    // spatial size of the scale-1 tap
  Index coarse_size() const;  // spatial size of the scale-2 tap
  Index fine_channels() const { return stage_channels.at(stage_channels.size() - 2); }
  Index coarse_channels() const { return stage_channels.back(); }
};

BackboneConfig default_backbone_config(NetworkId id, Index input_size = 224);

template <typename S>
struct FeatureMapSet {
  BasicTensor<S> a1, a2, b1, b2;

  /// Scale-1 maps share one spatial size, scale-2 maps share half of it.
  /// With `fine_size`, scale 1 must also have exactly that size.
  void validate(std::optional<Index> fine_size = std::nullopt) const;
};

template <typename S>
class Backbone {
 public:
  using T = BasicTensor<S>;

  struct Stage {
    T conv_w, conv_b;
    T res_w, res_b;  // only with use_residual
  };
  struct Taps {
    T fine;
    T coarse;
  };

  Backbone() = default;
  Backbone(BackboneConfig cfg, Rng& rng);

  Taps forward(const T& x) const;

  const BackboneConfig& config() const { return cfg_; }
  std::vector<Stage>& stages() { return stages_; }
  const std::vector<Stage>& stages() const { return stages_; }
  std::vector<NamedParam<S>> parameters(const std::string& prefix);

 private:
  BackboneConfig cfg_;
  std::vector<Stage> stages_;
};

template <typename S>
Backbone<S> build_backbone(const BackboneConfig& cfg, Rng& rng) {
  return Backbone<S>(cfg, rng);
}

/// relu(x + conv3x3(x) + b). Identity for non-negative x when w and b are zero.
template <typename S>
BasicTensor<S> residual_block(const BasicTensor<S>& x, const BasicTensor<S>& w,
                              const BasicTensor<S>& b);

template <typename S>
FeatureMapSet<S> extract_multiscale(const Backbone<S>& net_a, const Backbone<S>& net_b,
                                    const BasicTensor<S>& x);

void export_feature_maps(const std::filesystem::path& path, const FeatureMapSet<float>& fs);
/// Reads a container with records a1, a2, b1, b2 and validates scale geometry.
FeatureMapSet<float> import_feature_maps(const std::filesystem::path& path,
                                         std::optional<Index> fine_size = std::nullopt);
FeatureMapSet<float> decode_feature_maps(std::string_view bytes,
                                         std::optional<Index> fine_size = std::nullopt);

}  // namespace dcat
