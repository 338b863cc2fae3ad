#pragma once

#include <optional>
#include <string>

#include "json.hpp"

#include "dcat/model.hpp"
#include "dcat/training.hpp"

namespace dcat {

struct RunConfig {
  std::string preset = "desk";
  TrainConfig train;
  BackboneConfig backbone_a = default_backbone_config(NetworkId::kA);
  BackboneConfig backbone_b = default_backbone_config(NetworkId::kB);
  Index reduction = 8;
  Index spatial_kernel = 7;
  FusionMode fusion_mode = FusionMode::kCrossAttention;
  std::string data_dir;
  std::string output_dir = "dcat_out";
  std::optional<double> hus_threshold;  // default: half the maximum entropy

  /// Model for `num_classes`, taking width, input size and dropout from `train`.
  ModelConfig model_config(Index num_classes) const;
  void validate() const;
};

/// "desk": 64x64 inputs, C = 64, 30 epochs. "paper": 224x224, C = 128, 200 epochs.
RunConfig preset_config(const std::string& name);

nlohmann::json to_json(const RunConfig& cfg);
/// Keys present in `j` replace the matching fields of `base`; unknown keys
/// and wrongly typed values throw ConfigError.
RunConfig merge_run_config(const nlohmann::json& j, RunConfig base);

nlohmann::json to_json(const TrainConfig& cfg);
nlohmann::json to_json(const ModelConfig& cfg);
ModelConfig model_config_from_json(const nlohmann::json& j);

std::string fusion_mode_name(FusionMode mode);
FusionMode parse_fusion_mode(const std::string& name);

}  // namespace dcat
