#include "dcat/config.hpp"

#include <set>

namespace dcat {

namespace {

using nlohmann::json;

void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + " must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (!allowed.count(key)) throw ConfigError("unknown config key '" + where + "." + key + "'");
  }
}

template <typename T>
void read(const json& j, const char* key, T& out, const std::string& where) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError("config key '" + where + "." + key + "' has the wrong type");
  }
}

json backbone_json(const BackboneConfig& b) {
  return {{"stage_channels", b.stage_channels}, {"use_residual", b.use_residual}};
}

void read_backbone(const json& j, BackboneConfig& b, const std::string& where) {
  check_keys(j, {"stage_channels", "use_residual"}, where);
  read(j, "stage_channels", b.stage_channels, where);
  read(j, "use_residual", b.use_residual, where);
}

}  // namespace

std::string fusion_mode_name(FusionMode mode) {
  return mode == FusionMode::kCrossAttention ? "cross_attention" : "single_backbone";
}

FusionMode parse_fusion_mode(const std::string& name) {
  if (name == "cross_attention") return FusionMode::kCrossAttention;
  if (name == "single_backbone") return FusionMode::kSingleBackbone;
  throw ConfigError("unknown fusion mode '" + name + "'");
}

ModelConfig RunConfig::model_config(Index num_classes) const {
  ModelConfig m;
  m.backbone_a = backbone_a;
  m.backbone_b = backbone_b;
  m.backbone_a.network_id = NetworkId::kA;
  m.backbone_b.network_id = NetworkId::kB;
  m.backbone_a.input_size = m.backbone_b.input_size = train.input_size;
  m.fusion_width = train.common_width;
  m.reduction = reduction;
  m.spatial_kernel = spatial_kernel;
  m.num_classes = num_classes;
  m.dropout_rate = train.dropout_rate;
  m.fusion_mode = fusion_mode;
  return m;
}

void RunConfig::validate() const {
  train.validate();
  model_config(2).validate();
  if (hus_threshold && !(*hus_threshold >= 0.0)) throw ConfigError("threshold must be non-negative");
}

RunConfig preset_config(const std::string& name) {
  RunConfig cfg;
  cfg.preset = name;
  if (name == "desk") {
    cfg.train.max_epochs = 30;
    cfg.train.common_width = 64;
    cfg.train.input_size = 64;
    cfg.backbone_a.stage_channels = {8, 16, 32, 64};
    cfg.backbone_b.stage_channels = {8, 16, 32, 64};
  } else if (name == "paper") {
    cfg.train.max_epochs = 200;
    cfg.train.common_width = 128;
    cfg.train.input_size = 224;
  } else {
    throw ConfigError("unknown preset '" + name + "' (expected desk or paper)");
  }
  return cfg;
}

json to_json(const TrainConfig& t) {
  return {{"learning_rate", t.learning_rate}, {"weight_decay", t.weight_decay},
          {"batch_size", t.batch_size},       {"max_epochs", t.max_epochs},
          {"dropout_rate", t.dropout_rate},   {"mc_passes", t.mc_passes},
          {"seed", t.seed},                   {"optimizer", t.optimizer},
          {"common_width", t.common_width},   {"input_size", t.input_size}};
}

json to_json(const RunConfig& cfg) {
  return {{"preset", cfg.preset},
          {"train", to_json(cfg.train)},
          {"backbone_a", backbone_json(cfg.backbone_a)},
          {"backbone_b", backbone_json(cfg.backbone_b)},
          {"reduction", cfg.reduction},
          {"spatial_kernel", cfg.spatial_kernel},
          {"fusion_mode", fusion_mode_name(cfg.fusion_mode)},
          {"data_dir", cfg.data_dir},
          {"output_dir", cfg.output_dir},
          {"hus_threshold", cfg.hus_threshold ? json(*cfg.hus_threshold) : json(nullptr)}};
}

RunConfig merge_run_config(const json& j, RunConfig cfg) {
  check_keys(j, {"preset", "train", "backbone_a", "backbone_b", "reduction", "spatial_kernel",
                 "fusion_mode", "data_dir", "output_dir", "hus_threshold"},
             "config");
  if (j.contains("preset")) {
    std::string name;
    read(j, "preset", name, "config");
    cfg = preset_config(name);
  }
  if (j.contains("train")) {
    const json& t = j.at("train");
    check_keys(t, {"learning_rate", "weight_decay", "batch_size", "max_epochs", "dropout_rate",
                   "mc_passes", "seed", "optimizer", "common_width", "input_size"},
               "train");
    read(t, "learning_rate", cfg.train.learning_rate, "train");
    read(t, "weight_decay", cfg.train.weight_decay, "train");
    read(t, "batch_size", cfg.train.batch_size, "train");
    read(t, "max_epochs", cfg.train.max_epochs, "train");
    read(t, "dropout_rate", cfg.train.dropout_rate, "train");
    read(t, "mc_passes", cfg.train.mc_passes, "train");
    read(t, "seed", cfg.train.seed, "train");
    read(t, "optimizer", cfg.train.optimizer, "train");
    read(t, "common_width", cfg.train.common_width, "train");
    read(t, "input_size", cfg.train.input_size, "train");
  }
  if (j.contains("backbone_a")) read_backbone(j.at("backbone_a"), cfg.backbone_a, "backbone_a");
  if (j.contains("backbone_b")) read_backbone(j.at("backbone_b"), cfg.backbone_b, "backbone_b");
  read(j, "reduction", cfg.reduction, "config");
  read(j, "spatial_kernel", cfg.spatial_kernel, "config");
  if (j.contains("fusion_mode")) {
    std::string mode;
    read(j, "fusion_mode", mode, "config");
    cfg.fusion_mode = parse_fusion_mode(mode);
  }
  read(j, "data_dir", cfg.data_dir, "config");
  read(j, "output_dir", cfg.output_dir, "config");
  if (j.contains("hus_threshold")) {
    if (j.at("hus_threshold").is_null()) {
      cfg.hus_threshold.reset();
    } else {
      double t = 0.0;
      read(j, "hus_threshold", t, "config");
      cfg.hus_threshold = t;
    }
  }
  return cfg;
}

json to_json(const ModelConfig& m) {
  return {{"backbone_a", backbone_json(m.backbone_a)},
          {"backbone_b", backbone_json(m.backbone_b)},
          {"input_size", m.input_size()},
          {"fusion_width", m.fusion_width},
          {"reduction", m.reduction},
          {"spatial_kernel", m.spatial_kernel},
          {"num_classes", m.num_classes},
          {"dropout_rate", m.dropout_rate},
          {"fusion_mode", fusion_mode_name(m.fusion_mode)}};
}

ModelConfig model_config_from_json(const json& j) {
  check_keys(j, {"backbone_a", "backbone_b", "input_size", "fusion_width", "reduction",
                 "spatial_kernel", "num_classes", "dropout_rate", "fusion_mode"},
             "model");
  ModelConfig m;
  if (j.contains("backbone_a")) read_backbone(j.at("backbone_a"), m.backbone_a, "backbone_a");
  if (j.contains("backbone_b")) read_backbone(j.at("backbone_b"), m.backbone_b, "backbone_b");
  Index size = m.input_size();
  read(j, "input_size", size, "model");
  m.backbone_a.input_size = m.backbone_b.input_size = size;
  read(j, "fusion_width", m.fusion_width, "model");
  read(j, "reduction", m.reduction, "model");
  read(j, "spatial_kernel", m.spatial_kernel, "model");
  read(j, "num_classes", m.num_classes, "model");
  read(j, "dropout_rate", m.dropout_rate, "model");
  if (j.contains("fusion_mode")) {
    std::string mode;
    read(j, "fusion_mode", mode, "model");
    m.fusion_mode = parse_fusion_mode(mode);
  }
  m.validate();
  return m;
}

}  // namespace dcat
