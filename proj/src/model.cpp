#include "dcat/model.hpp"

#include <map>

#include "dcat/ops.hpp"

namespace dcat {

void ModelConfig::validate() const {
  backbone_a.validate();
  backbone_b.validate();
  if (backbone_a.input_size != backbone_b.input_size ||
      backbone_a.in_channels != backbone_b.in_channels ||
      backbone_a.stage_channels.size() != backbone_b.stage_channels.size()) {
    throw ConfigError("both backbones must share input geometry and stage count");
  }
  if (fusion_width <= 0) throw ConfigError("fusion width must be positive");
  if (reduction < 1 || fused_channels() % reduction != 0) {
    throw ConfigError("fused channel count " + std::to_string(fused_channels()) +
                      " is not divisible by reduction " + std::to_string(reduction));
  }
  if (spatial_kernel < 1 || spatial_kernel % 2 == 0) throw ConfigError("spatial kernel must be odd");
  if (num_classes < 2) throw ConfigError("need at least two classes");
  if (!(dropout_rate >= 0.0 && dropout_rate < 1.0)) {
    throw ConfigError("dropout rate must lie in [0, 1)");
  }
}

template <typename S>
DcatModel<S>::DcatModel(ModelConfig cfg, std::uint64_t seed) : cfg_(std::move(cfg)) {
  cfg_.validate();
  Rng rng_a = make_rng(seed, 1);
  Rng rng_b = make_rng(seed, 2);
  Rng rng_f = make_rng(seed, 3);
  Rng rng_c = make_rng(seed, 4);
  net_a_ = Backbone<S>(cfg_.backbone_a, rng_a);
  if (cfg_.fusion_mode == FusionMode::kCrossAttention) net_b_ = Backbone<S>(cfg_.backbone_b, rng_b);
  fusion_ = FusionParams<S>::init(cfg_.fusion_width, cfg_.backbone_a.fine_channels(),
                                  cfg_.backbone_a.coarse_channels(),
                                  cfg_.backbone_b.fine_channels(),
                                  cfg_.backbone_b.coarse_channels(), rng_f);
  cbam_ = CbamParams<S>::init(cfg_.fused_channels(), cfg_.reduction, cfg_.spatial_kernel,
                              cfg_.num_classes, rng_c);
}

template <typename S>
typename DcatModel<S>::T DcatModel<S>::fuse(const FeatureMapSet<S>& fs) const {
  if (cfg_.fusion_mode == FusionMode::kCrossAttention) return multiscale_fuse(fs, fusion_);
  auto fine = project_1x1(fs.a1, fusion_.scales[0].proj_a);
  auto coarse = project_1x1(fs.a2, fusion_.scales[1].proj_a);
  return concat<S>({downsample_to(fine, coarse.dim(1), coarse.dim(2)), coarse}, 0);
}

template <typename S>
typename DcatModel<S>::T DcatModel<S>::features_from_maps(const FeatureMapSet<S>& fs) const {
  return pool_features(refine(fuse(fs), cbam_));
}

template <typename S>
typename DcatModel<S>::T DcatModel<S>::features(const T& image) const {
  if (cfg_.fusion_mode == FusionMode::kSingleBackbone) {
    auto taps = net_a_.forward(image);
    FeatureMapSet<S> fs{taps.fine, taps.coarse, taps.fine, taps.coarse};
    return features_from_maps(fs);
  }
  return features_from_maps(extract_multiscale(net_a_, net_b_, image));
}

template <typename S>
typename DcatModel<S>::T DcatModel<S>::head(const T& pooled, Rng* dropout_rng) const {
  if (dropout_rng == nullptr) return classifier_head(pooled, cbam_);
  return classifier_head(dropout(pooled, cfg_.dropout_rate, *dropout_rng), cbam_);
}

template <typename S>
std::vector<NamedParam<S>> DcatModel<S>::parameters() {
  std::vector<NamedParam<S>> out = net_a_.parameters("backbone_a");
  if (cfg_.fusion_mode == FusionMode::kCrossAttention) {
    for (auto& p : net_b_.parameters("backbone_b")) out.push_back(p);
    for (auto& p : fusion_.parameters("fusion")) out.push_back(p);
  } else {
    out.push_back({"fusion.scale1.proj_a", &fusion_.scales[0].proj_a});
    out.push_back({"fusion.scale2.proj_a", &fusion_.scales[1].proj_a});
  }
  for (auto& p : cbam_.parameters("cbam")) out.push_back(p);
  return out;
}

template <typename S>
std::vector<TensorRecord> DcatModel<S>::export_parameters() {
  std::vector<TensorRecord> out;
  for (auto& p : parameters()) out.push_back({"param/" + p.name, p.tensor->template cast<float>()});
  return out;
}

template <typename S>
void DcatModel<S>::import_parameters(const std::vector<TensorRecord>& records) {
  std::map<std::string, const Tensor*> by_key;
  for (const auto& r : records) by_key[r.key] = &r.tensor;
  for (auto& p : parameters()) {
    auto it = by_key.find("param/" + p.name);
    if (it == by_key.end()) throw FormatError("checkpoint lacks parameter '" + p.name + "'");
    if (it->second->shape() != p.tensor->shape()) {
      throw FormatError("parameter '" + p.name + "' has shape " +
                        shape_string(it->second->shape()) + ", model expects " +
                        shape_string(p.tensor->shape()));
    }
    p.tensor->mutable_data() = it->second->data().template cast<S>();
  }
}

template class DcatModel<float>;
template class DcatModel<double>;

}  // namespace dcat
