#include "dcat/backbone.hpp"

#include <map>

#include "dcat/ops.hpp"
#include "dcat/tensor_io.hpp"

namespace dcat {

void BackboneConfig::validate() const {
  if (stage_channels.size() < 2) throw ConfigError("backbone needs at least two stages");
  for (Index c : stage_channels) {
    if (c <= 0) throw ConfigError("stage channel widths must be positive");
  }
  if (in_channels <= 0) throw ConfigError("input channels must be positive");
  const Index reduction = Index{1} << stage_channels.size();
  if (input_size <= 0 || input_size % reduction != 0) {
    throw ConfigError("stride schedule of " + std::to_string(stage_channels.size()) +
                      " halvings cannot reach integral taps from input size " +
                      std::to_string(input_size));
  }
}

Index BackboneConfig::fine_size() const {
  return input_size >> (stage_channels.size() - 1);
}

Index BackboneConfig::coarse_size() const { return input_size >> stage_channels.size(); }

BackboneConfig default_backbone_config(NetworkId id, Index input_size) {
  BackboneConfig cfg;
  cfg.network_id = id;
  cfg.input_size = input_size;
  cfg.use_residual = id == NetworkId::kB;
  return cfg;
}

template <typename S>
void FeatureMapSet<S>::validate(std::optional<Index> fine_size) const {
  const std::pair<const char*, const BasicTensor<S>*> maps[] = {
      {"a1", &a1}, {"a2", &a2}, {"b1", &b1}, {"b2", &b2}};
  for (const auto& [key, t] : maps) {
    if (!t->defined()) throw FormatError("feature map '" + std::string(key) + "' missing");
    if (t->rank() != 3) {
      throw FormatError("feature map '" + std::string(key) + "' must be C x H x W, got " +
                        shape_string(t->shape()));
    }
    if (t->dim(1) != t->dim(2)) {
      throw FormatError("feature map '" + std::string(key) + "' is not square: " +
                        shape_string(t->shape()));
    }
  }
  const Index fine = fine_size.value_or(2 * a2.dim(1));
  const auto check = [](const char* key, const BasicTensor<S>& t, Index want) {
    if (t.dim(1) != want) {
      throw FormatError("feature map '" + std::string(key) + "' has spatial size " +
                        std::to_string(t.dim(1)) + ", expected " + std::to_string(want));
    }
  };
  if (fine % 2 != 0) throw FormatError("scale-1 spatial size must be even, got " + std::to_string(fine));
  check("a1", a1, fine);
  check("b1", b1, fine);
  check("a2", a2, fine / 2);
  check("b2", b2, fine / 2);
}

template <typename S>
Backbone<S>::Backbone(BackboneConfig cfg, Rng& rng) : cfg_(std::move(cfg)) {
  cfg_.validate();
  Index in = cfg_.in_channels;
  for (Index out : cfg_.stage_channels) {
    Stage st;
    st.conv_w = he_uniform<S>({out, in, 3, 3}, in * 9, rng);
    st.conv_b = zero_param<S>({out, 1, 1});
    if (cfg_.use_residual) {
      st.res_w = he_uniform<S>({out, out, 3, 3}, out * 9, rng);
      st.res_b = zero_param<S>({out, 1, 1});
    }
    stages_.push_back(std::move(st));
    in = out;
  }
}

template <typename S>
BasicTensor<S> residual_block(const BasicTensor<S>& x, const BasicTensor<S>& w,
                              const BasicTensor<S>& b) {
  return relu(add(x, add(conv2d(x, w, 1, 1), b)));
}

template <typename S>
typename Backbone<S>::Taps Backbone<S>::forward(const T& x) const {
  if (x.rank() != 3 || x.dim(0) != cfg_.in_channels || x.dim(1) != cfg_.input_size ||
      x.dim(2) != cfg_.input_size) {
    throw DimensionError("backbone expects input " +
                         shape_string({cfg_.in_channels, cfg_.input_size, cfg_.input_size}) +
                         ", got " + shape_string(x.shape()));
  }
  Taps taps;
  T h = x;
  const std::size_t n = stages_.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Stage& st = stages_[i];
    h = relu(add(conv2d(h, st.conv_w, 1, 1), st.conv_b));
    h = adaptive_avg_pool(h, h.dim(1) / 2, h.dim(2) / 2);
    if (cfg_.use_residual) h = residual_block(h, st.res_w, st.res_b);
    if (i == n - 2) taps.fine = h;
  }
  taps.coarse = h;
  return taps;
}

template <typename S>
std::vector<NamedParam<S>> Backbone<S>::parameters(const std::string& prefix) {
  std::vector<NamedParam<S>> out;
  for (std::size_t i = 0; i < stages_.size(); ++i) {
    const std::string p = prefix + ".stage" + std::to_string(i);
    out.push_back({p + ".conv.w", &stages_[i].conv_w});
    out.push_back({p + ".conv.b", &stages_[i].conv_b});
    if (cfg_.use_residual) {
      out.push_back({p + ".res.w", &stages_[i].res_w});
      out.push_back({p + ".res.b", &stages_[i].res_b});
    }
  }
  return out;
}

template <typename S>
FeatureMapSet<S> extract_multiscale(const Backbone<S>& net_a, const Backbone<S>& net_b,
                                    const BasicTensor<S>& x) {
  auto ta = net_a.forward(x);
  auto tb = net_b.forward(x);
  FeatureMapSet<S> fs{ta.fine, ta.coarse, tb.fine, tb.coarse};
  fs.validate();
  return fs;
}

void export_feature_maps(const std::filesystem::path& path, const FeatureMapSet<float>& fs) {
  fs.validate();
  save_container(path, {{"a1", fs.a1}, {"a2", fs.a2}, {"b1", fs.b1}, {"b2", fs.b2}});
}

FeatureMapSet<float> decode_feature_maps(std::string_view bytes, std::optional<Index> fine_size) {
  std::map<std::string, Tensor> by_key;
  for (auto& rec : decode_container(bytes)) by_key.emplace(rec.key, std::move(rec.tensor));
  FeatureMapSet<float> fs;
  const std::pair<const char*, Tensor*> slots[] = {
      {"a1", &fs.a1}, {"a2", &fs.a2}, {"b1", &fs.b1}, {"b2", &fs.b2}};
  for (const auto& [key, slot] : slots) {
    auto it = by_key.find(key);
    if (it == by_key.end()) throw FormatError("feature container lacks record '" + std::string(key) + "'");
    *slot = it->second;
  }
  fs.validate(fine_size);
  return fs;
}

FeatureMapSet<float> import_feature_maps(const std::filesystem::path& path,
                                         std::optional<Index> fine_size) {
  return decode_feature_maps(read_file(path), fine_size);
}

template struct FeatureMapSet<float>;
template struct FeatureMapSet<double>;
template class Backbone<float>;
template class Backbone<double>;
template BasicTensor<float> residual_block(const BasicTensor<float>&, const BasicTensor<float>&,
                                           const BasicTensor<float>&);
template BasicTensor<double> residual_block(const BasicTensor<double>&,
                                            const BasicTensor<double>&,
                                            const BasicTensor<double>&);
template FeatureMapSet<float> extract_multiscale(const Backbone<float>&, const Backbone<float>&,
                                                 const BasicTensor<float>&);
template FeatureMapSet<double> extract_multiscale(const Backbone<double>&,
                                                  const Backbone<double>&,
                                                  const BasicTensor<double>&);

}  // namespace dcat
