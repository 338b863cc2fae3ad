#include <gtest/gtest.h>

#include <filesystem>

#include <unistd.h>

#include "dcat/backbone.hpp"
#include "dcat/ops.hpp"
#include "dcat/tensor_io.hpp"
#include "gradcheck.hpp"
#include "oracles.hpp"

namespace dcat {
namespace {

using testing::DTensor;
using testing::random_tensor;

TEST(BackboneConfig, TapSizes) {
  EXPECT_EQ(default_backbone_config(NetworkId::kA, 224).fine_size(), 28);
  EXPECT_EQ(default_backbone_config(NetworkId::kA, 224).coarse_size(), 14);
  EXPECT_EQ(default_backbone_config(NetworkId::kB, 64).fine_size(), 8);
  EXPECT_EQ(default_backbone_config(NetworkId::kB, 64).coarse_size(), 4);
  EXPECT_FALSE(default_backbone_config(NetworkId::kA).use_residual);
  EXPECT_TRUE(default_backbone_config(NetworkId::kB).use_residual);
}

TEST(BackboneConfig, RejectsUnreachableInputSize) {
  EXPECT_THROW(default_backbone_config(NetworkId::kA, 100).validate(), ConfigError);
  BackboneConfig one_stage;
  one_stage.stage_channels = {8};
  EXPECT_THROW(one_stage.validate(), ConfigError);
}

TEST(Backbone, FullScaleTapShapes) {
  Rng rng(1);
  const Backbone<float> net(default_backbone_config(NetworkId::kB, 224), rng);
  const auto taps = net.forward(Tensor::zeros({3, 224, 224}));
  EXPECT_EQ(taps.fine.shape(), (Shape{64, 28, 28}));
  EXPECT_EQ(taps.coarse.shape(), (Shape{128, 14, 14}));
}

TEST(Backbone, RejectsWrongInputShape) {
  Rng rng(1);
  const Backbone<float> net(default_backbone_config(NetworkId::kA, 64), rng);
  EXPECT_THROW(net.forward(Tensor::zeros({3, 32, 32})), DimensionError);
  EXPECT_THROW(net.forward(Tensor::zeros({1, 64, 64})), DimensionError);
}

TEST(Backbone, SameSeedSameWeights) {
  Rng r1(5), r2(5);
  Backbone<float> a(default_backbone_config(NetworkId::kB, 64), r1);
  Backbone<float> b(default_backbone_config(NetworkId::kB, 64), r2);
  auto pa = a.parameters("n"), pb = b.parameters("n");
  ASSERT_EQ(pa.size(), pb.size());
  for (std::size_t i = 0; i < pa.size(); ++i) {
    EXPECT_EQ(pa[i].name, pb[i].name);
    EXPECT_TRUE((pa[i].tensor->data() == pb[i].tensor->data()).all());
  }
}

TEST(ResidualBlock, ZeroWeightsAreIdentityOnNonNegativeInput) {
  Rng rng(2);
  const auto x = random_tensor<double>({3, 4, 4}, rng, 0.0, 2.0);
  const auto y = residual_block(x, DTensor::zeros({3, 3, 3, 3}), DTensor::zeros({3, 1, 1}));
  for (Index i = 0; i < x.size(); ++i) EXPECT_DOUBLE_EQ(y[i], x[i]);
}

TEST(ResidualBlock, Gradient) {
  Rng rng(3);
  DTensor x = random_tensor<double>({2, 4, 4}, rng, -1, 1, true);
  DTensor w = random_tensor<double>({2, 2, 3, 3}, rng, -0.5, 0.5, true);
  DTensor b = random_tensor<double>({2, 1, 1}, rng, -0.5, 0.5, true);
  const auto r = testing::gradcheck([&] { return testing::weighted_sum(residual_block(x, w, b)); },
                                    {{"x", &x}, {"w", &w}, {"b", &b}});
  EXPECT_LT(r.max_rel_error, 1e-3) << r.worst;
}

TEST(Backbone, TinyForwardGradient) {
  Rng rng(4);
  BackboneConfig cfg = default_backbone_config(NetworkId::kB, 8);
  cfg.stage_channels = {2, 3, 2};
  Backbone<double> net(cfg, rng);
  DTensor x = random_tensor<double>({3, 8, 8}, rng, -1, 1, true);
  std::vector<testing::NamedInput> inputs{{"x", &x}};
  for (auto& p : net.parameters("net")) inputs.emplace_back(p.name, p.tensor);
  // Non-zero biases keep ReLUs away from exactly-zero pre-activations.
  for (auto& st : net.stages()) st.conv_b.mutable_data().setConstant(0.05);
  const auto r = testing::gradcheck(
      [&] {
        const auto taps = net.forward(x);
        return add(testing::weighted_sum(taps.fine), testing::weighted_sum(taps.coarse, 1));
      },
      inputs);
  EXPECT_LT(r.max_rel_error, 1e-3) << r.worst;
  EXPECT_LE(r.skipped, r.checked / 10);
}

FeatureMapSet<float> maps(Index fine, Index ca = 4, Index cb = 6) {
  return {Tensor::zeros({ca, fine, fine}), Tensor::zeros({ca * 2, fine / 2, fine / 2}),
          Tensor::zeros({cb, fine, fine}), Tensor::zeros({cb * 2, fine / 2, fine / 2})};
}

TEST(FeatureMapSet, ValidatesGeometry) {
  EXPECT_NO_THROW(maps(8).validate());
  EXPECT_NO_THROW(maps(8).validate(8));
  EXPECT_THROW(maps(8).validate(28), FormatError);
  auto bad = maps(8);
  bad.b2 = Tensor::zeros({12, 3, 3});
  EXPECT_THROW(bad.validate(), FormatError);
  bad = maps(8);
  bad.a1 = Tensor::zeros({4, 8, 7});
  EXPECT_THROW(bad.validate(), FormatError);
  bad = maps(8);
  bad.a2 = Tensor::zeros({8, 4});
  EXPECT_THROW(bad.validate(), FormatError);
}

TEST(FeatureMapSet, ExportImportRoundTrip) {
  namespace fs = std::filesystem;
  const fs::path path = fs::temp_directory_path() / ("dcat_maps_" + std::to_string(::getpid()) + ".dcat");
  Rng rng(8);
  FeatureMapSet<float> m{random_tensor<float>({4, 8, 8}, rng), random_tensor<float>({8, 4, 4}, rng),
                         random_tensor<float>({6, 8, 8}, rng), random_tensor<float>({12, 4, 4}, rng)};
  export_feature_maps(path, m);
  const auto back = import_feature_maps(path, 8);
  EXPECT_TRUE((back.b2.data() == m.b2.data()).all());
  EXPECT_THROW(import_feature_maps(path, 28), FormatError);
  save_container(path, {{"a1", m.a1}, {"a2", m.a2}, {"b1", m.b1}});
  EXPECT_THROW(import_feature_maps(path), FormatError);
  fs::remove(path);
}

}  // namespace
}  // namespace dcat
