#include <gtest/gtest.h>

#include <cmath>
#include <cstring>

#include "dcat/model.hpp"
#include "dcat/ops.hpp"
#include "dcat/uncertainty.hpp"
#include "gradcheck.hpp"
#include "oracles.hpp"

namespace dcat {
namespace {

using testing::DTensor;
using testing::random_tensor;

ModelConfig tiny_config(double dropout = 0.0, FusionMode mode = FusionMode::kCrossAttention) {
  ModelConfig cfg;
  cfg.backbone_a = default_backbone_config(NetworkId::kA, 16);
  cfg.backbone_b = default_backbone_config(NetworkId::kB, 16);
  cfg.backbone_a.stage_channels = {2, 3, 4};
  cfg.backbone_b.stage_channels = {2, 4, 3};
  cfg.fusion_width = 4;
  cfg.reduction = 2;
  cfg.num_classes = 3;
  cfg.dropout_rate = dropout;
  cfg.fusion_mode = mode;
  return cfg;
}

TEST(ModelConfig, Validation) {
  ModelConfig cfg = tiny_config();
  cfg.reduction = 3;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = tiny_config();
  cfg.backbone_b.input_size = 32;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = tiny_config();
  cfg.dropout_rate = 1.0;
  EXPECT_THROW(cfg.validate(), ConfigError);
}

TEST(Model, ForwardIsDistribution) {
  const DcatModel<float> model(tiny_config(), 3);
  Rng rng(1);
  const auto probs = model.forward(random_tensor<float>({3, 16, 16}, rng), nullptr);
  ASSERT_EQ(probs.shape(), (Shape{3}));
  EXPECT_NEAR(probs.data().sum(), 1.0f, 1e-6f);
  EXPECT_EQ(model.features(random_tensor<float>({3, 16, 16}, rng)).shape(), (Shape{8}));
}

TEST(Model, AblationDropsSecondNetworkAndAttention) {
  DcatModel<float> full(tiny_config(), 3);
  DcatModel<float> ablation(tiny_config(0.0, FusionMode::kSingleBackbone), 3);
  auto names = [](DcatModel<float>& m) {
    std::vector<std::string> out;
    for (auto& p : m.parameters()) out.push_back(p.name);
    return out;
  };
  const auto full_names = names(full), ab_names = names(ablation);
  EXPECT_LT(ab_names.size(), full_names.size());
  for (const auto& n : ab_names) {
    EXPECT_EQ(n.find("backbone_b"), std::string::npos) << n;
    EXPECT_EQ(n.find("attend"), std::string::npos) << n;
  }
  Rng rng(2);
  const auto probs = ablation.forward(random_tensor<float>({3, 16, 16}, rng), nullptr);
  EXPECT_NEAR(probs.data().sum(), 1.0f, 1e-6f);
}

TEST(Model, SameSeedSameParameters) {
  DcatModel<float> a(tiny_config(), 9), b(tiny_config(), 9), c(tiny_config(), 10);
  const auto pa = a.export_parameters(), pb = b.export_parameters(), pc = c.export_parameters();
  bool any_diff = false;
  for (std::size_t i = 0; i < pa.size(); ++i) {
    EXPECT_TRUE((pa[i].tensor.data() == pb[i].tensor.data()).all());
    any_diff = any_diff || !(pa[i].tensor.data() == pc[i].tensor.data()).all();
  }
  EXPECT_TRUE(any_diff);
}

TEST(Model, ImportParameters) {
  DcatModel<float> a(tiny_config(), 1), b(tiny_config(), 2);
  b.import_parameters(a.export_parameters());
  Rng rng(3);
  const auto x = random_tensor<float>({3, 16, 16}, rng);
  EXPECT_TRUE((a.forward(x, nullptr).data() == b.forward(x, nullptr).data()).all());
  auto recs = a.export_parameters();
  recs[0].tensor = Tensor::zeros({1});
  EXPECT_THROW(b.import_parameters(recs), FormatError);
  recs.erase(recs.begin());
  EXPECT_THROW(b.import_parameters(recs), FormatError);
}

TEST(Model, FusionCbamClassifierGradient) {
  DcatModel<double> model(tiny_config(), 4);
  Rng rng(5);
  FeatureMapSet<double> fs{random_tensor<double>({3, 4, 4}, rng, -1, 1, true),
                           random_tensor<double>({4, 2, 2}, rng, -1, 1, true),
                           random_tensor<double>({4, 4, 4}, rng, -1, 1, true),
                           random_tensor<double>({3, 2, 2}, rng, -1, 1, true)};
  std::vector<testing::NamedInput> inputs{{"a1", &fs.a1}, {"a2", &fs.a2}, {"b1", &fs.b1}, {"b2", &fs.b2}};
  for (auto& p : model.parameters()) {
    if (p.name.rfind("backbone", 0) != 0) inputs.emplace_back(p.name, p.tensor);
  }
  const auto r = testing::gradcheck(
      [&] { return cross_entropy(model.head(model.features_from_maps(fs), nullptr), 2); }, inputs);
  EXPECT_LT(r.max_rel_error, 1e-3) << r.worst;
  EXPECT_LE(r.skipped, r.checked / 20);
}

// ---- entropy ----

TEST(Entropy, OneHotIsZero) {
  Eigen::VectorXd p = Eigen::VectorXd::Zero(5);
  p[3] = 1;
  EXPECT_EQ(predictive_entropy(p), 0.0);
}

TEST(Entropy, UniformIsLogC) {
  for (int c : {2, 3, 4, 10}) {
    EXPECT_NEAR(predictive_entropy(Eigen::VectorXd::Constant(c, 1.0 / c)), std::log(double(c)), 1e-9);
  }
}

TEST(Entropy, BoundsOnRandomSimplex) {
  Rng rng(6);
  for (int i = 0; i < 20000; ++i) {
    const Index c = 2 + i % 9;
    const auto p = testing::random_simplex(c, rng);
    const double h = predictive_entropy(p);
    ASSERT_GE(h, 0.0);
    ASSERT_LE(h, std::log(double(c)) + 1e-12);
    ASSERT_NEAR(h, testing::oracle_entropy(p), 1e-12);
  }
}

TEST(Entropy, RejectsInvalidVectors) {
  EXPECT_THROW(predictive_entropy(Eigen::Vector2d(0.7, 0.7)), InputError);
  EXPECT_THROW(predictive_entropy(Eigen::Vector2d(1.2, -0.2)), InputError);
  EXPECT_THROW(predictive_entropy(Eigen::VectorXd()), InputError);
  EXPECT_NO_THROW(predictive_entropy(Eigen::Vector2d(0.5, 0.50005)));
}

// ---- MC dropout ----

bool bit_equal(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  return a.size() == b.size() && std::memcmp(a.data(), b.data(), sizeof(double) * a.size()) == 0;
}

TEST(McForward, RejectsZeroPasses) {
  const DcatModel<float> model(tiny_config(), 1);
  EXPECT_THROW(mc_forward(model, Tensor::zeros({3, 16, 16}), 0, 1), ParameterError);
}

TEST(McForward, DropoutFreeModelIsDeterministic) {
  const DcatModel<float> model(tiny_config(0.0), 1);
  Rng rng(7);
  const auto x = random_tensor<float>({3, 16, 16}, rng);
  const auto one = mc_forward(model, x, 1, 5);
  const auto many = mc_forward(model, x, 100, 5);
  EXPECT_TRUE(bit_equal(one.posterior, many.posterior));
}

TEST(McForward, FixedSeedIsReproducibleAndPosteriorIsPassMean) {
  const DcatModel<float> model(tiny_config(0.5), 1);
  Rng rng(8);
  const auto x = random_tensor<float>({3, 16, 16}, rng);
  const auto a = mc_forward(model, x, 100, 42);
  const auto b = mc_forward(model, x, 100, 42);
  EXPECT_TRUE(bit_equal(a.posterior, b.posterior));
  EXPECT_TRUE(a.passes == b.passes);
  EXPECT_FALSE(a.passes.row(0) == a.passes.row(1)) << "dropout should vary between passes";
  for (Index c = 0; c < a.posterior.size(); ++c) {
    double total = 0;
    for (Index m = 0; m < 100; ++m) total += a.passes(m, c);
    EXPECT_NEAR(a.posterior[c], total / 100, 1e-12);
  }
  EXPECT_NEAR(a.entropy, testing::oracle_entropy(a.posterior), 1e-12);
  const auto other = mc_forward(model, x, 100, 43);
  EXPECT_FALSE(bit_equal(a.posterior, other.posterior));
}

TEST(McForward, PassStreamsAreIndependentOfCount) {
  // pass m always draws from stream m, so a longer run extends a shorter one
  const DcatModel<float> model(tiny_config(0.5), 1);
  Rng rng(9);
  const auto x = random_tensor<float>({3, 16, 16}, rng);
  const auto a = mc_forward(model, x, 10, 3);
  const auto b = mc_forward(model, x, 20, 3);
  EXPECT_TRUE(a.passes == b.passes.topRows(10));
}

// ---- flagging ----

UncertaintyRecord record(std::string id, double entropy, Index pred, Index truth) {
  UncertaintyRecord r;
  r.sample_id = std::move(id);
  r.entropy = entropy;
  r.predicted_label = pred;
  r.true_label = truth;
  r.posterior = Eigen::Vector2d(0.5, 0.5);
  return r;
}

TEST(Flag, SortsAndSummarises) {
  std::vector<UncertaintyRecord> recs{record("a", 0.1, 0, 0), record("b", 0.6, 1, 0),
                                      record("c", 0.4, 0, 0), record("d", 0.6, 1, 1)};
  const auto res = flag_high_uncertainty(recs, 0.3);
  ASSERT_EQ(res.flagged.size(), 3u);
  EXPECT_EQ(res.flagged[0].sample_id, "b");
  EXPECT_EQ(res.flagged[1].sample_id, "d");
  EXPECT_EQ(res.flagged[2].sample_id, "c");
  EXPECT_FALSE(recs[0].flagged);
  EXPECT_TRUE(recs[1].flagged);
  EXPECT_NEAR(res.summary.mean_entropy, 0.425, 1e-12);
  EXPECT_NEAR(res.summary.std_entropy, std::sqrt((0.325 * 0.325 + 0.175 * 0.175 + 0.025 * 0.025 + 0.175 * 0.175) / 4), 1e-12);
  EXPECT_EQ(res.summary.hus_count, 3);
  EXPECT_EQ(res.summary.misclassified_count, 1);
}

TEST(Flag, ThresholdAboveMaxIsEmptyAndStrict) {
  std::vector<UncertaintyRecord> recs{record("a", 0.5, 0, 0)};
  EXPECT_TRUE(flag_high_uncertainty(recs, 0.5).flagged.empty());
  EXPECT_TRUE(flag_high_uncertainty(recs, 10).flagged.empty());
  std::vector<UncertaintyRecord> none;
  EXPECT_EQ(flag_high_uncertainty(none, 0.1).summary.hus_count, 0);
  EXPECT_THROW(flag_high_uncertainty(recs, -1), ParameterError);
  EXPECT_NEAR(default_hus_threshold(4), 0.5 * std::log(4.0), 1e-15);
}

}  // namespace
}  // namespace dcat
