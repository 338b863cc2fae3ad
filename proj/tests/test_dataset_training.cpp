#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <numbers>

#include <unistd.h>

#include "dcat/dataset.hpp"
#include "dcat/ops.hpp"
#include "dcat/tensor_io.hpp"
#include "dcat/training.hpp"
#include "oracles.hpp"

namespace dcat {
namespace {

namespace fs = std::filesystem;

// Nearest template over a fine grid of phases.
Index template_oracle(const SyntheticSpec& spec, const Tensor& image) {
  double best = INFINITY;
  Index arg = 0;
  for (Index c = 0; c < spec.n_classes; ++c) {
    for (int j = 0; j < 64; ++j) {
      const auto t = synthetic_template(spec, c, 2 * std::numbers::pi * j / 64);
      const double d = (t.data() - image.data()).square().sum();
      if (d < best) {
        best = d;
        arg = c;
      }
    }
  }
  return arg;
}

TEST(Synthetic, SplitSizesAndDeterminism) {
  SyntheticSpec spec;
  spec.n_per_class = 20;
  spec.image_size = 16;
  const auto a = make_synthetic_dataset(spec, 3);
  const auto b = make_synthetic_dataset(spec, 3);
  const auto c = make_synthetic_dataset(spec, 4);
  ASSERT_EQ(a.train.samples.size(), 64u);
  ASSERT_EQ(a.test.samples.size(), 16u);
  for (std::size_t i = 0; i < a.train.samples.size(); ++i) {
    EXPECT_TRUE((a.train.samples[i].image.data() == b.train.samples[i].image.data()).all());
    EXPECT_EQ(a.train.samples[i].id, b.train.samples[i].id);
  }
  EXPECT_FALSE((a.train.samples[0].image.data() == c.train.samples[0].image.data()).all());
  for (const auto& s : a.test.samples) {
    for (const auto& t : a.train.samples) ASSERT_NE(s.id, t.id);
  }
  std::vector<int> per_class(4, 0);
  for (const auto& s : a.test.samples) ++per_class[s.label];
  EXPECT_EQ(per_class, std::vector<int>(4, 4));
}

TEST(Synthetic, RejectsBadSpecs) {
  SyntheticSpec spec;
  spec.n_classes = 1;
  EXPECT_THROW(make_synthetic_dataset(spec, 0), ConfigError);
  spec = {};
  spec.train_fraction = 1.0;
  EXPECT_THROW(make_synthetic_dataset(spec, 0), ConfigError);
}

TEST(Synthetic, NoiseFreeTemplatesAreSeparable) {
  SyntheticSpec spec;
  spec.n_per_class = 10;
  spec.image_size = 32;
  spec.noise_sigma = 0.0;
  const auto data = make_synthetic_dataset(spec, 1);
  for (const auto& s : data.test.samples) EXPECT_EQ(template_oracle(spec, s.image), s.label);
}

TEST(Synthetic, TemplateOracleCalibration) {
  // 4 classes, 64x64, sigma 0.3: the nearest-template classifier must stay >= 95%.
  SyntheticSpec spec;
  spec.n_per_class = 50;
  const auto data = make_synthetic_dataset(spec, 2);
  Index correct = 0;
  for (const auto& s : data.test.samples) correct += template_oracle(spec, s.image) == s.label;
  EXPECT_GE(double(correct) / double(data.test.samples.size()), 0.95);
}

TEST(DatasetDir, RoundTripAndValidation) {
  const fs::path dir = fs::temp_directory_path() / ("dcat_ds_" + std::to_string(::getpid()));
  SyntheticSpec spec;
  spec.n_per_class = 5;
  spec.n_classes = 3;
  spec.image_size = 8;
  const auto data = make_synthetic_dataset(spec, 1);
  write_dataset_dir(dir, data);
  const auto back = read_dataset_dir(dir);
  ASSERT_EQ(back.train.samples.size(), data.train.samples.size());
  EXPECT_EQ(back.train.class_names, data.train.class_names);
  EXPECT_EQ(back.test.samples[1].id, data.test.samples[1].id);
  EXPECT_TRUE((back.test.samples[1].image.data() == data.test.samples[1].image.data()).all());
  write_file_atomic(dir / "test.csv", "path,label\nimages/c0_0000.dten,7\n");
  EXPECT_THROW(read_dataset_dir(dir), FormatError);
  write_file_atomic(dir / "test.csv", "file,label\n");
  EXPECT_THROW(read_dataset_dir(dir), FormatError);
  fs::remove_all(dir);
}

// ---- optimizer ----

struct AdamFixture : ::testing::Test {
  Tensor w = Tensor::from({3}, {1.0f, -2.0f, 0.5f}, true);
  std::vector<NamedParam<float>> params{{"w", &w}};
  AdamState<float> state;
};

TEST_F(AdamFixture, ZeroGradientZeroDecayIsNoOp) {
  state.reset(params);
  w.mutable_grad().setZero();
  const Tensor::Array before = w.data();
  for (int i = 0; i < 5; ++i) adam_step(params, state, 1e-2, 0.0);
  EXPECT_TRUE((w.data() == before).all());
  EXPECT_EQ(state.t, 5);
}

TEST_F(AdamFixture, ConstantGradientStepApproachesLearningRate) {
  state.reset(params);
  const double lr = 1e-3;
  for (int i = 0; i < 2000; ++i) {
    w.mutable_grad() = Tensor::Array::Constant(3, 0.37f);
    const Tensor::Array before = w.data();
    adam_step(params, state, lr, 0.0);
    if (i > 1500) {
      const Tensor::Array delta = w.data() - before;
      for (Index k = 0; k < 3; ++k) ASSERT_NEAR(delta[k], -lr, lr * 1e-3);
    }
  }
}

TEST_F(AdamFixture, WeightDecayShrinksNorm) {
  state.reset(params);
  double norm = w.data().matrix().norm();
  for (int i = 0; i < 10; ++i) {
    w.zero_grad();
    adam_step(params, state, 1e-2, 1e-1);
    const double next = w.data().matrix().norm();
    ASSERT_LT(next, norm);
    norm = next;
  }
}

TEST_F(AdamFixture, StateMismatchIsContractError) {
  Tensor other = Tensor::zeros({2}, true);
  AdamState<float> s;
  s.reset(params);
  std::vector<NamedParam<float>> two{{"w", &w}, {"o", &other}};
  EXPECT_THROW(adam_step(two, s, 1e-3, 0.0), ContractError);
  s.reset({{"o", &other}});
  EXPECT_THROW(adam_step(params, s, 1e-3, 0.0), ContractError);
}

TEST(TrainConfig, Validation) {
  TrainConfig cfg;
  EXPECT_NO_THROW(cfg.validate());
  cfg.learning_rate = 0;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = {};
  cfg.dropout_rate = 1.0;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = {};
  cfg.batch_size = 0;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = {};
  cfg.optimizer = "sgd";
  EXPECT_THROW(cfg.validate(), ConfigError);
}

// ---- training loop on a small model ----

ModelConfig small_model(Index size, Index classes, double dropout) {
  ModelConfig cfg;
  cfg.backbone_a = default_backbone_config(NetworkId::kA, size);
  cfg.backbone_b = default_backbone_config(NetworkId::kB, size);
  cfg.backbone_a.stage_channels = cfg.backbone_b.stage_channels = {4, 8, 8, 16};
  cfg.fusion_width = 16;
  cfg.reduction = 4;
  cfg.num_classes = classes;
  cfg.dropout_rate = dropout;
  return cfg;
}

SplitDataset small_data(Index size, Index classes, Index per_class, double contrast = 0.5) {
  SyntheticSpec spec;
  spec.n_classes = classes;
  spec.n_per_class = per_class;
  spec.image_size = size;
  spec.contrast = contrast;
  return make_synthetic_dataset(spec, 5);
}

TEST(Train, InitialLossNearLogClasses) {
  const auto data = small_data(32, 4, 10);
  double total = 0;
  for (Index seed = 0; seed < 4; ++seed) {
    const DcatModel<float> model(small_model(32, 4, 0.0), seed);
    for (const auto& s : data.train.samples) total += cross_entropy(model.forward(s.image, nullptr), s.label).item();
  }
  EXPECT_NEAR(total / (4.0 * data.train.samples.size()), std::log(4.0), 0.15);
}

TEST(Train, ZeroLearningRateKeepsLossConstant) {
  const auto data = small_data(32, 2, 10);
  DcatModel<float> model(small_model(32, 2, 0.0), 1);
  TrainConfig cfg;
  cfg.max_epochs = 3;
  cfg.batch_size = 4;
  cfg.learning_rate = 1e-300;  // positive but rounds every update to nothing
  cfg.weight_decay = 0.0;
  const auto res = train(model, data, cfg);
  ASSERT_EQ(res.log.size(), 3u);
  EXPECT_NEAR(res.log[0].loss, res.log[1].loss, 1e-9);
  EXPECT_NEAR(res.log[1].loss, res.log[2].loss, 1e-9);
  for (std::size_t i = 0; i < res.log.size(); ++i) EXPECT_EQ(res.log[i].epoch, Index(i + 1));
}

TEST(Train, DeterministicAcrossRuns) {
  const auto data = small_data(32, 2, 10);
  TrainConfig cfg;
  cfg.max_epochs = 2;
  cfg.batch_size = 4;
  cfg.seed = 9;
  DcatModel<float> a(small_model(32, 2, 0.5), 9), b(small_model(32, 2, 0.5), 9);
  const auto ra = train(a, data, cfg), rb = train(b, data, cfg);
  for (std::size_t i = 0; i < ra.log.size(); ++i) {
    EXPECT_EQ(ra.log[i].loss, rb.log[i].loss);
    EXPECT_EQ(ra.log[i].test_accuracy, rb.log[i].test_accuracy);
  }
  const auto pa = a.export_parameters(), pb = b.export_parameters();
  for (std::size_t i = 0; i < pa.size(); ++i) EXPECT_TRUE((pa[i].tensor.data() == pb[i].tensor.data()).all());
}

TEST(Train, RejectsMismatchedData) {
  const auto data = small_data(32, 3, 5);
  DcatModel<float> model(small_model(32, 2, 0.0), 1);
  EXPECT_THROW(train(model, data, TrainConfig{}), ConfigError);
  DcatModel<float> wrong_size(small_model(64, 3, 0.0), 1);
  EXPECT_THROW(train(wrong_size, data, TrainConfig{}), ConfigError);
}

TEST(Train, DivergenceNamesTheStep) {
  const auto data = small_data(32, 2, 5);
  DcatModel<float> model(small_model(32, 2, 0.0), 1);
  TrainConfig cfg;
  cfg.max_epochs = 1;
  cfg.batch_size = 4;
  cfg.learning_rate = 1e30;
  try {
    train(model, data, cfg);
    FAIL() << "expected divergence";
  } catch (const NumericError& e) {
    EXPECT_NE(std::string(e.what()).find("epoch 1, step"), std::string::npos) << e.what();
  }
}

TEST(Train, TwoClassTaskLearnsAndEvaluates) {
  const auto data = small_data(32, 2, 40, 0.3);
  DcatModel<float> model(small_model(32, 2, 0.5), 2);
  TrainConfig cfg;
  cfg.max_epochs = 20;
  cfg.learning_rate = 1e-3;
  cfg.batch_size = 16;
  cfg.seed = 2;
  const auto res = train(model, data, cfg);
  EXPECT_GE(res.best_test_accuracy, 0.95);
  model.import_parameters(res.best_parameters);
  const auto eval = evaluate(model, data.test, 10, 2);
  ASSERT_EQ(eval.records.size(), data.test.samples.size());
  for (std::size_t i = 0; i < eval.scored.size(); ++i) {
    Index arg = 0;
    eval.scored[i].scores.maxCoeff(&arg);
    EXPECT_EQ(eval.predicted[i], arg);
    EXPECT_EQ(eval.records[i].sample_id, data.test.samples[i].id);
  }
}

}  // namespace
}  // namespace dcat
