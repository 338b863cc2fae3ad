#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "dcat/ops.hpp"
#include "dcat/tensor.hpp"

namespace dcat {
namespace {

TEST(Tensor, ConstructionChecksShape) {
  EXPECT_THROW(Tensor({2, 0}, Tensor::Array(0)), DimensionError);
  EXPECT_THROW(Tensor({2, 3}, Tensor::Array(5)), DimensionError);
  const Tensor s = Tensor::scalar(2.5f);
  EXPECT_EQ(s.rank(), 0);
  EXPECT_EQ(s.size(), 1);
  EXPECT_FLOAT_EQ(s.item(), 2.5f);
}

TEST(Tensor, AtIndexesRowMajor) {
  const Tensor t = Tensor::from({2, 3}, {0, 1, 2, 3, 4, 5});
  EXPECT_FLOAT_EQ(t.at({1, 2}), 5.0f);
  EXPECT_FLOAT_EQ(t.at({0, 1}), 1.0f);
  EXPECT_THROW(t.at({2, 0}), DimensionError);
}

TEST(Tensor, ItemNeedsSingleElement) {
  EXPECT_THROW(Tensor::zeros({2}).item(), ContractError);
}

TEST(Tensor, DetachCopiesValues) {
  Tensor a = Tensor::from({2}, {1, 2}, true);
  Tensor b = a.detach();
  b.mutable_data()[0] = 9;
  EXPECT_FLOAT_EQ(a[0], 1.0f);
  EXPECT_FALSE(b.requires_grad());
}

TEST(Tape, NoRecordingWithoutTape) {
  Tensor a = Tensor::from({2}, {1, 2}, true);
  const Tensor y = sum(mul(a, a));
  EXPECT_FALSE(y.requires_grad());
}

TEST(Tape, NoRecordingWithoutGradInputs) {
  GradTape tape;
  const Tensor a = Tensor::from({2}, {1, 2});
  sum(mul(a, a));
  EXPECT_EQ(tape.size(), 0u);
}

TEST(Tape, BackwardSquaredNorm) {
  Tensor a = Tensor::from({3}, {1, -2, 3}, true);
  GradTape tape;
  const Tensor y = sum(mul(a, a));
  backward(y, tape);
  ASSERT_TRUE(a.has_grad());
  EXPECT_FLOAT_EQ(a.grad()[0], 2.0f);
  EXPECT_FLOAT_EQ(a.grad()[1], -4.0f);
  EXPECT_FLOAT_EQ(a.grad()[2], 6.0f);
  EXPECT_EQ(tape.size(), 0u);
}

TEST(Tape, GradientsAccumulateAcrossTapes) {
  Tensor a = Tensor::from({1}, {3}, true);
  for (int i = 0; i < 2; ++i) {
    GradTape tape;
    backward(sum(scale(a, 2.0f)), tape);
  }
  EXPECT_FLOAT_EQ(a.grad()[0], 4.0f);
  a.zero_grad();
  EXPECT_FALSE(a.has_grad());
}

TEST(Tape, ReusedTensorSumsContributions) {
  Tensor a = Tensor::from({1}, {2}, true);
  GradTape tape;
  const Tensor b = mul(a, a);
  backward(sum(add(b, a)), tape);  // d/da (a^2 + a) = 2a + 1
  EXPECT_FLOAT_EQ(a.grad()[0], 5.0f);
}

TEST(Tape, BackwardRejectsNonScalar) {
  Tensor a = Tensor::from({2}, {1, 2}, true);
  GradTape tape;
  const Tensor y = mul(a, a);
  EXPECT_THROW(tape.backward(y), ContractError);
}

TEST(Tape, BackwardRejectsForeignLoss) {
  Tensor a = Tensor::from({2}, {1, 2}, true);
  Tensor y;
  {
    GradTape other;
    y = sum(a);
  }
  GradTape tape;
  EXPECT_THROW(tape.backward(y), ContractError);
}

TEST(Tape, NestedTapeRestoresOuter) {
  GradTape outer;
  {
    GradTape inner;
    EXPECT_EQ(GradTape::active(), &inner);
  }
  EXPECT_EQ(GradTape::active(), &outer);
}

TEST(CheckedMode, NonFiniteResultThrows) {
  ASSERT_TRUE(checked_mode());
  const Tensor big = Tensor::from({1}, {std::numeric_limits<float>::max()});
  EXPECT_THROW(mul(big, big), NumericError);
  set_checked_mode(false);
  EXPECT_TRUE(std::isinf(mul(big, big)[0]));
  set_checked_mode(true);
}

TEST(Tensor, CastPreservesValues) {
  const Tensor t = Tensor::from({2}, {0.5f, -1.25f});
  const auto d = t.cast<double>();
  EXPECT_DOUBLE_EQ(d[0], 0.5);
  EXPECT_DOUBLE_EQ(d[1], -1.25);
}

}  // namespace
}  // namespace dcat
