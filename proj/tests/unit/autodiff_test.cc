#include <cmath>

#include <gtest/gtest.h>

#include "deephate/adam.h"
#include "deephate/autodiff.h"
#include "deephate/error.h"
#include "deephate/gradcheck.h"
#include "deephate/rng.h"

namespace deephate {
namespace {

TEST(Ops, SoftmaxOfEqualLogitsIsUniform) {
  Tape<double> t;
  auto p = ad::softmax(t.constant(Tensor<double>::vector({1, 1, 1})));
  for (double v : p.value().data()) EXPECT_NEAR(v, 1.0 / 3.0, 1e-15);
}

TEST(Ops, SoftmaxSumsToOneOnRandomInputs) {
  Rng rng(5);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 1 + rng.below(12);
    Tensor<double> x(Shape{n});
    for (auto& v : x.data()) v = rng.uniform(-30, 30);
    Tape<double> t;
    auto p = ad::softmax(t.constant(x));
    double s = 0.0;
    for (double v : p.value().data()) {
      ASSERT_GE(v, 0.0);
      s += v;
    }
    ASSERT_NEAR(s, 1.0, 1e-6);
  }
}

TEST(Ops, Relu) {
  Tape<double> t;
  auto r = ad::relu(t.constant(Tensor<double>::vector({-2, 0, 3})));
  EXPECT_EQ(r.value().values(), (std::vector<double>{0, 0, 3}));
}

TEST(Ops, ConvOutputLength) {
  for (std::size_t L = 1; L <= 12; ++L) {
    for (std::size_t k = 1; k <= L; ++k) {
      Tape<double> t;
      auto y = ad::conv1d_valid(t.constant(Tensor<double>(Shape{L, 2}, 1.0)),
                                t.constant(Tensor<double>(Shape{3, k * 2}, 0.5)),
                                t.constant(Tensor<double>(Shape{3})));
      EXPECT_EQ(y.shape(), (Shape{L - k + 1, 3}));
    }
  }
  Tape<double> t;
  auto y = ad::conv1d_valid(t.constant(Tensor<double>(Shape{30, 1})),
                            t.constant(Tensor<double>(Shape{1, 3})),
                            t.constant(Tensor<double>(Shape{1})));
  EXPECT_EQ(y.shape()[0], 28u);
}

TEST(Ops, ShapeMismatchThrows) {
  Tape<double> t;
  EXPECT_THROW(ad::matmul(t.constant(Tensor<double>(Shape{2, 3})),
                          t.constant(Tensor<double>(Shape{2, 3}))),
               Error);
}

TEST(Backward, LinearLossGradientHasRowsOfX) {
  ParamSet<double> ps;
  ps.add("W", Tensor<double>(Shape{2, 3}, 0.1));
  Tape<double> t;
  auto W = t.parameter(ps.get("W"));
  auto x = t.constant(Tensor<double>::vector({1, 2, 3}));
  auto loss = ad::sum(ad::matmul(W, x));
  t.backward(loss);
  const Tensor<double>* g = t.grad(W);
  ASSERT_NE(g, nullptr);
  EXPECT_EQ(g->values(), (std::vector<double>{1, 2, 3, 1, 2, 3}));
}

TEST(Backward, DisconnectedParameterGetsZero) {
  ParamSet<double> ps;
  ps.add("used", Tensor<double>::vector({2.0}));
  ps.add("unused", Tensor<double>::vector({5.0}));
  Tape<double> t;
  auto u = t.parameter(ps.get("used"));
  t.parameter(ps.get("unused"));
  t.backward(ad::sum(ad::mul(u, u)));
  GradSet<double> grads(ps);
  t.accumulate_into(grads);
  EXPECT_DOUBLE_EQ(grads[0][0], 4.0);
  EXPECT_DOUBLE_EQ(grads[1][0], 0.0);
}

TEST(Adam, FirstStepMovesByLearningRate) {
  ParamSet<double> ps;
  ps.add("p", Tensor<double>::vector({1.0}));
  GradSet<double> g(ps);
  g[0][0] = 0.37;
  AdamState<double> st(ps, AdamConfig{});
  adam_step(ps, g, st);
  EXPECT_NEAR(ps[0].value[0], 1.0 - 0.001, 1e-8);
}

TEST(Adam, ZeroGradientLeavesParameters) {
  ParamSet<double> ps;
  ps.add("p", Tensor<double>::vector({1.5, -2.0}));
  GradSet<double> g(ps);
  AdamState<double> st(ps, AdamConfig{});
  for (int i = 0; i < 3; ++i) adam_step(ps, g, st);
  EXPECT_EQ(ps[0].value.values(), (std::vector<double>{1.5, -2.0}));
}

TEST(Adam, TwoUnitStepsDecreaseByTwoLearningRates) {
  ParamSet<double> ps;
  ps.add("p", Tensor<double>::vector({0.0}));
  GradSet<double> g(ps);
  g[0][0] = 1.0;
  AdamState<double> st(ps, AdamConfig{});
  adam_step(ps, g, st);
  adam_step(ps, g, st);
  EXPECT_NEAR(ps[0].value[0], -0.002, 1e-7);
}

TEST(Adam, FrozenParameterUntouched) {
  ParamSet<double> ps;
  ps.add("p", Tensor<double>::vector({1.0}), false);
  GradSet<double> g(ps);
  g[0][0] = 1.0;
  AdamState<double> st(ps, AdamConfig{});
  adam_step(ps, g, st);
  EXPECT_EQ(ps[0].value[0], 1.0);
}

TEST(Adam, NonFiniteGradientThrowsBeforeMutating) {
  ParamSet<double> ps;
  ps.add("a", Tensor<double>::vector({1.0}));
  ps.add("b", Tensor<double>::vector({1.0}));
  GradSet<double> g(ps);
  g[0][0] = 1.0;
  g[1][0] = NAN;
  AdamState<double> st(ps, AdamConfig{});
  EXPECT_THROW(adam_step(ps, g, st), Error);
  EXPECT_EQ(ps[0].value[0], 1.0);
}

TEST(GradCheck, QuadraticIsExact) {
  ParamSet<double> ps;
  Rng rng(9);
  Tensor<double> w(Shape{3, 4});
  for (auto& v : w.data()) v = rng.uniform(-1, 1);
  ps.add("W", w);
  auto loss = [&]() {
    double s = 0.0;
    for (double v : ps[0].value.data()) s += v * v;
    return LossEval{s, 0};
  };
  GradSet<double> g(ps);
  for (std::size_t i = 0; i < w.size(); ++i) g[0][i] = 2.0 * ps[0].value[i];
  const auto report = grad_check(loss, g, ps);
  EXPECT_LT(report.max_relative_error, 1e-7);
  EXPECT_EQ(report.checked, 12u);
}

TEST(GradCheck, KinkCrossingsAreSkipped) {
  ParamSet<double> ps;
  // The first entry sits exactly at the ReLU kink.
  ps.add("x", Tensor<double>::vector({0.0, 1.5, -2.0}));
  auto eval = [&]() {
    Tape<double> t;
    auto x = t.parameter(ps[0]);
    auto y = ad::sum(ad::relu(x));
    return LossEval{y.value()[0], t.relu_signature()};
  };
  Tape<double> t;
  auto x = t.parameter(ps[0]);
  t.backward(ad::sum(ad::relu(x)));
  GradSet<double> g(ps);
  t.accumulate_into(g);
  const auto report = grad_check(eval, g, ps);
  EXPECT_EQ(report.skipped_at_kink, 1u);
  EXPECT_LT(report.max_relative_error, 1e-7);
}

TEST(Dropout, InvertedScalingAndDeterminism) {
  Tape<double> t;
  auto x = t.constant(Tensor<double>(Shape{1000}, 1.0));
  auto a = ad::dropout(x, 0.5, true, 17);
  auto b = ad::dropout(x, 0.5, true, 17);
  EXPECT_EQ(a.value(), b.value());
  for (double v : a.value().data()) EXPECT_TRUE(v == 0.0 || v == 2.0);
  EXPECT_EQ(ad::dropout(x, 0.5, false, 17).value(), x.value());
}

}  // namespace
}  // namespace deephate
