//
// oodscore - Copyright 2026 The oodscore Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "oodscore/mlp.h"

#include <cmath>
#include <numeric>
#include <random>

#include <gtest/gtest.h>

#include "oodscore/errors.h"
#include "support.h"

namespace oodscore {
namespace {

using test::numeric_gradient;
using test::random_matrix;

class GradientCheckTest: public ::testing::TestWithParam<Activation> {};

TEST_P(GradientCheckTest, MatchesCentralDifferences) {
  Rng rng(123);
  for (int trial = 0; trial < 10; ++trial) {
    const std::size_t in = 2 + rng() % 10;
    Mlp net(in, { 1 + rng() % 6, 1 + rng() % 5 }, GetParam());
    net.initialize(rng);
    std::normal_distribution<double> n(0.0, 0.3);
    for (auto &p: net.parameters())
      p += n(rng);
    const auto x = random_matrix(7, in, rng);
    std::vector<double> y(7);
    for (auto &v: y)
      v = n(rng) * 5;
    const std::vector<std::size_t> batch { 0, 2, 3, 6 };
    std::vector<double> analytic(net.parameter_count());
    const double l = net.loss_and_gradient(x, y, batch, analytic);
    EXPECT_NEAR(l, net.loss(x, y, batch), 1e-12);
    const auto numeric = numeric_gradient(net, x, y, batch);
    double diff = 0, scale = 0;
    for (std::size_t i = 0; i < analytic.size(); ++i) {
      diff += (analytic[i] - numeric[i]) * (analytic[i] - numeric[i]);
      scale += analytic[i] * analytic[i];
    }
    EXPECT_LE(std::sqrt(diff), 1e-4 * std::max(std::sqrt(scale), 1e-8));
  }
}

INSTANTIATE_TEST_SUITE_P(Activations, GradientCheckTest,
                         ::testing::Values(Activation::kRelu, Activation::kGelu),
                         [](const auto &info) { return std::string(to_string(info.param)); });

TEST(MlpTest, ParameterLayout) {
  Mlp net(3, { 4, 2 }, Activation::kRelu);
  EXPECT_EQ(net.parameter_count(), 4u * 3 + 4 + 2 * 4 + 2 + 1 * 2 + 1);
  EXPECT_EQ(net.layer_sizes(), (std::vector<std::size_t> { 3, 4, 2, 1 }));
}

TEST(MlpTest, ZeroWeightsPredictOutputBias) {
  Mlp net(5, { 4 }, Activation::kGelu);
  std::fill(net.parameters().begin(), net.parameters().end(), 0.0);
  net.output_bias() = 6.5;
  Rng rng(1);
  const auto x = random_matrix(10, 5, rng);
  for (std::size_t i = 0; i < x.rows; ++i)
    EXPECT_EQ(net.predict(x.row(i)), 6.5);
}

TEST(MlpTest, HandComputedForwardPass) {
  // 2 -> 2 (relu) -> 1
  Mlp net(2, { 2 }, Activation::kRelu);
  const std::vector<double> p { 1, -1, 0.5, 2,  // W1
                                0, -3,          // b1
                                2, 1,           // W2
                                0.25 };         // b2
  std::copy(p.begin(), p.end(), net.parameters().begin());
  const std::vector<double> x { 3, 1 };
  // h = relu([3 - 1 + 0, 1.5 + 2 - 3]) = [2, 0.5]; out = 4 + 0.5 + 0.25
  EXPECT_DOUBLE_EQ(net.predict(x), 4.75);
}

TEST(MlpTest, GeluIsExact) {
  Mlp net(1, { 1 }, Activation::kGelu);
  const std::vector<double> p { 1, 0, 1, 0 };
  std::copy(p.begin(), p.end(), net.parameters().begin());
  for (double v: { -2.0, -0.3, 0.0, 0.7, 3.0 }) {
    const std::vector<double> x { v };
    EXPECT_NEAR(net.predict(x), 0.5 * v * (1 + std::erf(v / std::sqrt(2.0))), 1e-15);
  }
}

TEST(MlpTest, DropoutIsInvertedAndSeeded) {
  Rng init(4);
  Mlp net(4, { 64 }, Activation::kRelu);
  net.initialize(init);
  auto x = random_matrix(16, 4, init);
  std::vector<double> y(16, 1.0);
  std::vector<std::size_t> batch(16);
  std::iota(batch.begin(), batch.end(), 0);
  std::vector<double> g1(net.parameter_count()), g2(net.parameter_count());
  Rng a(9), b(9);
  const double l1 = net.loss_and_gradient(x, y, batch, g1, 0.5, &a);
  const double l2 = net.loss_and_gradient(x, y, batch, g2, 0.5, &b);
  EXPECT_EQ(l1, l2);
  EXPECT_EQ(g1, g2);
  EXPECT_NE(l1, net.loss(x, y, batch));
}

TEST(AdamTest, ZeroLearningRateLeavesParameters) {
  std::vector<double> p { 1.0, -2.0, 3.0 };
  const auto keep = p;
  Adam adam(3, 0.0);
  const std::vector<double> g { 0.5, -1.0, 2.0 };
  for (int i = 0; i < 5; ++i)
    adam.step(p, g);
  EXPECT_EQ(p, keep);
}

TEST(AdamTest, FirstStepMovesByLearningRate) {
  std::vector<double> p { 1.0, 1.0 };
  Adam adam(2, 0.01);
  adam.step(p, std::vector<double> { 3.0, -0.2 });
  // Bias-corrected first step is lr * sign(g) up to epsilon.
  EXPECT_NEAR(p[0], 0.99, 1e-8);
  EXPECT_NEAR(p[1], 1.01, 1e-7);
}

}  // namespace
}  // namespace oodscore
