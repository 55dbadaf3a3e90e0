// Copyright (c) 2026 The fda Authors. All Rights Reserved
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <stdexcept>

#include "fda/nn.hpp"
#include "fda/rng.hpp"
#include "oracles.hpp"

namespace fda::nn {
namespace {

Eigen::MatrixXd random_matrix(Eigen::Index r, Eigen::Index c, std::uint64_t seed, double scale = 1.0) {
  Rng rng(seed);
  Eigen::MatrixXd m(r, c);
  for (Eigen::Index j = 0; j < c; ++j) {
    for (Eigen::Index i = 0; i < r; ++i) m(i, j) = scale * rng.normal();
  }
  return m;
}

Mlp single_layer(const Eigen::MatrixXd& w, const Eigen::VectorXd& b, Activation a, double dropout = 0.0) {
  return Mlp({DenseLayer{w, b, a, dropout}});
}

TEST(Forward, IdentityLayerPassesInputThrough) {
  const auto net = single_layer(Eigen::MatrixXd::Identity(3, 3), Eigen::VectorXd::Zero(3), Activation::Identity);
  const Eigen::MatrixXd x = random_matrix(3, 4, 1);
  EXPECT_EQ(net.infer(x), x);
}

TEST(Forward, LeakyReluOfMinusOne) {
  const auto net = single_layer(Eigen::MatrixXd::Identity(1, 1), Eigen::VectorXd::Zero(1), Activation::LeakyRelu02);
  Eigen::MatrixXd x(1, 2);
  x << -1.0, 2.0;
  const auto y = net.infer(x);
  EXPECT_DOUBLE_EQ(y(0, 0), -0.2);
  EXPECT_DOUBLE_EQ(y(0, 1), 2.0);
  EXPECT_DOUBLE_EQ(leaky_relu02(-1.0), -0.2);
}

TEST(Forward, DropoutMonteCarloMatchesEval) {
  const auto net =
      single_layer(Eigen::MatrixXd::Identity(4, 4), Eigen::VectorXd::Zero(4), Activation::Identity, 0.5);
  Eigen::MatrixXd x(4, 1);
  x << 1.0, -2.0, 0.5, 3.0;
  const Eigen::MatrixXd eval = net.infer(x);
  Rng rng(77);
  Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(4, 1);
  const int trials = 10000;
  for (int t = 0; t < trials; ++t) acc += net.forward(x, ForwardMode::train(rng)).output();
  acc /= trials;
  for (int i = 0; i < 4; ++i) EXPECT_NEAR(acc(i, 0), eval(i, 0), 0.02 * std::abs(eval(i, 0))) << i;
}

TEST(Forward, TrainModeKeepsOrZeroesScaledComponents) {
  const auto net =
      single_layer(Eigen::MatrixXd::Identity(8, 8), Eigen::VectorXd::Zero(8), Activation::Identity, 0.25);
  const Eigen::MatrixXd x = Eigen::MatrixXd::Ones(8, 3);
  Rng rng(3);
  const auto y = net.forward(x, ForwardMode::train(rng)).output();
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    EXPECT_TRUE(y.data()[i] == 0.0 || std::abs(y.data()[i] - 1.0 / 0.75) < 1e-15);
  }
}

TEST(Forward, EvalDropoutIsIdentity) {
  const Eigen::MatrixXd w = random_matrix(3, 5, 2);
  const Eigen::VectorXd b = random_matrix(3, 1, 3);
  const auto with = single_layer(w, b, Activation::Tanh, 0.5);
  const auto without = single_layer(w, b, Activation::Tanh, 0.0);
  const Eigen::MatrixXd x = random_matrix(5, 6, 4);
  EXPECT_EQ(with.infer(x), without.infer(x));
}

TEST(Forward, DimensionMismatchThrows) {
  const auto net = single_layer(Eigen::MatrixXd::Identity(3, 3), Eigen::VectorXd::Zero(3), Activation::Identity);
  EXPECT_THROW(net.infer(Eigen::MatrixXd::Zero(2, 1)), std::invalid_argument);
}

TEST(Backward, ZeroOutputGradGivesZeroGradients) {
  const std::vector<LayerSpec> specs{{5, Activation::Tanh, 0.0}, {2, Activation::Identity, 0.0}};
  const auto net = Mlp::make(3, specs, 8);
  const Eigen::MatrixXd x = random_matrix(3, 4, 9);
  const auto cache = net.forward(x, ForwardMode::eval());
  const auto g = net.backward(cache, Eigen::MatrixXd::Zero(2, 4));
  for (const auto& w : g.weight) EXPECT_EQ(w.cwiseAbs().maxCoeff(), 0.0);
  for (const auto& b : g.bias) EXPECT_EQ(b.cwiseAbs().maxCoeff(), 0.0);
  EXPECT_EQ(g.input.cwiseAbs().maxCoeff(), 0.0);
}

TEST(Backward, AffineMseClosedForm) {
  const Eigen::MatrixXd w = random_matrix(2, 3, 10);
  const Eigen::VectorXd b = random_matrix(2, 1, 11);
  const auto net = single_layer(w, b, Activation::Identity);
  const Eigen::MatrixXd x = random_matrix(3, 5, 12);
  const Eigen::MatrixXd t = random_matrix(2, 5, 13);
  const auto cache = net.forward(x, ForwardMode::eval());
  const auto loss = mse_loss(cache.output(), t);
  const auto g = net.backward(cache, loss.grad);
  const Eigen::MatrixXd residual = (w * x).colwise() + b - t;
  const Eigen::MatrixXd expected_w = 2.0 * residual * x.transpose() / 5.0;
  const Eigen::VectorXd expected_b = 2.0 * residual.rowwise().sum() / 5.0;
  EXPECT_LT((g.weight[0] - expected_w).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LT((g.bias[0] - expected_b).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_NEAR(loss.value, residual.squaredNorm() / 5.0, 1e-12);
}

TEST(Backward, ThreeLayerNetMatchesFiniteDifferences) {
  const std::vector<LayerSpec> specs{
      {7, Activation::Tanh, 0.0}, {6, Activation::LeakyRelu02, 0.0}, {3, Activation::Identity, 0.0}};
  auto net = Mlp::make(4, specs, 21);
  const Eigen::MatrixXd x = random_matrix(4, 5, 22);
  const Eigen::MatrixXd t = random_matrix(3, 5, 23);
  const auto cache = net.forward(x, ForwardMode::eval());
  const auto g = net.backward(cache, mse_loss(cache.output(), t).grad);
  auto params = net.parameter_blocks();
  const auto report = check_gradients([&] { return mse_loss(net.infer(x), t).value; }, params, g.blocks());
  EXPECT_LT(report.max_rel_error, 1e-4);
  EXPECT_EQ(report.entries_checked, net.parameter_count());
}

TEST(Backward, InputGradientMatchesFiniteDifferences) {
  const std::vector<LayerSpec> specs{{6, Activation::Tanh, 0.0}, {2, Activation::Identity, 0.0}};
  const auto net = Mlp::make(3, specs, 31);
  Eigen::MatrixXd x = random_matrix(3, 2, 32);
  const Eigen::MatrixXd t = random_matrix(2, 2, 33);
  const auto cache = net.forward(x, ForwardMode::eval());
  const auto g = net.backward(cache, mse_loss(cache.output(), t).grad);
  const double h = 1e-5;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double orig = x.data()[i];
    x.data()[i] = orig + h;
    const double up = mse_loss(net.infer(x), t).value;
    x.data()[i] = orig - h;
    const double down = mse_loss(net.infer(x), t).value;
    x.data()[i] = orig;
    EXPECT_NEAR(g.input.data()[i], (up - down) / (2 * h), 1e-8);
  }
}

TEST(Backward, StaleCacheThrows) {
  const std::vector<LayerSpec> specs{{2, Activation::Identity, 0.0}};
  auto net = Mlp::make(2, specs, 1);
  const auto cache = net.forward(Eigen::MatrixXd::Ones(2, 1), ForwardMode::eval());
  net.parameter_blocks()[0][0] += 1.0;
  EXPECT_THROW(net.backward(cache, Eigen::MatrixXd::Ones(2, 1)), std::logic_error);
  const auto other = Mlp::make(2, specs, 2);
  EXPECT_THROW(other.backward(net.forward(Eigen::MatrixXd::Ones(2, 1), ForwardMode::eval()),
                              Eigen::MatrixXd::Ones(2, 1)),
               std::logic_error);
}

TEST(Backward, CrossEntropyMatchesFiniteDifferences) {
  const std::vector<LayerSpec> specs{{4, Activation::Identity, 0.0}};
  auto net = Mlp::make(3, specs, 41);
  const Eigen::MatrixXd x = random_matrix(3, 6, 42);
  const std::vector<LabelId> labels{0, 1, 2, 3, 1, 0};
  const auto cache = net.forward(x, ForwardMode::eval());
  const auto g = net.backward(cache, cross_entropy_loss(cache.output(), labels).grad);
  auto params = net.parameter_blocks();
  const auto report =
      check_gradients([&] { return cross_entropy_loss(net.infer(x), labels).value; }, params, g.blocks());
  EXPECT_LT(report.max_rel_error, 1e-4);
}

TEST(Losses, L1ValueAndSubgradient) {
  Eigen::MatrixXd p(2, 2);
  Eigen::MatrixXd t(2, 2);
  p << 1.0, 0.0, -2.0, 3.0;
  t << 0.0, 0.0, 1.0, 1.0;
  const auto l = l1_loss(p, t);
  EXPECT_DOUBLE_EQ(l.value, (1.0 + 3.0 + 0.0 + 2.0) / 2.0);
  EXPECT_DOUBLE_EQ(l.grad(0, 0), 0.5);
  EXPECT_DOUBLE_EQ(l.grad(1, 0), -0.5);
  EXPECT_DOUBLE_EQ(l.grad(0, 1), 0.0);
}

TEST(Softmax, OutputsAreOnTheSimplex) {
  const Eigen::MatrixXd logits = random_matrix(5, 20, 51, 30.0);
  const auto p = softmax(logits);
  for (Eigen::Index j = 0; j < p.cols(); ++j) {
    EXPECT_GE(p.col(j).minCoeff(), 0.0);
    EXPECT_NEAR(p.col(j).sum(), 1.0, 1e-9);
  }
}

TEST(Adam, ZeroGradientsLeaveParametersUnchanged) {
  std::vector<double> w{1.0, -2.0, 3.0};
  const std::vector<double> g(3, 0.0);
  std::vector<std::span<double>> params{w};
  std::vector<std::span<const double>> grads{g};
  AdamState st(params, {});
  for (int i = 0; i < 5; ++i) adam_step(params, grads, st);
  EXPECT_EQ(w, (std::vector<double>{1.0, -2.0, 3.0}));
  EXPECT_EQ(st.step, 5u);
}

TEST(Adam, FirstStepIsLrTimesSign) {
  std::vector<double> w{0.0, 0.0, 0.0};
  const std::vector<double> g{0.3, -7.0, 1e-3};
  std::vector<std::span<double>> params{w};
  std::vector<std::span<const double>> grads{g};
  AdamState st(params, {});
  adam_step(params, grads, st);
  EXPECT_NEAR(w[0], -1e-3, 1e-9);
  EXPECT_NEAR(w[1], 1e-3, 1e-9);
  EXPECT_NEAR(w[2], -1e-3, 1e-8);
}

TEST(Adam, ShapeMismatchThrows) {
  std::vector<double> w{0.0, 0.0};
  const std::vector<double> g{1.0};
  std::vector<std::span<double>> params{w};
  std::vector<std::span<const double>> grads{g};
  AdamState st(params, {});
  EXPECT_THROW(adam_step(params, grads, st), std::invalid_argument);
}

TEST(Adam, QuadraticNormDecreasesAfterStepFive) {
  std::vector<double> w{0.7, -0.4, 0.2, 1.1};
  std::vector<double> g(4);
  std::vector<std::span<double>> params{w};
  std::vector<std::span<const double>> grads{g};
  AdamState st(params, {});
  double previous = std::numeric_limits<double>::infinity();
  for (int step = 1; step <= 200; ++step) {
    for (std::size_t i = 0; i < w.size(); ++i) g[i] = 2.0 * w[i];
    adam_step(params, grads, st);
    double norm = 0.0;
    for (double v : w) norm += v * v;
    norm = std::sqrt(norm);
    if (step > 5) {
      EXPECT_LT(norm, previous) << "step " << step;
    }
    previous = norm;
  }
}

TEST(Kl, ClosedFormValues) {
  EXPECT_EQ(kl_diag_gaussian(Eigen::VectorXd::Zero(3), Eigen::VectorXd::Zero(3)), 0.0);
  EXPECT_DOUBLE_EQ(kl_diag_gaussian(Eigen::VectorXd::Ones(1), Eigen::VectorXd::Zero(1)), 0.5);
}

TEST(Kl, NonNegative) {
  Rng rng(5);
  for (int i = 0; i < 1000; ++i) {
    Eigen::VectorXd mu(3);
    Eigen::VectorXd lv(3);
    for (int d = 0; d < 3; ++d) {
      mu(d) = rng.uniform(-5, 5);
      lv(d) = rng.uniform(-8, 4);
    }
    EXPECT_GE(kl_diag_gaussian(mu, lv), 0.0);
  }
}

TEST(Kl, AgreesWithQuadrature) {
  Rng rng(2718);
  for (int i = 0; i < 100; ++i) {
    const double mu = rng.uniform(-3.0, 3.0);
    const double lv = rng.uniform(-3.0, 2.0);
    const double closed = kl_diag_gaussian(Eigen::VectorXd::Constant(1, mu), Eigen::VectorXd::Constant(1, lv));
    EXPECT_NEAR(closed, oracle::kl_quadrature_1d(mu, lv), 1e-6) << "mu " << mu << " logvar " << lv;
  }
}

TEST(Kl, BatchGradientsMatchFiniteDifferences) {
  Eigen::MatrixXd mu = random_matrix(3, 4, 61);
  Eigen::MatrixXd lv = random_matrix(3, 4, 62, 0.5);
  const auto r = kl_diag_gaussian_batch(mu, lv);
  const double h = 1e-6;
  for (Eigen::Index i = 0; i < mu.size(); ++i) {
    const double o = mu.data()[i];
    mu.data()[i] = o + h;
    const double up = kl_diag_gaussian_batch(mu, lv).value;
    mu.data()[i] = o - h;
    const double down = kl_diag_gaussian_batch(mu, lv).value;
    mu.data()[i] = o;
    EXPECT_NEAR(r.grad_mu.data()[i], (up - down) / (2 * h), 1e-7);
    const double ol = lv.data()[i];
    lv.data()[i] = ol + h;
    const double up2 = kl_diag_gaussian_batch(mu, lv).value;
    lv.data()[i] = ol - h;
    const double down2 = kl_diag_gaussian_batch(mu, lv).value;
    lv.data()[i] = ol;
    EXPECT_NEAR(r.grad_logvar.data()[i], (up2 - down2) / (2 * h), 1e-7);
  }
}

TEST(Reparameterize, DegenerateVarianceReturnsMean) {
  Eigen::VectorXd mu(3);
  mu << 0.5, -1.0, 2.0;
  const auto z = reparameterize(mu, Eigen::VectorXd::Constant(3, -60.0), 4);
  EXPECT_LT((z - mu).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Reparameterize, FixedSeedIsDeterministic) {
  const Eigen::VectorXd mu = Eigen::VectorXd::Zero(8);
  const Eigen::VectorXd lv = Eigen::VectorXd::Zero(8);
  EXPECT_EQ(reparameterize(mu, lv, 12), reparameterize(mu, lv, 12));
  EXPECT_NE(reparameterize(mu, lv, 12), reparameterize(mu, lv, 13));
}

TEST(Reparameterize, StandardNormalMoments) {
  const std::size_t n = 100000;
  const auto z = reparameterize(Eigen::VectorXd::Zero(n), Eigen::VectorXd::Zero(n), 99);
  const double mean = z.mean();
  const double var = (z.array() - mean).square().sum() / static_cast<double>(n - 1);
  EXPECT_NEAR(mean, 0.0, 0.02);
  EXPECT_NEAR(var, 1.0, 0.02);
}

TEST(Reparameterize, MatrixFormReportsNoise) {
  Rng rng(1);
  const Eigen::MatrixXd mu = random_matrix(2, 3, 71);
  const Eigen::MatrixXd lv = random_matrix(2, 3, 72);
  Eigen::MatrixXd eps;
  const auto z = reparameterize(mu, lv, rng, &eps);
  const Eigen::MatrixXd expected = mu.array() + (0.5 * lv.array()).exp() * eps.array();
  EXPECT_LT((z - expected).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(OneHot, Columns) {
  const std::vector<LabelId> labels{2, 0};
  const auto m = one_hot(labels, 3);
  EXPECT_EQ(m.rows(), 3);
  EXPECT_EQ(m(2, 0), 1.0);
  EXPECT_EQ(m(0, 1), 1.0);
  EXPECT_EQ(m.sum(), 2.0);
}

TEST(Mlp, GlorotInitIsDeterministicAndBounded) {
  const std::vector<LayerSpec> specs{{10, Activation::Tanh, 0.0}};
  const auto a = Mlp::make(6, specs, 3);
  EXPECT_TRUE(a == Mlp::make(6, specs, 3));
  const double bound = std::sqrt(6.0 / 16.0);
  EXPECT_LE(a.layer(0).weight.cwiseAbs().maxCoeff(), bound);
  EXPECT_EQ(a.layer(0).bias.cwiseAbs().maxCoeff(), 0.0);
}

}  // namespace
}  // namespace fda::nn
