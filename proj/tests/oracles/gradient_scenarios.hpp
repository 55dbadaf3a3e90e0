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

#ifndef FDA_TESTS_GRADIENT_SCENARIOS_HPP_
#define FDA_TESTS_GRADIENT_SCENARIOS_HPP_

// Finite-difference checks of the three trained architectures at their
// default widths, shared by unit and acceptance tests.

#include "fda/classifier.hpp"
#include "fda/cvae.hpp"
#include "fda/deltaenc.hpp"
#include "fda/rng.hpp"
#include "oracles.hpp"

namespace fda::oracle {

inline Eigen::MatrixXd gaussian_matrix(Eigen::Index r, Eigen::Index c, std::uint64_t seed, double scale = 1.0) {
  Rng rng(seed);
  Eigen::MatrixXd m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = scale * rng.normal();
  return m;
}

inline std::vector<std::span<double>> joined(std::vector<std::span<double>> a, std::vector<std::span<double>> b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

inline std::vector<std::span<const double>> joined(std::vector<std::span<const double>> a,
                                                   std::vector<std::span<const double>> b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

/// CVAE 2048 / tanh / z = 128 with the reparameterization noise held fixed.
inline FdResult cvae_gradient_check(std::size_t per_block = 48) {
  const std::size_t dim = 6;
  LabelVocab vocab({"a", "b", "c"});
  auto model = cvae::make_cvae(dim, vocab, 2048, 128, 11);
  const Eigen::MatrixXd x = gaussian_matrix(static_cast<Eigen::Index>(dim), 4, 12);
  const std::vector<LabelId> labels{0, 2, 1, 2};
  const Eigen::MatrixXd eps = gaussian_matrix(128, 4, 13);
  const auto obj = cvae::objective(model, x, labels, eps, 1.0);
  auto loss = [&] { return cvae::objective(model, x, labels, eps, 1.0).total; };
  return central_difference_check(loss, joined(model.encoder.parameter_blocks(), model.decoder.parameter_blocks()),
                                  joined(obj.encoder.blocks(), obj.decoder.blocks()), 1e-5, per_block);
}

/// Delta-encoder 512 / leaky 0.2 / z = 16, dropout disabled (eval mode).
/// Targets sit exactly 1 away from the reconstruction in every component, so
/// the L1 kink is never crossed and the loss stays small enough that central
/// differences are not swamped by rounding.
inline FdResult delta_gradient_check(std::size_t per_block = 48) {
  const std::size_t dim = 6;
  auto model = deltaenc::make_delta_encoder(dim, 512, 16, 0.5, 21);
  const auto d = static_cast<Eigen::Index>(dim);
  const Eigen::MatrixXd xi = gaussian_matrix(d, 4, 22);
  const Eigen::MatrixXd xj = gaussian_matrix(d, 4, 23);
  const Eigen::MatrixXd anchor = gaussian_matrix(d, 4, 24);
  const Eigen::MatrixXd signs = 2.0 * (gaussian_matrix(d, 4, 26).array() > 0).cast<double>() - 1.0;
  const Eigen::MatrixXd target = deltaenc::apply_delta(model, xi, xj, anchor) + signs;
  const auto mode = nn::ForwardMode::eval();
  const auto obj = deltaenc::objective(model, xi, xj, anchor, target, mode);
  auto loss = [&] { return deltaenc::objective(model, xi, xj, anchor, target, mode).loss; };
  return central_difference_check(loss, joined(model.encoder.parameter_blocks(), model.decoder.parameter_blocks()),
                                  joined(obj.encoder.blocks(), obj.decoder.blocks()), 1e-5, per_block);
}

/// Softmax classifier: one affine layer, cross-entropy, every entry checked.
inline FdResult classifier_gradient_check() {
  const std::vector<nn::LayerSpec> specs{{5, nn::Activation::Identity, 0.0}};
  auto net = nn::Mlp::make(8, specs, 31);
  const Eigen::MatrixXd x = gaussian_matrix(8, 10, 32);
  const std::vector<LabelId> labels{0, 1, 2, 3, 4, 0, 1, 2, 3, 4};
  const auto cache = net.forward(x, nn::ForwardMode::eval());
  const auto g = net.backward(cache, nn::cross_entropy_loss(cache.output(), labels).grad);
  auto loss = [&] { return nn::cross_entropy_loss(net.infer(x), labels).value; };
  return central_difference_check(loss, net.parameter_blocks(), g.blocks(), 1e-5, 1000000);
}

}  // namespace fda::oracle

#endif  // FDA_TESTS_GRADIENT_SCENARIOS_HPP_
