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

#ifndef FDA_NN_HPP_
#define FDA_NN_HPP_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "fda/dataio.hpp"
#include "fda/rng.hpp"

/// Dense multi-layer perceptrons with hand-written reverse-mode gradients.
///
/// Conventions shared by every routine in this header:
///   - batches are matrices with one example per column (features x batch);
///   - losses reduce by summing over features and averaging over the batch,
///     and the gradients they return already carry the 1/batch factor;
///   - all arithmetic is double precision.
namespace fda::nn {

enum class Activation { Tanh, LeakyRelu02, Identity };

std::string_view activation_name(Activation a);
std::optional<Activation> parse_activation(std::string_view text);

/// max(x, 0.2 x)
inline double leaky_relu02(double x) { return x > 0.0 ? x : 0.2 * x; }

struct DenseLayer {
  Eigen::MatrixXd weight;  // out x in
  Eigen::VectorXd bias;    // out
  Activation activation = Activation::Identity;
  // Inverted dropout applied to this layer's *input* during training.
  double input_dropout = 0.0;

  std::size_t in() const { return static_cast<std::size_t>(weight.cols()); }
  std::size_t out() const { return static_cast<std::size_t>(weight.rows()); }
};

struct LayerSpec {
  std::size_t out = 0;
  Activation activation = Activation::Identity;
  double input_dropout = 0.0;
};

class Mlp;

/// Train mode draws dropout masks from the given generator; Eval mode
/// disables dropout entirely (and needs no rescaling, as dropout is inverted).
class ForwardMode {
 public:
  static ForwardMode eval() { return ForwardMode(nullptr); }
  static ForwardMode train(Rng& rng) { return ForwardMode(&rng); }
  bool training() const { return rng_ != nullptr; }
  Rng* rng() const { return rng_; }

 private:
  explicit ForwardMode(Rng* rng) : rng_(rng) {}
  Rng* rng_;
};

struct ForwardCache {
  const Mlp* owner = nullptr;
  std::uint64_t version = 0;
  std::vector<Eigen::MatrixXd> inputs;  // layer inputs after dropout
  std::vector<Eigen::MatrixXd> masks;   // scaled keep-masks, empty when unused
  std::vector<Eigen::MatrixXd> outputs; // post-activation
  const Eigen::MatrixXd& output() const { return outputs.back(); }
};

struct MlpGradients {
  std::vector<Eigen::MatrixXd> weight;
  std::vector<Eigen::VectorXd> bias;
  Eigen::MatrixXd input;  // dL/dx, in x batch

  /// Same block order as Mlp::parameter_blocks(): W0, b0, W1, b1, ...
  std::vector<std::span<const double>> blocks() const;
};

class Mlp {
 public:
  Mlp() = default;
  /// Throws std::invalid_argument unless adjacent layer widths chain.
  explicit Mlp(std::vector<DenseLayer> layers);

  /// Glorot-uniform weights, zero biases.
  static Mlp make(std::size_t input_dim, std::span<const LayerSpec> layers, std::uint64_t seed);

  std::size_t input_dim() const { return layers_.empty() ? 0 : layers_.front().in(); }
  std::size_t output_dim() const { return layers_.empty() ? 0 : layers_.back().out(); }
  std::size_t num_layers() const { return layers_.size(); }
  std::size_t parameter_count() const;
  const std::vector<DenseLayer>& layers() const { return layers_; }
  const DenseLayer& layer(std::size_t i) const { return layers_.at(i); }
  /// Mutable access invalidates outstanding forward caches.
  DenseLayer& mutable_layer(std::size_t i);
  std::vector<std::span<double>> parameter_blocks();
  std::vector<std::span<const double>> parameter_blocks() const;
  std::uint64_t version() const { return version_; }

  ForwardCache forward(const Eigen::MatrixXd& x, ForwardMode mode) const;
  /// Eval-mode output without keeping a cache.
  Eigen::MatrixXd infer(const Eigen::MatrixXd& x) const;
  /// Exact gradients of the composed function under the cached dropout masks.
  /// Throws std::logic_error on a cache from another model or an older version.
  MlpGradients backward(const ForwardCache& cache, const Eigen::MatrixXd& output_grad) const;

  bool all_finite() const;
  friend bool operator==(const Mlp& a, const Mlp& b);

 private:
  std::vector<DenseLayer> layers_;
  std::uint64_t version_ = 0;
};

// ---------------------------------------------------------------------------
// Optimizer

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct AdamState {
  AdamConfig config;
  std::vector<std::vector<double>> first_moment;
  std::vector<std::vector<double>> second_moment;
  std::uint64_t step = 0;

  AdamState() = default;
  AdamState(std::span<const std::span<double>> params, AdamConfig cfg);
};

/// One bias-corrected Adam update. Throws std::invalid_argument on shape mismatch.
void adam_step(std::span<const std::span<double>> params,
               std::span<const std::span<const double>> grads, AdamState& state);

// ---------------------------------------------------------------------------
// Losses

enum class LossKind { MSE, L1, CrossEntropy, GaussianKL };

std::string_view loss_name(LossKind k);

struct LossResult {
  double value = 0.0;    // batch mean
  Eigen::MatrixXd grad;  // d value / d prediction
};

LossResult mse_loss(const Eigen::MatrixXd& pred, const Eigen::MatrixXd& target);
/// Subgradient sign(0) = 0.
LossResult l1_loss(const Eigen::MatrixXd& pred, const Eigen::MatrixXd& target);
/// MSE or L1 by kind; throws std::invalid_argument for other kinds.
LossResult regression_loss(LossKind kind, const Eigen::MatrixXd& pred,
                           const Eigen::MatrixXd& target);
LossResult cross_entropy_loss(const Eigen::MatrixXd& logits, std::span<const LabelId> labels);

/// Column-wise numerically stable softmax.
Eigen::MatrixXd softmax(const Eigen::MatrixXd& logits);

/// KL(N(mu, diag(exp(logvar))) || N(0, I)) = 0.5 sum(mu^2 + exp(logvar) - logvar - 1).
double kl_diag_gaussian(const Eigen::VectorXd& mu, const Eigen::VectorXd& logvar);

struct KlResult {
  double value = 0.0;  // batch mean
  Eigen::MatrixXd grad_mu;
  Eigen::MatrixXd grad_logvar;
};
KlResult kl_diag_gaussian_batch(const Eigen::MatrixXd& mu, const Eigen::MatrixXd& logvar);

/// z = mu + exp(0.5 logvar) * eps with eps ~ N(0, I) from `rng`, drawn column
/// by column. When `eps_out` is given it receives the noise used.
Eigen::MatrixXd reparameterize(const Eigen::MatrixXd& mu, const Eigen::MatrixXd& logvar, Rng& rng,
                               Eigen::MatrixXd* eps_out = nullptr);
Eigen::VectorXd reparameterize(const Eigen::VectorXd& mu, const Eigen::VectorXd& logvar,
                               std::uint64_t seed);

/// One-hot columns, num_classes x labels.size().
Eigen::MatrixXd one_hot(std::span<const LabelId> labels, std::size_t num_classes);

// ---------------------------------------------------------------------------
// Finite-difference gradient checking

struct GradCheckOptions {
  double step = 1e-5;
  // 0 checks every entry; otherwise a seeded sample of this many per block.
  std::size_t max_entries_per_block = 0;
  std::uint64_t seed = 0;
  // Relative error is |a - n| / max(|a|, |n|, floor).
  double denominator_floor = 1e-6;
};

struct GradCheckReport {
  double max_rel_error = 0.0;
  std::size_t entries_checked = 0;
  std::size_t worst_block = 0;
  std::size_t worst_index = 0;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
};

/// Compares `analytic` against central differences of `loss` by perturbing
/// `params` in place (restored afterwards).
GradCheckReport check_gradients(const std::function<double()>& loss,
                                std::span<const std::span<double>> params,
                                std::span<const std::span<const double>> analytic,
                                const GradCheckOptions& opts = {});

}  // namespace fda::nn

#endif  // FDA_NN_HPP_
