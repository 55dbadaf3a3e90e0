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

#include "fda/nn.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace fda::nn {

namespace {

void apply_activation(Activation a, Eigen::MatrixXd& m) {
  switch (a) {
    case Activation::Tanh:
      m = m.array().tanh();
      break;
    case Activation::LeakyRelu02:
      m = m.array().max(0.2 * m.array());
      break;
    case Activation::Identity:
      break;
  }
}

// Derivative expressed through the activation output.
void multiply_activation_grad(Activation a, const Eigen::MatrixXd& out, Eigen::MatrixXd& grad) {
  switch (a) {
    case Activation::Tanh:
      grad.array() *= 1.0 - out.array().square();
      break;
    case Activation::LeakyRelu02:
      grad.array() *= (out.array() > 0.0).select(1.0, Eigen::ArrayXXd::Constant(out.rows(), out.cols(), 0.2));
      break;
    case Activation::Identity:
      break;
  }
}

std::span<double> span_of(Eigen::MatrixXd& m) {
  return {m.data(), static_cast<std::size_t>(m.size())};
}
std::span<double> span_of(Eigen::VectorXd& v) {
  return {v.data(), static_cast<std::size_t>(v.size())};
}
std::span<const double> cspan_of(const Eigen::MatrixXd& m) {
  return {m.data(), static_cast<std::size_t>(m.size())};
}
std::span<const double> cspan_of(const Eigen::VectorXd& v) {
  return {v.data(), static_cast<std::size_t>(v.size())};
}

}  // namespace

std::string_view activation_name(Activation a) {
  switch (a) {
    case Activation::Tanh: return "tanh";
    case Activation::LeakyRelu02: return "leaky_relu_0.2";
    case Activation::Identity: return "identity";
  }
  return "?";
}

std::optional<Activation> parse_activation(std::string_view text) {
  for (Activation a : {Activation::Tanh, Activation::LeakyRelu02, Activation::Identity}) {
    if (activation_name(a) == text) return a;
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Mlp

Mlp::Mlp(std::vector<DenseLayer> layers) : layers_(std::move(layers)) {
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const auto& l = layers_[i];
    if (static_cast<std::size_t>(l.bias.size()) != l.out()) {
      throw std::invalid_argument("layer " + std::to_string(i) + ": bias width != output width");
    }
    if (i > 0 && layers_[i - 1].out() != l.in()) {
      throw std::invalid_argument("layer " + std::to_string(i) + ": input width does not chain");
    }
    if (!(l.input_dropout >= 0.0 && l.input_dropout < 1.0)) {
      throw std::invalid_argument("layer " + std::to_string(i) + ": dropout must be in [0, 1)");
    }
  }
}

Mlp Mlp::make(std::size_t input_dim, std::span<const LayerSpec> specs, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<DenseLayer> layers;
  std::size_t in = input_dim;
  for (const auto& s : specs) {
    DenseLayer l;
    const double limit = std::sqrt(6.0 / static_cast<double>(in + s.out));
    l.weight.resize(static_cast<Eigen::Index>(s.out), static_cast<Eigen::Index>(in));
    for (Eigen::Index c = 0; c < l.weight.cols(); ++c) {
      for (Eigen::Index r = 0; r < l.weight.rows(); ++r) l.weight(r, c) = rng.uniform(-limit, limit);
    }
    l.bias = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(s.out));
    l.activation = s.activation;
    l.input_dropout = s.input_dropout;
    layers.push_back(std::move(l));
    in = s.out;
  }
  return Mlp(std::move(layers));
}

std::size_t Mlp::parameter_count() const {
  std::size_t n = 0;
  for (const auto& l : layers_) n += static_cast<std::size_t>(l.weight.size() + l.bias.size());
  return n;
}

DenseLayer& Mlp::mutable_layer(std::size_t i) {
  ++version_;
  return layers_.at(i);
}

std::vector<std::span<double>> Mlp::parameter_blocks() {
  ++version_;
  std::vector<std::span<double>> out;
  for (auto& l : layers_) {
    out.push_back(span_of(l.weight));
    out.push_back(span_of(l.bias));
  }
  return out;
}

std::vector<std::span<const double>> Mlp::parameter_blocks() const {
  std::vector<std::span<const double>> out;
  for (const auto& l : layers_) {
    out.push_back(cspan_of(l.weight));
    out.push_back(cspan_of(l.bias));
  }
  return out;
}

ForwardCache Mlp::forward(const Eigen::MatrixXd& x, ForwardMode mode) const {
  if (layers_.empty()) throw std::invalid_argument("forward on empty Mlp");
  if (static_cast<std::size_t>(x.rows()) != input_dim()) {
    throw std::invalid_argument("input width " + std::to_string(x.rows()) + " != " +
                                std::to_string(input_dim()));
  }
  ForwardCache cache;
  cache.owner = this;
  cache.version = version_;
  cache.inputs.reserve(layers_.size());
  cache.masks.resize(layers_.size());
  cache.outputs.reserve(layers_.size());
  const Eigen::MatrixXd* current = &x;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const auto& l = layers_[i];
    if (mode.training() && l.input_dropout > 0.0) {
      Rng& rng = *mode.rng();
      const double keep = 1.0 - l.input_dropout;
      const double scale = 1.0 / keep;
      Eigen::MatrixXd mask(current->rows(), current->cols());
      for (Eigen::Index c = 0; c < mask.cols(); ++c) {
        for (Eigen::Index r = 0; r < mask.rows(); ++r) mask(r, c) = rng.uniform() < keep ? scale : 0.0;
      }
      cache.inputs.push_back(current->cwiseProduct(mask));
      cache.masks[i] = std::move(mask);
    } else {
      cache.inputs.push_back(*current);
    }
    Eigen::MatrixXd out = l.weight * cache.inputs.back();
    out.colwise() += l.bias;
    apply_activation(l.activation, out);
    cache.outputs.push_back(std::move(out));
    current = &cache.outputs.back();
  }
  return cache;
}

Eigen::MatrixXd Mlp::infer(const Eigen::MatrixXd& x) const {
  if (layers_.empty()) throw std::invalid_argument("forward on empty Mlp");
  if (static_cast<std::size_t>(x.rows()) != input_dim()) {
    throw std::invalid_argument("input width " + std::to_string(x.rows()) + " != " +
                                std::to_string(input_dim()));
  }
  Eigen::MatrixXd h = x;
  for (const auto& l : layers_) {
    Eigen::MatrixXd out = l.weight * h;
    out.colwise() += l.bias;
    apply_activation(l.activation, out);
    h = std::move(out);
  }
  return h;
}

MlpGradients Mlp::backward(const ForwardCache& cache, const Eigen::MatrixXd& output_grad) const {
  if (cache.owner != this || cache.version != version_ || cache.outputs.size() != layers_.size()) {
    throw std::logic_error("stale forward cache");
  }
  const auto& out = cache.output();
  if (output_grad.rows() != out.rows() || output_grad.cols() != out.cols()) {
    throw std::invalid_argument("output gradient shape mismatch");
  }
  MlpGradients g;
  g.weight.resize(layers_.size());
  g.bias.resize(layers_.size());
  Eigen::MatrixXd grad = output_grad;
  for (std::size_t i = layers_.size(); i-- > 0;) {
    const auto& l = layers_[i];
    multiply_activation_grad(l.activation, cache.outputs[i], grad);
    g.weight[i].noalias() = grad * cache.inputs[i].transpose();
    g.bias[i] = grad.rowwise().sum();
    Eigen::MatrixXd input_grad = l.weight.transpose() * grad;
    if (cache.masks[i].size() > 0) input_grad.array() *= cache.masks[i].array();
    grad = std::move(input_grad);
  }
  g.input = std::move(grad);
  return g;
}

bool Mlp::all_finite() const {
  return std::all_of(layers_.begin(), layers_.end(), [](const DenseLayer& l) {
    return l.weight.allFinite() && l.bias.allFinite();
  });
}

bool operator==(const Mlp& a, const Mlp& b) {
  if (a.layers_.size() != b.layers_.size()) return false;
  for (std::size_t i = 0; i < a.layers_.size(); ++i) {
    const auto& x = a.layers_[i];
    const auto& y = b.layers_[i];
    if (x.activation != y.activation || x.input_dropout != y.input_dropout ||
        x.weight.rows() != y.weight.rows() || x.weight.cols() != y.weight.cols() ||
        x.weight != y.weight || x.bias != y.bias) {
      return false;
    }
  }
  return true;
}

std::vector<std::span<const double>> MlpGradients::blocks() const {
  std::vector<std::span<const double>> out;
  for (std::size_t i = 0; i < weight.size(); ++i) {
    out.push_back(cspan_of(weight[i]));
    out.push_back(cspan_of(bias[i]));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Adam

AdamState::AdamState(std::span<const std::span<double>> params, AdamConfig cfg) : config(cfg) {
  for (const auto& p : params) {
    first_moment.emplace_back(p.size(), 0.0);
    second_moment.emplace_back(p.size(), 0.0);
  }
}

void adam_step(std::span<const std::span<double>> params,
               std::span<const std::span<const double>> grads, AdamState& state) {
  if (params.size() != grads.size() || params.size() != state.first_moment.size()) {
    throw std::invalid_argument("adam_step: block count mismatch");
  }
  for (std::size_t b = 0; b < params.size(); ++b) {
    if (params[b].size() != grads[b].size() || params[b].size() != state.first_moment[b].size()) {
      throw std::invalid_argument("adam_step: block " + std::to_string(b) + " shape mismatch");
    }
  }
  const auto& c = state.config;
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double bias1 = 1.0 - std::pow(c.beta1, t);
  const double bias2 = 1.0 - std::pow(c.beta2, t);
  for (std::size_t b = 0; b < params.size(); ++b) {
    auto p = params[b];
    auto g = grads[b];
    auto& m = state.first_moment[b];
    auto& v = state.second_moment[b];
    for (std::size_t i = 0; i < p.size(); ++i) {
      m[i] = c.beta1 * m[i] + (1.0 - c.beta1) * g[i];
      v[i] = c.beta2 * v[i] + (1.0 - c.beta2) * g[i] * g[i];
      const double mhat = m[i] / bias1;
      const double vhat = v[i] / bias2;
      p[i] -= c.lr * mhat / (std::sqrt(vhat) + c.epsilon);
    }
  }
}

// ---------------------------------------------------------------------------
// Losses

std::string_view loss_name(LossKind k) {
  switch (k) {
    case LossKind::MSE: return "mse";
    case LossKind::L1: return "l1";
    case LossKind::CrossEntropy: return "cross_entropy";
    case LossKind::GaussianKL: return "gaussian_kl";
  }
  return "?";
}

namespace {
void require_same_shape(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw std::invalid_argument("loss: shape mismatch");
  if (a.cols() == 0) throw std::invalid_argument("loss: empty batch");
}
}  // namespace

LossResult mse_loss(const Eigen::MatrixXd& pred, const Eigen::MatrixXd& target) {
  require_same_shape(pred, target);
  const double batch = static_cast<double>(pred.cols());
  Eigen::MatrixXd diff = pred - target;
  return {diff.squaredNorm() / batch, (2.0 / batch) * diff};
}

LossResult l1_loss(const Eigen::MatrixXd& pred, const Eigen::MatrixXd& target) {
  require_same_shape(pred, target);
  const double batch = static_cast<double>(pred.cols());
  Eigen::MatrixXd diff = pred - target;
  return {diff.cwiseAbs().sum() / batch, diff.array().sign().matrix() / batch};
}

LossResult regression_loss(LossKind kind, const Eigen::MatrixXd& pred,
                           const Eigen::MatrixXd& target) {
  switch (kind) {
    case LossKind::MSE: return mse_loss(pred, target);
    case LossKind::L1: return l1_loss(pred, target);
    default: throw std::invalid_argument("regression_loss: not a regression loss");
  }
}

Eigen::MatrixXd softmax(const Eigen::MatrixXd& logits) {
  Eigen::MatrixXd p = logits;
  for (Eigen::Index c = 0; c < p.cols(); ++c) {
    auto col = p.col(c);
    col.array() -= col.maxCoeff();
    col = col.array().exp().matrix();
    col /= col.sum();
  }
  return p;
}

LossResult cross_entropy_loss(const Eigen::MatrixXd& logits, std::span<const LabelId> labels) {
  if (static_cast<std::size_t>(logits.cols()) != labels.size() || labels.empty()) {
    throw std::invalid_argument("cross_entropy_loss: label count mismatch");
  }
  const double batch = static_cast<double>(labels.size());
  double total = 0.0;
  Eigen::MatrixXd grad(logits.rows(), logits.cols());
  for (Eigen::Index c = 0; c < logits.cols(); ++c) {
    const auto y = static_cast<Eigen::Index>(labels[static_cast<std::size_t>(c)]);
    if (y < 0 || y >= logits.rows()) throw std::invalid_argument("cross_entropy_loss: label out of range");
    const double m = logits.col(c).maxCoeff();
    const Eigen::VectorXd e = (logits.col(c).array() - m).exp();
    const double z = e.sum();
    total += std::log(z) + m - logits(y, c);
    grad.col(c) = e / z;
    grad(y, c) -= 1.0;
  }
  grad /= batch;
  return {total / batch, std::move(grad)};
}

double kl_diag_gaussian(const Eigen::VectorXd& mu, const Eigen::VectorXd& logvar) {
  if (mu.size() != logvar.size()) throw std::invalid_argument("kl_diag_gaussian: size mismatch");
  return 0.5 * (mu.array().square() + logvar.array().exp() - logvar.array() - 1.0).sum();
}

KlResult kl_diag_gaussian_batch(const Eigen::MatrixXd& mu, const Eigen::MatrixXd& logvar) {
  require_same_shape(mu, logvar);
  const double batch = static_cast<double>(mu.cols());
  const Eigen::ArrayXXd var = logvar.array().exp();
  KlResult r;
  r.value = 0.5 * (mu.array().square() + var - logvar.array() - 1.0).sum() / batch;
  r.grad_mu = mu / batch;
  r.grad_logvar = (0.5 * (var - 1.0) / batch).matrix();
  return r;
}

Eigen::MatrixXd reparameterize(const Eigen::MatrixXd& mu, const Eigen::MatrixXd& logvar, Rng& rng,
                               Eigen::MatrixXd* eps_out) {
  if (mu.rows() != logvar.rows() || mu.cols() != logvar.cols()) {
    throw std::invalid_argument("reparameterize: shape mismatch");
  }
  Eigen::MatrixXd eps(mu.rows(), mu.cols());
  for (Eigen::Index c = 0; c < eps.cols(); ++c) {
    for (Eigen::Index r = 0; r < eps.rows(); ++r) eps(r, c) = rng.normal();
  }
  Eigen::MatrixXd z = mu.array() + (0.5 * logvar.array()).exp() * eps.array();
  if (eps_out) *eps_out = std::move(eps);
  return z;
}

Eigen::VectorXd reparameterize(const Eigen::VectorXd& mu, const Eigen::VectorXd& logvar,
                               std::uint64_t seed) {
  Rng rng(seed);
  Eigen::MatrixXd z = reparameterize(Eigen::MatrixXd(mu), Eigen::MatrixXd(logvar), rng);
  return z.col(0);
}

Eigen::MatrixXd one_hot(std::span<const LabelId> labels, std::size_t num_classes) {
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(num_classes),
                                              static_cast<Eigen::Index>(labels.size()));
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0 || static_cast<std::size_t>(labels[i]) >= num_classes) {
      throw std::invalid_argument("one_hot: label out of range");
    }
    out(labels[i], static_cast<Eigen::Index>(i)) = 1.0;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Gradient check

GradCheckReport check_gradients(const std::function<double()>& loss,
                                std::span<const std::span<double>> params,
                                std::span<const std::span<const double>> analytic,
                                const GradCheckOptions& opts) {
  if (params.size() != analytic.size()) throw std::invalid_argument("check_gradients: block count mismatch");
  Rng rng(opts.seed);
  GradCheckReport report;
  for (std::size_t b = 0; b < params.size(); ++b) {
    auto p = params[b];
    auto a = analytic[b];
    if (p.size() != a.size()) throw std::invalid_argument("check_gradients: block shape mismatch");
    std::vector<std::size_t> idx(p.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    if (opts.max_entries_per_block > 0 && idx.size() > opts.max_entries_per_block) {
      for (std::size_t i = 0; i < opts.max_entries_per_block; ++i) {
        std::swap(idx[i], idx[i + rng.index(idx.size() - i)]);
      }
      idx.resize(opts.max_entries_per_block);
    }
    for (std::size_t i : idx) {
      const double saved = p[i];
      p[i] = saved + opts.step;
      const double up = loss();
      p[i] = saved - opts.step;
      const double down = loss();
      p[i] = saved;
      const double numeric = (up - down) / (2.0 * opts.step);
      const double denom = std::max({std::abs(a[i]), std::abs(numeric), opts.denominator_floor});
      const double rel = std::abs(a[i] - numeric) / denom;
      ++report.entries_checked;
      if (rel > report.max_rel_error || report.entries_checked == 1) {
        report.max_rel_error = std::max(report.max_rel_error, rel);
        report.worst_block = b;
        report.worst_index = i;
        report.worst_analytic = a[i];
        report.worst_numeric = numeric;
      }
    }
  }
  return report;
}

}  // namespace fda::nn
