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

#include "fda/cvae.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include "fda/checkpoint.hpp"
#include "fda/error.hpp"
#include "fda/rng.hpp"

namespace fda::cvae {

namespace {

Eigen::MatrixXd stack(const Eigen::MatrixXd& top, const Eigen::MatrixXd& bottom) {
  Eigen::MatrixXd out(top.rows() + bottom.rows(), top.cols());
  out << top, bottom;
  return out;
}

// Rows visited in one epoch, shuffled.
std::vector<std::size_t> epoch_rows(const EmbeddingDataset& ds,
                                    const std::vector<std::vector<std::size_t>>& by_class,
                                    std::size_t cap, Rng& rng) {
  std::vector<std::size_t> rows;
  if (cap == 0) {
    rows.resize(ds.size());
    std::iota(rows.begin(), rows.end(), std::size_t{0});
  } else {
    for (auto pool : by_class) {
      const std::size_t take = std::min(cap, pool.size());
      for (std::size_t i = 0; i < take; ++i) std::swap(pool[i], pool[i + rng.index(pool.size() - i)]);
      rows.insert(rows.end(), pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(take));
    }
  }
  for (std::size_t i = rows.size(); i > 1; --i) std::swap(rows[i - 1], rows[rng.index(i)]);
  return rows;
}

}  // namespace

void CvaeTrainConfig::validate() const {
  if (!(lr > 0.0)) throw ConfigError("cvae.lr must be > 0");
  if (epochs < 1) throw ConfigError("cvae.epochs must be >= 1");
  if (batch_size < 1) throw ConfigError("cvae.batch_size must be >= 1");
  if (!(kl_weight >= 0.0)) throw ConfigError("cvae.kl_weight must be >= 0");
  if (hidden < 1 || latent < 1) throw ConfigError("cvae.hidden and cvae.latent must be >= 1");
}

CvaeModel make_cvae(std::size_t dim, const LabelVocab& vocab, std::size_t hidden, std::size_t latent,
                    std::uint64_t seed) {
  const std::size_t classes = vocab.size();
  const nn::LayerSpec enc[] = {{hidden, nn::Activation::Tanh, 0.0},
                               {2 * latent, nn::Activation::Identity, 0.0}};
  const nn::LayerSpec dec[] = {{hidden, nn::Activation::Tanh, 0.0},
                               {dim, nn::Activation::Identity, 0.0}};
  CvaeModel m;
  m.encoder = nn::Mlp::make(dim + classes, enc, derive_seed(seed, {1}));
  m.decoder = nn::Mlp::make(latent + classes, dec, derive_seed(seed, {2}));
  m.dim = dim;
  m.num_classes = classes;
  m.latent = latent;
  m.vocab = vocab;
  return m;
}

Objective objective(const CvaeModel& model, const Eigen::MatrixXd& x,
                    std::span<const LabelId> labels, const Eigen::MatrixXd& eps, double kl_weight) {
  const auto latent = static_cast<Eigen::Index>(model.latent);
  const Eigen::MatrixXd y = nn::one_hot(labels, model.num_classes);
  const auto enc = model.encoder.forward(stack(x, y), nn::ForwardMode::eval());
  const Eigen::MatrixXd mu = enc.output().topRows(latent);
  const Eigen::MatrixXd logvar = enc.output().bottomRows(latent);
  const Eigen::MatrixXd sd = (0.5 * logvar.array()).exp();
  const Eigen::MatrixXd z = mu.array() + sd.array() * eps.array();
  const auto dec = model.decoder.forward(stack(z, y), nn::ForwardMode::eval());

  const auto rec = nn::mse_loss(dec.output(), x);
  const auto kl = nn::kl_diag_gaussian_batch(mu, logvar);

  Objective out;
  out.reconstruction = rec.value;
  out.kl = kl.value;
  out.total = rec.value + kl_weight * kl.value;
  out.decoder = model.decoder.backward(dec, rec.grad);
  const Eigen::MatrixXd dz = out.decoder.input.topRows(latent);
  Eigen::MatrixXd grad_enc(2 * latent, x.cols());
  grad_enc.topRows(latent) = dz + kl_weight * kl.grad_mu;
  grad_enc.bottomRows(latent) =
      (0.5 * dz.array() * eps.array() * sd.array()).matrix() + kl_weight * kl.grad_logvar;
  out.encoder = model.encoder.backward(enc, grad_enc);
  return out;
}

CvaeTrainResult train_cvae(const EmbeddingDataset& ds, const CvaeTrainConfig& cfg) {
  cfg.validate();
  if (ds.empty()) throw DataError("train_cvae: empty dataset");

  CvaeTrainResult result;
  result.model = make_cvae(ds.dim(), ds.vocab(), cfg.hidden, cfg.latent, derive_seed(cfg.seed, {1}));
  auto& model = result.model;

  auto params = model.encoder.parameter_blocks();
  for (auto b : model.decoder.parameter_blocks()) params.push_back(b);
  nn::AdamState adam(params, nn::AdamConfig{cfg.lr});

  std::vector<std::vector<std::size_t>> by_class(ds.num_classes());
  for (std::size_t r = 0; r < ds.size(); ++r) by_class[static_cast<std::size_t>(ds.label(r))].push_back(r);

  Rng rng(derive_seed(cfg.seed, {2}));
  const auto data = ds.matrix();
  const auto latent = static_cast<Eigen::Index>(cfg.latent);
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    const auto rows = epoch_rows(ds, by_class, cfg.max_rows_per_class, rng);
    EpochLoss sum;
    for (std::size_t start = 0; start < rows.size(); start += cfg.batch_size) {
      const std::size_t stop = std::min(rows.size(), start + cfg.batch_size);
      const auto batch = static_cast<Eigen::Index>(stop - start);
      Eigen::MatrixXd x(data.rows(), batch);
      std::vector<LabelId> labels(static_cast<std::size_t>(batch));
      for (Eigen::Index c = 0; c < batch; ++c) {
        const std::size_t r = rows[start + static_cast<std::size_t>(c)];
        x.col(c) = data.col(static_cast<Eigen::Index>(r));
        labels[static_cast<std::size_t>(c)] = ds.label(r);
      }
      Eigen::MatrixXd eps(latent, batch);
      for (Eigen::Index c = 0; c < batch; ++c) {
        for (Eigen::Index d = 0; d < latent; ++d) eps(d, c) = rng.normal();
      }
      const auto obj = objective(model, x, labels, eps, cfg.kl_weight);
      if (!std::isfinite(obj.total)) {
        throw NumericError("train_cvae: non-finite loss at epoch " + std::to_string(epoch + 1));
      }
      const double w = static_cast<double>(batch);
      sum.total += obj.total * w;
      sum.reconstruction += obj.reconstruction * w;
      sum.kl += obj.kl * w;

      auto grads = obj.encoder.blocks();
      for (auto g : obj.decoder.blocks()) grads.push_back(g);
      nn::adam_step(params, grads, adam);
    }
    const double n = static_cast<double>(rows.size());
    result.trace.push_back({sum.total / n, sum.reconstruction / n, sum.kl / n});
  }
  if (!model.encoder.all_finite() || !model.decoder.all_finite()) {
    throw NumericError("train_cvae: non-finite parameters after training");
  }
  return result;
}

AugmentedBatch sample_cvae(const CvaeModel& model, LabelId label, std::size_t n, std::uint64_t seed) {
  if (label < 0 || static_cast<std::size_t>(label) >= model.num_classes) {
    throw DataError("sample_cvae: label id " + std::to_string(label) + " out of range");
  }
  AugmentedBatch b;
  b.label = label;
  b.method = Method::CVAE;
  b.gen_seed = seed;
  b.vectors.resize(static_cast<Eigen::Index>(model.dim), static_cast<Eigen::Index>(n));
  if (n == 0) return b;
  Rng rng(seed);
  const auto latent = static_cast<Eigen::Index>(model.latent);
  Eigen::MatrixXd z(latent, static_cast<Eigen::Index>(n));
  for (Eigen::Index c = 0; c < z.cols(); ++c) {
    for (Eigen::Index d = 0; d < latent; ++d) z(d, c) = rng.normal();
  }
  const std::vector<LabelId> labels(n, label);
  b.vectors = model.decoder.infer(stack(z, nn::one_hot(labels, model.num_classes)));
  return b;
}

Eigen::MatrixXd reconstruct(const CvaeModel& model, const Eigen::MatrixXd& x,
                            std::span<const LabelId> labels) {
  const Eigen::MatrixXd y = nn::one_hot(labels, model.num_classes);
  const Eigen::MatrixXd mu = model.encoder.infer(stack(x, y)).topRows(static_cast<Eigen::Index>(model.latent));
  return model.decoder.infer(stack(mu, y));
}

void save_cvae(const CvaeModel& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  ckpt::Writer w(out, "cvae");
  w.field("dim", model.dim);
  w.field("latent", model.latent);
  w.vocab(model.vocab);
  w.mlp("encoder", model.encoder);
  w.mlp("decoder", model.decoder);
  w.finish();
}

CvaeModel load_cvae(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  ckpt::Reader r(in, "cvae");
  CvaeModel m;
  m.dim = r.size_field("dim");
  m.latent = r.size_field("latent");
  m.vocab = r.vocab();
  m.num_classes = m.vocab.size();
  m.encoder = r.mlp("encoder");
  m.decoder = r.mlp("decoder");
  r.finish();
  if (m.encoder.input_dim() != m.dim + m.num_classes || m.encoder.output_dim() != 2 * m.latent ||
      m.decoder.input_dim() != m.latent + m.num_classes || m.decoder.output_dim() != m.dim) {
    throw DataError(path.string() + ": cvae network shapes inconsistent with header");
  }
  return m;
}

}  // namespace fda::cvae
