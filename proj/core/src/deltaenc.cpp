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

#include "fda/deltaenc.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "fda/augment.hpp"
#include "fda/checkpoint.hpp"
#include "fda/error.hpp"
#include "fda/rng.hpp"

namespace fda::deltaenc {

namespace {

Eigen::MatrixXd stack(const Eigen::MatrixXd& top, const Eigen::MatrixXd& bottom) {
  Eigen::MatrixXd out(top.rows() + bottom.rows(), top.cols());
  out << top, bottom;
  return out;
}

struct Pair {
  std::size_t i;
  std::size_t j;
};

}  // namespace

std::string_view strategy_name(DeltaStrategy s) {
  return s == DeltaStrategy::DeltaR ? "DeltaR" : "DeltaS";
}

void DeltaTrainConfig::validate() const {
  if (!(lr > 0.0)) throw ConfigError("delta.lr must be > 0");
  if (epochs < 1) throw ConfigError("delta.epochs must be >= 1");
  if (batch_size < 1) throw ConfigError("delta.batch_size must be >= 1");
  if (hidden < 1 || latent < 1) throw ConfigError("delta.hidden and delta.latent must be >= 1");
  if (!(dropout >= 0.0 && dropout < 1.0)) throw ConfigError("delta.dropout must be in [0, 1)");
}

DeltaEncoderModel make_delta_encoder(std::size_t dim, std::size_t hidden, std::size_t latent,
                                     double dropout, std::uint64_t seed) {
  const nn::LayerSpec enc[] = {{hidden, nn::Activation::LeakyRelu02, 0.0},
                               {latent, nn::Activation::LeakyRelu02, dropout}};
  const nn::LayerSpec dec[] = {{hidden, nn::Activation::LeakyRelu02, 0.0},
                               {dim, nn::Activation::Identity, dropout}};
  DeltaEncoderModel m;
  m.encoder = nn::Mlp::make(2 * dim, enc, derive_seed(seed, {1}));
  m.decoder = nn::Mlp::make(latent + dim, dec, derive_seed(seed, {2}));
  m.dim = dim;
  m.latent = latent;
  return m;
}

Objective objective(const DeltaEncoderModel& model, const Eigen::MatrixXd& xi,
                    const Eigen::MatrixXd& xj, const Eigen::MatrixXd& anchor,
                    const Eigen::MatrixXd& target, nn::ForwardMode mode) {
  const auto enc = model.encoder.forward(stack(xi, xj), mode);
  const auto dec = model.decoder.forward(stack(enc.output(), anchor), mode);
  const auto loss = nn::l1_loss(dec.output(), target);
  Objective out;
  out.loss = loss.value;
  out.decoder = model.decoder.backward(dec, loss.grad);
  out.encoder = model.encoder.backward(enc, out.decoder.input.topRows(static_cast<Eigen::Index>(model.latent)));
  return out;
}

Eigen::MatrixXd apply_delta(const DeltaEncoderModel& model, const Eigen::MatrixXd& xi,
                            const Eigen::MatrixXd& xj, const Eigen::MatrixXd& anchor) {
  const Eigen::MatrixXd z = model.encoder.infer(stack(xi, xj));
  return model.decoder.infer(stack(z, anchor));
}

DeltaTrainResult train_delta(const EmbeddingDataset& ds, const DeltaTrainConfig& cfg) {
  cfg.validate();
  DeltaTrainResult result;
  std::vector<std::vector<std::size_t>> pools;
  for (std::size_t c = 0; c < ds.num_classes(); ++c) {
    auto rows = ds.rows_with_label(static_cast<LabelId>(c));
    if (rows.size() >= 2) {
      pools.push_back(std::move(rows));
    } else if (!rows.empty()) {
      result.skipped_labels.push_back(static_cast<LabelId>(c));
    }
  }
  if (pools.empty()) throw DataError("train_delta: no class has at least 2 examples");

  result.model = make_delta_encoder(ds.dim(), cfg.hidden, cfg.latent, cfg.dropout,
                                    derive_seed(cfg.seed, {1}));
  auto& model = result.model;
  auto params = model.encoder.parameter_blocks();
  for (auto b : model.decoder.parameter_blocks()) params.push_back(b);
  nn::AdamState adam(params, nn::AdamConfig{cfg.lr});

  Rng rng(derive_seed(cfg.seed, {2}));
  const auto data = ds.matrix();
  const auto dim = data.rows();
  std::vector<Pair> pairs;
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    pairs.clear();
    for (const auto& pool : pools) {
      const std::size_t count = cfg.pairs_per_class_per_epoch > 0 ? cfg.pairs_per_class_per_epoch : pool.size();
      for (std::size_t p = 0; p < count; ++p) {
        const auto [a, b] = augment::draw_distinct_pair(rng, pool.size());
        pairs.push_back({pool[a], pool[b]});
      }
    }
    for (std::size_t i = pairs.size(); i > 1; --i) std::swap(pairs[i - 1], pairs[rng.index(i)]);

    double sum = 0.0;
    for (std::size_t start = 0; start < pairs.size(); start += cfg.batch_size) {
      const std::size_t stop = std::min(pairs.size(), start + cfg.batch_size);
      const auto batch = static_cast<Eigen::Index>(stop - start);
      Eigen::MatrixXd xi(dim, batch);
      Eigen::MatrixXd xj(dim, batch);
      for (Eigen::Index c = 0; c < batch; ++c) {
        const auto& pr = pairs[start + static_cast<std::size_t>(c)];
        xi.col(c) = data.col(static_cast<Eigen::Index>(pr.i));
        xj.col(c) = data.col(static_cast<Eigen::Index>(pr.j));
      }
      const auto obj = objective(model, xi, xj, xj, xi, nn::ForwardMode::train(rng));
      if (!std::isfinite(obj.loss)) {
        throw NumericError("train_delta: non-finite loss at epoch " + std::to_string(epoch + 1));
      }
      sum += obj.loss * static_cast<double>(batch);
      auto grads = obj.encoder.blocks();
      for (auto g : obj.decoder.blocks()) grads.push_back(g);
      nn::adam_step(params, grads, adam);
    }
    result.trace.push_back(sum / static_cast<double>(pairs.size()));
  }
  if (!model.encoder.all_finite() || !model.decoder.all_finite()) {
    throw NumericError("train_delta: non-finite parameters after training");
  }
  return result;
}

AugmentedBatch generate_delta(const DeltaEncoderModel& model, const EmbeddingDataset& ds,
                              LabelId target, std::size_t n, DeltaStrategy strategy,
                              std::uint64_t seed) {
  if (ds.dim() != model.dim) throw DataError("generate_delta: dataset dim != model dim");
  if (!ds.vocab().contains(target)) throw DataError("generate_delta: target label not in vocab");
  const auto anchors = ds.rows_with_label(target);
  const std::string tname = ds.vocab().name(target);
  if (anchors.empty()) throw DataError(std::string(strategy_name(strategy)) + ": no examples of target '" + tname + "'");

  std::vector<std::vector<std::size_t>> sources;
  if (strategy == DeltaStrategy::DeltaS) {
    if (anchors.size() < 2) throw DataError("DeltaS: target '" + tname + "' needs at least 2 examples");
    sources.push_back(anchors);
  } else {
    for (std::size_t c = 0; c < ds.num_classes(); ++c) {
      if (static_cast<LabelId>(c) == target) continue;
      auto rows = ds.rows_with_label(static_cast<LabelId>(c));
      if (rows.size() >= 2) sources.push_back(std::move(rows));
    }
    if (sources.empty()) throw DataError("DeltaR: no source class with at least 2 examples besides '" + tname + "'");
  }

  AugmentedBatch b;
  b.label = target;
  b.method = strategy == DeltaStrategy::DeltaR ? Method::DeltaR : Method::DeltaS;
  b.gen_seed = seed;
  const auto dim = static_cast<Eigen::Index>(ds.dim());
  b.vectors.resize(dim, static_cast<Eigen::Index>(n));
  if (n == 0) return b;

  Rng rng(seed);
  const auto data = ds.matrix();
  Eigen::MatrixXd xi(dim, static_cast<Eigen::Index>(n));
  Eigen::MatrixXd xj(dim, static_cast<Eigen::Index>(n));
  Eigen::MatrixXd xk(dim, static_cast<Eigen::Index>(n));
  for (std::size_t m = 0; m < n; ++m) {
    const auto& pool = sources.size() == 1 ? sources[0] : sources[rng.index(sources.size())];
    const auto [a, c] = augment::draw_distinct_pair(rng, pool.size());
    const auto col = static_cast<Eigen::Index>(m);
    xi.col(col) = data.col(static_cast<Eigen::Index>(pool[a]));
    xj.col(col) = data.col(static_cast<Eigen::Index>(pool[c]));
    xk.col(col) = data.col(static_cast<Eigen::Index>(anchors[m % anchors.size()]));
  }
  b.vectors = apply_delta(model, xi, xj, xk);
  return b;
}

void save_delta(const DeltaEncoderModel& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  ckpt::Writer w(out, "delta-encoder");
  w.field("dim", model.dim);
  w.field("latent", model.latent);
  w.mlp("encoder", model.encoder);
  w.mlp("decoder", model.decoder);
  w.finish();
}

DeltaEncoderModel load_delta(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  ckpt::Reader r(in, "delta-encoder");
  DeltaEncoderModel m;
  m.dim = r.size_field("dim");
  m.latent = r.size_field("latent");
  m.encoder = r.mlp("encoder");
  m.decoder = r.mlp("decoder");
  r.finish();
  if (m.encoder.input_dim() != 2 * m.dim || m.encoder.output_dim() != m.latent ||
      m.decoder.input_dim() != m.latent + m.dim || m.decoder.output_dim() != m.dim) {
    throw DataError(path.string() + ": delta-encoder network shapes inconsistent with header");
  }
  return m;
}

}  // namespace fda::deltaenc
