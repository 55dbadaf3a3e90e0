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

#include "fda/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include "fda/checkpoint.hpp"
#include "fda/error.hpp"
#include "fda/rng.hpp"

namespace fda::classifier {

std::string_view selection_name(Selection s) {
  return s == Selection::BestDevAccuracy ? "best_dev" : "last_epoch";
}

std::optional<Selection> parse_selection(std::string_view text) {
  for (auto s : {Selection::BestDevAccuracy, Selection::LastEpoch}) {
    if (selection_name(s) == text) return s;
  }
  return std::nullopt;
}

void ClassifierTrainConfig::validate() const {
  if (!(lr > 0.0)) throw ConfigError("classifier.lr must be > 0");
  if (epochs < 1) throw ConfigError("classifier.epochs must be >= 1");
  if (batch_size < 1) throw ConfigError("classifier.batch_size must be >= 1");
  if (!(input_dropout >= 0.0 && input_dropout < 1.0)) throw ConfigError("classifier.dropout must be in [0, 1)");
}

SoftmaxClassifier::SoftmaxClassifier(nn::Mlp net, LabelVocab vocab)
    : net_(std::move(net)), vocab_(std::move(vocab)) {
  if (net_.num_layers() != 1 || net_.layer(0).activation != nn::Activation::Identity) {
    throw DataError("softmax classifier must be a single identity layer");
  }
  if (net_.output_dim() != vocab_.size()) throw DataError("classifier output width != vocab size");
}

SoftmaxClassifier SoftmaxClassifier::zeros(std::size_t dim, const LabelVocab& vocab,
                                           double input_dropout) {
  nn::DenseLayer l;
  l.weight = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(vocab.size()), static_cast<Eigen::Index>(dim));
  l.bias = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(vocab.size()));
  l.activation = nn::Activation::Identity;
  l.input_dropout = input_dropout;
  return SoftmaxClassifier(nn::Mlp({std::move(l)}), vocab);
}

LabelId argmax_lowest(const Eigen::Ref<const Eigen::VectorXd>& scores) {
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < scores.size(); ++i) {
    if (scores[i] > scores[best]) best = i;
  }
  return static_cast<LabelId>(best);
}

std::vector<LabelId> SoftmaxClassifier::predict(const Eigen::MatrixXd& x) const {
  const Eigen::MatrixXd z = logits(x);
  std::vector<LabelId> out(static_cast<std::size_t>(z.cols()));
  for (Eigen::Index c = 0; c < z.cols(); ++c) out[static_cast<std::size_t>(c)] = argmax_lowest(z.col(c));
  return out;
}

Evaluation evaluate(const SoftmaxClassifier& model, const EmbeddingDataset& ds) {
  if (ds.empty()) throw DataError("evaluate: empty dataset");
  if (ds.dim() != model.dim()) throw DataError("evaluate: dataset dim != classifier dim");
  if (ds.num_classes() != model.num_classes()) throw DataError("evaluate: vocab size != classifier classes");
  const auto pred = model.predict(ds.matrix());
  Evaluation e;
  const std::size_t c = model.num_classes();
  e.confusion.assign(c, std::vector<std::size_t>(c, 0));
  std::size_t correct = 0;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const auto t = static_cast<std::size_t>(ds.label(i));
    const auto p = static_cast<std::size_t>(pred[i]);
    ++e.confusion[t][p];
    if (t == p) ++correct;
  }
  e.accuracy = static_cast<double>(correct) / static_cast<double>(ds.size());
  return e;
}

TrainResult train_classifier(const EmbeddingDataset& train, const EmbeddingDataset& dev,
                             const ClassifierTrainConfig& cfg) {
  cfg.validate();
  if (train.empty()) throw DataError("train_classifier: empty training set");
  const bool use_dev = !dev.empty();
  if (!use_dev && cfg.selection == Selection::BestDevAccuracy) {
    throw DataError("train_classifier: empty dev set with best-dev selection");
  }
  if (use_dev && (dev.dim() != train.dim() || !(dev.vocab() == train.vocab()))) {
    throw DataError("train_classifier: dev split does not match train dim/vocab");
  }

  TrainResult result;
  result.model = SoftmaxClassifier::zeros(train.dim(), train.vocab(), cfg.input_dropout);
  auto& net = result.model.mutable_net();
  auto params = net.parameter_blocks();
  nn::AdamState adam(params, nn::AdamConfig{cfg.lr});

  Rng rng(cfg.seed);
  const auto data = train.matrix();
  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Eigen::MatrixXd x;
  std::vector<LabelId> labels;

  double best = -1.0;
  SoftmaxClassifier best_model;
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.index(i)]);
    double loss_sum = 0.0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t stop = std::min(order.size(), start + cfg.batch_size);
      const auto batch = static_cast<Eigen::Index>(stop - start);
      x.resize(data.rows(), batch);
      labels.resize(static_cast<std::size_t>(batch));
      for (Eigen::Index c = 0; c < batch; ++c) {
        const std::size_t r = order[start + static_cast<std::size_t>(c)];
        x.col(c) = data.col(static_cast<Eigen::Index>(r));
        labels[static_cast<std::size_t>(c)] = train.label(r);
      }
      const auto cache = net.forward(x, nn::ForwardMode::train(rng));
      const auto loss = nn::cross_entropy_loss(cache.output(), labels);
      if (!std::isfinite(loss.value)) {
        throw NumericError("train_classifier: non-finite loss at epoch " + std::to_string(epoch + 1));
      }
      loss_sum += loss.value * static_cast<double>(batch);
      const auto grads = net.backward(cache, loss.grad);
      nn::adam_step(params, grads.blocks(), adam);
    }
    result.train_loss.push_back(loss_sum / static_cast<double>(order.size()));
    if (use_dev) {
      const double acc = evaluate(result.model, dev).accuracy;
      result.dev_accuracy.push_back(acc);
      if (cfg.selection == Selection::BestDevAccuracy && acc > best) {
        best = acc;
        best_model = result.model;
        result.selected_epoch = epoch + 1;
      }
    }
  }
  if (cfg.selection == Selection::BestDevAccuracy) {
    result.model = std::move(best_model);
  } else {
    result.selected_epoch = cfg.epochs;
  }
  return result;
}

void save_classifier(const SoftmaxClassifier& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  ckpt::Writer w(out, "softmax-classifier");
  w.vocab(model.vocab());
  w.mlp("head", model.net());
  w.finish();
}

SoftmaxClassifier load_classifier(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  ckpt::Reader r(in, "softmax-classifier");
  auto vocab = r.vocab();
  auto net = r.mlp("head");
  r.finish();
  return SoftmaxClassifier(std::move(net), std::move(vocab));
}

}  // namespace fda::classifier
