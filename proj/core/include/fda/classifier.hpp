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

#ifndef FDA_CLASSIFIER_HPP_
#define FDA_CLASSIFIER_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "fda/dataio.hpp"
#include "fda/nn.hpp"

namespace fda::classifier {

enum class Selection { BestDevAccuracy, LastEpoch };

std::string_view selection_name(Selection s);
std::optional<Selection> parse_selection(std::string_view text);

struct ClassifierTrainConfig {
  double lr = 1e-3;
  std::size_t epochs = 100;
  std::size_t batch_size = 32;
  double input_dropout = 0.1;
  std::uint64_t seed = 0;
  Selection selection = Selection::BestDevAccuracy;

  void validate() const;
};

/// One affine layer followed by softmax, with dropout on its input while
/// training.
class SoftmaxClassifier {
 public:
  SoftmaxClassifier() = default;
  SoftmaxClassifier(nn::Mlp net, LabelVocab vocab);
  static SoftmaxClassifier zeros(std::size_t dim, const LabelVocab& vocab, double input_dropout);

  std::size_t dim() const { return net_.input_dim(); }
  std::size_t num_classes() const { return net_.output_dim(); }
  const LabelVocab& vocab() const { return vocab_; }
  const nn::Mlp& net() const { return net_; }
  nn::Mlp& mutable_net() { return net_; }
  const Eigen::MatrixXd& weights() const { return net_.layer(0).weight; }
  const Eigen::VectorXd& bias() const { return net_.layer(0).bias; }
  double input_dropout() const { return net_.layer(0).input_dropout; }

  Eigen::MatrixXd logits(const Eigen::MatrixXd& x) const { return net_.infer(x); }
  Eigen::MatrixXd probabilities(const Eigen::MatrixXd& x) const { return nn::softmax(logits(x)); }
  /// argmax of the logits; ties go to the lowest label id.
  std::vector<LabelId> predict(const Eigen::MatrixXd& x) const;

  friend bool operator==(const SoftmaxClassifier&, const SoftmaxClassifier&) = default;

 private:
  nn::Mlp net_;
  LabelVocab vocab_;
};

/// argmax with ties broken toward the lowest index.
LabelId argmax_lowest(const Eigen::Ref<const Eigen::VectorXd>& scores);

struct TrainResult {
  SoftmaxClassifier model;
  std::vector<double> train_loss;    // per epoch, dropout active
  std::vector<double> dev_accuracy;  // per epoch; empty when dev is empty
  std::size_t selected_epoch = 0;    // 1-based
};

/// Mean cross-entropy with Adam; rows are reshuffled every epoch. Starts from
/// zero weights. With BestDevAccuracy the earliest epoch reaching the best
/// dev accuracy is returned.
TrainResult train_classifier(const EmbeddingDataset& train, const EmbeddingDataset& dev,
                             const ClassifierTrainConfig& cfg);

struct Evaluation {
  double accuracy = 0.0;
  // confusion[true][predicted]
  std::vector<std::vector<std::size_t>> confusion;
};

/// Throws DataError on an empty dataset or width mismatch.
Evaluation evaluate(const SoftmaxClassifier& model, const EmbeddingDataset& ds);

void save_classifier(const SoftmaxClassifier& model, const std::filesystem::path& path);
SoftmaxClassifier load_classifier(const std::filesystem::path& path);

}  // namespace fda::classifier

#endif  // FDA_CLASSIFIER_HPP_
