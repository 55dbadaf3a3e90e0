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

#ifndef FDA_DELTAENC_HPP_
#define FDA_DELTAENC_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "fda/dataio.hpp"
#include "fda/nn.hpp"

namespace fda::deltaenc {

/// Delta-encoder: codes the deformation between a same-class pair into a
/// small latent and re-applies it to an anchor.
///   encoder: [x_i ; x_j] -> hidden (leaky 0.2) -> z (leaky 0.2)
///   decoder: [z ; x_k]   -> hidden (leaky 0.2) -> x_hat (identity)
/// Dropout sits on the hidden activations of both networks (stored as the
/// input dropout of each network's second layer).
struct DeltaEncoderModel {
  nn::Mlp encoder;
  nn::Mlp decoder;
  std::size_t dim = 0;
  std::size_t latent = 0;

  friend bool operator==(const DeltaEncoderModel&, const DeltaEncoderModel&) = default;
};

enum class DeltaStrategy { DeltaR, DeltaS };

std::string_view strategy_name(DeltaStrategy s);

struct DeltaTrainConfig {
  double lr = 1e-3;
  std::size_t epochs = 200;
  std::size_t batch_size = 64;
  // Ordered pairs drawn per class each epoch; 0 means the class size.
  std::size_t pairs_per_class_per_epoch = 0;
  std::uint64_t seed = 0;
  std::size_t hidden = 512;
  std::size_t latent = 16;
  double dropout = 0.5;

  void validate() const;
};

struct DeltaTrainResult {
  DeltaEncoderModel model;
  std::vector<double> trace;            // epoch-mean L1 (dropout active)
  std::vector<LabelId> skipped_labels;  // classes with fewer than 2 rows
};

DeltaEncoderModel make_delta_encoder(std::size_t dim, std::size_t hidden, std::size_t latent,
                                     double dropout, std::uint64_t seed);

struct Objective {
  double loss = 0.0;
  nn::MlpGradients encoder;
  nn::MlpGradients decoder;
};

/// mean_batch L1( decoder([encoder([x_i ; x_j]) ; anchor]), target ).
/// Columns of the four matrices are aligned. `mode` drives dropout in both nets.
Objective objective(const DeltaEncoderModel& model, const Eigen::MatrixXd& xi,
                    const Eigen::MatrixXd& xj, const Eigen::MatrixXd& anchor,
                    const Eigen::MatrixXd& target, nn::ForwardMode mode);

/// Dropout-free decoder([encoder([x_i ; x_j]) ; anchor]).
Eigen::MatrixXd apply_delta(const DeltaEncoderModel& model, const Eigen::MatrixXd& xi,
                            const Eigen::MatrixXd& xj, const Eigen::MatrixXd& anchor);

/// Learns to rebuild X_i from the code of (X_i, X_j) and the anchor X_j, over
/// same-class ordered pairs with i != j.
DeltaTrainResult train_delta(const EmbeddingDataset& ds, const DeltaTrainConfig& cfg);

/// Anchors are the target rows of `ds`, cycled round-robin. DeltaS draws
/// pairs inside the target class; DeltaR first draws a non-target class with
/// at least two rows uniformly, then a pair inside it.
AugmentedBatch generate_delta(const DeltaEncoderModel& model, const EmbeddingDataset& ds,
                              LabelId target, std::size_t n, DeltaStrategy strategy,
                              std::uint64_t seed);

void save_delta(const DeltaEncoderModel& model, const std::filesystem::path& path);
DeltaEncoderModel load_delta(const std::filesystem::path& path);

}  // namespace fda::deltaenc

#endif  // FDA_DELTAENC_HPP_
