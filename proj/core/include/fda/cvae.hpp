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

#ifndef FDA_CVAE_HPP_
#define FDA_CVAE_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "fda/dataio.hpp"
#include "fda/nn.hpp"

namespace fda::cvae {

/// Conditional VAE over embedding vectors. Both networks see the class as a
/// one-hot block appended to their input:
///   encoder: [x ; onehot(y)] -> hidden (tanh) -> [mu ; logvar]
///   decoder: [z ; onehot(y)] -> hidden (tanh) -> x_hat (identity)
struct CvaeModel {
  nn::Mlp encoder;
  nn::Mlp decoder;
  std::size_t dim = 0;
  std::size_t num_classes = 0;
  std::size_t latent = 0;
  LabelVocab vocab;

  friend bool operator==(const CvaeModel&, const CvaeModel&) = default;
};

struct CvaeTrainConfig {
  double lr = 1e-3;
  std::size_t epochs = 200;
  std::size_t batch_size = 64;
  double kl_weight = 1.0;
  std::uint64_t seed = 0;
  std::size_t hidden = 2048;
  std::size_t latent = 128;
  // When > 0, each epoch trains on at most this many rows per class, drawn
  // afresh every epoch. Classes below the cap contribute all their rows.
  std::size_t max_rows_per_class = 0;

  void validate() const;
};

struct EpochLoss {
  double total = 0.0;
  double reconstruction = 0.0;
  double kl = 0.0;
};

struct CvaeTrainResult {
  CvaeModel model;
  std::vector<EpochLoss> trace;
};

CvaeModel make_cvae(std::size_t dim, const LabelVocab& vocab, std::size_t hidden, std::size_t latent,
                    std::uint64_t seed);

/// Loss and gradients for one batch with the reparameterization noise fixed.
struct Objective {
  double total = 0.0;
  double reconstruction = 0.0;
  double kl = 0.0;
  nn::MlpGradients encoder;
  nn::MlpGradients decoder;
};

/// mean_batch[ MSE(x_hat, x) + kl_weight * KL(q(z|x,y) || N(0, I)) ] with
/// z = mu + exp(logvar / 2) * eps.
Objective objective(const CvaeModel& model, const Eigen::MatrixXd& x,
                    std::span<const LabelId> labels, const Eigen::MatrixXd& eps, double kl_weight);

/// Throws DataError on an empty dataset, NumericError if the loss diverges.
CvaeTrainResult train_cvae(const EmbeddingDataset& ds, const CvaeTrainConfig& cfg);

/// Decodes z ~ N(0, I) conditioned on `label`. Dropout-free.
AugmentedBatch sample_cvae(const CvaeModel& model, LabelId label, std::size_t n, std::uint64_t seed);

/// Eval-mode reconstruction [x ; y] -> mu -> x_hat (no sampling noise).
Eigen::MatrixXd reconstruct(const CvaeModel& model, const Eigen::MatrixXd& x,
                            std::span<const LabelId> labels);

void save_cvae(const CvaeModel& model, const std::filesystem::path& path);
CvaeModel load_cvae(const std::filesystem::path& path);

}  // namespace fda::cvae

#endif  // FDA_CVAE_HPP_
