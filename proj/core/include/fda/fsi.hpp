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

#ifndef FDA_FSI_HPP_
#define FDA_FSI_HPP_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "fda/augment.hpp"
#include "fda/classifier.hpp"
#include "fda/cvae.hpp"
#include "fda/dataio.hpp"
#include "fda/deltaenc.hpp"

namespace fda::fsi {

struct GeneratorConfigs {
  augment::TrainingFreeConfig training_free;
  cvae::CvaeTrainConfig cvae;
  deltaenc::DeltaTrainConfig delta;
};

/// Any of the seven methods, fitted to one training set. Training-free
/// methods carry no state and read their seeds from the training set.
class Generator {
 public:
  /// Trains CVAE / delta-encoder models when `method` needs one; the
  /// generator configs' own seeds are replaced by `seed`.
  static Generator fit(Method method, const EmbeddingDataset& train, const GeneratorConfigs& cfg,
                       std::uint64_t seed);

  Method method() const { return method_; }
  /// `n` vectors for `label`, using the rows of `train` as seeds/anchors.
  AugmentedBatch generate(const EmbeddingDataset& train, LabelId label, std::size_t n,
                          std::uint64_t seed) const;

  const cvae::CvaeModel* cvae_model() const { return std::get_if<cvae::CvaeModel>(&model_); }
  const deltaenc::DeltaEncoderModel* delta_model() const {
    return std::get_if<deltaenc::DeltaEncoderModel>(&model_);
  }

 private:
  Method method_ = Method::Upsample;
  augment::TrainingFreeConfig training_free_;
  std::variant<std::monostate, cvae::CvaeModel, deltaenc::DeltaEncoderModel> model_;
};

struct AggregateResult {
  std::optional<Method> method;  // nullopt: no-augmentation baseline
  std::size_t k = 0;             // seed examples (FSI); 0 for full-data runs
  std::size_t n_aug = 0;         // generated examples (FSI)
  double fraction = 0.0;         // generated fraction per class (full-data)
  std::vector<double> accuracies;
  double mean = 0.0;
  double sd = 0.0;
  bool sd_defined = false;

  std::string method_label() const;
  /// Recomputes mean/sd from `accuracies`.
  void finalize();
};

struct SimulationSpec {
  LabelId target = 0;
  std::size_t k = 10;
  std::vector<std::size_t> n_aug{100, 512};
  std::vector<Method> methods{std::begin(kAllMethods), std::end(kAllMethods)};
  std::size_t repeats = 10;
  std::uint64_t master_seed = 0;
  classifier::ClassifierTrainConfig classifier;
  GeneratorConfigs generators;
  std::size_t jobs = 1;  // runs executed concurrently; never affects results

  void validate() const;
};

struct FsiResult {
  LabelId target = 0;
  std::size_t k = 0;
  AggregateResult baseline;
  std::vector<AggregateResult> cells;  // methods x n_aug, in spec order
};

/// Seed for repeat `run`: derive_seed(master_seed, {run}). Inside a run the
/// streams are {1} seed subsampling, {2} classifier, {3, method} generator
/// training and {4, method, n} generation, so a cell's result does not depend
/// on which other methods are in the list.
std::uint64_t run_seed(std::uint64_t master_seed, std::size_t run);

/// `per_run` replaces `bundle` for the listed runs (0-based); entries past the
/// last repeat are unused. Every replacement must share `bundle`'s vocab and dim.
FsiResult run_fsi(const DatasetBundle& bundle, const SimulationSpec& spec, const RunBundles& per_run = {});

struct SweepRow {
  std::size_t k = 0;
  AggregateResult baseline;
  std::vector<AggregateResult> cells;
};

/// run_fsi for every k with a single generation size; all k share the master
/// seed, so the smaller seed sets are prefixes of the larger ones.
std::vector<SweepRow> seed_sweep(const DatasetBundle& bundle, const SimulationSpec& base,
                                 std::span<const std::size_t> ks, std::size_t n_aug,
                                 const RunBundles& per_run = {});

struct FullDataSpec {
  std::vector<double> fractions{0.05, 0.10, 0.20};
  std::vector<Method> methods{std::begin(kAllMethods), std::end(kAllMethods)};
  std::size_t repeats = 10;
  std::uint64_t master_seed = 0;
  classifier::ClassifierTrainConfig classifier;
  GeneratorConfigs generators;
  std::size_t jobs = 1;

  void validate() const;
};

struct FullDataResult {
  AggregateResult baseline;
  std::vector<AggregateResult> cells;  // fractions x methods, fraction-major
};

/// floor(fraction * class_count), robust to representation error in `fraction`.
std::size_t generated_rows(std::size_t class_count, double fraction);

/// Generates floor(fraction * class_count) rows for every class with each
/// method (generators fit on the full training split), then trains and tests.
FullDataResult full_data_augment(const DatasetBundle& bundle, const FullDataSpec& spec,
                                 const RunBundles& per_run = {});

struct ProjectedPoint {
  double x = 0.0;
  double y = 0.0;
  std::string group;
};

/// PCA onto the top two principal directions of the centered data. Each axis
/// is signed so that its largest-magnitude component is positive.
std::vector<ProjectedPoint> project_2d(const Eigen::MatrixXd& vectors,
                                       std::span<const std::string> groups);
/// The two unit principal axes as columns (dim x 2) and the data mean.
struct Projection {
  Eigen::MatrixXd axes;
  Eigen::VectorXd mean;
};
Projection fit_projection(const Eigen::MatrixXd& vectors);

}  // namespace fda::fsi

#endif  // FDA_FSI_HPP_
