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

#ifndef FDA_AUGMENT_HPP_
#define FDA_AUGMENT_HPP_

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "fda/dataio.hpp"
#include "fda/rng.hpp"

// Training-free generators. Every function takes the k seed vectors of one
// class as the columns of a dim x k matrix and returns n new columns.
namespace fda::augment {

enum class PerturbMode { Additive, Multiplicative, Mixed };

std::string_view perturb_mode_name(PerturbMode m);
std::optional<PerturbMode> parse_perturb_mode(std::string_view text);

struct PerturbConfig {
  PerturbMode mode = PerturbMode::Mixed;
  double alpha = 1.0;  // noise drawn from U[-alpha, alpha]
};

struct ExtraConfig {
  double lambda = 0.5;
};

/// Indices (i, j, k) used for one generated example; k is unused by extrapolate.
using IndexTriple = std::array<std::size_t, 3>;

/// Output m is seed (m mod k); seed i appears ceil((n - i) / k) times.
AugmentedBatch upsample(const Eigen::MatrixXd& seeds, std::size_t n, LabelId label = 0);

/// Round-robin base seed plus uniform noise. Mixed flips a fair coin per
/// output between the additive and multiplicative forms.
AugmentedBatch perturb(const Eigen::MatrixXd& seeds, std::size_t n, const PerturbConfig& cfg,
                       std::uint64_t seed, LabelId label = 0);

/// X_i - X_j + X_k with i != j drawn uniformly, k uniform.
AugmentedBatch linear_delta(const Eigen::MatrixXd& seeds, std::size_t n, std::uint64_t seed,
                            LabelId label = 0, std::vector<IndexTriple>* draws = nullptr);

/// (X_i - X_j) * lambda + X_i with i != j drawn uniformly.
AugmentedBatch extrapolate(const Eigen::MatrixXd& seeds, std::size_t n, const ExtraConfig& cfg,
                           std::uint64_t seed, LabelId label = 0,
                           std::vector<IndexTriple>* draws = nullptr);

/// Uniform ordered pair of distinct indices below `count` (count >= 2).
std::array<std::size_t, 2> draw_distinct_pair(Rng& rng, std::size_t count);

struct TrainingFreeConfig {
  PerturbConfig perturb;
  ExtraConfig extra;
};

/// Dispatches to one of the four methods above; throws std::invalid_argument
/// for methods that need a trained model.
AugmentedBatch generate(Method method, const Eigen::MatrixXd& seeds, std::size_t n,
                        const TrainingFreeConfig& cfg, std::uint64_t seed, LabelId label = 0);

}  // namespace fda::augment

#endif  // FDA_AUGMENT_HPP_
