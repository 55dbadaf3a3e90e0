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

#ifndef FDA_SYNTHGEN_HPP_
#define FDA_SYNTHGEN_HPP_

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fda/dataio.hpp"

namespace fda {

struct MixtureClass {
  std::string name;
  Eigen::VectorXd mean;
  Eigen::VectorXd stddev;
  std::size_t train_count = 0;
  std::size_t dev_count = 0;
  std::size_t test_count = 0;
};

/// Axis-aligned Gaussian mixture, one component per class.
struct MixtureSpec {
  std::size_t dim = 0;
  std::vector<MixtureClass> classes;

  /// Throws ConfigError: needs >= 2 classes, matching widths, stddev > 0.
  void validate() const;
};

struct SplitCounts {
  std::size_t train = 1800;
  std::size_t dev = 100;
  std::size_t test = 100;
};

/// Row i of class c in each split is mean_c + stddev_c * z, z ~ N(0, I).
/// Rows are grouped by class in spec order. Each split draws from its own
/// derived stream, so changing one split's counts leaves the others intact.
DatasetBundle generate_mixture(const MixtureSpec& spec, std::uint64_t seed);

/// Seven balanced unit-variance classes whose means lie on a sphere of radius
/// `separation` in random directions.
MixtureSpec snipslike_spec(std::size_t dim, double separation, std::uint64_t seed,
                           SplitCounts counts = {});

}  // namespace fda

#endif  // FDA_SYNTHGEN_HPP_
