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

#ifndef FDA_STATS_HPP_
#define FDA_STATS_HPP_

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace fda::stats {

struct Summary {
  double mean = 0.0;
  double sd = 0.0;         // sample SD (n - 1); 0 when undefined
  bool sd_defined = false; // false for a single observation
  std::size_t count = 0;
};

/// Single-pass (Welford) mean and sample standard deviation.
/// Throws std::invalid_argument on an empty list.
Summary aggregate(std::span<const double> values);

/// Ranks starting at 1; tied values share their average rank.
std::vector<double> ranks(std::span<const double> values);

/// Pearson correlation of the ranks. Returns 0 when either side is constant.
double spearman(std::span<const double> x, std::span<const double> y);

/// Fractions rendered as percent with two decimals: "87.46 (2.87)".
std::string format_mean_sd(const Summary& s);

}  // namespace fda::stats

#endif  // FDA_STATS_HPP_
