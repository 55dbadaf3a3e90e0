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

#include <gtest/gtest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "fda/rng.hpp"
#include "fda/stats.hpp"
#include "oracles.hpp"

namespace fda::stats {
namespace {

TEST(Aggregate, TwoValues) {
  const std::vector<double> v{0.9, 1.0};
  const auto s = aggregate(v);
  EXPECT_NEAR(s.mean, 0.95, 1e-15);
  EXPECT_NEAR(s.sd, std::sqrt(0.005), 1e-12);
  EXPECT_TRUE(s.sd_defined);
  EXPECT_EQ(s.count, 2u);
}

TEST(Aggregate, SingleValueFlagsSd) {
  const std::vector<double> v{0.5};
  const auto s = aggregate(v);
  EXPECT_EQ(s.mean, 0.5);
  EXPECT_FALSE(s.sd_defined);
  EXPECT_EQ(s.sd, 0.0);
}

TEST(Aggregate, EmptyThrows) {
  EXPECT_THROW(aggregate(std::vector<double>{}), std::invalid_argument);
}

TEST(Aggregate, MatchesTwoPassOracle) {
  Rng rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> v(2 + rng.index(30));
    for (auto& x : v) x = rng.uniform();
    const auto s = aggregate(v);
    const auto [m, sd] = oracle::two_pass_mean_sd(v);
    EXPECT_NEAR(s.mean, m, 1e-12);
    EXPECT_NEAR(s.sd, sd, 1e-12);
  }
}

TEST(Format, PercentWithTwoDecimals) {
  Summary s;
  s.mean = 0.8746;
  s.sd = 0.0287;
  s.sd_defined = true;
  EXPECT_EQ(format_mean_sd(s), "87.46 (2.87)");
}

TEST(Ranks, AveragesTies) {
  const std::vector<double> v{3.0, 1.0, 3.0, 2.0};
  EXPECT_EQ(ranks(v), (std::vector<double>{3.5, 1.0, 3.5, 2.0}));
}

TEST(Spearman, MonotoneAndReversed) {
  const std::vector<double> x{1, 2, 3, 4, 5};
  const std::vector<double> up{1, 4, 9, 16, 25};
  const std::vector<double> down{5, 3, 2, 1, 0};
  EXPECT_NEAR(spearman(x, up), 1.0, 1e-15);
  EXPECT_NEAR(spearman(x, down), -1.0, 1e-15);
  EXPECT_THROW(spearman(x, std::vector<double>{1.0}), std::invalid_argument);
}

}  // namespace
}  // namespace fda::stats
