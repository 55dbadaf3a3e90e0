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

#include "fda/augment.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "fda/error.hpp"
#include "fda/rng.hpp"

namespace fda::augment {

namespace {

void require_seeds(const Eigen::MatrixXd& seeds, std::size_t minimum, std::size_t n,
                   std::string_view what) {
  if (static_cast<std::size_t>(seeds.cols()) < minimum && n > 0) {
    throw DataError(std::string(what) + " needs at least " + std::to_string(minimum) +
                    " seed examples, got " + std::to_string(seeds.cols()));
  }
}

AugmentedBatch empty_batch(const Eigen::MatrixXd& seeds, std::size_t n, Method method,
                           std::uint64_t seed, LabelId label) {
  AugmentedBatch b;
  b.label = label;
  b.method = method;
  b.gen_seed = seed;
  b.vectors.resize(seeds.rows(), static_cast<Eigen::Index>(n));
  return b;
}

}  // namespace

std::string_view perturb_mode_name(PerturbMode m) {
  switch (m) {
    case PerturbMode::Additive: return "additive";
    case PerturbMode::Multiplicative: return "multiplicative";
    case PerturbMode::Mixed: return "mixed";
  }
  return "?";
}

std::optional<PerturbMode> parse_perturb_mode(std::string_view text) {
  for (auto m : {PerturbMode::Additive, PerturbMode::Multiplicative, PerturbMode::Mixed}) {
    if (perturb_mode_name(m) == text) return m;
  }
  return std::nullopt;
}

std::array<std::size_t, 2> draw_distinct_pair(Rng& rng, std::size_t count) {
  const std::size_t i = rng.index(count);
  std::size_t j = rng.index(count - 1);
  if (j >= i) ++j;
  return {i, j};
}

AugmentedBatch upsample(const Eigen::MatrixXd& seeds, std::size_t n, LabelId label) {
  require_seeds(seeds, 1, n, "upsample");
  auto b = empty_batch(seeds, n, Method::Upsample, 0, label);
  const auto k = static_cast<std::size_t>(seeds.cols());
  for (std::size_t m = 0; m < n; ++m) {
    b.vectors.col(static_cast<Eigen::Index>(m)) = seeds.col(static_cast<Eigen::Index>(m % k));
  }
  return b;
}

AugmentedBatch perturb(const Eigen::MatrixXd& seeds, std::size_t n, const PerturbConfig& cfg,
                       std::uint64_t seed, LabelId label) {
  require_seeds(seeds, 1, n, "perturb");
  if (!(cfg.alpha >= 0.0) || !std::isfinite(cfg.alpha)) throw ConfigError("perturb: alpha must be >= 0");
  auto b = empty_batch(seeds, n, Method::Perturb, seed, label);
  const auto k = static_cast<std::size_t>(seeds.cols());
  Rng rng(seed);
  for (std::size_t m = 0; m < n; ++m) {
    auto out = b.vectors.col(static_cast<Eigen::Index>(m));
    const auto base = seeds.col(static_cast<Eigen::Index>(m % k));
    bool additive = cfg.mode == PerturbMode::Additive;
    if (cfg.mode == PerturbMode::Mixed) additive = rng.coin();
    for (Eigen::Index d = 0; d < out.size(); ++d) {
      const double eps = rng.uniform(-cfg.alpha, cfg.alpha);
      out[d] = additive ? base[d] + eps : base[d] * (1.0 + eps);
    }
  }
  return b;
}

AugmentedBatch linear_delta(const Eigen::MatrixXd& seeds, std::size_t n, std::uint64_t seed,
                            LabelId label, std::vector<IndexTriple>* draws) {
  require_seeds(seeds, 2, n, "linear_delta");
  auto b = empty_batch(seeds, n, Method::Linear, seed, label);
  const auto count = static_cast<std::size_t>(seeds.cols());
  Rng rng(seed);
  if (draws) draws->clear();
  for (std::size_t m = 0; m < n; ++m) {
    const auto [i, j] = draw_distinct_pair(rng, count);
    const std::size_t k = rng.index(count);
    b.vectors.col(static_cast<Eigen::Index>(m)) =
        (seeds.col(static_cast<Eigen::Index>(i)) - seeds.col(static_cast<Eigen::Index>(j))) +
        seeds.col(static_cast<Eigen::Index>(k));
    if (draws) draws->push_back({i, j, k});
  }
  return b;
}

AugmentedBatch extrapolate(const Eigen::MatrixXd& seeds, std::size_t n, const ExtraConfig& cfg,
                           std::uint64_t seed, LabelId label, std::vector<IndexTriple>* draws) {
  require_seeds(seeds, 2, n, "extrapolate");
  if (!std::isfinite(cfg.lambda)) throw ConfigError("extrapolate: lambda must be finite");
  auto b = empty_batch(seeds, n, Method::Extra, seed, label);
  const auto count = static_cast<std::size_t>(seeds.cols());
  Rng rng(seed);
  if (draws) draws->clear();
  for (std::size_t m = 0; m < n; ++m) {
    const auto [i, j] = draw_distinct_pair(rng, count);
    const auto xi = seeds.col(static_cast<Eigen::Index>(i));
    const auto xj = seeds.col(static_cast<Eigen::Index>(j));
    b.vectors.col(static_cast<Eigen::Index>(m)) = (xi - xj) * cfg.lambda + xi;
    if (draws) draws->push_back({i, j, 0});
  }
  return b;
}

AugmentedBatch generate(Method method, const Eigen::MatrixXd& seeds, std::size_t n,
                        const TrainingFreeConfig& cfg, std::uint64_t seed, LabelId label) {
  switch (method) {
    case Method::Upsample: return upsample(seeds, n, label);
    case Method::Perturb: return perturb(seeds, n, cfg.perturb, seed, label);
    case Method::Linear: return linear_delta(seeds, n, seed, label);
    case Method::Extra: return extrapolate(seeds, n, cfg.extra, seed, label);
    default:
      throw std::invalid_argument(std::string(method_name(method)) + " requires a trained generator");
  }
}

}  // namespace fda::augment
