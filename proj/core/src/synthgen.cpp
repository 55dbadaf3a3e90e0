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

#include "fda/synthgen.hpp"

#include <cmath>

#include "fda/error.hpp"
#include "fda/rng.hpp"

namespace fda {

void MixtureSpec::validate() const {
  if (dim == 0) throw ConfigError("mixture dim must be positive");
  if (classes.size() < 2) throw ConfigError("mixture needs at least 2 classes");
  for (const auto& c : classes) {
    if (static_cast<std::size_t>(c.mean.size()) != dim ||
        static_cast<std::size_t>(c.stddev.size()) != dim) {
      throw ConfigError("class '" + c.name + "': mean/stddev width != dim");
    }
    if (!c.mean.allFinite()) throw ConfigError("class '" + c.name + "': non-finite mean");
    if (!(c.stddev.array() > 0.0).all() || !c.stddev.allFinite()) {
      throw ConfigError("class '" + c.name + "': stddev components must be positive");
    }
  }
}

DatasetBundle generate_mixture(const MixtureSpec& spec, std::uint64_t seed) {
  spec.validate();
  std::vector<std::string> names;
  names.reserve(spec.classes.size());
  for (const auto& c : spec.classes) names.push_back(c.name);
  const LabelVocab vocab(std::move(names));

  auto draw_split = [&](std::uint64_t stream, auto count_of) {
    EmbeddingDataset ds(spec.dim, vocab);
    Rng rng(derive_seed(seed, {stream}));
    Eigen::VectorXd x(static_cast<Eigen::Index>(spec.dim));
    for (std::size_t c = 0; c < spec.classes.size(); ++c) {
      const auto& cls = spec.classes[c];
      for (std::size_t i = 0; i < count_of(cls); ++i) {
        for (Eigen::Index d = 0; d < x.size(); ++d) x[d] = cls.mean[d] + cls.stddev[d] * rng.normal();
        ds.append(static_cast<LabelId>(c), x);
      }
    }
    return ds;
  };

  DatasetBundle bundle{
      draw_split(1, [](const MixtureClass& c) { return c.train_count; }),
      draw_split(2, [](const MixtureClass& c) { return c.dev_count; }),
      draw_split(3, [](const MixtureClass& c) { return c.test_count; }),
  };
  return bundle;
}

MixtureSpec snipslike_spec(std::size_t dim, double separation, std::uint64_t seed,
                           SplitCounts counts) {
  if (dim < 2) throw ConfigError("snipslike_spec: dim must be >= 2");
  if (!(separation > 0.0) || !std::isfinite(separation)) {
    throw ConfigError("snipslike_spec: separation must be positive");
  }
  static const char* const kNames[] = {"AddToPlaylist",       "BookRestaurant", "GetWeather",
                                       "PlayMusic",           "RateBook",       "SearchCreativeWork",
                                       "SearchScreeningEvent"};
  MixtureSpec spec;
  spec.dim = dim;
  Rng rng(derive_seed(seed, {0x5eed}));
  const auto n = static_cast<Eigen::Index>(dim);
  for (const char* name : kNames) {
    Eigen::VectorXd dir(n);
    do {
      for (Eigen::Index d = 0; d < n; ++d) dir[d] = rng.normal();
    } while (dir.norm() < 1e-12);
    MixtureClass cls;
    cls.name = name;
    cls.mean = dir.normalized() * separation;
    cls.stddev = Eigen::VectorXd::Ones(n);
    cls.train_count = counts.train;
    cls.dev_count = counts.dev;
    cls.test_count = counts.test;
    spec.classes.push_back(std::move(cls));
  }
  return spec;
}

}  // namespace fda
