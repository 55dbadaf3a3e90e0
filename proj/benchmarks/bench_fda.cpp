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

#include <benchmark/benchmark.h>

#include "fda/augment.hpp"
#include "fda/classifier.hpp"
#include "fda/cvae.hpp"
#include "fda/deltaenc.hpp"
#include "fda/nn.hpp"
#include "fda/rng.hpp"
#include "fda/synthgen.hpp"

namespace {

Eigen::MatrixXd gaussian(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed) {
  fda::Rng rng(seed);
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.normal();
  return m;
}

const fda::DatasetBundle& bundle() {
  static const auto b = fda::generate_mixture(fda::snipslike_spec(16, 8.0, 1), 1);
  return b;
}

void MlpForwardBackward(benchmark::State& state) {
  const auto hidden = static_cast<std::size_t>(state.range(0));
  const fda::nn::LayerSpec specs[] = {{hidden, fda::nn::Activation::Tanh, 0.0},
                                      {16, fda::nn::Activation::Identity, 0.0}};
  const auto net = fda::nn::Mlp::make(16, specs, 1);
  const Eigen::MatrixXd x = gaussian(16, 64, 2);
  const Eigen::MatrixXd y = gaussian(16, 64, 3);
  for (auto _ : state) {
    const auto cache = net.forward(x, fda::nn::ForwardMode::eval());
    auto grads = net.backward(cache, fda::nn::mse_loss(cache.output(), y).grad);
    benchmark::DoNotOptimize(grads);
  }
  state.SetItemsProcessed(state.iterations() * 64);
}
BENCHMARK(MlpForwardBackward)->Arg(512)->Arg(2048)->Unit(benchmark::kMicrosecond);

void LinearDelta(benchmark::State& state) {
  const Eigen::MatrixXd seeds = gaussian(16, 10, 4);
  const auto n = static_cast<std::size_t>(state.range(0));
  std::uint64_t seed = 0;
  for (auto _ : state) {
    auto b = fda::augment::linear_delta(seeds, n, ++seed);
    benchmark::DoNotOptimize(b.vectors.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(LinearDelta)->Arg(100)->Arg(512);

void ClassifierTraining(benchmark::State& state) {
  fda::classifier::ClassifierTrainConfig cfg;
  cfg.epochs = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) {
    auto r = fda::classifier::train_classifier(bundle().train, bundle().dev, cfg);
    benchmark::DoNotOptimize(r.selected_epoch);
  }
}
BENCHMARK(ClassifierTraining)->Arg(5)->Unit(benchmark::kMillisecond);

void CvaeEpoch(benchmark::State& state) {
  fda::cvae::CvaeTrainConfig cfg;
  cfg.epochs = 1;
  cfg.max_rows_per_class = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) {
    auto r = fda::cvae::train_cvae(bundle().train, cfg);
    benchmark::DoNotOptimize(r.trace.back().total);
  }
}
BENCHMARK(CvaeEpoch)->Arg(64)->Unit(benchmark::kMillisecond);

void DeltaEncoderEpoch(benchmark::State& state) {
  fda::deltaenc::DeltaTrainConfig cfg;
  cfg.epochs = 1;
  cfg.pairs_per_class_per_epoch = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) {
    auto r = fda::deltaenc::train_delta(bundle().train, cfg);
    benchmark::DoNotOptimize(r.trace.back());
  }
}
BENCHMARK(DeltaEncoderEpoch)->Arg(64)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
