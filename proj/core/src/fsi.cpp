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

#include "fda/fsi.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

#include "fda/error.hpp"
#include "fda/rng.hpp"
#include "fda/stats.hpp"

namespace fda::fsi {

namespace {

// Runs body(i) for i in [0, count) on up to `jobs` threads. The first
// exception thrown by any task is rethrown after all workers stop.
template <typename Body>
void parallel_for(std::size_t count, std::size_t jobs, Body&& body) {
  jobs = std::max<std::size_t>(1, std::min(jobs, count));
  if (jobs == 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mu;
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= count) return;
      try {
        body(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mu);
        if (!error) error = std::current_exception();
        next.store(count);
      }
    }
  };
  std::vector<std::thread> threads;
  for (std::size_t t = 0; t < jobs; ++t) threads.emplace_back(worker);
  for (auto& t : threads) t.join();
  if (error) std::rethrow_exception(error);
}

std::uint64_t method_stream(Method m) { return static_cast<std::uint64_t>(m) + 1; }

std::string prefixed(Method m, const std::string& what) {
  const std::string prefix = std::string(method_name(m)) + ": ";
  return what.rfind(prefix, 0) == 0 ? what : prefix + what;
}

// Re-raises generator failures with the method name attached.
template <typename Fn>
auto with_method_context(Method m, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const DataError& e) {
    throw DataError(prefixed(m, e.what()));
  } catch (const NumericError& e) {
    throw NumericError(prefixed(m, e.what()));
  }
}

double train_and_test(const EmbeddingDataset& train, const EmbeddingDataset& dev,
                      const EmbeddingDataset& test, const classifier::ClassifierTrainConfig& cfg) {
  const auto trained = classifier::train_classifier(train, dev, cfg);
  return classifier::evaluate(trained.model, test).accuracy;
}

// The bundle used by `run`, after checking every override against the base.
class RunData {
 public:
  RunData(const DatasetBundle& base, const RunBundles& per_run, std::size_t repeats)
      : base_(base), per_run_(per_run) {
    for (const auto& [run, b] : per_run_) {
      if (run >= repeats) continue;
      b.validate();
      if (b.dim() != base.dim() || !(b.vocab() == base.vocab())) {
        throw DataError("run " + std::to_string(run) + ": per-run data must share the base vocab and dim");
      }
    }
  }
  const DatasetBundle& operator()(std::size_t run) const {
    const auto it = per_run_.find(run);
    return it == per_run_.end() ? base_ : it->second;
  }
  bool overridden(std::size_t run) const { return per_run_.count(run) > 0; }

 private:
  const DatasetBundle& base_;
  const RunBundles& per_run_;
};

void check_target_rows(const RunData& data, std::size_t repeats, LabelId target, std::size_t k,
                       const std::string& what) {
  for (std::size_t run = 0; run < repeats; ++run) {
    const auto& b = data(run);
    const std::size_t available = b.train.count_label(target);
    if (available < k) {
      throw DataError(what + ": target '" + b.vocab().name(target) + "' has " + std::to_string(available) +
                      " training rows" + (data.overridden(run) ? " in run " + std::to_string(run) : "") +
                      ", fewer than k=" + std::to_string(k));
    }
  }
}

void validate_methods(std::span<const Method> methods) {
  for (std::size_t i = 0; i < methods.size(); ++i) {
    for (std::size_t j = i + 1; j < methods.size(); ++j) {
      if (methods[i] == methods[j]) {
        throw ConfigError("methods: '" + std::string(method_name(methods[i])) + "' listed twice");
      }
    }
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// Generator

Generator Generator::fit(Method method, const EmbeddingDataset& train, const GeneratorConfigs& cfg,
                         std::uint64_t seed) {
  Generator g;
  g.method_ = method;
  g.training_free_ = cfg.training_free;
  if (method == Method::CVAE) {
    auto c = cfg.cvae;
    c.seed = seed;
    g.model_ = cvae::train_cvae(train, c).model;
  } else if (method == Method::DeltaR || method == Method::DeltaS) {
    auto c = cfg.delta;
    c.seed = seed;
    g.model_ = deltaenc::train_delta(train, c).model;
  }
  return g;
}

AugmentedBatch Generator::generate(const EmbeddingDataset& train, LabelId label, std::size_t n,
                                   std::uint64_t seed) const {
  switch (method_) {
    case Method::CVAE:
      return cvae::sample_cvae(std::get<cvae::CvaeModel>(model_), label, n, seed);
    case Method::DeltaR:
      return deltaenc::generate_delta(std::get<deltaenc::DeltaEncoderModel>(model_), train, label, n,
                                      deltaenc::DeltaStrategy::DeltaR, seed);
    case Method::DeltaS:
      return deltaenc::generate_delta(std::get<deltaenc::DeltaEncoderModel>(model_), train, label, n,
                                      deltaenc::DeltaStrategy::DeltaS, seed);
    default:
      return augment::generate(method_, train.class_matrix(label), n, training_free_, seed, label);
  }
}

// ---------------------------------------------------------------------------
// Aggregation

std::string AggregateResult::method_label() const {
  return method ? std::string(method_name(*method)) : std::string("No Augmentation");
}

void AggregateResult::finalize() {
  const auto s = stats::aggregate(accuracies);
  mean = s.mean;
  sd = s.sd;
  sd_defined = s.sd_defined;
}

std::uint64_t run_seed(std::uint64_t master_seed, std::size_t run) {
  return derive_seed(master_seed, {static_cast<std::uint64_t>(run)});
}

// ---------------------------------------------------------------------------
// FSI

void SimulationSpec::validate() const {
  if (k < 1) throw ConfigError("fsi.k must be >= 1");
  if (repeats < 1) throw ConfigError("fsi.repeats must be >= 1");
  validate_methods(methods);
  classifier.validate();
  if (std::any_of(methods.begin(), methods.end(), [](Method m) { return m == Method::CVAE; })) {
    generators.cvae.validate();
  }
  if (std::any_of(methods.begin(), methods.end(),
                  [](Method m) { return m == Method::DeltaR || m == Method::DeltaS; })) {
    generators.delta.validate();
  }
}

FsiResult run_fsi(const DatasetBundle& bundle, const SimulationSpec& spec, const RunBundles& per_run) {
  spec.validate();
  bundle.validate();
  if (!bundle.vocab().contains(spec.target)) throw DataError("fsi: target label id out of range");
  const RunData data(bundle, per_run, spec.repeats);
  check_target_rows(data, spec.repeats, spec.target, spec.k, "fsi");

  const std::size_t cells = spec.methods.size() * spec.n_aug.size();
  // accuracy[run][0] is the baseline, accuracy[run][1 + cell] the cells.
  std::vector<std::vector<double>> accuracy(spec.repeats, std::vector<double>(1 + cells, 0.0));

  parallel_for(spec.repeats, spec.jobs, [&](std::size_t run) {
    const std::uint64_t rs = run_seed(spec.master_seed, run);
    const DatasetBundle& b = data(run);
    const EmbeddingDataset dev = remove_label(b.dev, spec.target);
    const auto split = subsample_class(b.train, spec.target, spec.k, derive_seed(rs, {1}));
    const EmbeddingDataset train = concat(split.seeds, split.rest);
    auto clf = spec.classifier;
    clf.seed = derive_seed(rs, {2});

    auto& row = accuracy[run];
    row[0] = train_and_test(train, dev, b.test, clf);
    std::size_t cell = 1;
    for (Method m : spec.methods) {
      const auto gen = with_method_context(m, [&] {
        return Generator::fit(m, train, spec.generators, derive_seed(rs, {3, method_stream(m)}));
      });
      for (std::size_t n : spec.n_aug) {
        const auto batch = with_method_context(m, [&] {
          return gen.generate(train, spec.target, n, derive_seed(rs, {4, method_stream(m), n}));
        });
        row[cell++] = train_and_test(merge(train, batch), dev, b.test, clf);
      }
    }
  });

  FsiResult result;
  result.target = spec.target;
  result.k = spec.k;
  result.baseline.k = spec.k;
  for (const auto& row : accuracy) result.baseline.accuracies.push_back(row[0]);
  result.baseline.finalize();
  std::size_t cell = 1;
  for (Method m : spec.methods) {
    for (std::size_t n : spec.n_aug) {
      AggregateResult agg;
      agg.method = m;
      agg.k = spec.k;
      agg.n_aug = n;
      for (const auto& row : accuracy) agg.accuracies.push_back(row[cell]);
      agg.finalize();
      result.cells.push_back(std::move(agg));
      ++cell;
    }
  }
  return result;
}

std::vector<SweepRow> seed_sweep(const DatasetBundle& bundle, const SimulationSpec& base,
                                 std::span<const std::size_t> ks, std::size_t n_aug, const RunBundles& per_run) {
  if (ks.empty()) throw ConfigError("sweep.ks must not be empty");
  bundle.validate();
  base.validate();
  if (!bundle.vocab().contains(base.target)) throw DataError("sweep: target label id out of range");
  const RunData data(bundle, per_run, base.repeats);
  check_target_rows(data, base.repeats, base.target, *std::max_element(ks.begin(), ks.end()), "sweep");
  std::vector<SweepRow> rows;
  for (std::size_t k : ks) {
    auto spec = base;
    spec.k = k;
    spec.n_aug = {n_aug};
    auto r = run_fsi(bundle, spec, per_run);
    rows.push_back({k, std::move(r.baseline), std::move(r.cells)});
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Full-data augmentation

void FullDataSpec::validate() const {
  if (repeats < 1) throw ConfigError("fulldata.repeats must be >= 1");
  for (double f : fractions) {
    if (!(f > 0.0 && f <= 1.0)) throw ConfigError("fulldata.fractions: values must lie in (0, 1]");
  }
  validate_methods(methods);
  classifier.validate();
}

std::size_t generated_rows(std::size_t class_count, double fraction) {
  // 0.29 * 100 evaluates to 28.999999999999996 in binary floating point.
  const double exact = fraction * static_cast<double>(class_count);
  return static_cast<std::size_t>(std::floor(exact * (1.0 + 1e-12) + 1e-9));
}

FullDataResult full_data_augment(const DatasetBundle& bundle, const FullDataSpec& spec,
                                 const RunBundles& per_run) {
  spec.validate();
  bundle.validate();
  const RunData data(bundle, per_run, spec.repeats);
  const std::size_t cells = spec.methods.size() * spec.fractions.size();
  std::vector<std::vector<double>> accuracy(spec.repeats, std::vector<double>(1 + cells, 0.0));

  parallel_for(spec.repeats, spec.jobs, [&](std::size_t run) {
    const std::uint64_t rs = run_seed(spec.master_seed, run);
    const DatasetBundle& b = data(run);
    const auto& train = b.train;
    const auto counts = train.class_counts();
    auto clf = spec.classifier;
    clf.seed = derive_seed(rs, {2});
    auto& row = accuracy[run];
    row[0] = train_and_test(train, b.dev, b.test, clf);

    std::vector<Generator> gens;
    for (Method m : spec.methods) {
      gens.push_back(with_method_context(m, [&] {
        return Generator::fit(m, train, spec.generators, derive_seed(rs, {3, method_stream(m)}));
      }));
    }
    for (std::size_t fi = 0; fi < spec.fractions.size(); ++fi) {
      const double f = spec.fractions[fi];
      for (std::size_t mi = 0; mi < spec.methods.size(); ++mi) {
        const Method m = spec.methods[mi];
        EmbeddingDataset augmented = train;
        for (std::size_t c = 0; c < counts.size(); ++c) {
          const std::size_t n = generated_rows(counts[c], f);
          if (n == 0) continue;
          const auto batch = with_method_context(m, [&] {
            return gens[mi].generate(train, static_cast<LabelId>(c), n,
                                     derive_seed(rs, {4, method_stream(m), c, std::bit_cast<std::uint64_t>(f)}));
          });
          augmented = merge(augmented, batch);
        }
        row[1 + fi * spec.methods.size() + mi] = train_and_test(augmented, b.dev, b.test, clf);
      }
    }
  });

  FullDataResult result;
  for (const auto& row : accuracy) result.baseline.accuracies.push_back(row[0]);
  result.baseline.finalize();
  for (std::size_t fi = 0; fi < spec.fractions.size(); ++fi) {
    for (std::size_t mi = 0; mi < spec.methods.size(); ++mi) {
      AggregateResult agg;
      agg.method = spec.methods[mi];
      agg.fraction = spec.fractions[fi];
      for (const auto& row : accuracy) agg.accuracies.push_back(row[1 + fi * spec.methods.size() + mi]);
      agg.finalize();
      result.cells.push_back(std::move(agg));
    }
  }
  return result;
}

// ---------------------------------------------------------------------------
// Projection

Projection fit_projection(const Eigen::MatrixXd& vectors) {
  if (vectors.cols() < 2) throw DataError("project_2d: need at least 2 vectors");
  if (vectors.rows() < 2) throw DataError("project_2d: need dim >= 2");
  Projection p;
  p.mean = vectors.rowwise().mean();
  const Eigen::MatrixXd centered = vectors.colwise() - p.mean;
  const Eigen::MatrixXd cov = centered * centered.transpose() / static_cast<double>(vectors.cols() - 1);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
  if (eig.info() != Eigen::Success) throw NumericError("project_2d: eigendecomposition failed");
  // Eigenvalues ascend; the last two columns are the leading directions.
  const Eigen::Index d = cov.rows();
  p.axes.resize(d, 2);
  p.axes.col(0) = eig.eigenvectors().col(d - 1);
  p.axes.col(1) = eig.eigenvectors().col(d - 2);
  for (Eigen::Index a = 0; a < 2; ++a) {
    Eigen::Index biggest = 0;
    p.axes.col(a).cwiseAbs().maxCoeff(&biggest);
    if (p.axes(biggest, a) < 0.0) p.axes.col(a) = -p.axes.col(a);
  }
  return p;
}

std::vector<ProjectedPoint> project_2d(const Eigen::MatrixXd& vectors,
                                       std::span<const std::string> groups) {
  if (groups.size() != static_cast<std::size_t>(vectors.cols())) {
    throw DataError("project_2d: one group tag per vector required");
  }
  const auto p = fit_projection(vectors);
  const Eigen::MatrixXd coords = p.axes.transpose() * (vectors.colwise() - p.mean);
  std::vector<ProjectedPoint> out;
  out.reserve(groups.size());
  for (std::size_t i = 0; i < groups.size(); ++i) {
    const auto c = static_cast<Eigen::Index>(i);
    out.push_back({coords(0, c), coords(1, c), groups[i]});
  }
  return out;
}

}  // namespace fda::fsi
