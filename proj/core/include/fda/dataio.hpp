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

#ifndef FDA_DATAIO_HPP_
#define FDA_DATAIO_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace fda {

using LabelId = std::int32_t;

/// Dense bijection between label strings and ids 0..C-1.
class LabelVocab {
 public:
  LabelVocab() = default;
  /// Throws DataError on duplicate or malformed names.
  explicit LabelVocab(std::vector<std::string> names);

  /// Returns the id of `name`, adding it at the end if unseen.
  LabelId intern(std::string_view name);
  std::optional<LabelId> find(std::string_view name) const;
  /// Like find() but throws DataError naming the label.
  LabelId at(std::string_view name) const;

  const std::string& name(LabelId id) const;
  const std::vector<std::string>& names() const { return names_; }
  std::size_t size() const { return names_.size(); }
  bool empty() const { return names_.empty(); }
  bool contains(LabelId id) const { return id >= 0 && static_cast<std::size_t>(id) < names_.size(); }

  friend bool operator==(const LabelVocab& a, const LabelVocab& b) { return a.names_ == b.names_; }

 private:
  std::vector<std::string> names_;
  std::unordered_map<std::string, LabelId> index_;
};

/// Labeled fixed-width real vectors. Rows are stored contiguously; the whole
/// table is exposed to Eigen as a dim x size matrix, one example per column.
class EmbeddingDataset {
 public:
  using ConstMatrixMap = Eigen::Map<const Eigen::MatrixXd>;
  using ConstColumnMap = Eigen::Map<const Eigen::VectorXd>;

  EmbeddingDataset() = default;
  EmbeddingDataset(std::size_t dim, LabelVocab vocab);

  /// Appends one row; throws DataError on width mismatch, non-finite values
  /// or an unknown label id.
  void append(LabelId label, std::span<const double> values);
  void append(LabelId label, const Eigen::Ref<const Eigen::VectorXd>& values);
  void reserve(std::size_t rows);

  std::size_t dim() const { return dim_; }
  std::size_t size() const { return labels_.size(); }
  bool empty() const { return labels_.empty(); }
  const LabelVocab& vocab() const { return vocab_; }
  std::size_t num_classes() const { return vocab_.size(); }

  LabelId label(std::size_t row) const { return labels_[row]; }
  const std::vector<LabelId>& labels() const { return labels_; }
  std::span<const double> row(std::size_t i) const {
    return {values_.data() + i * dim_, dim_};
  }
  ConstColumnMap column(std::size_t i) const {
    return ConstColumnMap(values_.data() + i * dim_, static_cast<Eigen::Index>(dim_));
  }
  ConstMatrixMap matrix() const {
    return ConstMatrixMap(values_.data(), static_cast<Eigen::Index>(dim_),
                          static_cast<Eigen::Index>(size()));
  }

  /// Row indices carrying `label`, ascending.
  std::vector<std::size_t> rows_with_label(LabelId label) const;
  std::size_t count_label(LabelId label) const;
  std::vector<std::size_t> class_counts() const;
  /// Vectors of one class as columns, in row order.
  Eigen::MatrixXd class_matrix(LabelId label) const;
  /// New dataset holding the listed rows in the listed order.
  EmbeddingDataset select(std::span<const std::size_t> rows) const;

  friend bool operator==(const EmbeddingDataset& a, const EmbeddingDataset& b) {
    return a.dim_ == b.dim_ && a.vocab_ == b.vocab_ && a.labels_ == b.labels_ &&
           a.values_ == b.values_;
  }

 private:
  std::size_t dim_ = 0;
  LabelVocab vocab_;
  std::vector<LabelId> labels_;
  std::vector<double> values_;
};

struct DatasetBundle {
  EmbeddingDataset train;
  EmbeddingDataset dev;
  EmbeddingDataset test;

  /// Throws DataError unless all splits share vocab and dim.
  void validate() const;
  std::size_t dim() const { return train.dim(); }
  const LabelVocab& vocab() const { return train.vocab(); }
};

/// Generator identity, in the row order used by the reporting tables.
enum class Method { Upsample, Perturb, CVAE, Linear, Extra, DeltaR, DeltaS };

inline constexpr Method kAllMethods[] = {Method::Upsample, Method::Perturb, Method::CVAE,
                                         Method::Linear,   Method::Extra,   Method::DeltaR,
                                         Method::DeltaS};

/// Display name ("Upsample", "DeltaS", ...).
std::string_view method_name(Method m);
/// Accepts display names case-insensitively ("deltas", "CVAE").
std::optional<Method> parse_method(std::string_view text);
bool method_needs_training(Method m);

struct AugmentedBatch {
  LabelId label = 0;
  Eigen::MatrixXd vectors;  // dim x n, one generated example per column
  Method method = Method::Upsample;
  std::uint64_t gen_seed = 0;

  std::size_t size() const { return static_cast<std::size_t>(vectors.cols()); }
  std::size_t dim() const { return static_cast<std::size_t>(vectors.rows()); }
};

// EMBV1 text format:
//   embv1 <dim> <count>
//   labels <name1> <name2> ...        (optional; closes the vocabulary)
//   <label>\t<v1> <v2> ... <v_dim>    (count lines)
EmbeddingDataset load_embeddings(const std::filesystem::path& path);
EmbeddingDataset parse_embeddings(std::string_view text, std::string_view source = "<memory>");
void save_embeddings(const EmbeddingDataset& ds, const std::filesystem::path& path);
std::string format_embeddings(const EmbeddingDataset& ds);

/// Shortest decimal text that parses back to exactly `v`.
std::string format_double(double v);

struct SplitPaths {
  std::filesystem::path train;
  std::filesystem::path dev;
  std::filesystem::path test;
};

/// `train`, `dev`, `test` keys name the base splits. Keys of the form
/// `run<N>.train` (and `.dev`, `.test`) replace a split for experiment run N
/// (0-based); splits a run does not name fall back to the base.
struct Manifest {
  std::filesystem::path train;
  std::filesystem::path dev;
  std::filesystem::path test;
  std::map<std::size_t, SplitPaths> runs;
};

/// Manifest grammar: `key = value` lines, `#` comments; keys train/dev/test.
/// Relative paths resolve against the manifest's directory.
Manifest read_manifest(const std::filesystem::path& path);
void write_manifest(const Manifest& m, const std::filesystem::path& path);

/// Loads all three splits and remaps them onto one vocabulary (train labels
/// first, then dev, then test, each in first-appearance order).
/// Base splits only; per-run entries are ignored.
DatasetBundle load_bundle(const std::filesystem::path& manifest_path);

using RunBundles = std::map<std::size_t, DatasetBundle>;

struct ManifestData {
  DatasetBundle base;
  RunBundles runs;  // every bundle shares base's vocab and dim
};
ManifestData load_manifest_data(const std::filesystem::path& manifest_path);
/// Writes train/dev/test.embv1 and manifest.txt into `dir`; returns the manifest path.
std::filesystem::path save_bundle(const DatasetBundle& bundle, const std::filesystem::path& dir);

/// Re-expresses `ds` over `vocab`, which must contain every label name of ds.
EmbeddingDataset remap_vocab(const EmbeddingDataset& ds, const LabelVocab& vocab);

struct SeedSplit {
  EmbeddingDataset seeds;  // k rows of the target label
  EmbeddingDataset rest;   // every row of every other label
};

/// Uniform sampling without replacement of k target rows; all non-seed target
/// rows are dropped from `rest`.
SeedSplit subsample_class(const EmbeddingDataset& ds, LabelId label, std::size_t k,
                          std::uint64_t seed);
/// Indices chosen by subsample_class for the same arguments, in draw order.
std::vector<std::size_t> sample_class_rows(const EmbeddingDataset& ds, LabelId label,
                                           std::size_t k, std::uint64_t seed);

EmbeddingDataset remove_label(const EmbeddingDataset& ds, LabelId label);
/// Real rows first, then the batch in generation order.
EmbeddingDataset merge(const EmbeddingDataset& ds, const AugmentedBatch& batch);
/// Concatenates rows of two datasets over the same vocab and dim.
EmbeddingDataset concat(const EmbeddingDataset& a, const EmbeddingDataset& b);

}  // namespace fda

#endif  // FDA_DATAIO_HPP_
