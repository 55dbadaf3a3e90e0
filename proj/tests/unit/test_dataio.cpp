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

#include <filesystem>
#include <fstream>
#include <limits>
#include <set>

#include "fda/dataio.hpp"
#include "fda/error.hpp"
#include "fda/rng.hpp"

namespace fda {
namespace {

namespace fs = std::filesystem;

fs::path temp_dir(const std::string& name) {
  auto p = fs::temp_directory_path() / ("fda_dataio_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

EmbeddingDataset small_dataset() {
  EmbeddingDataset ds(2, LabelVocab({"a", "b"}));
  ds.append(0, std::vector<double>{1.0, 2.0});
  ds.append(1, std::vector<double>{-0.5, 0.25});
  ds.append(0, std::vector<double>{3.0, -4.0});
  return ds;
}

EmbeddingDataset labeled_counts(const std::vector<std::size_t>& counts, std::size_t dim = 2) {
  std::vector<std::string> names;
  for (std::size_t c = 0; c < counts.size(); ++c) names.push_back("c" + std::to_string(c));
  EmbeddingDataset ds(dim, LabelVocab(names));
  double v = 0.0;
  for (std::size_t c = 0; c < counts.size(); ++c) {
    for (std::size_t i = 0; i < counts[c]; ++i) {
      std::vector<double> row(dim, v);
      v += 1.0;
      ds.append(static_cast<LabelId>(c), row);
    }
  }
  return ds;
}

TEST(LabelVocab, InternIsDenseAndStable) {
  LabelVocab v;
  EXPECT_EQ(v.intern("x"), 0);
  EXPECT_EQ(v.intern("y"), 1);
  EXPECT_EQ(v.intern("x"), 0);
  EXPECT_EQ(v.size(), 2u);
  EXPECT_EQ(v.name(1), "y");
  EXPECT_FALSE(v.find("z").has_value());
  EXPECT_THROW(v.at("z"), DataError);
}

TEST(LabelVocab, RejectsDuplicatesAndWhitespace) {
  EXPECT_THROW(LabelVocab({"a", "a"}), DataError);
  EXPECT_THROW(LabelVocab({"a b"}), DataError);
}

TEST(Embv1, HeaderAndThreeRows) {
  const auto ds = parse_embeddings("embv1 2 3\nx\t1 2\ny\t3 4\nx\t5 6\n");
  EXPECT_EQ(ds.dim(), 2u);
  EXPECT_EQ(ds.size(), 3u);
  EXPECT_EQ(ds.vocab().names(), (std::vector<std::string>{"x", "y"}));
  EXPECT_EQ(ds.label(2), 0);
  EXPECT_EQ(ds.row(1)[1], 4.0);
}

TEST(Embv1, DimensionMismatchNamesLine) {
  try {
    parse_embeddings("embv1 2 2\nx\t1 2\nx\t1 2 3\n", "f.embv1");
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("f.embv1:3"), std::string::npos) << msg;
  }
}

TEST(Embv1, EmptyRowSectionIsValid) {
  const auto ds = parse_embeddings("embv1 4 0\n");
  EXPECT_EQ(ds.dim(), 4u);
  EXPECT_TRUE(ds.empty());
}

TEST(Embv1, RejectsMalformedInput) {
  EXPECT_THROW(parse_embeddings("embv2 2 1\nx\t1 2\n"), DataError);
  EXPECT_THROW(parse_embeddings("embv1 2\n"), DataError);
  EXPECT_THROW(parse_embeddings("embv1 2 2\nx\t1 2\n"), DataError);
  EXPECT_THROW(parse_embeddings("embv1 2 1\nx\t1 nan\n"), DataError);
  EXPECT_THROW(parse_embeddings("embv1 2 1\nx\t1 inf\n"), DataError);
  EXPECT_THROW(parse_embeddings("embv1 2 1\nlabels a b\nc\t1 2\n"), DataError);
  EXPECT_THROW(parse_embeddings("embv1 2 1\nx\t1 2\ny\t3 4\n"), DataError);
}

TEST(Embv1, ClosedVocabKeepsDeclaredOrder) {
  const auto ds = parse_embeddings("embv1 1 1\nlabels b a\na\t1\n");
  EXPECT_EQ(ds.vocab().names(), (std::vector<std::string>{"b", "a"}));
  EXPECT_EQ(ds.label(0), 1);
}

TEST(Embv1, RoundTripSmall) {
  const auto ds = small_dataset();
  EXPECT_EQ(parse_embeddings(format_embeddings(ds)), ds);
}

TEST(Embv1, RoundTripEmpty) {
  EmbeddingDataset ds(3, LabelVocab({"q"}));
  const auto text = format_embeddings(ds);
  EXPECT_EQ(text.rfind("embv1 3 0", 0), 0u);
  EXPECT_EQ(parse_embeddings(text), ds);
}

TEST(Embv1, RoundTripPropertyOverRandomDatasets) {
  Rng rng(2024);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t dim = 1 + rng.index(8);
    const std::size_t classes = 1 + rng.index(4);
    std::vector<std::string> names;
    for (std::size_t c = 0; c < classes; ++c) names.push_back("L" + std::to_string(c));
    EmbeddingDataset ds(dim, LabelVocab(names));
    const std::size_t rows = rng.index(30);
    for (std::size_t r = 0; r < rows; ++r) {
      std::vector<double> v(dim);
      for (auto& x : v) {
        // Mix of magnitudes, signs and sub-unit values.
        x = rng.normal() * std::pow(10.0, static_cast<double>(rng.index(12)) - 6.0);
      }
      ds.append(static_cast<LabelId>(rng.index(classes)), v);
    }
    ASSERT_EQ(parse_embeddings(format_embeddings(ds)), ds) << "trial " << trial;
  }
}

TEST(Embv1, ExtremeValuesRoundTrip) {
  EmbeddingDataset ds(4, LabelVocab({"e"}));
  ds.append(0, std::vector<double>{std::numeric_limits<double>::min(), -std::numeric_limits<double>::max(),
                                   std::numeric_limits<double>::denorm_min(), 0.1});
  EXPECT_EQ(parse_embeddings(format_embeddings(ds)), ds);
}

TEST(Embv1, FileRoundTrip) {
  const auto dir = temp_dir("file");
  const auto ds = small_dataset();
  save_embeddings(ds, dir / "x.embv1");
  EXPECT_EQ(load_embeddings(dir / "x.embv1"), ds);
  EXPECT_THROW(load_embeddings(dir / "missing.embv1"), DataError);
}

TEST(Manifest, BundleRoundTripAndRelativePaths) {
  const auto dir = temp_dir("manifest");
  DatasetBundle b{small_dataset(), small_dataset(), small_dataset()};
  const auto manifest = save_bundle(b, dir);
  const auto m = read_manifest(manifest);
  EXPECT_EQ(m.train, dir / "train.embv1");
  const auto back = load_bundle(manifest);
  EXPECT_EQ(back.train, b.train);
  EXPECT_EQ(back.test, b.test);
}

TEST(Manifest, UnionVocabAcrossSplits) {
  const auto dir = temp_dir("union");
  {
    std::ofstream(dir / "tr.embv1") << "embv1 1 1\na\t1\n";
    std::ofstream(dir / "dv.embv1") << "embv1 1 1\nb\t2\n";
    std::ofstream(dir / "te.embv1") << "embv1 1 2\nc\t3\na\t4\n";
    std::ofstream(dir / "m.txt") << "# comment\ntrain = tr.embv1\ndev = dv.embv1\ntest = te.embv1\n";
  }
  const auto b = load_bundle(dir / "m.txt");
  EXPECT_EQ(b.vocab().names(), (std::vector<std::string>{"a", "b", "c"}));
  EXPECT_EQ(b.test.label(1), 0);
  EXPECT_EQ(b.dev.vocab(), b.train.vocab());
}

TEST(Manifest, MissingKeyAndUnknownKey) {
  const auto dir = temp_dir("badmanifest");
  std::ofstream(dir / "a.txt") << "train = x\ndev = y\n";
  std::ofstream(dir / "b.txt") << "train = x\ndev = y\ntest = z\nfoo = w\n";
  EXPECT_THROW(read_manifest(dir / "a.txt"), DataError);
  EXPECT_THROW(read_manifest(dir / "b.txt"), DataError);
}

TEST(Manifest, PerRunOverridesFallBackToBase) {
  const auto dir = temp_dir("runs");
  save_embeddings(small_dataset(), dir / "base.embv1");
  EmbeddingDataset other(2, LabelVocab({"b", "c"}));
  other.append(1, std::vector<double>{9.0, 9.0});
  other.append(0, std::vector<double>{8.0, 8.0});
  save_embeddings(other, dir / "run1_train.embv1");
  {
    std::ofstream m(dir / "manifest.txt");
    m << "train = base.embv1\ndev = base.embv1\ntest = base.embv1\nrun1.train = run1_train.embv1\n";
  }
  const auto manifest = read_manifest(dir / "manifest.txt");
  ASSERT_EQ(manifest.runs.size(), 1u);
  EXPECT_EQ(manifest.runs.at(1).train, dir / "run1_train.embv1");
  EXPECT_TRUE(manifest.runs.at(1).dev.empty());

  const auto data = load_manifest_data(dir / "manifest.txt");
  ASSERT_EQ(data.runs.size(), 1u);
  const auto& run = data.runs.at(1);
  // One vocab across base and run files: a, b from the base, c from the run.
  EXPECT_EQ(data.base.vocab(), LabelVocab({"a", "b", "c"}));
  EXPECT_EQ(run.vocab(), data.base.vocab());
  EXPECT_EQ(run.train.size(), 2u);
  EXPECT_EQ(run.train.label(0), 2);
  EXPECT_EQ(run.dev, data.base.dev);
  const auto base_only = load_bundle(dir / "manifest.txt");
  EXPECT_EQ(remap_vocab(base_only.train, data.base.vocab()), data.base.train);
  EXPECT_EQ(base_only.vocab(), LabelVocab({"a", "b"}));

  write_manifest(manifest, dir / "copy.txt");
  EXPECT_EQ(read_manifest(dir / "copy.txt").runs.at(1).train, manifest.runs.at(1).train);
}

TEST(Manifest, BadRunKeys) {
  const auto dir = temp_dir("badruns");
  const auto write = [&](const std::string& extra) {
    std::ofstream m(dir / "manifest.txt");
    m << "train = a\ndev = b\ntest = c\n" << extra;
  };
  write("runx.train = a\n");
  EXPECT_THROW(read_manifest(dir / "manifest.txt"), DataError);
  write("run2.weights = a\n");
  EXPECT_THROW(read_manifest(dir / "manifest.txt"), DataError);
  write("run2.dev = a\nrun2.dev = b\n");
  EXPECT_THROW(read_manifest(dir / "manifest.txt"), DataError);
}

TEST(SubsampleClass, Cardinality) {
  const auto ds = labeled_counts({20, 15});
  const auto split = subsample_class(ds, 0, 10, 7);
  EXPECT_EQ(split.seeds.size(), 10u);
  for (std::size_t i = 0; i < split.seeds.size(); ++i) EXPECT_EQ(split.seeds.label(i), 0);
  EXPECT_EQ(split.rest.count_label(0), 0u);
  EXPECT_EQ(split.rest.count_label(1), 15u);
}

TEST(SubsampleClass, KEqualsClassSizeTakesAll) {
  const auto ds = labeled_counts({6, 3});
  const auto idx = sample_class_rows(ds, 0, 6, 11);
  EXPECT_EQ(std::set<std::size_t>(idx.begin(), idx.end()), (std::set<std::size_t>{0, 1, 2, 3, 4, 5}));
}

TEST(SubsampleClass, Deterministic) {
  const auto ds = labeled_counts({50, 5});
  EXPECT_EQ(sample_class_rows(ds, 0, 10, 99), sample_class_rows(ds, 0, 10, 99));
  EXPECT_EQ(subsample_class(ds, 0, 10, 99).seeds, subsample_class(ds, 0, 10, 99).seeds);
  EXPECT_NE(sample_class_rows(ds, 0, 10, 99), sample_class_rows(ds, 0, 10, 100));
}

TEST(SubsampleClass, TooFewRows) {
  const auto ds = labeled_counts({3, 5});
  EXPECT_THROW(subsample_class(ds, 0, 4, 1), DataError);
}

TEST(SubsampleClass, NoDuplicatesAndUniformCoverage) {
  const auto ds = labeled_counts({20, 4});
  std::vector<double> hits(20, 0.0);
  const int reps = 10000;
  for (int r = 0; r < reps; ++r) {
    const auto idx = sample_class_rows(ds, 0, 5, derive_seed(123, {static_cast<std::uint64_t>(r)}));
    ASSERT_EQ(std::set<std::size_t>(idx.begin(), idx.end()).size(), idx.size());
    for (auto i : idx) hits[i] += 1.0;
  }
  const double expected = reps * 5.0 / 20.0;
  double chi2 = 0.0;
  for (double h : hits) chi2 += (h - expected) * (h - expected) / expected;
  // 19 degrees of freedom, p = 0.001 critical value 43.82.
  EXPECT_LT(chi2, 43.82);
}

TEST(RemoveLabel, DropsOnlyThatLabel) {
  const auto ds = labeled_counts({5, 4, 3});
  const auto out = remove_label(ds, 1);
  EXPECT_EQ(out.count_label(1), 0u);
  EXPECT_EQ(out.count_label(0), 5u);
  EXPECT_EQ(out.count_label(2), 3u);
  EXPECT_EQ(out.vocab(), ds.vocab());
  // Remaining rows keep their order.
  EXPECT_EQ(out.row(5)[0], ds.row(9)[0]);
}

TEST(RemoveLabel, AbsentLabelIsNoOp) {
  const auto ds = labeled_counts({5, 0, 3});
  EXPECT_EQ(remove_label(ds, 1), ds);
}

TEST(RemoveLabel, AllRowsTargetLeavesEmptyDataset) {
  const auto ds = labeled_counts({4, 0});
  const auto out = remove_label(ds, 0);
  EXPECT_TRUE(out.empty());
  EXPECT_EQ(out.vocab(), ds.vocab());
}

AugmentedBatch batch_of(std::size_t n, std::size_t dim, LabelId label) {
  AugmentedBatch b;
  b.label = label;
  b.vectors = Eigen::MatrixXd::Constant(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(n), 0.5);
  return b;
}

TEST(Merge, CountsAndOrder) {
  const auto ds = labeled_counts({60, 40});
  const auto out = merge(ds, batch_of(512, 2, 1));
  EXPECT_EQ(out.size(), 612u);
  for (std::size_t i = 0; i < ds.size(); ++i) ASSERT_EQ(out.row(i)[0], ds.row(i)[0]);
  EXPECT_EQ(out.row(100)[0], 0.5);
  EXPECT_EQ(out.label(611), 1);
}

TEST(Merge, EmptyBatchIsIdentity) {
  const auto ds = labeled_counts({3, 2});
  EXPECT_EQ(merge(ds, batch_of(0, 2, 0)), ds);
}

TEST(Merge, SequentialMergesAreAdditive) {
  const auto ds = labeled_counts({3, 2});
  EXPECT_EQ(merge(merge(ds, batch_of(7, 2, 0)), batch_of(4, 2, 1)).size(), 16u);
}

TEST(Merge, DimMismatchThrows) {
  const auto ds = labeled_counts({3, 2});
  EXPECT_THROW(merge(ds, batch_of(2, 3, 0)), DataError);
}

TEST(Bundle, ValidateRejectsMismatchedSplits) {
  DatasetBundle b{labeled_counts({1, 1}), labeled_counts({1, 1}, 3), labeled_counts({1, 1})};
  EXPECT_THROW(b.validate(), DataError);
}

TEST(Method, NamesParseCaseInsensitively) {
  for (Method m : kAllMethods) EXPECT_EQ(parse_method(method_name(m)), m);
  EXPECT_EQ(parse_method("deltas"), Method::DeltaS);
  EXPECT_EQ(parse_method("cvae"), Method::CVAE);
  EXPECT_FALSE(parse_method("smote").has_value());
  EXPECT_TRUE(method_needs_training(Method::CVAE));
  EXPECT_FALSE(method_needs_training(Method::Linear));
}

}  // namespace
}  // namespace fda
