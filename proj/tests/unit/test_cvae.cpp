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

#include "fda/cvae.hpp"
#include "fda/error.hpp"
#include "fda/synthgen.hpp"
#include "gradient_scenarios.hpp"

namespace fda::cvae {
namespace {

// Each class is `copies` identical rows at a fixed point.
EmbeddingDataset point_classes(std::size_t dim, std::size_t classes, std::size_t copies) {
  std::vector<std::string> names;
  for (std::size_t c = 0; c < classes; ++c) names.push_back("p" + std::to_string(c));
  EmbeddingDataset ds(dim, LabelVocab(names));
  for (std::size_t c = 0; c < classes; ++c) {
    Eigen::VectorXd p = oracle::gaussian_matrix(static_cast<Eigen::Index>(dim), 1, 100 + c);
    for (std::size_t i = 0; i < copies; ++i) ds.append(static_cast<LabelId>(c), p);
  }
  return ds;
}

EmbeddingDataset two_blobs(std::size_t per_class, double sd, std::uint64_t seed) {
  MixtureSpec s;
  s.dim = 4;
  Eigen::VectorXd m = Eigen::VectorXd::Zero(4);
  m(0) = 4.0;
  s.classes.push_back({"pos", m, Eigen::VectorXd::Constant(4, sd), per_class, 0, 0});
  s.classes.push_back({"neg", -m, Eigen::VectorXd::Constant(4, sd), per_class, 0, 0});
  return generate_mixture(s, seed).train;
}

CvaeTrainConfig small_config(std::size_t epochs) {
  CvaeTrainConfig c;
  c.epochs = epochs;
  c.hidden = 128;
  c.latent = 8;
  c.seed = 3;
  return c;
}

TEST(Cvae, ArchitectureFollowsDefaults) {
  const auto m = make_cvae(10, LabelVocab({"a", "b"}), 2048, 128, 1);
  ASSERT_EQ(m.encoder.num_layers(), 2u);
  EXPECT_EQ(m.encoder.input_dim(), 12u);
  EXPECT_EQ(m.encoder.layer(0).out(), 2048u);
  EXPECT_EQ(m.encoder.layer(0).activation, nn::Activation::Tanh);
  EXPECT_EQ(m.encoder.output_dim(), 256u);
  EXPECT_EQ(m.decoder.input_dim(), 130u);
  EXPECT_EQ(m.decoder.layer(0).activation, nn::Activation::Tanh);
  EXPECT_EQ(m.decoder.output_dim(), 10u);
  EXPECT_EQ(m.decoder.layer(1).activation, nn::Activation::Identity);
  for (const auto& l : m.encoder.layers()) EXPECT_EQ(l.input_dropout, 0.0);
  for (const auto& l : m.decoder.layers()) EXPECT_EQ(l.input_dropout, 0.0);
  const CvaeTrainConfig defaults;
  EXPECT_EQ(defaults.hidden, 2048u);
  EXPECT_EQ(defaults.latent, 128u);
  EXPECT_EQ(defaults.lr, 1e-3);
  EXPECT_EQ(defaults.epochs, 200u);
  EXPECT_EQ(defaults.batch_size, 64u);
  EXPECT_EQ(defaults.kl_weight, 1.0);
}

TEST(Cvae, GradientsMatchFiniteDifferencesAtFullWidth) {
  const auto r = oracle::cvae_gradient_check(24);
  EXPECT_LT(r.max_rel_error, 1e-4);
  EXPECT_GT(r.checked, 100u);
}

TEST(Cvae, DegenerateClassesReconstruct) {
  const auto ds = point_classes(8, 3, 64);
  CvaeTrainConfig cfg;
  cfg.seed = 5;
  const auto r = train_cvae(ds, cfg);
  const Eigen::MatrixXd x = ds.matrix();
  const auto recon = reconstruct(r.model, x, ds.labels());
  const double mse = (recon - x).colwise().squaredNorm().mean();
  EXPECT_LT(mse, 1e-2 * 8);
  EXPECT_LT(r.trace.back().reconstruction, r.trace.front().reconstruction);
}

TEST(Cvae, TrainingReducesLoss) {
  const auto ds = two_blobs(60, 1.0, 7);
  const auto r = train_cvae(ds, small_config(40));
  ASSERT_EQ(r.trace.size(), 40u);
  EXPECT_LT(r.trace.back().total, r.trace.front().total);
  for (const auto& e : r.trace) EXPECT_GE(e.kl, 0.0);
}

TEST(Cvae, ZeroKlWeightTrainsPlainAutoencoder) {
  const auto ds = two_blobs(40, 1.0, 8);
  auto cfg = small_config(30);
  cfg.kl_weight = 0.0;
  const auto r = train_cvae(ds, cfg);
  EXPECT_LT(r.trace.back().reconstruction, r.trace.front().reconstruction);
  for (const auto& e : r.trace) EXPECT_NEAR(e.total, e.reconstruction, 1e-9 * (1.0 + e.total));
}

TEST(Cvae, ObjectiveMatchesHandComposition) {
  LabelVocab vocab({"a", "b"});
  const auto model = make_cvae(3, vocab, 16, 4, 9);
  const Eigen::MatrixXd x = oracle::gaussian_matrix(3, 2, 1);
  const std::vector<LabelId> labels{1, 0};
  const Eigen::MatrixXd eps = oracle::gaussian_matrix(4, 2, 2);
  const auto obj = objective(model, x, labels, eps, 0.7);
  Eigen::MatrixXd enc_in(5, 2);
  enc_in << x, nn::one_hot(labels, 2);
  const Eigen::MatrixXd stats = model.encoder.infer(enc_in);
  const Eigen::MatrixXd mu = stats.topRows(4);
  const Eigen::MatrixXd lv = stats.bottomRows(4);
  const Eigen::MatrixXd z = mu.array() + (0.5 * lv.array()).exp() * eps.array();
  Eigen::MatrixXd dec_in(6, 2);
  dec_in << z, nn::one_hot(labels, 2);
  const double recon = (model.decoder.infer(dec_in) - x).colwise().squaredNorm().mean();
  double kl = 0.0;
  for (int j = 0; j < 2; ++j) kl += nn::kl_diag_gaussian(mu.col(j), lv.col(j));
  kl /= 2.0;
  EXPECT_NEAR(obj.reconstruction, recon, 1e-12);
  EXPECT_NEAR(obj.kl, kl, 1e-12);
  EXPECT_NEAR(obj.total, recon + 0.7 * kl, 1e-12);
}

TEST(Cvae, SamplingShapeDeterminismAndErrors) {
  const auto ds = two_blobs(20, 1.0, 10);
  const auto model = train_cvae(ds, small_config(2)).model;
  EXPECT_EQ(sample_cvae(model, 0, 0, 1).size(), 0u);
  const auto a = sample_cvae(model, 1, 25, 4);
  EXPECT_EQ(a.size(), 25u);
  EXPECT_EQ(a.dim(), 4u);
  EXPECT_EQ(a.label, 1);
  EXPECT_EQ(a.method, Method::CVAE);
  EXPECT_TRUE(a.vectors.allFinite());
  EXPECT_EQ(a.vectors, sample_cvae(model, 1, 25, 4).vectors);
  EXPECT_THROW(sample_cvae(model, 2, 5, 1), DataError);
}

TEST(Cvae, TrainingIsDeterministic) {
  const auto ds = two_blobs(20, 1.0, 11);
  EXPECT_TRUE(train_cvae(ds, small_config(3)).model == train_cvae(ds, small_config(3)).model);
}

TEST(Cvae, SamplesLandNearTheirClassMean) {
  const auto ds = two_blobs(150, 1.0, 12);
  const auto model = train_cvae(ds, small_config(80)).model;
  const Eigen::VectorXd m0 = ds.class_matrix(0).rowwise().mean();
  const Eigen::VectorXd m1 = ds.class_matrix(1).rowwise().mean();
  for (LabelId c : {0, 1}) {
    const auto b = sample_cvae(model, c, 500, 40 + static_cast<std::uint64_t>(c));
    int nearer = 0;
    for (Eigen::Index j = 0; j < b.vectors.cols(); ++j) {
      const double d_own = (b.vectors.col(j) - (c == 0 ? m0 : m1)).norm();
      const double d_other = (b.vectors.col(j) - (c == 0 ? m1 : m0)).norm();
      nearer += d_own < d_other;
    }
    EXPECT_GE(nearer, 450) << "class " << c;
  }
}

TEST(Cvae, LabelConditioningSeparatesSampleMeans) {
  const auto ds = point_classes(4, 2, 16);
  auto cfg = small_config(150);
  const auto model = train_cvae(ds, cfg).model;
  const auto a = sample_cvae(model, 0, 300, 1).vectors;
  const auto b = sample_cvae(model, 1, 300, 2).vectors;
  const Eigen::VectorXd ma = a.rowwise().mean();
  const Eigen::VectorXd mb = b.rowwise().mean();
  const double sd_a = std::sqrt((a.colwise() - ma).squaredNorm() / 299.0);
  const double sd_b = std::sqrt((b.colwise() - mb).squaredNorm() / 299.0);
  EXPECT_GT((ma - mb).norm(), 10.0 * std::max(sd_a, sd_b));
}

TEST(Cvae, RowCapLimitsEpochWork) {
  const auto ds = two_blobs(100, 1.0, 13);
  auto cfg = small_config(2);
  cfg.max_rows_per_class = 10;
  const auto r = train_cvae(ds, cfg);
  EXPECT_EQ(r.trace.size(), 2u);
  EXPECT_TRUE(r.model.decoder.all_finite());
}

TEST(Cvae, EmptyDatasetAndBadConfig) {
  EXPECT_THROW(train_cvae(EmbeddingDataset(3, LabelVocab({"a"})), small_config(1)), DataError);
  auto cfg = small_config(1);
  cfg.lr = 0.0;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = small_config(0);
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = small_config(1);
  cfg.kl_weight = -1.0;
  EXPECT_THROW(cfg.validate(), ConfigError);
}

TEST(Cvae, DivergenceRaisesNumericError) {
  const auto ds = two_blobs(20, 1.0, 14);
  auto cfg = small_config(50);
  cfg.lr = 1e200;
  EXPECT_THROW(train_cvae(ds, cfg), NumericError);
}

TEST(Cvae, CheckpointRoundTrip) {
  const auto ds = two_blobs(10, 1.0, 15);
  const auto model = train_cvae(ds, small_config(1)).model;
  const auto path = std::filesystem::temp_directory_path() / "fda_cvae_roundtrip.ckpt";
  save_cvae(model, path);
  const auto back = load_cvae(path);
  EXPECT_TRUE(back == model);
  EXPECT_EQ(sample_cvae(back, 0, 5, 1).vectors, sample_cvae(model, 0, 5, 1).vectors);
}

}  // namespace
}  // namespace fda::cvae
