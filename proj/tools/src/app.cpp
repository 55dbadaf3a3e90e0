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

#include "fda_tools/app.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "fda/augment.hpp"
#include "fda/classifier.hpp"
#include "fda/cvae.hpp"
#include "fda/deltaenc.hpp"
#include "fda/error.hpp"
#include "fda/fsi.hpp"
#include "fda/report.hpp"
#include "fda/rng.hpp"
#include "fda_tools/config.hpp"

namespace fda::tools {

namespace fs = std::filesystem;

namespace {

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw DataError("cannot write '" + path.string() + "'");
  f << text;
  if (!f) throw DataError("write failed for '" + path.string() + "'");
}

std::string read_text(const fs::path& path, std::string_view field) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw DataError(std::string(field) + ": cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

fs::path absolute_or_empty(const fs::path& p) {
  return p.empty() ? p : fs::absolute(p).lexically_normal();
}

void absolutize(ExperimentConfig& c) {
  for (fs::path* p : {&c.out, &c.manifest, &c.augment_input, &c.augment_output, &c.augment_train_from,
                      &c.augment_model, &c.evaluate_model, &c.evaluate_input, &c.report_input}) {
    *p = absolute_or_empty(*p);
  }
}

void write_lock(const ExperimentConfig& c) {
  write_text(c.out / "run.lock", "# Resolved configuration; replay with: fda " + c.command +
                                     " --config run.lock\n" + format_config(c.to_kv()));
}

void write_results(const ExperimentConfig& c, const std::vector<report::ResultRow>& rows, std::ostream& out) {
  write_text(c.out / "results.csv", report::to_csv(rows));
  const std::string md = report::markdown(rows, c.report_column);
  write_text(c.out / "tables.md", md);
  out << md;
}

std::string counts_summary(const DatasetBundle& b) {
  std::ostringstream os;
  os << "dim " << b.train.dim() << ", " << b.vocab().size() << " labels\n";
  os << "label\ttrain\tdev\ttest\n";
  const auto tr = b.train.class_counts();
  const auto dv = b.dev.class_counts();
  const auto te = b.test.class_counts();
  for (std::size_t i = 0; i < b.vocab().size(); ++i) {
    os << b.vocab().names()[i] << '\t' << tr[i] << '\t' << dv[i] << '\t' << te[i] << '\n';
  }
  return os.str();
}

// ---------------------------------------------------------------------------
// Commands

void cmd_synth(ExperimentConfig& c, std::ostream& out) {
  const auto bundle = c.load_data();
  const auto manifest = save_bundle(bundle, c.out);
  write_lock(c);
  out << "wrote " << manifest.string() << '\n' << counts_summary(bundle);
}

void cmd_ingest(ExperimentConfig& c, std::ostream& out) {
  const auto bundle = c.load_data();
  const auto manifest = save_bundle(bundle, c.out);
  const std::string summary = counts_summary(bundle);
  write_text(c.out / "summary.txt", summary);
  write_lock(c);
  out << "wrote " << manifest.string() << '\n' << summary;
}

void cmd_fsi(ExperimentConfig& c, std::ostream& out) {
  const auto data = c.load_experiment_data();
  const LabelId target = c.resolve_target(data.base);
  c.target = data.base.vocab().name(target);
  const auto result = fsi::run_fsi(data.base, c.simulation(target), data.runs);
  write_results(c, report::rows_from_fsi(result, c.target), out);
  write_lock(c);
}

void cmd_sweep(ExperimentConfig& c, std::ostream& out) {
  const auto data = c.load_experiment_data();
  const LabelId target = c.resolve_target(data.base);
  c.target = data.base.vocab().name(target);
  const auto rows = fsi::seed_sweep(data.base, c.simulation(target), c.sweep_ks, c.sweep_n_aug, data.runs);
  write_results(c, report::rows_from_sweep(rows, c.target), out);
  write_lock(c);
}

void cmd_fulldata(ExperimentConfig& c, std::ostream& out) {
  const auto data = c.load_experiment_data();
  const auto result = fsi::full_data_augment(data.base, c.full_data(), data.runs);
  write_results(c, report::rows_from_fulldata(result), out);
  write_lock(c);
}

void cmd_train_classifier(ExperimentConfig& c, std::ostream& out) {
  const auto bundle = c.load_data();
  auto cfg = c.classifier;
  cfg.seed = derive_seed(c.seed, {2});
  const auto trained = classifier::train_classifier(bundle.train, bundle.dev, cfg);
  classifier::save_classifier(trained.model, c.out / "classifier.ckpt");
  const double test_acc = classifier::evaluate(trained.model, bundle.test).accuracy;
  std::ostringstream os;
  os << "selected_epoch = " << trained.selected_epoch << '\n';
  if (!trained.dev_accuracy.empty()) {
    os << "dev_accuracy = " << format_double(trained.dev_accuracy[trained.selected_epoch - 1]) << '\n';
  }
  os << "test_accuracy = " << format_double(test_acc) << '\n';
  write_text(c.out / "metrics.txt", os.str());
  write_lock(c);
  out << "wrote " << (c.out / "classifier.ckpt").string() << '\n' << os.str();
}

void cmd_evaluate(ExperimentConfig& c, std::ostream& out) {
  if (!fs::exists(c.evaluate_model)) {
    throw DataError("evaluate.model: file '" + c.evaluate_model.string() + "' does not exist");
  }
  const auto model = classifier::load_classifier(c.evaluate_model);
  EmbeddingDataset data = c.evaluate_input.empty() ? c.load_data().test : load_embeddings(c.evaluate_input);
  data = remap_vocab(data, model.vocab());
  const auto ev = classifier::evaluate(model, data);
  std::ostringstream os;
  os << "accuracy = " << format_double(ev.accuracy) << '\n';
  os << "confusion (rows: true label, columns: predicted)\n";
  for (std::size_t i = 0; i < ev.confusion.size(); ++i) {
    os << model.vocab().names()[i];
    for (std::size_t v : ev.confusion[i]) os << '\t' << v;
    os << '\n';
  }
  write_text(c.out / "evaluation.txt", os.str());
  write_lock(c);
  out << os.str();
}

// Seed/anchor data for `augment`: the train split of augment.train_from (or
// the configured data source) plus the rows of augment.input.
EmbeddingDataset augment_pool(const ExperimentConfig& c) {
  std::optional<EmbeddingDataset> base;
  if (!c.augment_train_from.empty()) {
    if (!fs::exists(c.augment_train_from)) {
      throw DataError("augment.train_from: file '" + c.augment_train_from.string() + "' does not exist");
    }
    base = load_bundle(c.augment_train_from).train;
  } else if (c.has_data_source()) {
    base = c.load_data().train;
  }
  if (c.augment_input.empty()) return *base;
  auto input = load_embeddings(c.augment_input);
  if (!base) return input;
  if (base->dim() != input.dim()) throw DataError("augment.input: embedding dim differs from the training data");
  LabelVocab vocab = base->vocab();
  for (const auto& n : input.vocab().names()) vocab.intern(n);
  return concat(remap_vocab(*base, vocab), remap_vocab(input, vocab));
}

LabelId augment_label(const ExperimentConfig& c, const EmbeddingDataset& pool) {
  if (!c.augment_label.empty()) {
    auto id = pool.vocab().find(c.augment_label);
    if (!id) throw ConfigError("augment.label: label '" + c.augment_label + "' not present in the data");
    return *id;
  }
  // Default: the only label of augment.input.
  if (!c.augment_input.empty()) {
    const auto input = load_embeddings(c.augment_input);
    const auto counts = input.class_counts();
    std::optional<std::string> only;
    std::size_t present = 0;
    for (std::size_t i = 0; i < counts.size(); ++i) {
      if (counts[i] > 0) {
        ++present;
        only = input.vocab().names()[i];
      }
    }
    if (present == 1) return pool.vocab().at(*only);
  }
  throw ConfigError("augment.label: required unless augment.input holds exactly one label");
}

void cmd_augment(ExperimentConfig& c, std::ostream& out) {
  const Method method = *parse_method(c.augment_method);
  c.augment_method = std::string(method_name(method));
  const auto pool = augment_pool(c);
  const LabelId label = augment_label(c, pool);
  c.augment_label = pool.vocab().name(label);
  const std::uint64_t train_seed = derive_seed(c.seed, {3});
  const std::uint64_t gen_seed = derive_seed(c.seed, {4});
  const fs::path ckpt = c.out / (std::string(method_name(method)) + ".ckpt");

  EmbeddingDataset generated(pool.dim(), pool.vocab());
  if (method == Method::CVAE) {
    cvae::CvaeModel model;
    if (!c.augment_model.empty()) {
      model = cvae::load_cvae(c.augment_model);
    } else {
      auto cfg = c.generators.cvae;
      cfg.seed = train_seed;
      model = cvae::train_cvae(pool, cfg).model;
      cvae::save_cvae(model, ckpt);
    }
    if (model.dim != pool.dim()) throw DataError("augment.model: checkpoint dim differs from the data");
    const auto batch = cvae::sample_cvae(model, model.vocab.at(c.augment_label), c.augment_n, gen_seed);
    generated = EmbeddingDataset(pool.dim(), model.vocab);
    generated = merge(generated, batch);
  } else if (method == Method::DeltaR || method == Method::DeltaS) {
    deltaenc::DeltaEncoderModel model;
    if (!c.augment_model.empty()) {
      model = deltaenc::load_delta(c.augment_model);
    } else {
      auto cfg = c.generators.delta;
      cfg.seed = train_seed;
      model = deltaenc::train_delta(pool, cfg).model;
      deltaenc::save_delta(model, ckpt);
    }
    const auto strategy = method == Method::DeltaR ? deltaenc::DeltaStrategy::DeltaR : deltaenc::DeltaStrategy::DeltaS;
    generated = merge(generated, deltaenc::generate_delta(model, pool, label, c.augment_n, strategy, gen_seed));
  } else {
    generated = merge(generated, augment::generate(method, pool.class_matrix(label), c.augment_n,
                                                   c.generators.training_free, gen_seed, label));
  }
  if (c.augment_output.empty()) c.augment_output = c.out / "augmented.embv1";
  save_embeddings(generated, c.augment_output);
  write_lock(c);
  out << "wrote " << generated.size() << " " << c.augment_method << " rows for '" << c.augment_label << "' to "
      << c.augment_output.string() << '\n';
}

void cmd_project(ExperimentConfig& c, std::ostream& out) {
  const auto bundle = c.load_data();
  const LabelId target = c.resolve_target(bundle);
  c.target = bundle.vocab().name(target);
  const auto split = subsample_class(bundle.train, target, c.k, derive_seed(c.seed, {1}));
  const auto train = concat(split.seeds, split.rest);

  std::vector<Eigen::VectorXd> cols;
  std::vector<std::string> groups;
  std::vector<std::size_t> taken(bundle.vocab().size(), 0);
  for (std::size_t r = 0; r < split.rest.size(); ++r) {
    const auto l = static_cast<std::size_t>(split.rest.label(r));
    if (taken[l]++ >= c.project_max_real_per_class) continue;
    cols.push_back(split.rest.matrix().col(static_cast<Eigen::Index>(r)));
    groups.push_back("real:" + bundle.vocab().names()[l]);
  }
  for (std::size_t r = 0; r < split.seeds.size(); ++r) {
    cols.push_back(split.seeds.matrix().col(static_cast<Eigen::Index>(r)));
    groups.push_back("seed");
  }
  for (Method m : c.methods) {
    const std::uint64_t stream = static_cast<std::uint64_t>(m) + 1;
    const auto gen = fsi::Generator::fit(m, train, c.generators, derive_seed(c.seed, {3, stream}));
    const auto batch = gen.generate(train, target, c.project_n, derive_seed(c.seed, {4, stream, c.project_n}));
    for (Eigen::Index j = 0; j < batch.vectors.cols(); ++j) {
      cols.push_back(batch.vectors.col(j));
      groups.push_back(std::string(method_name(m)));
    }
  }
  Eigen::MatrixXd all(static_cast<Eigen::Index>(train.dim()), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t j = 0; j < cols.size(); ++j) all.col(static_cast<Eigen::Index>(j)) = cols[j];
  const auto points = fsi::project_2d(all, groups);
  write_text(c.out / "projection.csv", report::projection_csv(points));
  write_lock(c);
  out << "wrote " << points.size() << " points to " << (c.out / "projection.csv").string() << '\n';
}

void cmd_report(ExperimentConfig& c, std::ostream& out) {
  const auto rows = report::parse_csv(read_text(c.report_input, "report.input"));
  const std::string md = report::markdown(rows, c.report_column);
  write_text(c.out / "tables.md", md);
  write_lock(c);
  out << md;
}

// ---------------------------------------------------------------------------
// Command line

struct FlagBinding {
  CLI::Option* option;
  std::string key;
  std::string value;
};

struct Subcommand {
  CLI::App* app = nullptr;
  std::vector<std::unique_ptr<FlagBinding>> flags;
  std::string config_path;
  std::vector<std::string> sets;
  bool synth = false;
  CLI::Option* synth_flag = nullptr;
};

void bind(Subcommand& s, const std::string& flag, const std::string& key, const std::string& help) {
  auto b = std::make_unique<FlagBinding>();
  b->key = key;
  b->option = s.app->add_option(flag, b->value, help + " (" + key + ")");
  s.flags.push_back(std::move(b));
}

void add_common(Subcommand& s) {
  s.app->add_option("--config", s.config_path, "Configuration file (run.lock files are accepted)");
  bind(s, "--seed", "seed", "Master seed");
  bind(s, "--out", "out", "Output directory");
  bind(s, "--jobs", "jobs", "Concurrent repeats");
  s.app->add_option("--set", s.sets, "Override any key, e.g. --set cvae.epochs=50")->type_name("KEY=VALUE");
}

void add_data(Subcommand& s) {
  bind(s, "--manifest", "data.manifest", "Dataset manifest");
  s.synth_flag = s.app->add_flag("--synth", s.synth, "Use the synthetic 7-class bundle (data.synth)");
}

void add_experiment(Subcommand& s) {
  bind(s, "--methods", "experiment.methods", "Comma-separated methods");
  bind(s, "--repeats", "experiment.repeats", "Repeats per cell");
}

ExperimentConfig resolve(const std::string& command, const Subcommand& s) {
  ExperimentConfig c;
  if (!s.config_path.empty()) {
    KeyValues kv = load_config(s.config_path);
    auto it = kv.find("command");
    if (it != kv.end()) {
      if (it->second != command) {
        throw ConfigError("command: config '" + s.config_path + "' is for '" + it->second + "', not '" + command + "'");
      }
      kv.erase(it);
    }
    c.apply(kv);
  }
  KeyValues overrides;
  for (const auto& set : s.sets) {
    const auto eq = set.find('=');
    if (eq == std::string::npos) throw ConfigError("--set: expected KEY=VALUE, got '" + set + "'");
    overrides[set.substr(0, eq)] = set.substr(eq + 1);
  }
  for (const auto& b : s.flags) {
    if (b->option->count() > 0) overrides[b->key] = b->value;
  }
  if (s.synth_flag && s.synth_flag->count() > 0) overrides["data.synth"] = "true";
  c.apply(overrides);
  // Flags name a single source; the other one from the file is dropped.
  if (overrides.count("data.manifest") && !overrides.count("data.synth")) c.synth = false;
  if (overrides.count("data.synth") && c.synth && !overrides.count("data.manifest")) c.manifest.clear();
  c.command = command;
  if (command == "synth") {
    if (!c.manifest.empty()) throw ConfigError("data.manifest: synth generates its own data");
    c.synth = true;
  }
  c.validate();
  absolutize(c);
  return c;
}

int dispatch(ExperimentConfig& c, std::ostream& out) {
  fs::create_directories(c.out);
  const auto& cmd = c.command;
  if (cmd == "synth") cmd_synth(c, out);
  else if (cmd == "ingest") cmd_ingest(c, out);
  else if (cmd == "augment") cmd_augment(c, out);
  else if (cmd == "fsi") cmd_fsi(c, out);
  else if (cmd == "sweep") cmd_sweep(c, out);
  else if (cmd == "fulldata") cmd_fulldata(c, out);
  else if (cmd == "train-classifier") cmd_train_classifier(c, out);
  else if (cmd == "evaluate") cmd_evaluate(c, out);
  else if (cmd == "project") cmd_project(c, out);
  else if (cmd == "report") cmd_report(c, out);
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Feature-space data augmentation experiments on embedding files", "fda"};
  app.require_subcommand(1);
  std::map<std::string, Subcommand> subs;
  const auto add = [&](const std::string& name, const std::string& help) -> Subcommand& {
    auto& s = subs[name];
    s.app = app.add_subcommand(name, help);
    add_common(s);
    return s;
  };

  {
    auto& s = add("synth", "Write the synthetic 7-class bundle as EMBV1 files plus a manifest");
    bind(s, "--dim", "synth.dim", "Embedding dimension");
    bind(s, "--separation", "synth.separation", "Distance of class means from the origin");
    bind(s, "--synth-seed", "synth.seed", "Seed of the mixture");
  }
  {
    auto& s = add("ingest", "Validate a manifest and write a normalized copy of its bundle");
    add_data(s);
  }
  {
    auto& s = add("augment", "Generate vectors for one label with one method");
    add_data(s);
    bind(s, "--method", "augment.method", "Upsample, Perturb, CVAE, Linear, Extra, DeltaR or DeltaS");
    bind(s, "--n", "augment.n", "Rows to generate");
    bind(s, "--alpha", "perturb.alpha", "Perturb noise bound");
    bind(s, "--lambda", "extra.lambda", "Extrapolation factor");
    bind(s, "--label", "augment.label", "Label to augment");
    bind(s, "--input", "augment.input", "Seed rows (EMBV1)");
    bind(s, "--output", "augment.output", "Generated rows (EMBV1)");
    bind(s, "--train-from", "augment.train_from", "Manifest whose train split trains the generator");
    bind(s, "--model", "augment.model", "Load a trained generator checkpoint instead of training");
  }
  {
    auto& s = add("fsi", "Few-shot integration simulation");
    add_data(s);
    add_experiment(s);
    bind(s, "--target", "fsi.target", "Target label");
    bind(s, "--k", "fsi.k", "Seed examples per run");
    bind(s, "--n-aug", "fsi.n_aug", "Comma-separated generation sizes");
  }
  {
    auto& s = add("sweep", "FSI over several seed counts");
    add_data(s);
    add_experiment(s);
    bind(s, "--target", "fsi.target", "Target label");
    bind(s, "--ks", "sweep.ks", "Comma-separated seed counts");
    bind(s, "--n-aug", "sweep.n_aug", "Generation size");
  }
  {
    auto& s = add("fulldata", "Augment every class of the full training split");
    add_data(s);
    add_experiment(s);
    bind(s, "--fractions", "fulldata.fractions", "Comma-separated fractions in (0, 1]");
  }
  {
    auto& s = add("train-classifier", "Train the softmax classifier on a bundle and save it");
    add_data(s);
  }
  {
    auto& s = add("evaluate", "Evaluate a saved classifier");
    add_data(s);
    bind(s, "--model", "evaluate.model", "Classifier checkpoint");
    bind(s, "--input", "evaluate.input", "Rows to evaluate (EMBV1); defaults to the test split");
  }
  {
    auto& s = add("project", "2-D PCA coordinates of real, seed and generated vectors");
    add_data(s);
    add_experiment(s);
    bind(s, "--target", "fsi.target", "Target label");
    bind(s, "--k", "fsi.k", "Seed examples");
    bind(s, "--n", "project.n", "Generated rows per method");
  }
  {
    auto& s = add("report", "Render markdown tables from a results CSV");
    bind(s, "--input", "report.input", "results.csv");
    bind(s, "--column", "report.column", "Title of the accuracy column");
  }

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }

  for (auto& [name, s] : subs) {
    if (!s.app->parsed()) continue;
    try {
      ExperimentConfig c = resolve(name, s);
      return dispatch(c, out);
    } catch (const ConfigError& e) {
      err << "fda " << name << ": configuration error: " << e.what() << '\n';
      return kExitConfig;
    } catch (const DataError& e) {
      err << "fda " << name << ": data error: " << e.what() << '\n';
      return kExitData;
    } catch (const NumericError& e) {
      err << "fda " << name << ": numeric failure: " << e.what() << '\n';
      return kExitNumeric;
    } catch (const fs::filesystem_error& e) {
      err << "fda " << name << ": data error: " << e.what() << '\n';
      return kExitData;
    } catch (const std::invalid_argument& e) {
      err << "fda " << name << ": configuration error: " << e.what() << '\n';
      return kExitConfig;
    } catch (const std::exception& e) {
      err << "fda " << name << ": error: " << e.what() << '\n';
      return kExitFailure;
    }
  }
  return kExitFailure;
}

}  // namespace fda::tools
