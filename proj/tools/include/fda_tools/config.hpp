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

#ifndef FDA_TOOLS_CONFIG_HPP_
#define FDA_TOOLS_CONFIG_HPP_

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "fda/classifier.hpp"
#include "fda/dataio.hpp"
#include "fda/fsi.hpp"

// Experiment configuration files.
//
// Grammar, one statement per line:
//   # comment               (also ';' at the start of a line)
//   [section]               following keys are read as section.key
//   key = value             whitespace around key and value is trimmed
// Keys before the first section header are top-level. Lists are
// comma-separated. A key may appear once per file.
namespace fda::tools {

/// Ordered flat view of a config document: "section.key" -> value.
using KeyValues = std::map<std::string, std::string>;

/// Throws ConfigError naming the source and line on malformed input.
KeyValues parse_config(std::string_view text, std::string_view source = "<config>");
KeyValues load_config(const std::filesystem::path& path);
/// Sectioned rendering; parse_config(format_config(kv)) == kv.
std::string format_config(const KeyValues& kv);

struct SynthSettings {
  std::size_t dim = 16;
  double separation = 8.0;
  std::uint64_t seed = 1;
  std::size_t train = 1800;
  std::size_t dev = 100;
  std::size_t test = 100;
};

struct ExperimentConfig {
  std::string command;
  std::filesystem::path out = "fda-out";
  std::uint64_t seed = 1;
  std::size_t jobs = 1;

  // Data source: exactly one of `manifest` or `synth` must be set.
  std::filesystem::path manifest;
  bool synth = false;
  SynthSettings synth_settings;

  std::vector<Method> methods{std::begin(kAllMethods), std::end(kAllMethods)};
  std::size_t repeats = 10;

  std::string target;  // label name; empty selects the first training label
  std::size_t k = 10;
  std::vector<std::size_t> n_aug{100, 512};

  std::vector<std::size_t> sweep_ks{5, 10, 15, 20, 25, 30};
  std::size_t sweep_n_aug = 100;

  std::vector<double> fractions{0.05, 0.10, 0.20};

  classifier::ClassifierTrainConfig classifier;
  fsi::GeneratorConfigs generators;

  // augment
  std::string augment_method;
  std::size_t augment_n = 100;
  std::string augment_label;
  std::filesystem::path augment_input;
  std::filesystem::path augment_output;
  std::filesystem::path augment_train_from;
  std::filesystem::path augment_model;

  // evaluate
  std::filesystem::path evaluate_model;
  std::filesystem::path evaluate_input;

  // project
  std::size_t project_n = 100;
  std::size_t project_max_real_per_class = 200;

  // report
  std::filesystem::path report_input;
  std::string report_column = "Accuracy";

  /// Applies `kv` on top of the current values. Unknown keys and malformed
  /// values throw ConfigError naming the key.
  void apply(const KeyValues& kv);
  /// Every key with its current value; apply(to_kv()) is the identity.
  KeyValues to_kv() const;

  /// Command-specific checks (data source, required paths, ranges).
  void validate() const;

  bool has_data_source() const { return synth || !manifest.empty(); }
  DatasetBundle load_data() const;
  /// load_data() plus the manifest's per-run bundles (none for synth data).
  ManifestData load_experiment_data() const;
  /// Resolves `target` against the bundle; empty means the first label.
  LabelId resolve_target(const DatasetBundle& bundle) const;

  fsi::SimulationSpec simulation(LabelId target) const;
  fsi::FullDataSpec full_data() const;
};

/// Names of every recognized key, in to_kv order.
std::vector<std::string> known_keys();

}  // namespace fda::tools

#endif  // FDA_TOOLS_CONFIG_HPP_
