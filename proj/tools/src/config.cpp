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

#include "fda_tools/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>

#include "fda/error.hpp"
#include "fda/synthgen.hpp"

namespace fda::tools {

namespace {

std::string_view trim(std::string_view s) {
  const auto ws = [](char c) { return c == ' ' || c == '\t' || c == '\r'; };
  while (!s.empty() && ws(s.front())) s.remove_prefix(1);
  while (!s.empty() && ws(s.back())) s.remove_suffix(1);
  return s;
}

[[noreturn]] void bad_value(std::string_view key, std::string_view expected, std::string_view got) {
  throw ConfigError(std::string(key) + ": expected " + std::string(expected) + ", got '" + std::string(got) + "'");
}

std::uint64_t to_u64(std::string_view key, std::string_view v) {
  std::uint64_t out = 0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (v.empty() || ec != std::errc() || ptr != v.data() + v.size()) bad_value(key, "a non-negative integer", v);
  return out;
}

double to_double(std::string_view key, std::string_view v) {
  double out = 0.0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (v.empty() || ec != std::errc() || ptr != v.data() + v.size() || !std::isfinite(out)) {
    bad_value(key, "a finite number", v);
  }
  return out;
}

bool to_bool(std::string_view key, std::string_view v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  bad_value(key, "true or false", v);
}

std::vector<std::string_view> split_list(std::string_view v) {
  std::vector<std::string_view> out;
  v = trim(v);
  if (v.empty()) return out;
  std::size_t start = 0;
  for (;;) {
    const auto comma = v.find(',', start);
    out.push_back(trim(v.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

template <typename T, typename Fmt>
std::string join(const std::vector<T>& xs, Fmt fmt) {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) out += ", ";
    out += fmt(xs[i]);
  }
  return out;
}

struct Field {
  std::string key;
  std::function<void(ExperimentConfig&, std::string_view key, std::string_view value)> set;
  std::function<std::string(const ExperimentConfig&)> get;
};

using C = ExperimentConfig;

template <typename Acc>
Field size_field(std::string key, Acc acc) {
  return {std::move(key),
          [acc](C& c, std::string_view k, std::string_view v) { acc(c) = static_cast<std::size_t>(to_u64(k, v)); },
          [acc](const C& c) { return std::to_string(acc(const_cast<C&>(c))); }};
}

template <typename Acc>
Field u64_field(std::string key, Acc acc) {
  return {std::move(key), [acc](C& c, std::string_view k, std::string_view v) { acc(c) = to_u64(k, v); },
          [acc](const C& c) { return std::to_string(acc(const_cast<C&>(c))); }};
}

template <typename Acc>
Field double_field(std::string key, Acc acc) {
  return {std::move(key), [acc](C& c, std::string_view k, std::string_view v) { acc(c) = to_double(k, v); },
          [acc](const C& c) { return format_double(acc(const_cast<C&>(c))); }};
}

template <typename Acc>
Field string_field(std::string key, Acc acc) {
  return {std::move(key), [acc](C& c, std::string_view, std::string_view v) { acc(c) = std::string(v); },
          [acc](const C& c) { return std::string(acc(const_cast<C&>(c))); }};
}

template <typename Acc>
Field path_field(std::string key, Acc acc) {
  return {std::move(key), [acc](C& c, std::string_view, std::string_view v) { acc(c) = std::string(v); },
          [acc](const C& c) { return acc(const_cast<C&>(c)).generic_string(); }};
}

template <typename Acc>
Field sizes_field(std::string key, Acc acc) {
  return {std::move(key),
          [acc](C& c, std::string_view k, std::string_view v) {
            std::vector<std::size_t> xs;
            for (auto t : split_list(v)) xs.push_back(static_cast<std::size_t>(to_u64(k, t)));
            acc(c) = std::move(xs);
          },
          [acc](const C& c) {
            return join(acc(const_cast<C&>(c)), [](std::size_t x) { return std::to_string(x); });
          }};
}

const std::vector<Field>& fields() {
  static const std::vector<Field> table = [] {
    std::vector<Field> f;
    f.push_back(string_field("command", [](C& c) -> std::string& { return c.command; }));
    f.push_back(path_field("out", [](C& c) -> std::filesystem::path& { return c.out; }));
    f.push_back(u64_field("seed", [](C& c) -> std::uint64_t& { return c.seed; }));
    f.push_back(size_field("jobs", [](C& c) -> std::size_t& { return c.jobs; }));

    f.push_back(path_field("data.manifest", [](C& c) -> std::filesystem::path& { return c.manifest; }));
    f.push_back({"data.synth", [](C& c, std::string_view k, std::string_view v) { c.synth = to_bool(k, v); },
                 [](const C& c) { return std::string(c.synth ? "true" : "false"); }});
    f.push_back(size_field("synth.dim", [](C& c) -> std::size_t& { return c.synth_settings.dim; }));
    f.push_back(double_field("synth.separation", [](C& c) -> double& { return c.synth_settings.separation; }));
    f.push_back(u64_field("synth.seed", [](C& c) -> std::uint64_t& { return c.synth_settings.seed; }));
    f.push_back(size_field("synth.train", [](C& c) -> std::size_t& { return c.synth_settings.train; }));
    f.push_back(size_field("synth.dev", [](C& c) -> std::size_t& { return c.synth_settings.dev; }));
    f.push_back(size_field("synth.test", [](C& c) -> std::size_t& { return c.synth_settings.test; }));

    f.push_back({"experiment.methods",
                 [](C& c, std::string_view k, std::string_view v) {
                   std::vector<Method> ms;
                   for (auto t : split_list(v)) {
                     auto m = parse_method(t);
                     if (!m) bad_value(k, "a method name (Upsample, Perturb, CVAE, Linear, Extra, DeltaR, DeltaS)", t);
                     ms.push_back(*m);
                   }
                   c.methods = std::move(ms);
                 },
                 [](const C& c) { return join(c.methods, [](Method m) { return std::string(method_name(m)); }); }});
    f.push_back(size_field("experiment.repeats", [](C& c) -> std::size_t& { return c.repeats; }));

    f.push_back(string_field("fsi.target", [](C& c) -> std::string& { return c.target; }));
    f.push_back(size_field("fsi.k", [](C& c) -> std::size_t& { return c.k; }));
    f.push_back(sizes_field("fsi.n_aug", [](C& c) -> std::vector<std::size_t>& { return c.n_aug; }));

    f.push_back(sizes_field("sweep.ks", [](C& c) -> std::vector<std::size_t>& { return c.sweep_ks; }));
    f.push_back(size_field("sweep.n_aug", [](C& c) -> std::size_t& { return c.sweep_n_aug; }));

    f.push_back({"fulldata.fractions",
                 [](C& c, std::string_view k, std::string_view v) {
                   std::vector<double> xs;
                   for (auto t : split_list(v)) xs.push_back(to_double(k, t));
                   c.fractions = std::move(xs);
                 },
                 [](const C& c) { return join(c.fractions, [](double x) { return format_double(x); }); }});

    f.push_back(double_field("classifier.lr", [](C& c) -> double& { return c.classifier.lr; }));
    f.push_back(size_field("classifier.epochs", [](C& c) -> std::size_t& { return c.classifier.epochs; }));
    f.push_back(size_field("classifier.batch_size", [](C& c) -> std::size_t& { return c.classifier.batch_size; }));
    f.push_back(double_field("classifier.dropout", [](C& c) -> double& { return c.classifier.input_dropout; }));
    f.push_back({"classifier.selection",
                 [](C& c, std::string_view k, std::string_view v) {
                   auto s = classifier::parse_selection(v);
                   if (!s) bad_value(k, "best_dev or last_epoch", v);
                   c.classifier.selection = *s;
                 },
                 [](const C& c) { return std::string(classifier::selection_name(c.classifier.selection)); }});

    f.push_back({"perturb.mode",
                 [](C& c, std::string_view k, std::string_view v) {
                   auto m = augment::parse_perturb_mode(v);
                   if (!m) bad_value(k, "additive, multiplicative or mixed", v);
                   c.generators.training_free.perturb.mode = *m;
                 },
                 [](const C& c) { return std::string(augment::perturb_mode_name(c.generators.training_free.perturb.mode)); }});
    f.push_back(double_field("perturb.alpha", [](C& c) -> double& { return c.generators.training_free.perturb.alpha; }));
    f.push_back(double_field("extra.lambda", [](C& c) -> double& { return c.generators.training_free.extra.lambda; }));

    f.push_back(double_field("cvae.lr", [](C& c) -> double& { return c.generators.cvae.lr; }));
    f.push_back(size_field("cvae.epochs", [](C& c) -> std::size_t& { return c.generators.cvae.epochs; }));
    f.push_back(size_field("cvae.batch_size", [](C& c) -> std::size_t& { return c.generators.cvae.batch_size; }));
    f.push_back(double_field("cvae.kl_weight", [](C& c) -> double& { return c.generators.cvae.kl_weight; }));
    f.push_back(size_field("cvae.hidden", [](C& c) -> std::size_t& { return c.generators.cvae.hidden; }));
    f.push_back(size_field("cvae.latent", [](C& c) -> std::size_t& { return c.generators.cvae.latent; }));
    f.push_back(size_field("cvae.max_rows_per_class",
                           [](C& c) -> std::size_t& { return c.generators.cvae.max_rows_per_class; }));

    f.push_back(double_field("delta.lr", [](C& c) -> double& { return c.generators.delta.lr; }));
    f.push_back(size_field("delta.epochs", [](C& c) -> std::size_t& { return c.generators.delta.epochs; }));
    f.push_back(size_field("delta.batch_size", [](C& c) -> std::size_t& { return c.generators.delta.batch_size; }));
    f.push_back(size_field("delta.pairs_per_class_per_epoch",
                           [](C& c) -> std::size_t& { return c.generators.delta.pairs_per_class_per_epoch; }));
    f.push_back(size_field("delta.hidden", [](C& c) -> std::size_t& { return c.generators.delta.hidden; }));
    f.push_back(size_field("delta.latent", [](C& c) -> std::size_t& { return c.generators.delta.latent; }));
    f.push_back(double_field("delta.dropout", [](C& c) -> double& { return c.generators.delta.dropout; }));

    f.push_back(string_field("augment.method", [](C& c) -> std::string& { return c.augment_method; }));
    f.push_back(size_field("augment.n", [](C& c) -> std::size_t& { return c.augment_n; }));
    f.push_back(string_field("augment.label", [](C& c) -> std::string& { return c.augment_label; }));
    f.push_back(path_field("augment.input", [](C& c) -> std::filesystem::path& { return c.augment_input; }));
    f.push_back(path_field("augment.output", [](C& c) -> std::filesystem::path& { return c.augment_output; }));
    f.push_back(path_field("augment.train_from", [](C& c) -> std::filesystem::path& { return c.augment_train_from; }));
    f.push_back(path_field("augment.model", [](C& c) -> std::filesystem::path& { return c.augment_model; }));

    f.push_back(path_field("evaluate.model", [](C& c) -> std::filesystem::path& { return c.evaluate_model; }));
    f.push_back(path_field("evaluate.input", [](C& c) -> std::filesystem::path& { return c.evaluate_input; }));

    f.push_back(size_field("project.n", [](C& c) -> std::size_t& { return c.project_n; }));
    f.push_back(size_field("project.max_real_per_class",
                           [](C& c) -> std::size_t& { return c.project_max_real_per_class; }));

    f.push_back(path_field("report.input", [](C& c) -> std::filesystem::path& { return c.report_input; }));
    f.push_back(string_field("report.column", [](C& c) -> std::string& { return c.report_column; }));
    return f;
  }();
  return table;
}

const std::vector<std::string_view> kCommands = {"synth", "ingest", "augment", "fsi", "sweep", "fulldata",
                                                 "train-classifier", "evaluate", "project", "report"};

bool needs_bundle(std::string_view cmd) {
  return cmd == "ingest" || cmd == "fsi" || cmd == "sweep" || cmd == "fulldata" || cmd == "train-classifier" ||
         cmd == "project";
}

}  // namespace

KeyValues parse_config(std::string_view text, std::string_view source) {
  KeyValues kv;
  std::string section;
  std::size_t lineno = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    const std::string_view line = trim(text.substr(start, end - start));
    start = end + 1;
    ++lineno;
    const auto fail = [&](const std::string& msg) {
      throw ConfigError(std::string(source) + ":" + std::to_string(lineno) + ": " + msg);
    };
    if (line.empty() || line.front() == '#' || line.front() == ';') continue;
    if (line.front() == '[') {
      if (line.back() != ']') fail("unterminated section header");
      section = std::string(trim(line.substr(1, line.size() - 2)));
      if (section.empty() || section.find_first_of(" \t.=") != std::string::npos) {
        fail("invalid section name '" + section + "'");
      }
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) fail("expected 'key = value'");
    const std::string_view key = trim(line.substr(0, eq));
    if (key.empty() || key.find_first_of(" \t") != std::string_view::npos) fail("invalid key '" + std::string(key) + "'");
    const std::string full = section.empty() ? std::string(key) : section + "." + std::string(key);
    if (!kv.emplace(full, std::string(trim(line.substr(eq + 1)))).second) fail("duplicate key '" + full + "'");
  }
  return kv;
}

KeyValues load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("config: cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path.string());
}

std::string format_config(const KeyValues& kv) {
  // Top-level keys first, then one block per section in key order.
  std::string out;
  for (const auto& [k, v] : kv) {
    if (k.find('.') == std::string::npos) out += k + " = " + v + "\n";
  }
  std::string current;
  for (const auto& [k, v] : kv) {
    const auto dot = k.find('.');
    if (dot == std::string::npos) continue;
    const std::string section = k.substr(0, dot);
    if (section != current) {
      out += "\n[" + section + "]\n";
      current = section;
    }
    out += k.substr(dot + 1) + " = " + v + "\n";
  }
  return out;
}

std::vector<std::string> known_keys() {
  std::vector<std::string> out;
  for (const auto& f : fields()) out.push_back(f.key);
  return out;
}

void ExperimentConfig::apply(const KeyValues& kv) {
  for (const auto& [key, value] : kv) {
    const auto& fs = fields();
    auto it = std::find_if(fs.begin(), fs.end(), [&](const Field& f) { return f.key == key; });
    if (it == fs.end()) throw ConfigError(key + ": unknown configuration key");
    it->set(*this, key, value);
  }
}

KeyValues ExperimentConfig::to_kv() const {
  KeyValues kv;
  for (const auto& f : fields()) kv.emplace(f.key, f.get(*this));
  return kv;
}

void ExperimentConfig::validate() const {
  if (std::find(kCommands.begin(), kCommands.end(), command) == kCommands.end()) {
    throw ConfigError("command: unknown command '" + command + "'");
  }
  if (out.empty()) throw ConfigError("out: output directory must be set");
  if (jobs < 1) throw ConfigError("jobs: must be >= 1");
  if (synth && !manifest.empty()) {
    throw ConfigError("data: set either data.manifest or data.synth, not both");
  }
  if (needs_bundle(command) && !has_data_source()) {
    throw ConfigError("data.manifest: required (or set data.synth = true)");
  }
  if (command == "ingest" && manifest.empty()) throw ConfigError("data.manifest: required by ingest");
  if (synth) {
    if (synth_settings.train < 1 || synth_settings.dev < 1 || synth_settings.test < 1) {
      throw ConfigError("synth.train, synth.dev and synth.test must be >= 1");
    }
  }
  if (repeats < 1) throw ConfigError("experiment.repeats: must be >= 1");
  if (command == "fsi" || command == "sweep" || command == "project") {
    if (k < 1) throw ConfigError("fsi.k: must be >= 1");
  }
  if (command == "fsi" && n_aug.empty()) throw ConfigError("fsi.n_aug: must not be empty");
  if (command == "sweep" && sweep_ks.empty()) throw ConfigError("sweep.ks: must not be empty");
  if (command == "fulldata") {
    if (fractions.empty()) throw ConfigError("fulldata.fractions: must not be empty");
    for (double f : fractions) {
      if (!(f > 0.0 && f <= 1.0)) throw ConfigError("fulldata.fractions: values must lie in (0, 1]");
    }
  }
  if (command == "augment") {
    if (augment_method.empty()) throw ConfigError("augment.method: required");
    if (!parse_method(augment_method)) throw ConfigError("augment.method: unknown method '" + augment_method + "'");
    if (augment_input.empty() && augment_train_from.empty() && !has_data_source()) {
      throw ConfigError("augment.input: required (or augment.train_from / a data source)");
    }
  }
  if (command == "evaluate") {
    if (evaluate_model.empty()) throw ConfigError("evaluate.model: required");
    if (evaluate_input.empty() && !has_data_source()) {
      throw ConfigError("evaluate.input: required (or a data source whose test split is used)");
    }
  }
  if (command == "report" && report_input.empty()) throw ConfigError("report.input: required");
  classifier.validate();
  generators.cvae.validate();
  generators.delta.validate();
  if (!(generators.training_free.perturb.alpha >= 0.0)) throw ConfigError("perturb.alpha: must be >= 0");
}

DatasetBundle ExperimentConfig::load_data() const {
  if (synth) {
    SplitCounts counts{synth_settings.train, synth_settings.dev, synth_settings.test};
    return generate_mixture(snipslike_spec(synth_settings.dim, synth_settings.separation, synth_settings.seed, counts),
                            synth_settings.seed);
  }
  if (manifest.empty()) throw ConfigError("data.manifest: required (or set data.synth = true)");
  if (!std::filesystem::exists(manifest)) {
    throw DataError("data.manifest: file '" + manifest.string() + "' does not exist");
  }
  return load_bundle(manifest);
}

ManifestData ExperimentConfig::load_experiment_data() const {
  if (synth) return {load_data(), {}};
  if (manifest.empty()) throw ConfigError("data.manifest: required (or set data.synth = true)");
  if (!std::filesystem::exists(manifest)) {
    throw DataError("data.manifest: file '" + manifest.string() + "' does not exist");
  }
  return load_manifest_data(manifest);
}

LabelId ExperimentConfig::resolve_target(const DatasetBundle& bundle) const {
  if (target.empty()) {
    if (bundle.vocab().size() == 0) throw DataError("fsi.target: dataset has no labels");
    return 0;
  }
  auto id = bundle.vocab().find(target);
  if (!id) throw ConfigError("fsi.target: label '" + target + "' not present in the data");
  return *id;
}

fsi::SimulationSpec ExperimentConfig::simulation(LabelId target_id) const {
  fsi::SimulationSpec s;
  s.target = target_id;
  s.k = k;
  s.n_aug = n_aug;
  s.methods = methods;
  s.repeats = repeats;
  s.master_seed = seed;
  s.classifier = classifier;
  s.generators = generators;
  s.jobs = jobs;
  return s;
}

fsi::FullDataSpec ExperimentConfig::full_data() const {
  fsi::FullDataSpec s;
  s.fractions = fractions;
  s.methods = methods;
  s.repeats = repeats;
  s.master_seed = seed;
  s.classifier = classifier;
  s.generators = generators;
  s.jobs = jobs;
  return s;
}

}  // namespace fda::tools
