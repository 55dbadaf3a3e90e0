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

#include "fda/dataio.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "fda/error.hpp"
#include "fda/rng.hpp"

namespace fda {

namespace {

bool valid_label_name(std::string_view name) {
  if (name.empty()) return false;
  return std::none_of(name.begin(), name.end(),
                      [](unsigned char c) { return std::isspace(c) != 0; });
}

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    std::size_t j = i;
    while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

template <typename T>
bool parse_number(std::string_view tok, T& out) {
  const char* end = tok.data() + tok.size();
  auto [ptr, ec] = std::from_chars(tok.data(), end, out);
  return ec == std::errc() && ptr == end;
}

[[noreturn]] void fail_at(std::string_view source, std::size_t line, const std::string& msg) {
  std::ostringstream os;
  os << source << ":" << line << ": " << msg;
  throw DataError(os.str());
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  out << text;
  if (!out) throw DataError("write failed for " + path.string());
}

}  // namespace

// ---------------------------------------------------------------------------
// LabelVocab

LabelVocab::LabelVocab(std::vector<std::string> names) {
  for (auto& n : names) {
    if (!valid_label_name(n)) throw DataError("invalid label name '" + n + "'");
    if (index_.count(n) != 0) throw DataError("duplicate label '" + n + "'");
    index_.emplace(n, static_cast<LabelId>(names_.size()));
    names_.push_back(std::move(n));
  }
}

LabelId LabelVocab::intern(std::string_view name) {
  if (auto id = find(name)) return *id;
  if (!valid_label_name(name)) throw DataError("invalid label name '" + std::string(name) + "'");
  const auto id = static_cast<LabelId>(names_.size());
  names_.emplace_back(name);
  index_.emplace(names_.back(), id);
  return id;
}

std::optional<LabelId> LabelVocab::find(std::string_view name) const {
  auto it = index_.find(std::string(name));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

LabelId LabelVocab::at(std::string_view name) const {
  if (auto id = find(name)) return *id;
  throw DataError("unknown label '" + std::string(name) + "'");
}

const std::string& LabelVocab::name(LabelId id) const {
  if (!contains(id)) throw DataError("label id " + std::to_string(id) + " out of range");
  return names_[static_cast<std::size_t>(id)];
}

// ---------------------------------------------------------------------------
// EmbeddingDataset

EmbeddingDataset::EmbeddingDataset(std::size_t dim, LabelVocab vocab)
    : dim_(dim), vocab_(std::move(vocab)) {
  if (dim == 0) throw DataError("embedding dim must be positive");
}

void EmbeddingDataset::append(LabelId label, std::span<const double> values) {
  if (values.size() != dim_) {
    throw DataError("row width " + std::to_string(values.size()) + " != dim " +
                    std::to_string(dim_));
  }
  if (!vocab_.contains(label)) throw DataError("label id " + std::to_string(label) + " not in vocab");
  for (double v : values) {
    if (!std::isfinite(v)) throw DataError("non-finite component in row");
  }
  labels_.push_back(label);
  values_.insert(values_.end(), values.begin(), values.end());
}

void EmbeddingDataset::append(LabelId label, const Eigen::Ref<const Eigen::VectorXd>& values) {
  append(label, std::span<const double>(values.data(), static_cast<std::size_t>(values.size())));
}

void EmbeddingDataset::reserve(std::size_t rows) {
  labels_.reserve(rows);
  values_.reserve(rows * dim_);
}

std::vector<std::size_t> EmbeddingDataset::rows_with_label(LabelId label) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    if (labels_[i] == label) out.push_back(i);
  }
  return out;
}

std::size_t EmbeddingDataset::count_label(LabelId label) const {
  return static_cast<std::size_t>(std::count(labels_.begin(), labels_.end(), label));
}

std::vector<std::size_t> EmbeddingDataset::class_counts() const {
  std::vector<std::size_t> counts(vocab_.size(), 0);
  for (LabelId l : labels_) ++counts[static_cast<std::size_t>(l)];
  return counts;
}

Eigen::MatrixXd EmbeddingDataset::class_matrix(LabelId label) const {
  const auto rows = rows_with_label(label);
  Eigen::MatrixXd out(static_cast<Eigen::Index>(dim_), static_cast<Eigen::Index>(rows.size()));
  for (std::size_t c = 0; c < rows.size(); ++c) out.col(static_cast<Eigen::Index>(c)) = column(rows[c]);
  return out;
}

EmbeddingDataset EmbeddingDataset::select(std::span<const std::size_t> rows) const {
  EmbeddingDataset out(dim_, vocab_);
  out.reserve(rows.size());
  for (std::size_t r : rows) {
    out.labels_.push_back(labels_.at(r));
    auto src = row(r);
    out.values_.insert(out.values_.end(), src.begin(), src.end());
  }
  return out;
}

void DatasetBundle::validate() const {
  if (!(train.vocab() == dev.vocab()) || !(train.vocab() == test.vocab())) {
    throw DataError("bundle splits do not share a vocabulary");
  }
  if (train.dim() != dev.dim() || train.dim() != test.dim()) {
    throw DataError("bundle splits do not share an embedding dim");
  }
}

// ---------------------------------------------------------------------------
// Method names

std::string_view method_name(Method m) {
  switch (m) {
    case Method::Upsample: return "Upsample";
    case Method::Perturb: return "Perturb";
    case Method::CVAE: return "CVAE";
    case Method::Linear: return "Linear";
    case Method::Extra: return "Extra";
    case Method::DeltaR: return "DeltaR";
    case Method::DeltaS: return "DeltaS";
  }
  return "?";
}

std::optional<Method> parse_method(std::string_view text) {
  const std::string key = lower(trim(text));
  for (Method m : kAllMethods) {
    if (lower(method_name(m)) == key) return m;
  }
  return std::nullopt;
}

bool method_needs_training(Method m) {
  return m == Method::CVAE || m == Method::DeltaR || m == Method::DeltaS;
}

// ---------------------------------------------------------------------------
// EMBV1

std::string format_double(double v) {
  char buf[40];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc()) throw DataError("cannot format value");
  return std::string(buf, ptr);
}

EmbeddingDataset parse_embeddings(std::string_view text, std::string_view source) {
  std::vector<std::string_view> lines;
  {
    std::size_t start = 0;
    while (start <= text.size()) {
      std::size_t end = text.find('\n', start);
      if (end == std::string_view::npos) end = text.size();
      std::string_view line = text.substr(start, end - start);
      if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
      lines.push_back(line);
      if (end == text.size()) break;
      start = end + 1;
    }
  }
  // A trailing newline leaves one empty element; blank lines after the
  // declared rows are tolerated, anything else is not.
  std::size_t cursor = 0;
  if (lines.empty() || trim(lines[0]).empty()) fail_at(source, 1, "missing embv1 header");
  auto header = split_ws(lines[0]);
  std::size_t dim = 0;
  std::size_t count = 0;
  if (header.size() != 3 || header[0] != "embv1" || !parse_number(header[1], dim) ||
      !parse_number(header[2], count) || dim == 0) {
    fail_at(source, 1, "malformed header, expected 'embv1 <dim> <count>'");
  }
  cursor = 1;

  LabelVocab vocab;
  bool closed = false;
  if (cursor < lines.size()) {
    auto toks = split_ws(lines[cursor]);
    if (!toks.empty() && toks[0] == "labels" && lines[cursor].find('\t') == std::string_view::npos) {
      std::vector<std::string> names(toks.begin() + 1, toks.end());
      try {
        vocab = LabelVocab(std::move(names));
      } catch (const DataError& e) {
        fail_at(source, cursor + 1, e.what());
      }
      closed = true;
      ++cursor;
    }
  }

  // Labels are interned before the dataset is built, so collect rows first.
  std::vector<LabelId> labels;
  std::vector<double> values;
  labels.reserve(count);
  values.reserve(count * dim);
  for (std::size_t r = 0; r < count; ++r, ++cursor) {
    const std::size_t lineno = cursor + 1;
    if (cursor >= lines.size() || (cursor + 1 == lines.size() && lines[cursor].empty())) {
      fail_at(source, lineno, "expected " + std::to_string(count) + " rows, found " + std::to_string(r));
    }
    std::string_view line = lines[cursor];
    const auto tab = line.find('\t');
    if (tab == std::string_view::npos) fail_at(source, lineno, "missing TAB after label");
    std::string_view name = trim(line.substr(0, tab));
    LabelId id = 0;
    if (closed) {
      auto found = vocab.find(name);
      if (!found) fail_at(source, lineno, "unknown label '" + std::string(name) + "' not in labels block");
      id = *found;
    } else {
      if (!valid_label_name(name)) fail_at(source, lineno, "invalid label '" + std::string(name) + "'");
      id = vocab.intern(name);
    }
    auto toks = split_ws(line.substr(tab + 1));
    if (toks.size() != dim) {
      fail_at(source, lineno, "dimension mismatch: expected " + std::to_string(dim) +
                                  " components, found " + std::to_string(toks.size()));
    }
    for (auto tok : toks) {
      double v = 0.0;
      if (!parse_number(tok, v)) fail_at(source, lineno, "bad number '" + std::string(tok) + "'");
      if (!std::isfinite(v)) fail_at(source, lineno, "non-finite value '" + std::string(tok) + "'");
      values.push_back(v);
    }
    labels.push_back(id);
  }
  for (; cursor < lines.size(); ++cursor) {
    if (!trim(lines[cursor]).empty()) fail_at(source, cursor + 1, "more rows than declared count");
  }

  EmbeddingDataset ds(dim, std::move(vocab));
  ds.reserve(count);
  for (std::size_t r = 0; r < count; ++r) {
    ds.append(labels[r], std::span<const double>(values.data() + r * dim, dim));
  }
  return ds;
}

EmbeddingDataset load_embeddings(const std::filesystem::path& path) {
  return parse_embeddings(read_file(path), path.string());
}

std::string format_embeddings(const EmbeddingDataset& ds) {
  std::string out;
  out.reserve(64 + ds.size() * (ds.dim() * 24 + 16));
  out += "embv1 " + std::to_string(ds.dim()) + " " + std::to_string(ds.size()) + "\n";
  if (!ds.vocab().empty()) {
    out += "labels";
    for (const auto& n : ds.vocab().names()) {
      out += ' ';
      out += n;
    }
    out += '\n';
  }
  for (std::size_t r = 0; r < ds.size(); ++r) {
    out += ds.vocab().name(ds.label(r));
    out += '\t';
    auto row = ds.row(r);
    for (std::size_t d = 0; d < row.size(); ++d) {
      if (d) out += ' ';
      out += format_double(row[d]);
    }
    out += '\n';
  }
  return out;
}

void save_embeddings(const EmbeddingDataset& ds, const std::filesystem::path& path) {
  write_file(path, format_embeddings(ds));
}

// ---------------------------------------------------------------------------
// Manifest / bundle

Manifest read_manifest(const std::filesystem::path& path) {
  const std::string text = read_file(path);
  const auto base = path.parent_path();
  Manifest m;
  std::istringstream in(text);
  std::string raw;
  std::size_t lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    std::string_view line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) fail_at(path.string(), lineno, "expected 'key = value'");
    const std::string key(trim(line.substr(0, eq)));
    std::filesystem::path value(std::string(trim(line.substr(eq + 1))));
    if (value.is_relative()) value = base / value;
    SplitPaths* target = nullptr;
    std::string split = key;
    if (key.rfind("run", 0) == 0 && key.find('.') != std::string::npos) {
      const auto dot = key.find('.');
      std::size_t run = 0;
      const char* first = key.data() + 3;
      const char* last = key.data() + dot;
      auto [ptr, ec] = std::from_chars(first, last, run);
      if (first == last || ec != std::errc() || ptr != last) {
        fail_at(path.string(), lineno, "bad run number in key '" + key + "'");
      }
      target = &m.runs[run];
      split = key.substr(dot + 1);
    }
    std::filesystem::path* slot = nullptr;
    if (split == "train") slot = target ? &target->train : &m.train;
    else if (split == "dev") slot = target ? &target->dev : &m.dev;
    else if (split == "test") slot = target ? &target->test : &m.test;
    if (!slot) fail_at(path.string(), lineno, "unknown manifest key '" + key + "'");
    if (!slot->empty()) fail_at(path.string(), lineno, "duplicate manifest key '" + key + "'");
    *slot = value;
  }
  if (m.train.empty() || m.dev.empty() || m.test.empty()) {
    throw DataError(path.string() + ": manifest must name train, dev and test");
  }
  return m;
}

void write_manifest(const Manifest& m, const std::filesystem::path& path) {
  std::string text = "train = " + m.train.generic_string() + "\n" +
                     "dev = " + m.dev.generic_string() + "\n" +
                     "test = " + m.test.generic_string() + "\n";
  for (const auto& [run, p] : m.runs) {
    const std::string prefix = "run" + std::to_string(run) + ".";
    if (!p.train.empty()) text += prefix + "train = " + p.train.generic_string() + "\n";
    if (!p.dev.empty()) text += prefix + "dev = " + p.dev.generic_string() + "\n";
    if (!p.test.empty()) text += prefix + "test = " + p.test.generic_string() + "\n";
  }
  write_file(path, text);
}

EmbeddingDataset remap_vocab(const EmbeddingDataset& ds, const LabelVocab& vocab) {
  if (ds.vocab() == vocab) return ds;
  std::vector<LabelId> map(ds.vocab().size());
  for (std::size_t i = 0; i < map.size(); ++i) map[i] = vocab.at(ds.vocab().names()[i]);
  EmbeddingDataset out(ds.dim(), vocab);
  out.reserve(ds.size());
  for (std::size_t r = 0; r < ds.size(); ++r) {
    out.append(map[static_cast<std::size_t>(ds.label(r))], ds.row(r));
  }
  return out;
}

namespace {

ManifestData load_manifest(const std::filesystem::path& manifest_path, bool with_runs) {
  const Manifest m = read_manifest(manifest_path);
  // Each distinct file is read once; runs usually share most splits.
  std::map<std::filesystem::path, EmbeddingDataset> files;
  const auto load = [&](const std::filesystem::path& p) -> const EmbeddingDataset& {
    auto it = files.find(p);
    if (it == files.end()) it = files.emplace(p, load_embeddings(p)).first;
    return it->second;
  };
  std::vector<SplitPaths> bundles{{m.train, m.dev, m.test}};
  std::vector<std::size_t> run_ids;
  if (with_runs) {
    for (const auto& [run, p] : m.runs) {
      bundles.push_back({p.train.empty() ? m.train : p.train, p.dev.empty() ? m.dev : p.dev,
                         p.test.empty() ? m.test : p.test});
      run_ids.push_back(run);
    }
  }
  LabelVocab vocab;
  std::size_t dim = 0;
  for (const auto& b : bundles) {
    for (const auto* p : {&b.train, &b.dev, &b.test}) {
      const auto& ds = load(*p);
      if (dim == 0) dim = ds.dim();
      if (ds.dim() != dim) throw DataError(manifest_path.string() + ": splits disagree on embedding dim");
      for (const auto& n : ds.vocab().names()) vocab.intern(n);
    }
  }
  const auto assemble = [&](const SplitPaths& p) {
    DatasetBundle b{remap_vocab(load(p.train), vocab), remap_vocab(load(p.dev), vocab),
                    remap_vocab(load(p.test), vocab)};
    b.validate();
    return b;
  };
  ManifestData out;
  out.base = assemble(bundles[0]);
  for (std::size_t i = 0; i < run_ids.size(); ++i) out.runs.emplace(run_ids[i], assemble(bundles[i + 1]));
  return out;
}

}  // namespace

DatasetBundle load_bundle(const std::filesystem::path& manifest_path) {
  return load_manifest(manifest_path, false).base;
}

ManifestData load_manifest_data(const std::filesystem::path& manifest_path) {
  return load_manifest(manifest_path, true);
}

std::filesystem::path save_bundle(const DatasetBundle& bundle, const std::filesystem::path& dir) {
  bundle.validate();
  std::filesystem::create_directories(dir);
  save_embeddings(bundle.train, dir / "train.embv1");
  save_embeddings(bundle.dev, dir / "dev.embv1");
  save_embeddings(bundle.test, dir / "test.embv1");
  const auto manifest = dir / "manifest.txt";
  write_manifest(Manifest{"train.embv1", "dev.embv1", "test.embv1", {}}, manifest);
  return manifest;
}

// ---------------------------------------------------------------------------
// Dataset surgery

std::vector<std::size_t> sample_class_rows(const EmbeddingDataset& ds, LabelId label,
                                           std::size_t k, std::uint64_t seed) {
  auto pool = ds.rows_with_label(label);
  if (pool.size() < k) {
    throw DataError("label '" + ds.vocab().name(label) + "' has " + std::to_string(pool.size()) +
                    " rows, fewer than k=" + std::to_string(k));
  }
  // Partial Fisher-Yates: the first k slots end up a uniform k-subset.
  Rng rng(seed);
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t j = i + rng.index(pool.size() - i);
    std::swap(pool[i], pool[j]);
  }
  pool.resize(k);
  return pool;
}

SeedSplit subsample_class(const EmbeddingDataset& ds, LabelId label, std::size_t k,
                          std::uint64_t seed) {
  const auto picked = sample_class_rows(ds, label, k, seed);
  std::vector<std::size_t> others;
  others.reserve(ds.size());
  for (std::size_t i = 0; i < ds.size(); ++i) {
    if (ds.label(i) != label) others.push_back(i);
  }
  return {ds.select(picked), ds.select(others)};
}

EmbeddingDataset remove_label(const EmbeddingDataset& ds, LabelId label) {
  std::vector<std::size_t> keep;
  keep.reserve(ds.size());
  for (std::size_t i = 0; i < ds.size(); ++i) {
    if (ds.label(i) != label) keep.push_back(i);
  }
  return ds.select(keep);
}

EmbeddingDataset merge(const EmbeddingDataset& ds, const AugmentedBatch& batch) {
  if (batch.size() > 0 && batch.dim() != ds.dim()) {
    throw DataError("batch dim " + std::to_string(batch.dim()) + " != dataset dim " +
                    std::to_string(ds.dim()));
  }
  if (!ds.vocab().contains(batch.label)) throw DataError("batch label not in dataset vocab");
  EmbeddingDataset out = ds;
  out.reserve(ds.size() + batch.size());
  for (Eigen::Index c = 0; c < batch.vectors.cols(); ++c) out.append(batch.label, batch.vectors.col(c));
  return out;
}

EmbeddingDataset concat(const EmbeddingDataset& a, const EmbeddingDataset& b) {
  if (a.dim() != b.dim() || !(a.vocab() == b.vocab())) {
    throw DataError("cannot concatenate datasets with different dim or vocab");
  }
  EmbeddingDataset out = a;
  out.reserve(a.size() + b.size());
  for (std::size_t r = 0; r < b.size(); ++r) out.append(b.label(r), b.row(r));
  return out;
}

}  // namespace fda
