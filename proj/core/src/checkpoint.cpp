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

#include "fda/checkpoint.hpp"

#include <charconv>
#include <fstream>

#include "fda/error.hpp"

namespace fda::ckpt {

namespace {

double to_double(const std::string& tok) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size()) {
    throw DataError("checkpoint: bad number '" + tok + "'");
  }
  return v;
}

std::size_t to_size(const std::string& tok) {
  std::size_t v = 0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size()) {
    throw DataError("checkpoint: bad integer '" + tok + "'");
  }
  return v;
}

}  // namespace

Writer::Writer(std::ostream& out, std::string_view kind) : out_(out) {
  out_ << kMagic << ' ' << 'v' << kVersion << ' ' << kind << '\n';
}

void Writer::field(std::string_view key, std::string_view value) {
  out_ << key << ' ' << value << '\n';
}

void Writer::field(std::string_view key, std::size_t value) {
  out_ << key << ' ' << value << '\n';
}

void Writer::field(std::string_view key, double value) {
  out_ << key << ' ' << format_double(value) << '\n';
}

void Writer::vocab(const LabelVocab& vocab) {
  out_ << "vocab " << vocab.size();
  for (const auto& n : vocab.names()) out_ << ' ' << n;
  out_ << '\n';
}

void Writer::mlp(std::string_view name, const nn::Mlp& mlp) {
  out_ << "mlp " << name << ' ' << mlp.num_layers() << '\n';
  for (const auto& l : mlp.layers()) {
    out_ << "layer " << l.in() << ' ' << l.out() << ' ' << nn::activation_name(l.activation) << ' '
         << format_double(l.input_dropout) << '\n';
    out_ << 'w';
    for (Eigen::Index r = 0; r < l.weight.rows(); ++r) {
      for (Eigen::Index c = 0; c < l.weight.cols(); ++c) out_ << ' ' << format_double(l.weight(r, c));
    }
    out_ << "\nb";
    for (Eigen::Index r = 0; r < l.bias.size(); ++r) out_ << ' ' << format_double(l.bias[r]);
    out_ << '\n';
  }
}

void Writer::finish() {
  out_ << "end\n";
  if (!out_) throw DataError("checkpoint: write failed");
}

Reader::Reader(std::istream& in, std::string_view kind) : in_(in) {
  expect(kMagic);
  const std::string version = token();
  if (version != "v" + std::to_string(kVersion)) {
    throw DataError("checkpoint: unsupported version '" + version + "'");
  }
  const std::string got = token();
  if (got != kind) throw DataError("checkpoint: expected kind '" + std::string(kind) + "', found '" + got + "'");
}

std::string Reader::token() {
  std::string tok;
  if (!(in_ >> tok)) throw DataError("checkpoint: unexpected end of file");
  return tok;
}

void Reader::expect(std::string_view tok) {
  const std::string got = token();
  if (got != tok) throw DataError("checkpoint: expected '" + std::string(tok) + "', found '" + got + "'");
}

std::string Reader::field(std::string_view key) {
  expect(key);
  return token();
}

std::size_t Reader::size_field(std::string_view key) { return to_size(field(key)); }

double Reader::double_field(std::string_view key) { return to_double(field(key)); }

LabelVocab Reader::vocab() {
  const std::size_t n = size_field("vocab");
  std::vector<std::string> names;
  names.reserve(n);
  for (std::size_t i = 0; i < n; ++i) names.push_back(token());
  return LabelVocab(std::move(names));
}

nn::Mlp Reader::mlp(std::string_view name) {
  expect("mlp");
  expect(name);
  const std::size_t count = to_size(token());
  std::vector<nn::DenseLayer> layers;
  for (std::size_t i = 0; i < count; ++i) {
    expect("layer");
    const std::size_t in = to_size(token());
    const std::size_t out = to_size(token());
    const std::string act = token();
    auto activation = nn::parse_activation(act);
    if (!activation) throw DataError("checkpoint: unknown activation '" + act + "'");
    nn::DenseLayer l;
    l.activation = *activation;
    l.input_dropout = to_double(token());
    l.weight.resize(static_cast<Eigen::Index>(out), static_cast<Eigen::Index>(in));
    l.bias.resize(static_cast<Eigen::Index>(out));
    expect("w");
    for (Eigen::Index r = 0; r < l.weight.rows(); ++r) {
      for (Eigen::Index c = 0; c < l.weight.cols(); ++c) l.weight(r, c) = to_double(token());
    }
    expect("b");
    for (Eigen::Index r = 0; r < l.bias.size(); ++r) l.bias[r] = to_double(token());
    layers.push_back(std::move(l));
  }
  try {
    return nn::Mlp(std::move(layers));
  } catch (const std::invalid_argument& e) {
    throw DataError(std::string("checkpoint: ") + e.what());
  }
}

void Reader::finish() { expect("end"); }

std::string peek_kind(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  std::string magic, version, kind;
  in >> magic >> version >> kind;
  if (magic != kMagic) throw DataError(path.string() + ": not an fda checkpoint");
  return kind;
}

}  // namespace fda::ckpt
