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

#ifndef FDA_CHECKPOINT_HPP_
#define FDA_CHECKPOINT_HPP_

#include <cstddef>
#include <filesystem>
#include <istream>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "fda/dataio.hpp"
#include "fda/nn.hpp"

// Versioned text container for trained models. Layout is documented in
// docs/checkpoint-format.md; every number is written in its shortest
// round-trip form so a reload is bit-exact.
namespace fda::ckpt {

inline constexpr std::string_view kMagic = "fda-checkpoint";
inline constexpr int kVersion = 1;

class Writer {
 public:
  Writer(std::ostream& out, std::string_view kind);
  void field(std::string_view key, std::string_view value);
  void field(std::string_view key, std::size_t value);
  void field(std::string_view key, double value);
  void vocab(const LabelVocab& vocab);
  void mlp(std::string_view name, const nn::Mlp& mlp);
  void finish();

 private:
  std::ostream& out_;
};

class Reader {
 public:
  /// Throws DataError unless the header names `kind` at a supported version.
  Reader(std::istream& in, std::string_view kind);
  std::string field(std::string_view key);
  std::size_t size_field(std::string_view key);
  double double_field(std::string_view key);
  LabelVocab vocab();
  nn::Mlp mlp(std::string_view name);
  void finish();

 private:
  std::string token();
  void expect(std::string_view tok);
  std::istream& in_;
};

/// Reads the kind recorded in a checkpoint header without consuming the file.
std::string peek_kind(const std::filesystem::path& path);

}  // namespace fda::ckpt

#endif  // FDA_CHECKPOINT_HPP_
