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

#ifndef FDA_ERROR_HPP_
#define FDA_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace fda {

// Invalid or inconsistent configuration (bad field, missing key, bad value).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input data or a violated data precondition.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Training diverged: a loss or parameter became non-finite.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace fda

#endif  // FDA_ERROR_HPP_
