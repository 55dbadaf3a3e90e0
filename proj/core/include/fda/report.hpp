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

#ifndef FDA_REPORT_HPP_
#define FDA_REPORT_HPP_

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "fda/fsi.hpp"

// Result serialization. One CSV schema covers all experiments:
//   experiment,target,k,method,n_aug,fraction,run,accuracy
// with method "NoAugmentation" for the baseline. Markdown tables are rendered
// from those rows, so `fda report` can rebuild them from a CSV alone.
namespace fda::report {

inline constexpr std::string_view kBaselineName = "NoAugmentation";
inline constexpr std::string_view kCsvHeader = "experiment,target,k,method,n_aug,fraction,run,accuracy";

struct ResultRow {
  std::string experiment;  // fsi | sweep | fulldata
  std::string target;      // empty for fulldata
  std::size_t k = 0;
  std::string method;
  std::size_t n_aug = 0;
  double fraction = 0.0;
  std::size_t run = 0;
  double accuracy = 0.0;

  friend bool operator==(const ResultRow&, const ResultRow&) = default;
};

std::vector<ResultRow> rows_from_fsi(const fsi::FsiResult& r, std::string_view target_name,
                                     std::string_view experiment = "fsi");
std::vector<ResultRow> rows_from_sweep(const std::vector<fsi::SweepRow>& rows, std::string_view target_name);
std::vector<ResultRow> rows_from_fulldata(const fsi::FullDataResult& r);

std::string to_csv(const std::vector<ResultRow>& rows);
/// Throws DataError on a malformed document.
std::vector<ResultRow> parse_csv(std::string_view text);

/// Rows grouped by (experiment, target, k, method, n_aug, fraction) in first
/// appearance order, with mean/sd recomputed from the per-run accuracies.
struct Group {
  std::string experiment;
  std::string target;
  std::size_t k = 0;
  std::string method;
  std::size_t n_aug = 0;
  double fraction = 0.0;
  std::vector<double> accuracies;
};
std::vector<Group> group_rows(const std::vector<ResultRow>& rows);

/// Markdown for whichever experiments appear in `rows`. `column` titles the
/// accuracy column (dataset name).
std::string markdown(const std::vector<ResultRow>& rows, std::string_view column);

std::string projection_csv(const std::vector<fsi::ProjectedPoint>& points);

}  // namespace fda::report

#endif  // FDA_REPORT_HPP_
