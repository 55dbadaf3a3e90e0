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

#include "fda/report.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <sstream>

#include "fda/error.hpp"
#include "fda/stats.hpp"

namespace fda::report {

namespace {

std::string method_or_baseline(const fsi::AggregateResult& a) {
  return a.method ? std::string(method_name(*a.method)) : std::string(kBaselineName);
}

void append_runs(std::vector<ResultRow>& out, const fsi::AggregateResult& a, std::string_view experiment,
                 std::string_view target) {
  for (std::size_t run = 0; run < a.accuracies.size(); ++run) {
    out.push_back({std::string(experiment), std::string(target), a.k, method_or_baseline(a), a.n_aug,
                   a.fraction, run, a.accuracies[run]});
  }
}

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

template <typename T>
T parse_field(std::string_view tok, std::size_t lineno, std::string_view what) {
  T v{};
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size()) {
    throw DataError("results csv line " + std::to_string(lineno) + ": bad " + std::string(what) + " '" +
                    std::string(tok) + "'");
  }
  return v;
}

std::string cell(const std::vector<double>& accs) {
  return stats::format_mean_sd(stats::aggregate(accs));
}

std::string percent_label(double fraction) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g%%", 100.0 * fraction);
  return buf;
}

std::string display_method(const std::string& m) {
  return m == kBaselineName ? std::string("No Augmentation") : m;
}

// A baseline row, then methods grouped by size with
// the size printed on the first row of each group.
void size_grouped_table(std::ostringstream& os, const std::vector<const Group*>& groups,
                        std::string_view size_title, std::string_view column, bool by_fraction) {
  os << "| " << size_title << " | Method | " << column << " |\n";
  os << "|---|---|---|\n";
  for (const auto* g : groups) {
    if (g->method == kBaselineName) os << "| No Augmentation | | " << cell(g->accuracies) << " |\n";
  }
  std::vector<std::string> sizes;
  for (const auto* g : groups) {
    if (g->method == kBaselineName) continue;
    const std::string s = by_fraction ? percent_label(g->fraction) : std::to_string(g->n_aug);
    if (std::find(sizes.begin(), sizes.end(), s) == sizes.end()) sizes.push_back(s);
  }
  for (const auto& s : sizes) {
    bool first = true;
    for (const auto* g : groups) {
      if (g->method == kBaselineName) continue;
      const std::string gs = by_fraction ? percent_label(g->fraction) : std::to_string(g->n_aug);
      if (gs != s) continue;
      os << "| " << (first ? s : std::string()) << " | " << g->method << " | " << cell(g->accuracies) << " |\n";
      first = false;
    }
  }
}

}  // namespace

std::vector<ResultRow> rows_from_fsi(const fsi::FsiResult& r, std::string_view target_name,
                                     std::string_view experiment) {
  std::vector<ResultRow> out;
  append_runs(out, r.baseline, experiment, target_name);
  for (const auto& c : r.cells) append_runs(out, c, experiment, target_name);
  return out;
}

std::vector<ResultRow> rows_from_sweep(const std::vector<fsi::SweepRow>& rows, std::string_view target_name) {
  std::vector<ResultRow> out;
  for (const auto& row : rows) {
    append_runs(out, row.baseline, "sweep", target_name);
    for (const auto& c : row.cells) append_runs(out, c, "sweep", target_name);
  }
  return out;
}

std::vector<ResultRow> rows_from_fulldata(const fsi::FullDataResult& r) {
  std::vector<ResultRow> out;
  append_runs(out, r.baseline, "fulldata", "");
  for (const auto& c : r.cells) append_runs(out, c, "fulldata", "");
  return out;
}

std::string to_csv(const std::vector<ResultRow>& rows) {
  std::string out(kCsvHeader);
  out += '\n';
  for (const auto& r : rows) {
    out += r.experiment + ',' + r.target + ',' + std::to_string(r.k) + ',' + r.method + ',' +
           std::to_string(r.n_aug) + ',' + format_double(r.fraction) + ',' + std::to_string(r.run) + ',' +
           format_double(r.accuracy) + '\n';
  }
  return out;
}

std::vector<ResultRow> parse_csv(std::string_view text) {
  std::vector<ResultRow> rows;
  std::size_t start = 0;
  std::size_t lineno = 0;
  bool header_seen = false;
  while (start < text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    start = end + 1;
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    if (!header_seen) {
      if (line != kCsvHeader) throw DataError("results csv: unexpected header '" + std::string(line) + "'");
      header_seen = true;
      continue;
    }
    const auto f = split_commas(line);
    if (f.size() != 8) throw DataError("results csv line " + std::to_string(lineno) + ": expected 8 fields");
    ResultRow r;
    r.experiment = std::string(f[0]);
    r.target = std::string(f[1]);
    r.k = parse_field<std::size_t>(f[2], lineno, "k");
    r.method = std::string(f[3]);
    r.n_aug = parse_field<std::size_t>(f[4], lineno, "n_aug");
    r.fraction = parse_field<double>(f[5], lineno, "fraction");
    r.run = parse_field<std::size_t>(f[6], lineno, "run");
    r.accuracy = parse_field<double>(f[7], lineno, "accuracy");
    rows.push_back(std::move(r));
  }
  if (!header_seen) throw DataError("results csv: missing header");
  return rows;
}

std::vector<Group> group_rows(const std::vector<ResultRow>& rows) {
  std::vector<Group> groups;
  for (const auto& r : rows) {
    auto it = std::find_if(groups.begin(), groups.end(), [&](const Group& g) {
      return g.experiment == r.experiment && g.target == r.target && g.k == r.k && g.method == r.method &&
             g.n_aug == r.n_aug && g.fraction == r.fraction;
    });
    if (it == groups.end()) {
      groups.push_back({r.experiment, r.target, r.k, r.method, r.n_aug, r.fraction, {}});
      it = groups.end() - 1;
    }
    it->accuracies.push_back(r.accuracy);
  }
  return groups;
}

std::string markdown(const std::vector<ResultRow>& rows, std::string_view column) {
  const auto groups = group_rows(rows);
  std::ostringstream os;
  std::vector<std::string> experiments;
  for (const auto& g : groups) {
    if (std::find(experiments.begin(), experiments.end(), g.experiment) == experiments.end()) {
      experiments.push_back(g.experiment);
    }
  }
  bool first_table = true;
  for (const auto& exp : experiments) {
    if (!first_table) os << '\n';
    first_table = false;
    if (exp == "fsi") {
      // One table per (target, k).
      std::vector<std::pair<std::string, std::size_t>> keys;
      for (const auto& g : groups) {
        if (g.experiment != exp) continue;
        std::pair<std::string, std::size_t> key{g.target, g.k};
        if (std::find(keys.begin(), keys.end(), key) == keys.end()) keys.push_back(key);
      }
      for (const auto& [target, k] : keys) {
        std::vector<const Group*> sel;
        std::size_t runs = 0;
        for (const auto& g : groups) {
          if (g.experiment == exp && g.target == target && g.k == k) {
            sel.push_back(&g);
            runs = g.accuracies.size();
          }
        }
        os << "FSI accuracy, target " << target << ", k=" << k << ", " << runs
           << " runs, mean (SD) in percent.\n\n";
        size_grouped_table(os, sel, "#", column, false);
      }
    } else if (exp == "fulldata") {
      std::vector<const Group*> sel;
      std::size_t runs = 0;
      for (const auto& g : groups) {
        if (g.experiment == exp) {
          sel.push_back(&g);
          runs = g.accuracies.size();
        }
      }
      os << "Full-data accuracy, " << runs << " runs, mean (SD) in percent.\n\n";
      size_grouped_table(os, sel, "Size", column, true);
    } else if (exp == "sweep") {
      std::vector<std::string> methods;
      std::vector<std::size_t> ks;
      std::string target;
      std::size_t n_aug = 0;
      for (const auto& g : groups) {
        if (g.experiment != exp) continue;
        target = g.target;
        if (g.method != kBaselineName) n_aug = g.n_aug;
        if (std::find(methods.begin(), methods.end(), g.method) == methods.end()) methods.push_back(g.method);
        if (std::find(ks.begin(), ks.end(), g.k) == ks.end()) ks.push_back(g.k);
      }
      os << "Seed-count sweep, target " << target << ", " << n_aug
         << " generated examples, mean (SD) in percent.\n\n";
      os << "| k |";
      for (const auto& m : methods) os << ' ' << display_method(m) << " |";
      os << "\n|---|";
      for (std::size_t i = 0; i < methods.size(); ++i) os << "---|";
      os << '\n';
      for (std::size_t k : ks) {
        os << "| " << k << " |";
        for (const auto& m : methods) {
          auto it = std::find_if(groups.begin(), groups.end(), [&](const Group& g) {
            return g.experiment == exp && g.k == k && g.method == m;
          });
          os << ' ' << (it == groups.end() ? std::string("-") : cell(it->accuracies)) << " |";
        }
        os << '\n';
      }
    } else {
      throw DataError("results csv: unknown experiment '" + exp + "'");
    }
  }
  return os.str();
}

std::string projection_csv(const std::vector<fsi::ProjectedPoint>& points) {
  std::string out = "x,y,group\n";
  for (const auto& p : points) out += format_double(p.x) + ',' + format_double(p.y) + ',' + p.group + '\n';
  return out;
}

}  // namespace fda::report
