// Copyright 2026 The t2imt Authors
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

#ifndef T2IMT_REPORT_HPP_
#define T2IMT_REPORT_HPP_

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "t2imt/mutation.hpp"

namespace t2imt {

struct CellCounts {
  size_t completed = 0;
  size_t inapplicable = 0;
  size_t failed = 0;
};

// Aggregates for one test set (the originals or one operator's follow-ups)
// on one backend. Absent optionals render as gaps.
struct SetMetrics {
  size_t cases = 0;  // number of consistency verdicts
  std::optional<double> error_e, error_r;
  std::optional<double> miss_e, miss_r;
  std::optional<double> fid, is_mean, is_std, rp;
  CellCounts cells;
};

struct BackendReport {
  std::string backend;
  SetMetrics orig;
  std::map<Op, SetMetrics> operators;
};

struct MetricReport {
  double epsilon = 0.1;
  std::vector<BackendReport> backends;  // sorted by backend id
  // Density-stratified pass rates, keyed "<backend>/<op token>".
  std::map<std::string, DensityBreakdown> density;
  std::vector<std::string> missing_cells;

  nlohmann::json to_json() const;
  static MetricReport from_json(const nlohmann::json& doc);
};

// Tables: per-backend quality metrics (I-FID / I-IS / RP), error rates per
// operator, miss-detection rates per test set (4-decimal fixed), and the
// density appendix with flagged level pairs. Missing values render as "-".
std::string render_markdown(const MetricReport& report);
std::string render_csv(const MetricReport& report);

}  // namespace t2imt

#endif  // T2IMT_REPORT_HPP_
