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

#include "t2imt/report.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

#include "t2imt/error.hpp"

namespace t2imt {

namespace {

std::string fixed4(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4f", v);
  return buf;
}

std::string fixed2(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

std::string opt4(const std::optional<double>& v) { return v ? fixed4(*v) : "-"; }

nlohmann::json set_metrics_to_json(const SetMetrics& m) {
  nlohmann::json doc;
  doc["cases"] = m.cases;
  auto put = [&doc](const char* key, const std::optional<double>& v) {
    if (v) doc[key] = *v;
  };
  put("error_e", m.error_e);
  put("error_r", m.error_r);
  put("miss_e", m.miss_e);
  put("miss_r", m.miss_r);
  put("fid", m.fid);
  put("is_mean", m.is_mean);
  put("is_std", m.is_std);
  put("rp", m.rp);
  doc["cells"] = {{"completed", m.cells.completed},
                  {"inapplicable", m.cells.inapplicable},
                  {"failed", m.cells.failed}};
  return doc;
}

SetMetrics set_metrics_from_json(const nlohmann::json& doc) {
  SetMetrics m;
  m.cases = doc.value("cases", size_t{0});
  auto get = [&doc](const char* key) -> std::optional<double> {
    if (doc.contains(key)) return doc.at(key).get<double>();
    return std::nullopt;
  };
  m.error_e = get("error_e");
  m.error_r = get("error_r");
  m.miss_e = get("miss_e");
  m.miss_r = get("miss_r");
  m.fid = get("fid");
  m.is_mean = get("is_mean");
  m.is_std = get("is_std");
  m.rp = get("rp");
  if (doc.contains("cells")) {
    const auto& c = doc.at("cells");
    m.cells = {c.value("completed", size_t{0}), c.value("inapplicable", size_t{0}),
               c.value("failed", size_t{0})};
  }
  return m;
}

void check_rate(const char* what, const std::optional<double>& v) {
  if (v && (*v < 0.0 || *v > 1.0))
    raise(ErrorCode::kInvalidInput, std::string(what) + " rate out of [0,1]");
}

}  // namespace

nlohmann::json MetricReport::to_json() const {
  for (const auto& b : backends) {
    check_rate("orig miss_e", b.orig.miss_e);
    check_rate("orig miss_r", b.orig.miss_r);
    for (const auto& [op, m] : b.operators) {
      check_rate("error_e", m.error_e);
      check_rate("error_r", m.error_r);
      check_rate("miss_e", m.miss_e);
      check_rate("miss_r", m.miss_r);
      check_rate("rp", m.rp);
    }
  }
  nlohmann::json doc;
  doc["version"] = 1;
  doc["epsilon"] = epsilon;
  auto& bks = doc["backends"] = nlohmann::json::object();
  for (const auto& b : backends) {
    nlohmann::json bj;
    bj["orig"] = set_metrics_to_json(b.orig);
    auto& ops = bj["operators"] = nlohmann::json::object();
    for (const auto& [op, m] : b.operators) ops[std::string(op_token(op))] = set_metrics_to_json(m);
    bks[b.backend] = std::move(bj);
  }
  auto& dens = doc["density"] = nlohmann::json::object();
  for (const auto& [key, breakdown] : density) dens[key] = breakdown.to_json();
  doc["missing_cells"] = missing_cells;
  return doc;
}

MetricReport MetricReport::from_json(const nlohmann::json& doc) {
  MetricReport report;
  report.epsilon = doc.value("epsilon", 0.1);
  if (doc.contains("backends")) {
    for (const auto& [id, bj] : doc.at("backends").items()) {
      BackendReport b;
      b.backend = id;
      if (bj.contains("orig")) b.orig = set_metrics_from_json(bj.at("orig"));
      if (bj.contains("operators")) {
        for (const auto& [token, mj] : bj.at("operators").items()) {
          auto op = op_from_token(token);
          if (!op) raise(ErrorCode::kConfigError, "unknown operator '" + token + "' in report");
          b.operators[*op] = set_metrics_from_json(mj);
        }
      }
      report.backends.push_back(std::move(b));
    }
  }
  std::sort(report.backends.begin(), report.backends.end(),
            [](const BackendReport& a, const BackendReport& b) { return a.backend < b.backend; });
  if (doc.contains("density")) {
    for (const auto& [key, dj] : doc.at("density").items())
      report.density[key] = DensityBreakdown::from_json(dj);
  }
  if (doc.contains("missing_cells"))
    report.missing_cells = doc.at("missing_cells").get<std::vector<std::string>>();
  return report;
}

std::string render_markdown(const MetricReport& report) {
  std::ostringstream out;

  // Quality metrics, one row per test set.
  out << "## Quality metrics\n\n";
  for (const auto& b : report.backends) {
    bool any = b.orig.fid || b.orig.is_mean || b.orig.rp;
    for (const auto& [op, m] : b.operators) any = any || m.fid || m.is_mean || m.rp;
    if (!any) continue;
    out << "### " << b.backend << "\n\n";
    out << "| Test set | I-FID | I-IS | RP |\n|---|---|---|---|\n";
    auto row = [&out](const std::string& name, const SetMetrics& m) {
      out << "| " << name << " | " << (m.fid ? fixed2(*m.fid) : "-") << " | ";
      if (m.is_mean) {
        out << fixed2(*m.is_mean);
        if (m.is_std) out << " ± " << fixed2(*m.is_std);
      } else {
        out << "-";
      }
      out << " | " << (m.rp ? fixed4(*m.rp) : "-") << " |\n";
    };
    row("orig", b.orig);
    for (Op op : all_ops()) {
      auto it = b.operators.find(op);
      if (it != b.operators.end()) row(std::string(op_token(op)), it->second);
    }
    out << "\n";
  }

  // Error rates per operator.
  out << "## Error rates\n\n";
  {
    std::vector<Op> cols;
    for (Op op : all_ops()) {
      for (const auto& b : report.backends)
        if (b.operators.count(op)) {
          cols.push_back(op);
          break;
        }
    }
    for (const char* which : {"entity", "relation"}) {
      bool entity = std::string(which) == "entity";
      out << "### " << (entity ? "Error_e" : "Error_r") << "\n\n| Software |";
      for (Op op : cols) out << " " << op_token(op) << " |";
      out << "\n|---|";
      for (size_t i = 0; i < cols.size(); ++i) out << "---|";
      out << "\n";
      for (const auto& b : report.backends) {
        out << "| " << b.backend << " |";
        for (Op op : cols) {
          auto it = b.operators.find(op);
          const std::optional<double> v =
              it == b.operators.end() ? std::nullopt
                                      : (entity ? it->second.error_e : it->second.error_r);
          out << " " << opt4(v) << " |";
        }
        out << "\n";
      }
      out << "\n";
    }
  }

  // Miss-detection rates per test set, originals first.
  out << "## Miss-detection rates\n\n";
  {
    std::vector<Op> cols;
    for (Op op : all_ops()) {
      if (op == Op::kSynonymSub) continue;  // surface-only sets have no pool delta to miss
      for (const auto& b : report.backends)
        if (b.operators.count(op)) {
          cols.push_back(op);
          break;
        }
    }
    for (const char* which : {"entity", "relation"}) {
      bool entity = std::string(which) == "entity";
      out << "### " << (entity ? "Miss_e" : "Miss_r") << "\n\n| Software | orig |";
      for (Op op : cols) out << " " << op_token(op) << " |";
      out << "\n|---|---|";
      for (size_t i = 0; i < cols.size(); ++i) out << "---|";
      out << "\n";
      for (const auto& b : report.backends) {
        out << "| " << b.backend << " | "
            << opt4(entity ? b.orig.miss_e : b.orig.miss_r) << " |";
        for (Op op : cols) {
          auto it = b.operators.find(op);
          const std::optional<double> v =
              it == b.operators.end() ? std::nullopt
                                      : (entity ? it->second.miss_e : it->second.miss_r);
          out << " " << opt4(v) << " |";
        }
        out << "\n";
      }
      out << "\n";
    }
  }

  // Density appendix.
  if (!report.density.empty()) {
    out << "## Density stratification (epsilon = " << report.epsilon << ")\n\n";
    for (const auto& [key, d] : report.density) {
      out << "### " << key << "\n\n| Level | Cases | Mean pass rate |\n|---|---|---|\n";
      for (const auto& l : d.levels)
        out << "| " << l.level << " | " << l.count << " | " << fixed4(l.mean) << " |\n";
      bool any_flag = false;
      for (const auto& p : d.pairs) any_flag = any_flag || p.flagged;
      if (any_flag) {
        out << "\nFlagged level pairs (distance >= epsilon):\n\n";
        for (const auto& p : d.pairs)
          if (p.flagged)
            out << "- levels " << p.level_a << "/" << p.level_b << ": D = "
                << fixed4(p.distance) << "\n";
      }
      if (!d.empty_levels.empty()) {
        out << "\nLevels with no cases:";
        for (int l : d.empty_levels) out << " " << l;
        out << "\n";
      }
      out << "\n";
    }
  }

  if (!report.missing_cells.empty()) {
    out << "## Missing cells\n\n";
    for (const auto& cell : report.missing_cells) out << "- " << cell << "\n";
    out << "\n";
  }
  return out.str();
}

std::string render_csv(const MetricReport& report) {
  std::ostringstream out;
  out << "backend,test_set,cases,error_e,error_r,miss_e,miss_r,fid,is_mean,is_std,rp\n";
  auto cell = [](const std::optional<double>& v) { return v ? fixed4(*v) : ""; };
  auto row = [&](const std::string& backend, const std::string& set, const SetMetrics& m) {
    out << backend << "," << set << "," << m.cases << "," << cell(m.error_e) << ","
        << cell(m.error_r) << "," << cell(m.miss_e) << "," << cell(m.miss_r) << ","
        << cell(m.fid) << "," << cell(m.is_mean) << "," << cell(m.is_std) << "," << cell(m.rp)
        << "\n";
  };
  for (const auto& b : report.backends) {
    row(b.backend, "orig", b.orig);
    for (Op op : all_ops()) {
      auto it = b.operators.find(op);
      if (it != b.operators.end()) row(b.backend, std::string(op_token(op)), it->second);
    }
  }
  return out.str();
}

}  // namespace t2imt
