// Copyright 2026 The Attrguard Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef ATTRGUARD_METRICS_REPORT_H_
#define ATTRGUARD_METRICS_REPORT_H_

#include <cstdio>
#include <string>
#include <vector>

#include "attrguard/corpus/profile.h"
#include "attrguard/corpus/run_store.h"
#include "attrguard/metrics/metrics.h"
#include "attrguard/status.h"
#include "json.hpp"

namespace attrguard {

struct EvalReport {
  std::string run_id;
  // Taxonomy order; attributes without items are omitted.
  std::vector<MetricRow> rows;
  // Micro-average over all (profile, attribute) pairs.
  MetricRow overall;
  SimilarityStats similarity;
  MetricsOptions options;
};

inline nlohmann::json ReportJson(const EvalReport& r) {
  return {{"run", r.run_id},
          {"attributes", r.rows},
          {"overall", r.overall},
          {"similarity", r.similarity},
          {"options", r.options}};
}

inline std::string ReportText(const EvalReport& r) {
  std::string out;
  char buf[256];
  std::snprintf(buf, sizeof(buf), "%-22s %5s %7s %7s %7s %7s %7s %7s\n",
                "attribute", "n", "top1", "top2", "top3", "asr", "srr", "sorr");
  out += buf;
  auto line = [&](const MetricRow& row) {
    std::snprintf(buf, sizeof(buf),
                  "%-22s %5zu %7.4f %7.4f %7.4f %7.4f %7.4f %7.4f\n",
                  row.attribute.c_str(), row.n, row.top1, row.top2, row.top3,
                  row.asr, row.srr, row.sorr);
    out += buf;
  };
  for (const auto& row : r.rows) line(row);
  line(r.overall);
  if (r.similarity.n > 0) {
    std::snprintf(buf, sizeof(buf), "similarity: mean %.4f, min %.4f (n=%zu)\n",
                  r.similarity.mean, r.similarity.min, r.similarity.n);
    out += buf;
  }
  return out;
}

inline EvalReport BuildReport(const RunRecord& run,
                              const std::vector<AttributeSpec>& taxonomy,
                              const MetricsOptions& options = {}) {
  if (run.items.empty()) {
    throw Error(ErrorCode::kIncompleteRun,
                "run '" + run.id + "' has no predictions");
  }
  for (const auto& item : run.items) {
    if (FindAttribute(taxonomy, item.attribute) == nullptr) {
      throw Error(ErrorCode::kIncompleteRun,
                  "run '" + run.id + "' has items for unknown attribute '" +
                      item.attribute + "'");
    }
    if (item.truth.empty()) {
      throw Error(ErrorCode::kIncompleteRun,
                  "run '" + run.id + "' has an item without ground truth");
    }
  }
  EvalReport report;
  report.run_id = run.id;
  report.options = options;
  std::vector<Prediction> all_p;
  std::vector<std::string> all_t;
  std::vector<AttributeSpec> all_s;
  std::vector<double> sims;
  for (const auto& spec : taxonomy) {
    std::vector<Prediction> p;
    std::vector<std::string> t;
    std::vector<AttributeSpec> s;
    for (const auto& item : run.items) {
      if (item.attribute != spec.name) continue;
      p.push_back(item.prediction);
      t.push_back(item.truth);
      s.push_back(spec);
    }
    if (p.empty()) continue;
    report.rows.push_back(ComputeRow(spec.name, p, t, s, options));
    all_p.insert(all_p.end(), p.begin(), p.end());
    all_t.insert(all_t.end(), t.begin(), t.end());
    all_s.insert(all_s.end(), s.begin(), s.end());
  }
  for (const auto& item : run.items) {
    if (item.similarity) sims.push_back(*item.similarity);
  }
  report.overall = ComputeRow("overall", all_p, all_t, all_s, options);
  report.similarity = ComputeSimilarityStats(sims);
  return report;
}

}  // namespace attrguard

#endif  // ATTRGUARD_METRICS_REPORT_H_
