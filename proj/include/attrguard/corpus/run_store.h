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

// Run records and their on-disk store: one JSON file per run plus index.json.

#ifndef ATTRGUARD_CORPUS_RUN_STORE_H_
#define ATTRGUARD_CORPUS_RUN_STORE_H_

#include <chrono>
#include <cstdint>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <system_error>
#include <vector>

#include "attrguard/corpus/profile.h"
#include "attrguard/harness/prediction.h"
#include "attrguard/status.h"
#include "attrguard/util/strings.h"
#include "json.hpp"

namespace attrguard {

// One (profile, attribute) pair of a run.
struct RunItem {
  std::string user_id;
  std::string attribute;
  std::string truth;
  // Dates of the profile's comments, reattached to edited text.
  std::vector<std::string> dates;
  std::string original_text;
  std::string defended_text;
  // Empty unless a suffix defense ran.
  std::string suffix;
  Prediction prediction;
  std::optional<double> similarity;
  // Defense artifacts (TRACE trail, search state, ...).
  nlohmann::json artifacts = nlohmann::json::object();

  bool operator==(const RunItem&) const = default;
};

struct RunRecord {
  std::string id;
  // attack | defend | eval
  std::string kind;
  std::string created;
  // For eval runs, the defended run that was re-attacked.
  std::string source_run;
  uint64_t seed = 0;
  nlohmann::json config = nlohmann::json::object();
  std::vector<RunItem> items;
  nlohmann::json summary = nlohmann::json::object();

  bool operator==(const RunRecord&) const = default;
};

inline void to_json(nlohmann::json& j, const RunItem& i) {
  j = nlohmann::json{{"user_id", i.user_id},
                     {"attribute", i.attribute},
                     {"truth", i.truth},
                     {"dates", i.dates},
                     {"original_text", i.original_text},
                     {"defended_text", i.defended_text},
                     {"suffix", i.suffix},
                     {"prediction", i.prediction},
                     {"similarity", i.similarity ? nlohmann::json(*i.similarity)
                                                 : nlohmann::json()},
                     {"artifacts", i.artifacts}};
}

inline void from_json(const nlohmann::json& j, RunItem& i) {
  i.user_id = j.at("user_id").get<std::string>();
  i.attribute = j.at("attribute").get<std::string>();
  i.truth = j.value("truth", std::string());
  i.dates = j.value("dates", std::vector<std::string>{});
  i.original_text = j.value("original_text", std::string());
  i.defended_text = j.value("defended_text", std::string());
  i.suffix = j.value("suffix", std::string());
  i.prediction = j.at("prediction").get<Prediction>();
  if (j.contains("similarity") && j.at("similarity").is_number()) {
    i.similarity = j.at("similarity").get<double>();
  } else {
    i.similarity.reset();
  }
  i.artifacts = j.value("artifacts", nlohmann::json::object());
}

inline void to_json(nlohmann::json& j, const RunRecord& r) {
  j = nlohmann::json{{"id", r.id},         {"kind", r.kind},
                     {"created", r.created}, {"source_run", r.source_run},
                     {"seed", r.seed},     {"config", r.config},
                     {"items", r.items},   {"summary", r.summary}};
}

inline void from_json(const nlohmann::json& j, RunRecord& r) {
  r.id = j.at("id").get<std::string>();
  r.kind = j.at("kind").get<std::string>();
  r.created = j.value("created", std::string());
  r.source_run = j.value("source_run", std::string());
  r.seed = j.value("seed", uint64_t{0});
  r.config = j.value("config", nlohmann::json::object());
  r.items = j.at("items").get<std::vector<RunItem>>();
  r.summary = j.value("summary", nlohmann::json::object());
}

inline std::string UtcTimestamp() {
  std::time_t now =
      std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

class RunStore {
 public:
  explicit RunStore(std::filesystem::path dir) : dir_(std::move(dir)) {}

  const std::filesystem::path& dir() const { return dir_; }

  // Writes the record and returns its id. An empty id becomes
  // "<kind>-<config hash>"; an id already in the store gets a "-2", "-3", ...
  // suffix.
  std::string Save(RunRecord record) const {
    std::error_code ec;
    std::filesystem::create_directories(dir_, ec);
    if (ec) {
      throw Error(ErrorCode::kIoError,
                  "cannot create run store " + dir_.string() + ": " +
                      ec.message());
    }
    std::string base = record.id.empty()
                           ? record.kind + "-" +
                                 HexDigest(Fnv1a64(record.config.dump()))
                                     .substr(0, 8)
                           : record.id;
    std::string id = base;
    for (int n = 2; std::filesystem::exists(PathFor(id)); ++n) {
      id = base + "-" + std::to_string(n);
    }
    record.id = id;
    if (record.created.empty()) record.created = UtcTimestamp();
    WriteJson(PathFor(id), nlohmann::json(record));

    nlohmann::json index = ReadIndex();
    index.push_back(
        {{"id", id}, {"kind", record.kind}, {"created", record.created}});
    WriteJson(dir_ / "index.json", index);
    return id;
  }

  RunRecord Load(const std::string& id) const {
    std::filesystem::path p = PathFor(id);
    if (id.empty() || id.find('/') != std::string::npos ||
        !std::filesystem::exists(p)) {
      throw Error(ErrorCode::kRunNotFound,
                  "run '" + id + "' not found in " + dir_.string());
    }
    try {
      return nlohmann::json::parse(ReadFile(p.string())).get<RunRecord>();
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::kParseError, p.string() + ": " + e.what());
    }
  }

  std::vector<std::string> List() const {
    std::vector<std::string> out;
    for (const auto& e : ReadIndex()) out.push_back(e.at("id").get<std::string>());
    return out;
  }

 private:
  std::filesystem::path PathFor(const std::string& id) const {
    return dir_ / (id + ".json");
  }

  nlohmann::json ReadIndex() const {
    std::filesystem::path p = dir_ / "index.json";
    if (!std::filesystem::exists(p)) return nlohmann::json::array();
    auto j = nlohmann::json::parse(ReadFile(p.string()), nullptr, false);
    return j.is_array() ? j : nlohmann::json::array();
  }

  static void WriteJson(const std::filesystem::path& p, const nlohmann::json& j) {
    std::filesystem::path tmp = p;
    tmp += ".tmp";
    {
      std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
      if (!out) throw Error(ErrorCode::kIoError, "cannot write " + p.string());
      out << j.dump(2) << "\n";
      if (!out) throw Error(ErrorCode::kIoError, "cannot write " + p.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, p, ec);
    if (ec) {
      throw Error(ErrorCode::kIoError,
                  "cannot write " + p.string() + ": " + ec.message());
    }
  }

  std::filesystem::path dir_;
};

}  // namespace attrguard

#endif  // ATTRGUARD_CORPUS_RUN_STORE_H_
