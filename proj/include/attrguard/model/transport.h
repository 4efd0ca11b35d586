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

// JSON-over-HTTP plumbing shared by the remote backends, plus a cassette
// transport that records and replays exchanges so tests run offline.

#ifndef ATTRGUARD_MODEL_TRANSPORT_H_
#define ATTRGUARD_MODEL_TRANSPORT_H_

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <regex>
#include <string>
#include <string_view>
#include <thread>
#include <utility>

#include "attrguard/status.h"
#include "httplib.h"
#include "json.hpp"

namespace attrguard {

class Transport {
 public:
  virtual ~Transport() = default;
  virtual nlohmann::json Post(std::string_view path,
                              const nlohmann::json& body) const = 0;
  virtual nlohmann::json Get(std::string_view path) const = 0;
};

struct HttpTransportOptions {
  std::string endpoint;
  double timeout_seconds = 60.0;
  int retries = 2;
  // Name of the environment variable holding a bearer token; unset or empty
  // variables send no Authorization header.
  std::string api_key_env;
};

// Splits "http://host:port/base" into the origin and a base path without a
// trailing slash.
inline std::pair<std::string, std::string> SplitEndpoint(
    std::string_view endpoint) {
  static const std::regex kUrl(R"(^(https?://[^/]+)(/.*)?$)");
  std::string e(endpoint);
  std::smatch m;
  if (!std::regex_match(e, m, kUrl)) {
    throw Error(ErrorCode::kConfigInvalid,
                "endpoint '" + e + "' is not an http(s) URL");
  }
  std::string base = m[2].matched ? m[2].str() : "";
  while (!base.empty() && base.back() == '/') base.pop_back();
  return {m[1].str(), base};
}

class HttpTransport : public Transport {
 public:
  explicit HttpTransport(HttpTransportOptions options)
      : options_(std::move(options)) {
    std::tie(origin_, base_path_) = SplitEndpoint(options_.endpoint);
#ifndef CPPHTTPLIB_OPENSSL_SUPPORT
    if (origin_.rfind("https://", 0) == 0) {
      throw Error(ErrorCode::kConfigInvalid,
                  "this build has no TLS support; use an http:// endpoint");
    }
#endif
    if (!options_.api_key_env.empty()) {
      if (const char* key = std::getenv(options_.api_key_env.c_str())) {
        token_ = key;
      }
    }
  }

  nlohmann::json Post(std::string_view path,
                      const nlohmann::json& body) const override {
    return Send(path, &body);
  }

  nlohmann::json Get(std::string_view path) const override {
    return Send(path, nullptr);
  }

 private:
  nlohmann::json Send(std::string_view path, const nlohmann::json* body) const {
    std::string full = base_path_ + std::string(path);
    std::string payload = body ? body->dump() : std::string();
    std::string last_error;
    for (int attempt = 0; attempt <= options_.retries; ++attempt) {
      if (attempt > 0) {
        std::this_thread::sleep_for(std::chrono::milliseconds(200 * attempt));
      }
      httplib::Client client(origin_);
      auto timeout = std::chrono::duration<double>(options_.timeout_seconds);
      client.set_connection_timeout(
          std::chrono::duration_cast<std::chrono::microseconds>(timeout));
      client.set_read_timeout(
          std::chrono::duration_cast<std::chrono::microseconds>(timeout));
      httplib::Headers headers;
      if (!token_.empty()) headers.emplace("Authorization", "Bearer " + token_);
      httplib::Result res =
          body ? client.Post(full, headers, payload, "application/json")
               : client.Get(full, headers);
      if (!res) {
        last_error = httplib::to_string(res.error());
        continue;
      }
      if (res->status == 413) {
        throw Error(ErrorCode::kContextLengthExceeded,
                    full + ": " + ErrorText(res->body));
      }
      if (res->status >= 500 || res->status == 429) {
        last_error = "HTTP " + std::to_string(res->status) + ": " +
                     ErrorText(res->body);
        continue;
      }
      if (res->status >= 400) {
        throw Error(ErrorCode::kProviderError,
                    full + ": HTTP " + std::to_string(res->status) + ": " +
                        ErrorText(res->body));
      }
      try {
        return nlohmann::json::parse(res->body);
      } catch (const nlohmann::json::exception&) {
        throw Error(ErrorCode::kProviderError,
                    full + ": response is not JSON");
      }
    }
    throw Error(ErrorCode::kBackendUnreachable,
                origin_ + full + ": " + last_error);
  }

  static std::string ErrorText(const std::string& body) {
    auto j = nlohmann::json::parse(body, nullptr, false);
    if (j.is_object() && j.contains("error")) {
      const auto& e = j.at("error");
      if (e.is_string()) return e.get<std::string>();
      if (e.is_object() && e.contains("message") && e.at("message").is_string()) {
        return e.at("message").get<std::string>();
      }
    }
    return body.substr(0, 200);
  }

  HttpTransportOptions options_;
  std::string origin_;
  std::string base_path_;
  std::string token_;
};

// Replays exchanges recorded in a JSON file keyed by method, path and request
// body. In record mode every exchange goes to `inner` and is appended to the
// file.
class CassetteTransport : public Transport {
 public:
  // Replay mode.
  explicit CassetteTransport(std::string path) : path_(std::move(path)) {
    Load(/*must_exist=*/true);
  }

  // Record mode.
  CassetteTransport(std::string path, std::unique_ptr<Transport> inner)
      : path_(std::move(path)), inner_(std::move(inner)) {
    Load(/*must_exist=*/false);
  }

  nlohmann::json Post(std::string_view path,
                      const nlohmann::json& body) const override {
    return Exchange("POST", path, body);
  }

  nlohmann::json Get(std::string_view path) const override {
    return Exchange("GET", path, nullptr);
  }

  size_t size() const {
    std::lock_guard<std::mutex> lock(mu_);
    return entries_.size();
  }

 private:
  static std::string Key(std::string_view method, std::string_view path,
                         const nlohmann::json& body) {
    return std::string(method) + " " + std::string(path) + " " + body.dump();
  }

  void Load(bool must_exist) {
    std::ifstream in(path_);
    if (!in) {
      if (must_exist) {
        throw Error(ErrorCode::kIoError, "cannot read cassette " + path_);
      }
      return;
    }
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::kParseError,
                  "cassette " + path_ + ": " + e.what());
    }
    for (const auto& it : doc.value("interactions", nlohmann::json::array())) {
      entries_[Key(it.at("method").get<std::string>(),
                   it.at("path").get<std::string>(), it.at("request"))] =
          it.at("response");
      order_.push_back(it);
    }
  }

  nlohmann::json Exchange(std::string_view method, std::string_view path,
                          const nlohmann::json& body) const {
    std::string key = Key(method, path, body);
    {
      std::lock_guard<std::mutex> lock(mu_);
      auto it = entries_.find(key);
      if (it != entries_.end()) return it->second;
    }
    if (!inner_) {
      throw Error(ErrorCode::kBackendUnreachable,
                  "cassette " + path_ + " has no recorded response for " +
                      std::string(method) + " " + std::string(path));
    }
    nlohmann::json response =
        method == "GET" ? inner_->Get(path) : inner_->Post(path, body);
    std::lock_guard<std::mutex> lock(mu_);
    entries_[key] = response;
    order_.push_back({{"method", method},
                      {"path", path},
                      {"request", body},
                      {"response", response}});
    std::ofstream out(path_);
    if (!out) throw Error(ErrorCode::kIoError, "cannot write cassette " + path_);
    out << nlohmann::json{{"interactions", order_}}.dump(2) << "\n";
    return response;
  }

  std::string path_;
  std::unique_ptr<Transport> inner_;
  mutable std::mutex mu_;
  mutable std::map<std::string, nlohmann::json> entries_;
  mutable nlohmann::json::array_t order_;
};

}  // namespace attrguard

#endif  // ATTRGUARD_MODEL_TRANSPORT_H_
