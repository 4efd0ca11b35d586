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

#ifndef ATTRGUARD_MODEL_FACTORY_H_
#define ATTRGUARD_MODEL_FACTORY_H_

#include <memory>
#include <string>
#include <vector>

#include "attrguard/corpus/profile.h"
#include "attrguard/model/http_completions.h"
#include "attrguard/model/provider.h"
#include "attrguard/model/sidecar.h"
#include "attrguard/model/simulated.h"
#include "attrguard/model/transport.h"
#include "attrguard/model/types.h"

namespace attrguard {

using ProviderPtr = std::shared_ptr<const Provider>;

inline std::unique_ptr<Transport> MakeTransport(const ProviderConfig& config) {
  auto http = [&]() {
    HttpTransportOptions o;
    o.endpoint = config.endpoint;
    o.timeout_seconds = config.timeout_seconds;
    o.retries = config.retries;
    if (config.backend == BackendKind::kHttpCompletions) {
      o.api_key_env = config.api_key_env;
    }
    return std::make_unique<HttpTransport>(o);
  };
  if (config.cassette.empty()) return http();
  if (config.cassette_mode == "record") {
    return std::make_unique<CassetteTransport>(config.cassette, http());
  }
  return std::make_unique<CassetteTransport>(config.cassette);
}

inline ProviderPtr MakeProvider(const ProviderConfig& config,
                                const std::vector<AttributeSpec>& taxonomy,
                                const std::string& name) {
  config.Validate();
  switch (config.backend) {
    case BackendKind::kSimulated:
      return std::make_shared<SimulatedProvider>(
          SimulatedConfigFromJson(config.simulated, taxonomy), name);
    case BackendKind::kHttpCompletions:
      return std::make_shared<HttpCompletionsProvider>(MakeTransport(config),
                                                       config, name);
    case BackendKind::kSidecar:
      return std::make_shared<SidecarProvider>(MakeTransport(config), config,
                                               name);
  }
  throw Error(ErrorCode::kConfigInvalid, "unknown backend");
}

}  // namespace attrguard

#endif  // ATTRGUARD_MODEL_FACTORY_H_
