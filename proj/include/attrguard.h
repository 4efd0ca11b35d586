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


// Umbrella header for the attrguard library.

#ifndef ATTRGUARD_ATTRGUARD_H_
#define ATTRGUARD_ATTRGUARD_H_

#include "attrguard/corpus/profile.h"
#include "attrguard/corpus/run_store.h"
#include "attrguard/harness/attack.h"
#include "attrguard/harness/prediction.h"
#include "attrguard/harness/prompt.h"
#include "attrguard/harness/templates.h"
#include "attrguard/metrics/metrics.h"
#include "attrguard/metrics/report.h"
#include "attrguard/model/factory.h"
#include "attrguard/model/http_completions.h"
#include "attrguard/model/provider.h"
#include "attrguard/model/sidecar.h"
#include "attrguard/model/simulated.h"
#include "attrguard/model/transport.h"
#include "attrguard/model/types.h"
#include "attrguard/pipeline/commands.h"
#include "attrguard/pipeline/run_config.h"
#include "attrguard/search/objectives.h"
#include "attrguard/search/rps.h"
#include "attrguard/search/suffix.h"
#include "attrguard/status.h"
#include "attrguard/trace/chain.h"
#include "attrguard/trace/loop.h"
#include "attrguard/trace/vocabulary.h"
#include "attrguard/trace/words.h"
#include "attrguard/util/parallel.h"
#include "attrguard/util/random.h"
#include "attrguard/util/strings.h"

#endif  // ATTRGUARD_ATTRGUARD_H_
