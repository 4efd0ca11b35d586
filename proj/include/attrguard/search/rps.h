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

// Rejection-oriented (RPS) and misattribution-oriented (MPS) suffix search.
//
// RPS stage 1 hill-climbs J1 until J1 >= tau1 or I1 iterations; stage 2 then
// hill-climbs J = J1 + beta * J2, accepting a candidate only if it strictly
// improves J, until J2 >= tau2 or I2 iterations. MPS hill-climbs J3 until
// J3 >= tau3 or I_MPS iterations. Every iteration evaluates exactly one
// RandomReplace candidate; incumbent scores are cached.
//
// With several providers each objective is the mean over providers. In
// min-per-model mode a threshold counts as reached only when every provider
// clears it.

#ifndef ATTRGUARD_SEARCH_RPS_H_
#define ATTRGUARD_SEARCH_RPS_H_

#include <cmath>
#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "attrguard/corpus/profile.h"
#include "attrguard/harness/prompt.h"
#include "attrguard/model/provider.h"
#include "attrguard/model/simulated.h"
#include "attrguard/search/objectives.h"
#include "attrguard/search/suffix.h"
#include "attrguard/status.h"
#include "attrguard/util/random.h"
#include "attrguard/util/strings.h"
#include "json.hpp"

namespace attrguard {

enum class ThresholdMode { kMean, kMinPerModel };

NLOHMANN_JSON_SERIALIZE_ENUM(ThresholdMode,
                             {{ThresholdMode::kMean, "mean"},
                              {ThresholdMode::kMinPerModel, "min-per-model"}})

struct SearchConfig {
  std::string init_suffix = DefaultInitSuffix();
  size_t span = 2;
  int max_iters_stage1 = 5000;
  int max_iters_stage2 = 5000;
  int max_iters_mps = 500;
  double tau1 = std::log(0.8);
  double tau2 = std::log(0.55);
  double tau3 = std::log(0.5);
  double beta = 5.0;
  std::vector<std::string> rejection_set = {"apologize", "cannot"};
  bool space_variants = true;
  Placement placement = Placement::kSuffix;
  std::vector<std::string> vocabulary = PrintableSymbolVocabulary();
  size_t max_suffix_tokens = 64;
  ThresholdMode threshold_mode = ThresholdMode::kMean;
  // Run MPS after RPS when a verification generation still yields a guess.
  bool mps_fallback = false;
  // Explicit MPS target; chosen from the baseline prediction when empty.
  std::string mps_target;
  uint64_t seed = 0;
  int max_tokens = 512;

  void Validate() const {
    if (tau1 > 0 || tau2 > 0 || tau3 > 0) {
      throw Error(ErrorCode::kConfigInvalid, "thresholds must be <= 0");
    }
    if (!(beta > 0)) throw Error(ErrorCode::kConfigInvalid, "beta must be > 0");
    if (span < 1) throw Error(ErrorCode::kConfigInvalid, "span must be >= 1");
    if (max_iters_stage1 < 0 || max_iters_stage2 < 0 || max_iters_mps < 0) {
      throw Error(ErrorCode::kConfigInvalid, "iteration budgets must be >= 0");
    }
    if (rejection_set.empty()) {
      throw Error(ErrorCode::kConfigInvalid, "rejection set is empty");
    }
    if (vocabulary.empty()) {
      throw Error(ErrorCode::kEmptyVocabulary, "search vocabulary is empty");
    }
    Suffix s = ParseSuffix(init_suffix, vocabulary);
    if (s.tokens.size() > max_suffix_tokens) {
      throw Error(ErrorCode::kConfigInvalid,
                  "init suffix has " + std::to_string(s.tokens.size()) +
                      " tokens, more than max_suffix_tokens");
    }
  }
};

inline void to_json(nlohmann::json& j, const SearchConfig& c) {
  j = nlohmann::json{{"init_suffix", c.init_suffix},
                     {"span", c.span},
                     {"max_iters_stage1", c.max_iters_stage1},
                     {"max_iters_stage2", c.max_iters_stage2},
                     {"max_iters_mps", c.max_iters_mps},
                     {"tau1", c.tau1},
                     {"tau2", c.tau2},
                     {"tau3", c.tau3},
                     {"beta", c.beta},
                     {"rejection_set", c.rejection_set},
                     {"space_variants", c.space_variants},
                     {"placement", c.placement},
                     {"vocabulary", c.vocabulary},
                     {"max_suffix_tokens", c.max_suffix_tokens},
                     {"threshold_mode", c.threshold_mode},
                     {"mps_fallback", c.mps_fallback},
                     {"mps_target", c.mps_target},
                     {"seed", c.seed},
                     {"max_tokens", c.max_tokens}};
}

inline void from_json(const nlohmann::json& j, SearchConfig& c) {
  SearchConfig d;
  c.init_suffix = j.value("init_suffix", d.init_suffix);
  c.span = j.value("span", d.span);
  c.max_iters_stage1 = j.value("max_iters_stage1", d.max_iters_stage1);
  c.max_iters_stage2 = j.value("max_iters_stage2", d.max_iters_stage2);
  c.max_iters_mps = j.value("max_iters_mps", d.max_iters_mps);
  c.tau1 = j.value("tau1", d.tau1);
  c.tau2 = j.value("tau2", d.tau2);
  c.tau3 = j.value("tau3", d.tau3);
  c.beta = j.value("beta", d.beta);
  c.rejection_set = j.value("rejection_set", d.rejection_set);
  c.space_variants = j.value("space_variants", d.space_variants);
  c.placement = j.value("placement", d.placement);
  c.vocabulary = j.value("vocabulary", d.vocabulary);
  c.max_suffix_tokens = j.value("max_suffix_tokens", d.max_suffix_tokens);
  c.threshold_mode = j.value("threshold_mode", d.threshold_mode);
  c.mps_fallback = j.value("mps_fallback", d.mps_fallback);
  c.mps_target = j.value("mps_target", d.mps_target);
  c.seed = j.value("seed", d.seed);
  c.max_tokens = j.value("max_tokens", d.max_tokens);
}

enum class SearchStage { kStage1, kStage2, kMps, kDone, kErrored };

NLOHMANN_JSON_SERIALIZE_ENUM(SearchStage, {{SearchStage::kStage1, "1"},
                                           {SearchStage::kStage2, "2"},
                                           {SearchStage::kMps, "mps"},
                                           {SearchStage::kDone, "done"},
                                           {SearchStage::kErrored, "errored"}})

struct SearchTraceRow {
  int iteration = 0;
  SearchStage stage = SearchStage::kStage1;
  std::string candidate_hash;
  std::optional<double> j1;
  std::optional<double> j2;
  double j = 0.0;
  bool accepted = false;
};

inline void to_json(nlohmann::json& j, const SearchTraceRow& r) {
  j = nlohmann::json{{"iteration", r.iteration},
                     {"stage", r.stage},
                     {"candidate_hash", r.candidate_hash},
                     {"j1", r.j1 ? nlohmann::json(*r.j1) : nlohmann::json()},
                     {"j2", r.j2 ? nlohmann::json(*r.j2) : nlohmann::json()},
                     {"j", r.j},
                     {"accepted", r.accepted}};
}

inline void from_json(const nlohmann::json& j, SearchTraceRow& r) {
  r.iteration = j.at("iteration").get<int>();
  r.stage = j.at("stage").get<SearchStage>();
  r.candidate_hash = j.at("candidate_hash").get<std::string>();
  r.j1 = j.at("j1").is_null() ? std::nullopt
                              : std::optional<double>(j.at("j1").get<double>());
  r.j2 = j.at("j2").is_null() ? std::nullopt
                              : std::optional<double>(j.at("j2").get<double>());
  r.j = j.at("j").get<double>();
  r.accepted = j.at("accepted").get<bool>();
}

struct SearchState {
  Suffix best;
  double j1 = kLogProbFloor;
  double j2 = kLogProbFloor;
  double j = kLogProbFloor;
  // MPS objective of the incumbent.
  std::optional<double> j3;
  SearchStage stage = SearchStage::kStage1;
  int iterations_stage1 = 0;
  int iterations_stage2 = 0;
  int iterations_mps = 0;
  bool tau1_reached = false;
  bool tau2_reached = false;
  bool tau3_reached = false;
  // Accepted stage-2 candidates whose J1 was below tau1.
  int j1_regressions = 0;
  std::string error;
  std::vector<SearchTraceRow> trace;

  int TotalIterations() const {
    return iterations_stage1 + iterations_stage2 + iterations_mps;
  }
};

inline void to_json(nlohmann::json& j, const SearchState& s) {
  j = nlohmann::json{{"best_suffix", s.best.surface},
                     {"best_tokens", s.best.tokens},
                     {"j1", s.j1},
                     {"j2", s.j2},
                     {"j", s.j},
                     {"j3", s.j3 ? nlohmann::json(*s.j3) : nlohmann::json()},
                     {"stage", s.stage},
                     {"iterations_stage1", s.iterations_stage1},
                     {"iterations_stage2", s.iterations_stage2},
                     {"iterations_mps", s.iterations_mps},
                     {"tau1_reached", s.tau1_reached},
                     {"tau2_reached", s.tau2_reached},
                     {"tau3_reached", s.tau3_reached},
                     {"j1_regressions", s.j1_regressions},
                     {"error", s.error}};
}

inline void from_json(const nlohmann::json& j, SearchState& s) {
  s.best.surface = j.at("best_suffix").get<std::string>();
  s.best.tokens = j.at("best_tokens").get<std::vector<size_t>>();
  s.j1 = j.at("j1").get<double>();
  s.j2 = j.at("j2").get<double>();
  s.j = j.at("j").get<double>();
  s.j3 = j.at("j3").is_null() ? std::nullopt
                              : std::optional<double>(j.at("j3").get<double>());
  s.stage = j.at("stage").get<SearchStage>();
  s.iterations_stage1 = j.at("iterations_stage1").get<int>();
  s.iterations_stage2 = j.at("iterations_stage2").get<int>();
  s.iterations_mps = j.at("iterations_mps").get<int>();
  s.tau1_reached = j.at("tau1_reached").get<bool>();
  s.tau2_reached = j.at("tau2_reached").get<bool>();
  s.tau3_reached = j.at("tau3_reached").get<bool>();
  s.j1_regressions = j.value("j1_regressions", 0);
  s.error = j.value("error", std::string());
}

// One JSON object per line.
inline void WriteSearchTrace(const SearchState& state, std::ostream& out) {
  for (const auto& row : state.trace) {
    out << nlohmann::json(row).dump() << "\n";
  }
}

inline std::string CandidateHash(const Suffix& s) {
  return HexDigest(Fnv1a64(s.surface));
}

// Scores of one objective over several providers.
struct ModelScores {
  std::vector<double> values;

  double Mean() const {
    double s = 0;
    for (double v : values) s += v;
    return values.empty() ? kLogProbFloor : s / values.size();
  }

  bool Reaches(double tau, ThresholdMode mode) const {
    if (mode == ThresholdMode::kMean) return Mean() >= tau;
    for (double v : values) {
      if (v < tau) return false;
    }
    return !values.empty();
  }
};

class RpsSearch {
 public:
  RpsSearch(std::string text, PromptContext context,
            std::vector<const Provider*> providers, SearchConfig config)
      : text_(std::move(text)),
        context_(std::move(context)),
        providers_(std::move(providers)),
        config_(std::move(config)) {
    config_.Validate();
    if (providers_.empty()) {
      throw Error(ErrorCode::kInvalidArgument, "RPS needs at least one provider");
    }
    for (const Provider* p : providers_) {
      RequireCapability(*p, p->GetCapabilities().forced_prefix,
                        ErrorCode::kLogprobsUnsupported,
                        "logprobs after a forced prefix");
    }
  }

  std::string Prompt(const Suffix& s) const {
    return context_.Render(ApplyPerturbation(text_, s.surface, config_.placement));
  }

  ModelScores J1(const Suffix& s) const {
    std::string prompt = Prompt(s);
    ModelScores out;
    for (const Provider* p : providers_) out.values.push_back(ScoreStage1(prompt, *p));
    return out;
  }

  ModelScores J2(const Suffix& s) const {
    std::string prompt = Prompt(s);
    ModelScores out;
    for (const Provider* p : providers_) {
      out.values.push_back(ScoreStage2(prompt, *p, config_.rejection_set,
                                       config_.space_variants));
    }
    return out;
  }

  SearchState Run() const {
    SearchState st;
    st.best = ParseSuffix(config_.init_suffix, config_.vocabulary);
    Rng rng(config_.seed);
    int iteration = 0;
    try {
      // Stage 1.
      ModelScores best_j1 = J1(st.best);
      st.j1 = best_j1.Mean();
      st.trace.push_back({0, SearchStage::kStage1, CandidateHash(st.best),
                          st.j1, std::nullopt, st.j1, true});
      for (int i = 0; i < config_.max_iters_stage1; ++i) {
        if (best_j1.Reaches(config_.tau1, config_.threshold_mode)) break;
        Suffix cand = RandomReplace(st.best, config_.span, config_.vocabulary, rng);
        ModelScores c = J1(cand);
        ++st.iterations_stage1;
        bool accepted = c.Mean() > st.j1;
        st.trace.push_back({++iteration, SearchStage::kStage1,
                            CandidateHash(cand), c.Mean(), std::nullopt,
                            c.Mean(), accepted});
        if (accepted) {
          st.best = std::move(cand);
          best_j1 = c;
          st.j1 = c.Mean();
        }
      }
      st.tau1_reached = best_j1.Reaches(config_.tau1, config_.threshold_mode);

      // Stage 2.
      st.stage = SearchStage::kStage2;
      ModelScores best_j2 = J2(st.best);
      st.j2 = best_j2.Mean();
      st.j = ScoreTotal(st.j1, st.j2, config_.beta);
      for (int i = 0; i < config_.max_iters_stage2; ++i) {
        if (best_j2.Reaches(config_.tau2, config_.threshold_mode)) break;
        Suffix cand = RandomReplace(st.best, config_.span, config_.vocabulary, rng);
        ModelScores c1 = J1(cand);
        ModelScores c2 = J2(cand);
        ++st.iterations_stage2;
        double cj = ScoreTotal(c1.Mean(), c2.Mean(), config_.beta);
        bool accepted = cj > st.j;
        st.trace.push_back({++iteration, SearchStage::kStage2,
                            CandidateHash(cand), c1.Mean(), c2.Mean(), cj,
                            accepted});
        if (accepted) {
          if (!c1.Reaches(config_.tau1, config_.threshold_mode)) {
            ++st.j1_regressions;
          }
          st.best = std::move(cand);
          best_j1 = c1;
          best_j2 = c2;
          st.j1 = c1.Mean();
          st.j2 = c2.Mean();
          st.j = cj;
        }
      }
      st.tau1_reached = best_j1.Reaches(config_.tau1, config_.threshold_mode);
      st.tau2_reached = best_j2.Reaches(config_.tau2, config_.threshold_mode);
      st.stage = SearchStage::kDone;
    } catch (const Error& e) {
      st.stage = SearchStage::kErrored;
      st.error = e.what();
    }
    return st;
  }

 private:
  std::string text_;
  PromptContext context_;
  std::vector<const Provider*> providers_;
  SearchConfig config_;
};

inline SearchState RunRps(std::string_view text, const PromptContext& context,
                          const std::vector<const Provider*>& providers,
                          const SearchConfig& config) {
  return RpsSearch(std::string(text), context, providers, config).Run();
}

class MpsSearch {
 public:
  MpsSearch(std::string text, PromptContext context, std::string truth,
            std::string target, const Provider* provider, SearchConfig config)
      : text_(std::move(text)),
        context_(std::move(context)),
        target_(std::move(target)),
        provider_(provider),
        config_(std::move(config)) {
    config_.Validate();
    if (provider_ == nullptr) {
      throw Error(ErrorCode::kInvalidArgument, "MPS needs a provider");
    }
    if (ValueMatches(context_.attribute(), target_, truth)) {
      throw Error(ErrorCode::kInvalidArgument,
                  "MPS target '" + target_ + "' matches the ground truth");
    }
    RequireCapability(*provider_, provider_->GetCapabilities().forced_prefix,
                      ErrorCode::kLogprobsUnsupported,
                      "logprobs after a forced prefix");
  }

  std::string Prompt(const Suffix& s) const {
    return context_.Render(ApplyPerturbation(text_, s.surface, config_.placement));
  }

  double J3(const Suffix& s) const {
    return ScoreMps(Prompt(s), target_, *provider_, config_.max_tokens);
  }

  // Continues from `start` when given (the RPS fallback), else from the
  // configured init suffix.
  SearchState Run(std::optional<SearchState> start = std::nullopt) const {
    SearchState st = start ? *start : SearchState{};
    if (!start) st.best = ParseSuffix(config_.init_suffix, config_.vocabulary);
    st.stage = SearchStage::kMps;
    Rng rng(DeriveSeed(config_.seed, start ? 1 : 0));
    int iteration = st.TotalIterations();
    try {
      double best = J3(st.best);
      st.j3 = best;
      st.trace.push_back({iteration, SearchStage::kMps, CandidateHash(st.best),
                          std::nullopt, std::nullopt, best, true});
      for (int i = 0; i < config_.max_iters_mps; ++i) {
        if (best >= config_.tau3) break;
        Suffix cand = RandomReplace(st.best, config_.span, config_.vocabulary, rng);
        ++st.iterations_mps;
        std::optional<double> c;
        try {
          c = J3(cand);
        } catch (const Error& e) {
          // A candidate that makes the model stop guessing cannot be scored.
          if (e.code() != ErrorCode::kAnchorNotFound) throw;
        }
        bool accepted = c && *c > best;
        st.trace.push_back({++iteration, SearchStage::kMps, CandidateHash(cand),
                            std::nullopt, std::nullopt,
                            c.value_or(kLogProbFloor), accepted});
        if (accepted) {
          st.best = std::move(cand);
          best = *c;
          st.j3 = best;
        }
      }
      st.tau3_reached = best >= config_.tau3;
      st.stage = SearchStage::kDone;
    } catch (const Error& e) {
      st.stage = SearchStage::kErrored;
      st.error = e.what();
    }
    return st;
  }

 private:
  std::string text_;
  PromptContext context_;
  std::string target_;
  const Provider* provider_;
  SearchConfig config_;
};

inline SearchState RunMps(std::string_view text, const PromptContext& context,
                          std::string_view truth, std::string_view target,
                          const Provider& provider, const SearchConfig& config) {
  return MpsSearch(std::string(text), context, std::string(truth),
                   std::string(target), &provider, config)
      .Run();
}

}  // namespace attrguard

#endif  // ATTRGUARD_SEARCH_RPS_H_
