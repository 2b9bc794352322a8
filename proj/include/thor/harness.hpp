/* Copyright 2026 The Thor Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

// Evaluation pipeline: system comparison, ablations, premise statistics,
// run configuration and the command line.

#ifndef THOR_HARNESS_HPP_
#define THOR_HARNESS_HPP_

#include <array>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "thor/search.hpp"

namespace thor {

inline constexpr const char* kToolVersion = "0.1.0";
inline constexpr int kReportVersion = 1;

// --- Configuration ------------------------------------------------------------

class ConfigError : public Error {
 public:
  using Error::Error;
};

struct RunConfig {
  SearchConfig search;
  // Hammer-only budget is this multiple of the in-search hammer budget.
  int standalone_factor = 4;
  int theories = 40;
  int theorems_per_theory = 30;
  std::array<double, 3> split{0.75, 0.05, 0.20};
  bool trace_shortcut = false;
  PolicyParams policy;
  GeneratorProfile profile;

  HammerBudget standalone_hammer() const;
  nlohmann::json to_json() const;
};

// Flat "key = value" lines; '#' starts a comment. Unknown keys, malformed
// values and duplicate keys throw ConfigError naming the line.
RunConfig parse_config(std::string_view text, RunConfig base = {});
std::vector<std::string> config_keys();

// --- Evaluation ---------------------------------------------------------------

enum class System { PolicyOnly, HammerOnly, Thor };
const char* to_string(System s);
System system_from_string(std::string_view s);

class MismatchedModelFingerprint : public Error {
 public:
  using Error::Error;
};

struct SystemOutcome {
  std::string status;
  bool proved = false;
  std::vector<std::string> proof;
  int premises = 0;
  SearchStats stats;
  long hammer_inferences = 0;  // hammer-only runs
};

struct PremiseStepMetric {
  long premise_attempts = 0;
  long premise_advances = 0;
  long plain_attempts = 0;
  long plain_advances = 0;

  std::optional<double> premise_rate() const;  // percent; empty when no attempts
  std::optional<double> plain_rate() const;
  nlohmann::json to_json() const;
};

// Classifies every kernel-dispatched candidate of the traces.
PremiseStepMetric premise_step_success_metric(const std::vector<TraceEvent>& trace);
PremiseStepMetric premise_step_success_metric(const std::vector<SearchStats>& stats);

// Distinct fact names over apply steps and certificate premise lists.
int count_premises(const std::vector<ProofStep>& proof);
int count_premises(const std::vector<std::string>& proof_texts);

inline constexpr std::array<const char*, 6> kPremiseBuckets{"0", "1", "2", "3", "4", "5+"};
using Histogram = std::array<long, 6>;
size_t premise_bucket(int premises);

struct PremiseHistograms {
  std::map<std::string, Histogram> found;         // per system
  std::map<std::string, Histogram> ground_truth;  // solved theorems, per system

  std::string render_text() const;
  std::string render_csv() const;
  nlohmann::json to_json() const;
};

struct EvalReport {
  std::string label;
  std::string corpus_fingerprint;
  // Per policy model: fingerprint and whether it reads the proof context.
  nlohmann::json models = nlohmann::json::object();
  uint64_t seed = 0;
  nlohmann::json config;
  std::vector<System> systems;
  std::vector<std::string> theorems;  // test split, corpus order
  std::vector<std::string> families;
  std::vector<int> ground_truth_premises;
  std::map<System, std::vector<SystemOutcome>> outcomes;

  bool has(System s) const { return outcomes.count(s) > 0; }
  int solved(System s) const;
  double rate(System s) const;  // percent
  int union_solved(System a, System b) const;
  double union_rate(System a, System b) const;
  // Solved by Thor and by neither component.
  int thor_only() const;
  PremiseStepMetric premise_metric(System s) const;
  PremiseHistograms histograms() const;

  nlohmann::json to_json() const;
  std::string render_table() const;
};

struct EvalModels {
  const RetrievalPolicyModel* thor = nullptr;
  // Model for the policy-only system; defaults to `thor`.
  const RetrievalPolicyModel* policy = nullptr;
};

using TraceSink = std::function<void(System, const std::string& theorem, const SearchOutcome&)>;

struct EvalOptions {
  SearchConfig config;
  HammerBudget standalone;
  std::vector<System> systems{System::PolicyOnly, System::HammerOnly, System::Thor};
  uint64_t seed = 0;
  int jobs = 1;
  SearchMode thor_mode = SearchMode::Thor;
  std::string label = "base";
  // Called once per search, serialized; enables trace recording.
  TraceSink trace;
};

// Evaluates the test split. Every proof is re-checked by the kernel; a
// rejected proof throws InvariantError.
EvalReport run_eval(const Corpus& corpus, const EvalModels& models, const EvalOptions& options);

struct AblationReport {
  EvalReport base;
  EvalReport learning_how;
  EvalReport no_context;
  EvalReport temperature;
  // Candidate supports of the base and temperature runs agree per query.
  long support_queries = 0;
  long support_mismatches = 0;

  nlohmann::json to_json() const;
  std::string render_table() const;
};

// Runs Thor under the base configuration and the three variants. `raw` is
// the unprocessed corpus, `preprocessed` its preprocessed counterpart.
AblationReport run_ablations(const Corpus& raw, const Corpus& preprocessed, const RunConfig& config,
                             uint64_t seed, int jobs = 1);

// --- Command line -------------------------------------------------------------

struct RunManifest {
  std::string subcommand;
  nlohmann::json config;
  std::map<std::string, std::string> inputs;
  std::map<std::string, std::string> outputs;
  double wallclock_seconds = 0;
  std::string tool_version = kToolVersion;

  nlohmann::json to_json() const;
  // Atomically writes <dir>/manifests/<subcommand>.json.
  void write(const std::string& dir) const;
};

// Exit codes: 0 success, 1 usage or input error, 2 internal invariant failure.
int cli_main(int argc, const char* const* argv);

}  // namespace thor

#endif  // THOR_HARNESS_HPP_
