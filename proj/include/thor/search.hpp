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

// Hammer-aware training data preprocessing and best-first proof search.

#ifndef THOR_SEARCH_HPP_
#define THOR_SEARCH_HPP_

#include <atomic>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "thor/corpus.hpp"
#include "thor/policy.hpp"

namespace thor {

// --- Preprocessing ------------------------------------------------------------

class StateReplayError : public Error {
 public:
  using Error::Error;
};

// Runs the hammer on the first goal of dp's state. On success the step
// becomes <hammer>; the prompt side is never modified. Throws
// StateReplayError when the state does not parse.
Datapoint preprocess_datapoint(const Datapoint& dp, const TheoremLibrary& library,
                               const HammerBudget& budget);

struct PreprocessReport {
  long replaced = 0;  // by a hammer run
  long kept = 0;
  long shortcut = 0;  // certificate steps replaced without a hammer run
  long hammer_calls = 0;

  double replacement_fraction() const;
  nlohmann::json to_json() const;
};

struct PreprocessResult {
  Corpus corpus;
  PreprocessReport report;
};

// Maps preprocess_datapoint over the train split. With the trace shortcut,
// certificate steps become <hammer> and nothing else is hammered.
PreprocessResult preprocess_corpus(const Corpus& corpus, const HammerBudget& budget,
                                   bool use_trace_shortcut, int jobs = 1);

bool is_certificate_step(std::string_view step_text);

// --- Search -------------------------------------------------------------------

struct SearchConfig {
  int queue_cap = 32;
  int max_queries = 300;
  int samples_per_expansion = 8;
  double temperature = 1.2;
  long step_budget = 5000;
  long total_budget = 250000;
  HammerBudget hammer_budget;
  std::optional<double> step_wallclock;
  std::optional<double> total_wallclock;

  // Throws Error unless every limit is positive.
  void validate() const;
  // The hammer budget of one in-search call.
  HammerBudget in_search_hammer() const;
};

enum class SearchMode {
  Thor,         // <hammer> candidates invoke the hammer
  PolicyOnly,   // <hammer> candidates are discarded
  LearningHow,  // certificate-form candidates invoke the hammer instead
};

enum class SearchStatus { Proved, QueueExhausted, QueryBudgetExhausted, TotalBudgetExhausted };
const char* to_string(SearchStatus s);

struct SearchStats {
  int queries = 0;
  int nodes_expanded = 0;
  int hammer_calls = 0;
  int hammer_successes = 0;
  long cost = 0;
  int candidates = 0;
  int premise_attempts = 0;
  int premise_advances = 0;
  int plain_attempts = 0;
  int plain_advances = 0;
  int max_queue_size = 0;

  bool operator==(const SearchStats&) const = default;
};

// One record per pop, per candidate and per hammer call.
struct TraceEvent {
  enum class Kind { Pop, Candidate, Hammer };
  Kind kind = Kind::Pop;
  int node = 0;
  int child = -1;
  double priority = 0;
  int queue_size = 0;  // after the pop, or after the candidate was handled
  int query = 0;
  std::string step;
  std::string outcome;  // Candidate: advanced|duplicate|inapplicable|unparseable|discarded|proved
  bool premise_bearing = false;
  bool kernel = false;    // dispatched to the kernel rather than the hammer
  bool advanced = false;  // produced a different proof state
  long cost = 0;

  nlohmann::json to_json() const;
};

struct SearchOutcome {
  SearchStatus status = SearchStatus::QueueExhausted;
  std::optional<std::vector<ProofStep>> proof;
  SearchStats stats;
  std::vector<TraceEvent> trace;  // filled when requested
};

using HammerFn = std::function<HammerResult(const ProofState&, const HammerBudget&)>;

struct SearchContext {
  const Policy& policy;
  const TheoremLibrary& library;
  // Resolves certificate-form candidates; may be null.
  const CertificateStore* certificates = nullptr;
  // Defaults to thor::hammer over `library`.
  HammerFn hammer;
  bool record_trace = false;
  const std::atomic<bool>* cancel = nullptr;
};

SearchOutcome best_first_search(const Theorem& theorem, const SearchContext& ctx,
                                const SearchConfig& config, uint64_t seed,
                                SearchMode mode = SearchMode::Thor);

// Premise-bearing steps select library facts: apply and certificate steps.
bool is_premise_bearing(std::string_view step_text);

}  // namespace thor

#endif  // THOR_SEARCH_HPP_
