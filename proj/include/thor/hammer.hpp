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

// Premise selection, given-clause resolution and certificate reconstruction.

#ifndef THOR_HAMMER_HPP_
#define THOR_HAMMER_HPP_

#include <atomic>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "thor/certificate.hpp"
#include "thor/cnf.hpp"
#include "thor/kernel.hpp"

namespace thor {

struct RelevanceParams {
  double irrelevance_weight = 2.0;  // c
  double initial_threshold = 0.6;   // p0
  double decay = 0.9;
  double floor = 0.05;
};

// Predicate, function and constant symbols of the hypotheses and conclusion.
std::set<std::string> goal_symbols(const Goal& goal);

// MePo-style iterative relevance filter. Returns at most k fact names, first
// in acceptance order (score descending within a pass), then the remaining
// facts with a nonzero score by descending score. Ties follow library order.
std::vector<std::string> select_premises(const Goal& goal,
                                         const TheoremLibrary& library, int k,
                                         const RelevanceParams& params = {});

struct HammerBudget {
  int max_selected_premises = 128;
  long max_inferences = 50000;
  std::optional<double> wallclock_seconds = 30.0;
  size_t max_clauses = 200000;
  // Re-proves with only the used premises and throws InvariantError if
  // that fails.
  bool verify_sufficiency = false;
};

enum class HammerStatus { Proved, Saturated, BudgetExhausted };

const char* to_string(HammerStatus s);

// Opaque record of every clause kept by a saturation run.
class InferenceLog;

struct SaturationResult {
  HammerStatus status = HammerStatus::Saturated;
  long inferences_used = 0;
  std::shared_ptr<const InferenceLog> log;  // set when Proved
};

// Given-clause loop over binary resolution and factoring with forward
// subsumption. An inference is counted each time a unifier is found; the
// run stops when the next inference would exceed budget.max_inferences.
// `cancel` and the wallclock cap are polled every 256 inferences.
SaturationResult saturate(const std::vector<InputClause>& clauses,
                          const HammerBudget& budget,
                          const std::atomic<bool>* cancel = nullptr);

struct Reconstruction {
  Certificate certificate;
  std::vector<std::string> used_premises;
};

// Keeps exactly the inferences the empty clause depends on. Premise names are
// ordered by `library` when given, else by first use. Throws InvariantError
// on a log without a refutation.
Reconstruction reconstruct(const InferenceLog& log,
                           const TheoremLibrary* library = nullptr);

struct HammerResult {
  HammerStatus status = HammerStatus::Saturated;
  std::vector<std::string> used_premises;
  std::shared_ptr<const Certificate> certificate;
  long inferences_used = 0;
  std::string prover = "resolution";
  std::vector<std::string> selected_premises;
};

// Runs the pipeline on the first goal of `state`. The certificate is stated
// over the kernel's clausification of (hypotheses, used premises in library
// order, negated conclusion), so ProofStep::by_certificate(cert,
// used_premises) closes the goal.
HammerResult hammer(const ProofState& state, const TheoremLibrary& library,
                    const HammerBudget& budget,
                    const std::atomic<bool>* cancel = nullptr);
HammerResult hammer_goal(const Goal& goal, const TheoremLibrary& library,
                         const HammerBudget& budget,
                         const std::atomic<bool>* cancel = nullptr);

}  // namespace thor

#endif  // THOR_HAMMER_HPP_
