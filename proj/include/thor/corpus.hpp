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

// Datapoints, the synthetic corpus generator, splitting and corpus IO.

#ifndef THOR_CORPUS_HPP_
#define THOR_CORPUS_HPP_

#include <array>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "thor/hammer.hpp"
#include "thor/kernel.hpp"

namespace thor {

struct Datapoint {
  std::string theorem;
  std::string context;  // previous step, or empty
  std::string state;
  std::string step;
  std::optional<bool> hammer_solvable;

  bool operator==(const Datapoint&) const = default;
};

// One JSON object per line; keys theorem, context, state, step,
// hammer_solvable (null until preprocessing).
std::string serialize_datapoint(const Datapoint& dp);
// Throws ParseError; `line` is reported in errors.
Datapoint parse_datapoint(std::string_view text, int line = 1);

inline constexpr const char* kHammerToken = "<hammer>";

// "<SOS> <CTXT> " + context + " <PRF_STT> " + state + " <PRF_STP>"
std::string prompt_of(const Datapoint& dp);
// step + " <EOS>"
std::string target_of(const Datapoint& dp);

class ReplayFailure : public Error {
 public:
  using Error::Error;
};

// Replays the ground-truth proof; datapoint i holds the state before step i
// and, as context, step i-1. Throws ReplayFailure if the proof does not check.
std::vector<Datapoint> datapoints_of(const Theorem& theorem,
                                     const TheoremLibrary& library);

enum class Split { Train, Valid, Test };
const char* to_string(Split s);
Split split_from_string(std::string_view s);

class InvalidProfile : public Error {
 public:
  using Error::Error;
};

class BadFractions : public Error {
 public:
  using Error::Error;
};

struct GeneratorProfile {
  int domain_size = 4;
  int constants = 6;
  int base_predicates = 8;
  int hypothetical_predicates = 20;
  int derived_predicates = 12;
  int binary_predicates = 2;
  int bridge_predicates = 10;
  int goal_predicates = 2;
  int disjunctive_axioms = 3;
  int max_proof_depth = 12;
  int max_premises = 6;
  double structural_fraction = 0.30;
  double premise_fraction = 0.35;  // the remainder is composite
  double certificate_finish_rate = 0.4;
  int min_disjuncts = 7;
  int max_disjuncts = 10;
  int composite_retries = 8;
  // Budget for certificate finishes in ground-truth proofs.
  long certificate_inferences = 5000;
  // Composite theorems must defeat hammer-only at this budget.
  long standalone_inferences = 20000;

  static GeneratorProfile minimal();
  // Throws InvalidProfile.
  void validate() const;
};

struct Corpus {
  TheoremLibrary library;
  std::vector<Theorem> theorems;
  std::vector<Datapoint> datapoints;
  std::map<std::string, Split> split;
  std::array<double, 3> fractions{1.0, 0.0, 0.0};
  uint64_t split_seed = 0;
  FiniteModel model;
  CertificateStore certificates;

  const Theorem* find_theorem(const std::string& name) const;
  std::vector<const Theorem*> theorems_in(Split s) const;
  // Hash of the library, theorems and split; preprocessing leaves it intact.
  std::string fingerprint() const;
};

// Deterministic in (seed, n_theories, theorems_per_theory, profile). Every
// theorem is assigned to Train until split_corpus runs.
Corpus generate_corpus(uint64_t seed, int n_theories, int theorems_per_theory,
                       const GeneratorProfile& profile);

// Assigns whole theorems by seeded shuffle, counts by largest remainder.
void split_corpus(Corpus& corpus, std::array<double, 3> fractions, uint64_t seed);

// Depth-first structural prover (intro/split/destruct/cases/left/right/
// exists/assumption with backtracking); the scripted structural policy.
std::optional<std::vector<ProofStep>> structural_prove(const Formula& statement,
                                                       const TheoremLibrary& library,
                                                       int max_steps = 64);

void save_corpus(const Corpus& corpus, const std::string& dir);
Corpus load_corpus(const std::string& dir);

// JSON forms shared with the CLI.
nlohmann::json model_to_json(const FiniteModel& m);
FiniteModel model_from_json(const nlohmann::json& j);

}  // namespace thor

#endif  // THOR_CORPUS_HPP_
