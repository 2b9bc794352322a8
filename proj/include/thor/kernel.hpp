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

// The tactic kernel. Proof states are immutable values; apply_step is the
// only way to transform them, and it always acts on the first open goal.

#ifndef THOR_KERNEL_HPP_
#define THOR_KERNEL_HPP_

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "thor/certificate.hpp"
#include "thor/logic.hpp"

namespace thor {

struct Hypothesis {
  std::string name;
  Formula formula;
};

struct Goal {
  std::vector<Hypothesis> hypotheses;
  Formula conclusion;

  const Hypothesis* find(const std::string& name) const;
};

struct ProofState {
  std::vector<Goal> goals;
  // Constants introduced by `intro` that occur in the open goals.
  std::set<std::string> local_constants;
  int step_count = 0;

  static ProofState initial(const Formula& statement);
};

bool is_proved(const ProofState& s);

struct ProofStep {
  enum class Kind {
    Intro,
    Split,
    Left,
    Right,
    ExistsWitness,
    Assumption,
    Destruct,
    Cases,
    Apply,
    ByCertificate,
    Hammer
  };
  Kind kind = Kind::Intro;
  Term witness;              // ExistsWitness
  std::string name;          // hypothesis, fact or certificate id
  std::shared_ptr<const Certificate> certificate;  // ByCertificate
  std::vector<std::string> premises;               // ByCertificate

  static ProofStep simple(Kind k);
  static ProofStep exists(Term t);
  static ProofStep named(Kind k, std::string name);
  static ProofStep by_certificate(std::shared_ptr<const Certificate> cert,
                                  std::vector<std::string> premises);
  static ProofStep hammer();

  bool is_premise_bearing() const {
    return kind == Kind::Apply || kind == Kind::ByCertificate;
  }
};

std::string to_string(const ProofStep& step);

// Parses the step grammar. `by_cert <id> [p1,p2]` resolves <id> through
// `store`; an unknown id yields a step without a certificate, which the
// kernel rejects. The premise list defaults to the certificate's premises.
ProofStep parse_step(std::string_view text,
                     const CertificateStore* store = nullptr);

class TheoremLibrary {
 public:
  struct Fact {
    std::string name;
    Formula formula;
  };

  TheoremLibrary() = default;
  explicit TheoremLibrary(Signature sig) : signature_(std::move(sig)) {}

  // Throws Error on duplicate names, open or ill-formed formulas.
  void add_fact(std::string name, Formula formula);

  const Signature& signature() const { return signature_; }
  Signature& mutable_signature() { return signature_; }
  const std::vector<Fact>& facts() const { return facts_; }
  const Fact* find(const std::string& name) const;
  // Insertion position, or -1.
  int position(const std::string& name) const;
  // True iff some fact is alpha-equivalent to `f`.
  bool contains_alpha(const Formula& f) const;
  // Predicate and function symbols of fact i, sorted.
  const std::vector<std::string>& symbols_of(size_t i) const { return symbols_[i]; }
  // Positions of the facts mentioning `symbol`, ascending.
  const std::vector<size_t>& facts_with_symbol(const std::string& symbol) const;

 private:
  Signature signature_;
  std::vector<Fact> facts_;
  std::unordered_map<std::string, size_t> index_;
  std::unordered_map<std::string, std::vector<size_t>> by_text_;
  std::vector<std::vector<std::string>> symbols_;
  std::unordered_map<std::string, std::vector<size_t>> by_symbol_;
};

struct Theorem {
  std::string name;
  Formula statement;
  std::vector<ProofStep> ground_truth_proof;
  std::string theory;
  std::string family;
};

enum class StepErrorKind { StepNotApplicable, NoOpenGoal };

struct StepResult {
  std::optional<ProofState> state;
  StepErrorKind error = StepErrorKind::StepNotApplicable;
  std::string message;

  bool ok() const { return state.has_value(); }
};

StepResult apply_step(const ProofState& state, const ProofStep& step,
                      const TheoremLibrary& library);

struct ProofCheck {
  bool ok = false;
  int failing_index = -1;
  std::string message;
};

ProofCheck check_proof(const Theorem& theorem,
                       const std::vector<ProofStep>& steps,
                       const TheoremLibrary& library);

struct CertificateCheck {
  bool ok = false;
  int failing_inference = -1;  // -1: inputs or conclusion
  std::string message;
};

// Re-clausifies hypotheses + premises + the negated conclusion and replays
// every inference of `cert`. Never trusts a clause it did not derive.
CertificateCheck check_certificate(const Goal& goal,
                                   const std::vector<NamedFormula>& premises,
                                   const Certificate& cert);

// --- Serialization of goals and states ----------------------------------------

inline constexpr const char* kTurnstile = "\xE2\x8A\xA2";

// "h0: p, h1: q ⊢ r"; goals of a state are joined by " || ".
std::string to_string(const Goal& g);
std::string to_string(const ProofState& s);
Goal parse_goal(std::string_view text);
ProofState parse_state(std::string_view text);

// --- Finite models ------------------------------------------------------------

class UnknownSymbol : public Error {
 public:
  using Error::Error;
};

struct FiniteModel {
  struct Table {
    int arity = 0;
    std::vector<int> values;  // row-major over domain^arity

    bool operator==(const Table&) const = default;
  };
  int domain_size = 1;
  std::map<std::string, Table> predicates;  // values are 0/1
  std::map<std::string, Table> functions;

  bool operator==(const FiniteModel&) const = default;
};

// Tarskian evaluation; quantifiers range over {0..domain_size-1}.
bool eval_in_model(const Formula& f, const FiniteModel& m);
int eval_term(const Term& t, const FiniteModel& m,
              const std::map<std::string, int>& env);
bool eval_in_model(const Formula& f, const FiniteModel& m,
                   std::map<std::string, int>& env);

}  // namespace thor

#endif  // THOR_KERNEL_HPP_
