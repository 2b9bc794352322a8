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

// Clause normal form. Shared by the hammer (which saturates the clauses) and
// the kernel (which re-derives them when checking a certificate).

#ifndef THOR_CNF_HPP_
#define THOR_CNF_HPP_

#include <map>
#include <string>
#include <vector>

#include "thor/logic.hpp"

namespace thor {

struct Literal {
  bool positive = true;
  std::string predicate;
  std::vector<Term> args;
};

// Literals of a clause; variables are implicitly universally quantified and
// named X0, X1, ... after normalization.
using Clause = std::vector<Literal>;

std::string to_string(const Literal& l);
// "p(a) | ~q(X0)", or "$false" for the empty clause.
std::string to_string(const Clause& c);
Literal parse_literal(std::string_view text);

Literal apply_subst(const Literal& l, const Substitution& s);
bool literal_equal(const Literal& a, const Literal& b);

// Sorts literals, renames variables to X0.. in order of first occurrence and
// removes duplicates. Deterministic, but not a canonical form for every
// variant of a clause.
Clause normalize_clause(Clause c);
bool is_tautology(const Clause& c);

// True iff some substitution for the variables of `general` maps every one of
// its literals into `specific`. Variables of `specific` are treated as rigid.
bool subsumes(const Clause& general, const Clause& specific);

struct ClauseOrigin {
  enum class Kind { Premise, Hypothesis, NegatedGoal, Derived };
  Kind kind = Kind::Premise;
  std::string name;  // fact or hypothesis name; "goal" for the negated goal
  int index = 0;     // position among the clauses of that origin

  bool operator==(const ClauseOrigin&) const = default;
};

const char* to_string(ClauseOrigin::Kind k);
ClauseOrigin::Kind origin_kind_from_string(std::string_view s);

struct NamedFormula {
  ClauseOrigin::Kind kind = ClauseOrigin::Kind::Premise;
  std::string name;
  Formula formula;
};

struct InputClause {
  ClauseOrigin origin;
  Clause clause;
};

struct ClausifyResult {
  std::vector<InputClause> clauses;
  // Skolem symbols introduced per formula, in traversal order, keyed by
  // "<kind>:<name>".
  std::map<std::string, std::vector<std::string>> skolems;
};

// NNF, standardize apart, Skolemize (symbols _sk0, _sk1, ... numbered across
// the whole call in traversal order) and distribute to CNF. Tautologies are
// dropped and duplicates within one formula merged. The negated goal is
// clausified last under origin NegatedGoal. Throws Error when distribution
// exceeds `max_clauses`.
ClausifyResult clausify(const std::vector<NamedFormula>& formulas,
                        const Formula& negated_goal,
                        size_t max_clauses = 200000);

Formula to_nnf(const Formula& f);

}  // namespace thor

#endif  // THOR_CNF_HPP_
