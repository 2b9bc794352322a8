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

#include <gtest/gtest.h>

#include <algorithm>

#include "test_support.hpp"
#include "thor/hammer.hpp"

namespace thor {
namespace {

HammerBudget no_clock() {
  HammerBudget b;
  b.wallclock_seconds.reset();
  return b;
}

std::vector<InputClause> inputs(const std::vector<std::vector<std::string>>& clauses) {
  std::vector<InputClause> out;
  int i = 0;
  for (const auto& c : clauses) {
    Clause cl;
    for (const auto& l : c) cl.push_back(parse_literal(l));
    out.push_back({{ClauseOrigin::Kind::Premise, "f" + std::to_string(i++), 0}, cl});
  }
  return out;
}

TEST(Saturate, ComplementaryUnits) {
  SaturationResult r = saturate(inputs({{"p"}, {"~p"}}), no_clock());
  EXPECT_EQ(r.status, HammerStatus::Proved);
  EXPECT_EQ(r.inferences_used, 1);
  Reconstruction rec = reconstruct(*r.log);
  EXPECT_EQ(rec.used_premises, (std::vector<std::string>{"f0", "f1"}));
  EXPECT_EQ(rec.certificate.inferences.size(), 1u);
}

TEST(Saturate, NoComplementaryPair) {
  EXPECT_EQ(saturate(inputs({{"p", "q"}}), no_clock()).status, HammerStatus::Saturated);
}

TEST(Saturate, ZeroBudget) {
  HammerBudget b = no_clock();
  b.max_inferences = 0;
  SaturationResult r = saturate(inputs({{"p"}, {"~p"}}), b);
  EXPECT_EQ(r.status, HammerStatus::BudgetExhausted);
  EXPECT_EQ(r.inferences_used, 0);
}

TEST(Saturate, NeedsFactoring) {
  // {p(X) | p(Y)}, {~p(X) | ~p(Y)} is refutable only with factoring.
  auto r = saturate(inputs({{"p(X0)", "p(X1)"}, {"~p(X0)", "~p(X1)"}}), no_clock());
  EXPECT_EQ(r.status, HammerStatus::Proved);
}

TEST(Saturate, OccursCheck) {
  // p(X, f(X)) and ~p(Y, Y) do not unify.
  auto r = saturate(inputs({{"p(X0,f(X0))"}, {"~p(X0,X0)"}}), no_clock());
  EXPECT_EQ(r.status, HammerStatus::Saturated);
}

TEST(Reconstruct, RejectsLogWithoutRefutation) {
  EXPECT_EQ(saturate(inputs({{"p"}}), no_clock()).log, nullptr);
}

TEST(Reconstruct, IgnoresUnreachableLeaves) {
  auto in = inputs({{"q"}, {"p"}, {"~p"}});
  auto r = saturate(in, no_clock());
  ASSERT_EQ(r.status, HammerStatus::Proved);
  EXPECT_EQ(reconstruct(*r.log).used_premises, (std::vector<std::string>{"f1", "f2"}));
}

// Random 3-CNF over at most 8 variables against a truth-table oracle. For
// refutations the certificate must also pass the kernel.
TEST(Property, ThreeCnfAgreesWithTruthTable) {
  Rng rng(2024);
  int unsat = 0;
  for (int trial = 0; trial < 200; ++trial) {
    int nvars = rng.range(3, 8);
    int nclauses = rng.range(nvars, 5 * nvars);
    std::vector<std::string> names;
    for (int v = 0; v < nvars; ++v) names.push_back("v" + std::to_string(v));
    std::vector<std::vector<std::pair<int, bool>>> cnf;
    for (int c = 0; c < nclauses; ++c) {
      std::vector<std::pair<int, bool>> cl;
      for (int k = 0; k < 3; ++k) cl.push_back({rng.range(0, nvars - 1), rng.chance(0.5)});
      cnf.push_back(cl);
    }
    bool sat = testing_support::exists_assignment(names, [&](const auto& v) {
      for (const auto& cl : cnf) {
        bool any = false;
        for (auto [x, pos] : cl) any = any || v.at(names[static_cast<size_t>(x)]) == pos;
        if (!any) return false;
      }
      return true;
    });

    Goal goal;
    for (size_t c = 0; c < cnf.size(); ++c) {
      std::vector<Formula> lits;
      for (auto [x, pos] : cnf[c]) {
        Formula a = make_atom(names[static_cast<size_t>(x)]);
        lits.push_back(pos ? a : make_not(a));
      }
      goal.hypotheses.push_back({"h" + std::to_string(c), make_or_all(lits)});
    }
    goal.conclusion = make_atom("goal_atom");
    HammerResult r = hammer_goal(goal, TheoremLibrary(), no_clock());
    ASSERT_NE(r.status, HammerStatus::BudgetExhausted) << "trial " << trial;
    ASSERT_EQ(r.status == HammerStatus::Proved, !sat) << "trial " << trial;
    if (r.status == HammerStatus::Proved) {
      ++unsat;
      ASSERT_TRUE(check_certificate(goal, {}, *r.certificate).ok) << "trial " << trial;
    }
  }
  EXPECT_GT(unsat, 20);
}

TheoremLibrary horn_library() {
  Signature sig;
  sig.predicates = {{"p", 1}, {"q", 1}, {"r", 1}, {"s", 2}, {"t", 1}};
  sig.functions = {{"a", 0}, {"b", 0}, {"g", 1}};
  TheoremLibrary lib(sig);
  lib.add_fact("f1", parse_formula("forall x. p(x) -> q(x)"));
  lib.add_fact("f2", parse_formula("p(a)"));
  lib.add_fact("f3", parse_formula("forall x. forall y. s(x,y) -> q(y) -> r(x)"));
  lib.add_fact("f4", parse_formula("s(b,a)"));
  lib.add_fact("f5", parse_formula("forall x. t(x) -> exists y. s(y,x)"));
  lib.add_fact("f6", parse_formula("t(g(a))"));
  return lib;
}

TEST(Hammer, HypothesisAlone) {
  HammerResult r = hammer(parse_state("h0: p(a) ⊢ p(a)"), horn_library(), no_clock());
  EXPECT_EQ(r.status, HammerStatus::Proved);
  EXPECT_TRUE(r.used_premises.empty());
}

TEST(Hammer, TwoPremiseRefutation) {
  auto lib = horn_library();
  HammerResult r = hammer(parse_state("⊢ q(a)"), lib, no_clock());
  ASSERT_EQ(r.status, HammerStatus::Proved);
  EXPECT_EQ(r.used_premises, (std::vector<std::string>{"f1", "f2"}));
  ProofStep step = ProofStep::by_certificate(r.certificate, r.used_premises);
  StepResult done = apply_step(parse_state("⊢ q(a)"), step, lib);
  ASSERT_TRUE(done.ok()) << done.message;
  EXPECT_TRUE(is_proved(*done.state));
}

TEST(Hammer, SkolemSymbolsAreRestatedForTheKernel) {
  auto lib = horn_library();
  Goal g = parse_goal("⊢ exists y. s(y,g(a))");
  HammerResult r = hammer_goal(g, lib, no_clock());
  ASSERT_EQ(r.status, HammerStatus::Proved);
  EXPECT_EQ(r.used_premises, (std::vector<std::string>{"f5", "f6"}));
  std::vector<NamedFormula> prem;
  for (const auto& n : r.used_premises)
    prem.push_back({ClauseOrigin::Kind::Premise, n, lib.find(n)->formula});
  EXPECT_TRUE(check_certificate(g, prem, *r.certificate).ok);
}

TEST(Hammer, ZeroBudgetExhausts) {
  HammerBudget b = no_clock();
  b.max_inferences = 0;
  EXPECT_EQ(hammer(parse_state("⊢ q(a)"), horn_library(), b).status,
            HammerStatus::BudgetExhausted);
}

TEST(Hammer, DeterministicAndMonotoneInBudget) {
  auto lib = horn_library();
  auto state = parse_state("⊢ r(b)");
  HammerResult a = hammer(state, lib, no_clock());
  ASSERT_EQ(a.status, HammerStatus::Proved);
  HammerBudget tight = no_clock();
  tight.max_inferences = a.inferences_used;
  HammerResult b = hammer(state, lib, tight);
  ASSERT_EQ(b.status, HammerStatus::Proved);
  EXPECT_EQ(to_json(*a.certificate).dump(), to_json(*b.certificate).dump());
  HammerBudget big = no_clock();
  big.max_inferences = 10 * a.inferences_used;
  EXPECT_EQ(to_json(*hammer(state, lib, big).certificate).dump(), to_json(*a.certificate).dump());
  tight.max_inferences = a.inferences_used - 1;
  EXPECT_EQ(hammer(state, lib, tight).status, HammerStatus::BudgetExhausted);
}

TEST(Hammer, UsedPremisesSuffice) {
  HammerBudget b = no_clock();
  b.verify_sufficiency = true;
  EXPECT_NO_THROW(hammer(parse_state("⊢ r(b)"), horn_library(), b));
}

TEST(Hammer, CancellationStopsTheRun) {
  Signature sig;
  sig.predicates = {{"p", 1}, {"q", 0}};
  sig.functions = {{"a", 0}, {"f", 1}};
  TheoremLibrary lib(sig);
  lib.add_fact("grow", parse_formula("forall x. p(x) -> p(f(x))"));
  lib.add_fact("base", parse_formula("p(a)"));
  std::atomic<bool> cancel{true};
  HammerResult r = hammer(parse_state("h0: p(a) ⊢ q"), lib, no_clock(), &cancel);
  EXPECT_EQ(r.status, HammerStatus::BudgetExhausted);
  EXPECT_EQ(r.inferences_used, 256);
}

// --- Premise selection --------------------------------------------------------

TEST(Select, RanksOverlappingFactFirst) {
  Signature sig;
  sig.predicates = {{"p", 0}, {"q", 0}, {"r", 0}, {"s", 0}};
  TheoremLibrary lib(sig);
  lib.add_fact("f2", parse_formula("r -> s"));
  lib.add_fact("f1", parse_formula("p -> q"));
  Goal g = parse_goal("h0: p ⊢ q");
  EXPECT_EQ(select_premises(g, lib, 10), std::vector<std::string>{"f1"});
  EXPECT_TRUE(select_premises(g, lib, 0).empty());
}

// Independent recomputation: all scores recomputed from scratch each pass.
std::vector<std::string> mepo_oracle(const Goal& g, const TheoremLibrary& lib, int k) {
  std::set<std::string> rel;
  for (const auto& h : g.hypotheses) collect_symbols(h.formula, rel);
  collect_symbols(g.conclusion, rel);
  std::vector<std::set<std::string>> syms;
  for (const auto& f : lib.facts()) {
    std::set<std::string> s;
    collect_symbols(f.formula, s);
    syms.push_back(s);
  }
  auto score = [&](size_t i) {
    int in = 0, out = 0;
    for (const auto& s : syms[i]) (rel.count(s) ? in : out)++;
    return in == 0 ? 0.0 : in / (in + 2.0 * out);
  };
  std::vector<std::string> result;
  std::vector<bool> used(syms.size());
  for (double p = 0.6; static_cast<int>(result.size()) < k && p >= 0.05; p *= 0.9) {
    std::vector<size_t> pass;
    for (size_t i = 0; i < syms.size(); ++i)
      if (!used[i] && score(i) >= p) pass.push_back(i);
    std::stable_sort(pass.begin(), pass.end(),
                     [&](size_t a, size_t b) { return score(a) > score(b); });
    if (static_cast<int>(pass.size()) > k - static_cast<int>(result.size()))
      pass.resize(static_cast<size_t>(k) - result.size());
    for (size_t i : pass) {
      used[i] = true;
      result.push_back(lib.facts()[i].name);
    }
    for (size_t i : pass) rel.insert(syms[i].begin(), syms[i].end());
  }
  std::vector<size_t> rest;
  for (size_t i = 0; i < syms.size(); ++i)
    if (!used[i] && score(i) > 0) rest.push_back(i);
  std::stable_sort(rest.begin(), rest.end(),
                   [&](size_t a, size_t b) { return score(a) > score(b); });
  for (size_t i : rest)
    if (static_cast<int>(result.size()) < k) result.push_back(lib.facts()[i].name);
  return result;
}

TEST(Property, SelectionMatchesBruteForce) {
  Rng rng(99);
  for (int trial = 0; trial < 40; ++trial) {
    Signature sig;
    for (int i = 0; i < 12; ++i) sig.predicates["p" + std::to_string(i)] = 1;
    for (int i = 0; i < 4; ++i) sig.functions["c" + std::to_string(i)] = 0;
    TheoremLibrary lib(sig);
    auto atom = [&](const std::string& var) {
      return make_atom("p" + std::to_string(rng.below(12)),
                       {rng.chance(0.5) ? make_var(var) : make_app("c" + std::to_string(rng.below(4)))});
    };
    for (int f = 0; f < 50; ++f) {
      std::vector<Formula> body;
      int n = rng.range(1, 3);
      for (int j = 0; j < n; ++j) body.push_back(atom("x"));
      Formula fm = make_forall("x", make_implies(make_and_all(body), atom("x")));
      lib.add_fact("ax" + std::to_string(f), fm);
    }
    Goal g;
    g.conclusion = make_atom("p" + std::to_string(rng.below(12)), {make_app("c0")});
    int k = rng.range(1, 60);
    ASSERT_EQ(select_premises(g, lib, k), mepo_oracle(g, lib, k)) << "trial " << trial;
  }
}

}  // namespace
}  // namespace thor
