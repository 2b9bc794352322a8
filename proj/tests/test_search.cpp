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

#include "thor/search.hpp"

namespace thor {
namespace {

using Script = std::map<std::string, std::vector<std::string>>;

HammerBudget no_clock(long inferences = 50000) {
  HammerBudget b;
  b.wallclock_seconds.reset();
  b.max_inferences = inferences;
  return b;
}

TheoremLibrary prop_library() {
  Signature sig;
  sig.predicates = {{"p", 0}, {"q", 0}};
  TheoremLibrary lib(sig);
  lib.add_fact("f1", parse_formula("p -> q"));
  return lib;
}

Theorem theorem_of(const std::string& statement) {
  Theorem t;
  t.name = "t";
  t.statement = parse_formula(statement);
  return t;
}

const Corpus& small_corpus() {
  static const Corpus c = [] {
    GeneratorProfile p = GeneratorProfile::minimal();
    Corpus out = generate_corpus(5, 4, 20, p);
    split_corpus(out, {0.75, 0.0, 0.25}, 5);
    return out;
  }();
  return c;
}

const Corpus& default_corpus() {
  static const Corpus c = generate_corpus(11, 1, 20, GeneratorProfile{});
  return c;
}

struct CountingHammer {
  const TheoremLibrary& library;
  int calls = 0;
  HammerResult operator()(const ProofState& s, const HammerBudget& b) {
    ++calls;
    return hammer(s, library, b);
  }
};

TEST(Search, ScriptedIdentityProof) {
  auto lib = prop_library();
  ScriptedPolicy policy(Script{{"⊢ p -> p", {"intro"}}, {"h0: p ⊢ p", {"assumption"}}});
  Theorem t = theorem_of("p -> p");
  auto out = best_first_search(t, {policy, lib}, SearchConfig{}, 1);
  ASSERT_EQ(out.status, SearchStatus::Proved);
  EXPECT_EQ(out.stats.queries, 2);
  EXPECT_EQ(out.stats.hammer_calls, 0);
  ASSERT_TRUE(out.proof);
  EXPECT_TRUE(check_proof(t, *out.proof, lib).ok);
}

TEST(Search, UnparseableCandidatesExhaustTheQueue) {
  auto lib = prop_library();
  ScriptedPolicy policy(Script{{"*", {"frobnicate", "apply", "exists"}}});
  auto out = best_first_search(theorem_of("p -> p"), {policy, lib}, SearchConfig{}, 1);
  EXPECT_EQ(out.status, SearchStatus::QueueExhausted);
  EXPECT_EQ(out.stats.queries, 1);
  EXPECT_EQ(out.stats.plain_attempts, 3);
  EXPECT_EQ(out.stats.plain_advances, 0);
}

TEST(Search, ZeroQueryBudget) {
  auto lib = prop_library();
  ScriptedPolicy policy(Script{{"*", {"intro"}}});
  SearchConfig cfg;
  cfg.max_queries = 0;
  auto out = best_first_search(theorem_of("p -> p"), {policy, lib}, cfg, 1);
  EXPECT_EQ(out.status, SearchStatus::QueryBudgetExhausted);
  EXPECT_EQ(out.stats.queries, 0);
}

TEST(Search, TotalBudgetStopsTheSearch) {
  auto lib = prop_library();
  ScriptedPolicy policy(Script{{"*", {"intro", "split", "left", "right"}}});
  SearchConfig cfg;
  cfg.total_budget = 3;
  auto out = best_first_search(theorem_of("p -> (p | q) & (q -> q)"), {policy, lib}, cfg, 1);
  EXPECT_EQ(out.status, SearchStatus::TotalBudgetExhausted);
  EXPECT_LE(out.stats.cost, 3);
}

TEST(Search, HammerTokenClosesGoals) {
  auto lib = prop_library();
  ScriptedPolicy policy(Script{{"*", {"<hammer>"}}});
  CountingHammer counter{lib};
  SearchContext ctx{policy, lib, nullptr, std::ref(counter)};
  Theorem t = theorem_of("p -> q");
  auto out = best_first_search(t, ctx, SearchConfig{}, 1);
  ASSERT_EQ(out.status, SearchStatus::Proved);
  EXPECT_EQ(counter.calls, 1);
  ASSERT_EQ(out.proof->size(), 1u);
  EXPECT_EQ((*out.proof)[0].kind, ProofStep::Kind::ByCertificate);
  EXPECT_EQ((*out.proof)[0].premises, std::vector<std::string>{"f1"});
  EXPECT_TRUE(check_proof(t, *out.proof, lib).ok);
}

TEST(Search, HammerFailureDiscardsOnlyThatCandidate) {
  auto lib = prop_library();
  ScriptedPolicy policy(Script{{"⊢ p -> p", {"<hammer>", "intro"}}, {"h0: p ⊢ p", {"assumption"}}});
  int calls = 0;
  SearchContext ctx{policy, lib, nullptr, [&](const ProofState&, const HammerBudget&) {
                      ++calls;
                      HammerResult r;
                      r.status = HammerStatus::BudgetExhausted;
                      r.inferences_used = 10;
                      return r;
                    }};
  auto out = best_first_search(theorem_of("p -> p"), ctx, SearchConfig{}, 1);
  EXPECT_EQ(out.status, SearchStatus::Proved);
  EXPECT_EQ(calls, 1);
  EXPECT_EQ(out.stats.cost, 10 + 1 + 1);
}

TEST(Search, PolicyOnlyDiscardsHammerToken) {
  auto lib = prop_library();
  ScriptedPolicy policy(Script{{"*", {"<hammer>"}}});
  CountingHammer counter{lib};
  SearchContext ctx{policy, lib, nullptr, std::ref(counter), true};
  auto out = best_first_search(theorem_of("p -> q"), ctx, SearchConfig{}, 1, SearchMode::PolicyOnly);
  EXPECT_EQ(out.status, SearchStatus::QueueExhausted);
  EXPECT_EQ(counter.calls, 0);
  ASSERT_EQ(out.trace.size(), 2u);
  EXPECT_EQ(out.trace[1].outcome, "discarded");
}

TEST(Search, LearningHowSendsCertificateStepsToTheHammer) {
  auto lib = prop_library();
  ScriptedPolicy policy(Script{{"⊢ p -> q", {"intro"}}, {"h0: p ⊢ q", {"by_cert c000000000000 [f1]"}}});
  Theorem t = theorem_of("p -> q");

  CountingHammer variant_hammer{lib};
  auto variant = best_first_search(t, {policy, lib, nullptr, std::ref(variant_hammer)}, SearchConfig{}, 1,
                                   SearchMode::LearningHow);
  ASSERT_EQ(variant.status, SearchStatus::Proved);
  EXPECT_EQ(variant_hammer.calls, 1);
  EXPECT_EQ(variant.proof->at(0).kind, ProofStep::Kind::Intro);
  EXPECT_TRUE(check_proof(t, *variant.proof, lib).ok);

  CountingHammer base_hammer{lib};
  auto base = best_first_search(t, {policy, lib, nullptr, std::ref(base_hammer)}, SearchConfig{}, 1);
  EXPECT_EQ(base.status, SearchStatus::QueueExhausted);
  EXPECT_EQ(base_hammer.calls, 0);
  EXPECT_EQ(base.stats.premise_attempts, 1);
  EXPECT_EQ(base.stats.premise_advances, 0);
}

TEST(Search, QueueCapacityEvictsWorstNodes) {
  Signature sig;
  sig.predicates = {{"p", 0}, {"q", 0}, {"r", 0}};
  TheoremLibrary lib(sig);
  ScriptedPolicy policy(Script{{"*", {"intro", "split", "left", "right"}}});
  SearchConfig cfg;
  cfg.queue_cap = 1;
  SearchContext ctx{policy, lib, nullptr, {}, true};
  auto out = best_first_search(theorem_of("(p | q) & (q | r) & (r | p)"), ctx, cfg, 1);
  EXPECT_LE(out.stats.max_queue_size, 1);
  for (const auto& ev : out.trace) EXPECT_LE(ev.queue_size, 1);
}

// The root of a composite theorem is beyond the hammer, but each branch of
// the case split is within reach.
TEST(Search, CompositePrefixPlusHammerBeatsHammerOnly) {
  const Corpus& c = default_corpus();
  const Theorem* composite = nullptr;
  for (const auto& t : c.theorems)
    if (t.family == "composite") composite = &t;
  ASSERT_NE(composite, nullptr);

  std::map<std::string, std::vector<std::string>> script;
  for (const auto& d : datapoints_of(*composite, c.library)) {
    bool structural = d.step == "intro" || d.step.rfind("cases ", 0) == 0;
    script[d.state] = {structural ? d.step : kHammerToken};
  }
  ScriptedPolicy policy(script);
  SearchConfig cfg;
  auto out = best_first_search(*composite, {policy, c.library}, cfg, 1);
  ASSERT_EQ(out.status, SearchStatus::Proved);
  EXPECT_GT(out.stats.hammer_successes, 1);
  EXPECT_TRUE(check_proof(*composite, *out.proof, c.library).ok);

  ProofState root = ProofState::initial(composite->statement);
  EXPECT_NE(hammer(root, c.library, cfg.in_search_hammer()).status, HammerStatus::Proved);
  HammerBudget standalone = cfg.in_search_hammer();
  standalone.max_inferences *= 4;
  EXPECT_NE(hammer(root, c.library, standalone).status, HammerStatus::Proved);
}

TEST(Property, SearchInvariantsOnTrainedModel) {
  const Corpus& c = small_corpus();
  auto pre = preprocess_corpus(c, SearchConfig{}.in_search_hammer(), false);
  auto model = RetrievalPolicyModel::train(pre.corpus, true);
  SearchConfig cfg;
  cfg.max_queries = 40;
  cfg.queue_cap = 8;
  cfg.total_budget = 60000;
  int proved = 0;
  for (const Theorem* t : c.theorems_in(Split::Test)) {
    SearchContext ctx{model, c.library, &c.certificates, {}, true};
    auto out = best_first_search(*t, ctx, cfg, 13);
    EXPECT_LE(out.stats.queries, cfg.max_queries);
    EXPECT_LE(out.stats.max_queue_size, cfg.queue_cap);
    double last = 0;
    long last_step_cost = 0;
    for (const auto& ev : out.trace) {
      EXPECT_LE(ev.queue_size, cfg.queue_cap);
      if (ev.kind == TraceEvent::Kind::Pop) {
        EXPECT_LE(ev.priority, last + 1e-12) << t->name;
        EXPECT_LE(ev.priority, 0);
        last = ev.priority;
      }
      if (ev.kind == TraceEvent::Kind::Candidate) last_step_cost = ev.cost;
    }
    EXPECT_LE(out.stats.cost, cfg.total_budget + last_step_cost);
    if (out.status == SearchStatus::Proved) {
      ++proved;
      EXPECT_TRUE(check_proof(*t, *out.proof, c.library).ok) << t->name;
    }

    auto again = best_first_search(*t, ctx, cfg, 13);
    EXPECT_EQ(again.status, out.status);
    EXPECT_EQ(again.stats, out.stats);
    ASSERT_EQ(again.proof.has_value(), out.proof.has_value());
    if (out.proof)
      for (size_t i = 0; i < out.proof->size(); ++i)
        EXPECT_EQ(to_string((*again.proof)[i]), to_string((*out.proof)[i]));
  }
  EXPECT_GT(proved, 0);
}

TEST(Property, AlwaysHammerDegeneratesToHammerOnly) {
  const Corpus& c = small_corpus();
  ScriptedPolicy policy(Script{{"*", {kHammerToken}}});
  SearchConfig cfg;
  for (const auto& t : c.theorems) {
    auto out = best_first_search(t, {policy, c.library}, cfg, 1);
    bool alone = hammer(ProofState::initial(t.statement), c.library, cfg.in_search_hammer()).status ==
                 HammerStatus::Proved;
    EXPECT_EQ(out.status == SearchStatus::Proved, alone) << t.name;
  }
}

TEST(Preprocess, HypothesisStateBecomesHammer) {
  auto lib = prop_library();
  Datapoint d{"t", "intro", "h0: p ⊢ p", "assumption", std::nullopt};
  Datapoint out = preprocess_datapoint(d, lib, no_clock());
  EXPECT_EQ(out.step, kHammerToken);
  EXPECT_EQ(out.hammer_solvable, true);
  EXPECT_EQ(out.context, d.context);
  EXPECT_EQ(out.state, d.state);
}

TEST(Preprocess, UnreachableStateIsKept) {
  const Corpus& c = default_corpus();
  const Theorem* composite = nullptr;
  for (const auto& t : c.theorems)
    if (t.family == "composite") composite = &t;
  ASSERT_NE(composite, nullptr);
  Datapoint root = datapoints_of(*composite, c.library).front();
  Datapoint out = preprocess_datapoint(root, c.library, SearchConfig{}.in_search_hammer());
  EXPECT_EQ(out.step, root.step);
  EXPECT_EQ(out.hammer_solvable, false);
}

TEST(Preprocess, UnparseableStateIsAnError) {
  Datapoint d{"t", "", "⊢ p(", "intro", std::nullopt};
  EXPECT_THROW(preprocess_datapoint(d, prop_library(), no_clock()), StateReplayError);
}

TEST(Preprocess, ZeroBudgetWithoutCertificatesReplacesNothing) {
  GeneratorProfile p = GeneratorProfile::minimal();
  p.certificate_finish_rate = 0;
  Corpus c = generate_corpus(9, 2, 10, p);
  for (const auto& d : c.datapoints) ASSERT_FALSE(is_certificate_step(d.step));
  auto r = preprocess_corpus(c, no_clock(0), false);
  EXPECT_EQ(r.report.replaced, 0);
  EXPECT_EQ(r.report.kept, static_cast<long>(c.datapoints.size()));
  for (size_t k = 0; k < c.datapoints.size(); ++k) {
    EXPECT_EQ(r.corpus.datapoints[k].step, c.datapoints[k].step);
    EXPECT_EQ(r.corpus.datapoints[k].hammer_solvable, false);
  }
}

TEST(Preprocess, ShortcutReplacesEveryCertificateStepWithoutHammer) {
  Corpus c;
  for (int i = 0; i < 5; ++i) {
    std::string name = "t" + std::to_string(i);
    c.split[name] = Split::Train;
    c.datapoints.push_back({name, "", "⊢ p", "by_cert c00000000000" + std::to_string(i), std::nullopt});
  }
  auto r = preprocess_corpus(c, no_clock(), true);
  EXPECT_EQ(r.report.shortcut, 5);
  EXPECT_EQ(r.report.hammer_calls, 0);
  EXPECT_DOUBLE_EQ(r.report.replacement_fraction(), 1.0);
  for (const auto& d : r.corpus.datapoints) EXPECT_EQ(d.step, kHammerToken);
}

TEST(Property, PreprocessingContract) {
  const Corpus& c = small_corpus();
  HammerBudget budget = SearchConfig{}.in_search_hammer();
  auto full = preprocess_corpus(c, budget, false);
  auto shortcut = preprocess_corpus(c, budget, true);
  HammerBudget generous = no_clock(50000);
  auto full_generous = preprocess_corpus(c, generous, false);

  long train = 0;
  for (size_t i = 0; i < c.datapoints.size(); ++i) {
    const Datapoint& orig = c.datapoints[i];
    bool is_train = c.split.at(orig.theorem) == Split::Train;
    train += is_train;
    for (const auto* r : {&full, &shortcut, &full_generous}) {
      const Datapoint& d = r->corpus.datapoints[i];
      EXPECT_EQ(d.context, orig.context);
      EXPECT_EQ(d.state, orig.state);
      if (is_train)
        EXPECT_TRUE(d.step == orig.step || d.step == kHammerToken);
      else
        EXPECT_EQ(d, orig);
    }
    if (shortcut.corpus.datapoints[i].step == kHammerToken && orig.step != kHammerToken)
      EXPECT_EQ(full_generous.corpus.datapoints[i].step, kHammerToken) << orig.state;
  }
  EXPECT_EQ(full.report.replaced + full.report.kept, train);
  EXPECT_GT(full.report.replaced, 0);
  EXPECT_GT(shortcut.report.shortcut, 0);
  EXPECT_EQ(full.corpus.fingerprint(), c.fingerprint());

  auto twice = preprocess_corpus(full.corpus, budget, false);
  EXPECT_EQ(twice.corpus.datapoints, full.corpus.datapoints);
  auto twice_shortcut = preprocess_corpus(shortcut.corpus, budget, true);
  EXPECT_EQ(twice_shortcut.corpus.datapoints, shortcut.corpus.datapoints);

  auto parallel = preprocess_corpus(c, budget, false, 3);
  EXPECT_EQ(parallel.corpus.datapoints, full.corpus.datapoints);
}

}  // namespace
}  // namespace thor
