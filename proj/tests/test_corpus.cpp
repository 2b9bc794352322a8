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

#include <filesystem>

#include "thor/corpus.hpp"

namespace thor {
namespace {

GeneratorProfile small_profile() {
  GeneratorProfile p = GeneratorProfile::minimal();
  p.standalone_inferences = 0;
  return p;
}

const Corpus& small_corpus() {
  static const Corpus c = generate_corpus(7, 4, 25, small_profile());
  return c;
}

std::string scratch_dir(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("thor-test-" + name);
  std::filesystem::remove_all(p);
  return p.string();
}

int count_disjuncts(const Formula& f) {
  return f->kind == FormulaKind::Or ? count_disjuncts(f->lhs) + count_disjuncts(f->rhs) : 1;
}

TEST(Generator, IsDeterministic) {
  Corpus again = generate_corpus(7, 4, 25, small_profile());
  EXPECT_EQ(again.fingerprint(), small_corpus().fingerprint());
  EXPECT_EQ(again.datapoints, small_corpus().datapoints);
  EXPECT_EQ(again.model, small_corpus().model);
  EXPECT_NE(generate_corpus(8, 4, 25, small_profile()).fingerprint(), small_corpus().fingerprint());
}

TEST(Generator, ProducesEveryFamilyWithUniqueStatements) {
  const Corpus& c = small_corpus();
  ASSERT_EQ(c.theorems.size(), 100u);
  std::map<std::string, int> families;
  std::set<std::string> statements;
  for (const auto& t : c.theorems) {
    ++families[t.family];
    statements.insert(t.theory + "|" + to_string(t.statement));
  }
  EXPECT_GT(families["structural"], 0);
  EXPECT_GT(families["premise"], 0);
  EXPECT_GT(families["composite"], 0);
  EXPECT_EQ(statements.size(), c.theorems.size());
}

// Soundness oracle: every axiom holds in the model, hence so must every
// theorem the kernel accepted.
TEST(Generator, AxiomsAndTheoremsHoldInTheModel) {
  const Corpus& c = small_corpus();
  for (const auto& f : c.library.facts()) ASSERT_TRUE(eval_in_model(f.formula, c.model)) << f.name;
  for (const auto& t : c.theorems) {
    ASSERT_TRUE(eval_in_model(t.statement, c.model)) << t.name;
    ProofCheck pc = check_proof(t, t.ground_truth_proof, c.library);
    ASSERT_TRUE(pc.ok) << t.name << ": " << pc.message;
  }
}

TEST(Generator, CompositesHaveBoundedDisjuncts) {
  GeneratorProfile p = small_profile();
  for (const auto& t : small_corpus().theorems) {
    if (t.family != "composite") continue;
    ASSERT_EQ(t.statement->kind, FormulaKind::Implies);
    int n = count_disjuncts(t.statement->lhs);
    EXPECT_GE(n, p.min_disjuncts) << t.name;
    EXPECT_LE(n, p.max_disjuncts) << t.name;
  }
}

// Text-level replay: parsing each recorded state and step and applying the
// step reproduces the next recorded state.
TEST(Datapoints, ReplayFromText) {
  const Corpus& c = small_corpus();
  for (size_t i = 0; i < c.datapoints.size(); ++i) {
    const Datapoint& dp = c.datapoints[i];
    StepResult r = apply_step(parse_state(dp.state), parse_step(dp.step, &c.certificates), c.library);
    ASSERT_TRUE(r.ok()) << dp.theorem << " step " << dp.step << ": " << r.message;
    bool last = i + 1 == c.datapoints.size() || c.datapoints[i + 1].theorem != dp.theorem;
    if (last)
      EXPECT_TRUE(is_proved(*r.state)) << dp.theorem;
    else
      EXPECT_EQ(to_string(*r.state), c.datapoints[i + 1].state);
  }
}

TEST(Datapoints, ContextIsThePreviousStep) {
  const Corpus& c = small_corpus();
  for (const auto& t : c.theorems) {
    auto dps = datapoints_of(t, c.library);
    ASSERT_EQ(dps.size(), t.ground_truth_proof.size());
    EXPECT_EQ(dps[0].context, "");
    EXPECT_EQ(dps[0].state, to_string(ProofState::initial(t.statement)));
    for (size_t i = 1; i < dps.size(); ++i) EXPECT_EQ(dps[i].context, to_string(t.ground_truth_proof[i - 1]));
    for (const auto& dp : dps) EXPECT_FALSE(dp.hammer_solvable.has_value());
  }
}

TEST(Datapoints, ReplayFailureOnBrokenProof) {
  Theorem t = small_corpus().theorems.front();
  t.ground_truth_proof.pop_back();
  EXPECT_THROW(datapoints_of(t, small_corpus().library), ReplayFailure);
  t.ground_truth_proof.insert(t.ground_truth_proof.begin(), parse_step("apply no_such_fact"));
  EXPECT_THROW(datapoints_of(t, small_corpus().library), ReplayFailure);
}

TEST(Datapoints, PromptAndTarget) {
  Datapoint dp{"t", "intro", "h0: p ⊢ p", "assumption", std::nullopt};
  EXPECT_EQ(prompt_of(dp), "<SOS> <CTXT> intro <PRF_STT> h0: p ⊢ p <PRF_STP>");
  EXPECT_EQ(target_of(dp), "assumption <EOS>");
}

std::string random_text(Rng& rng) {
  static const std::vector<std::string> pieces{"a", "Z", " ", "\"", "\\", "\n", "\t", "⊢", "∀", "|",
                                               "{", "}", ":", ",", "<hammer>", "é", "\x01"};
  std::string s;
  int n = static_cast<int>(rng.below(12));
  for (int i = 0; i < n; ++i) s += rng.pick(pieces);
  return s;
}

TEST(Property, DatapointSerializationRoundTrips) {
  Rng rng(5);
  for (int i = 0; i < 10000; ++i) {
    Datapoint dp{random_text(rng), random_text(rng), random_text(rng), random_text(rng), std::nullopt};
    int h = static_cast<int>(rng.below(3));
    if (h < 2) dp.hammer_solvable = h == 1;
    std::string line = serialize_datapoint(dp);
    ASSERT_EQ(line.find('\n'), std::string::npos);
    ASSERT_EQ(parse_datapoint(line), dp) << line;
  }
}

TEST(Datapoints, MalformedLinesReportTheLine) {
  try {
    parse_datapoint("{\"theorem\": 1}", 17);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 17);
  }
  EXPECT_THROW(parse_datapoint("{not json", 2), ParseError);
  EXPECT_THROW(parse_datapoint("[]", 2), ParseError);
  EXPECT_THROW(parse_datapoint(R"({"theorem":"t","context":"","state":"s","step":"x","hammer_solvable":3})"),
               ParseError);
}

TEST(Split, LargestRemainderCounts) {
  Corpus c = small_corpus();
  split_corpus(c, {0.95, 0.01, 0.04}, 3);
  EXPECT_EQ(c.theorems_in(Split::Train).size(), 95u);
  EXPECT_EQ(c.theorems_in(Split::Valid).size(), 1u);
  EXPECT_EQ(c.theorems_in(Split::Test).size(), 4u);

  split_corpus(c, {1.0 / 3, 1.0 / 3, 1.0 / 3}, 3);
  EXPECT_EQ(c.theorems_in(Split::Train).size(), 34u);
  EXPECT_EQ(c.theorems_in(Split::Valid).size(), 33u);
  EXPECT_EQ(c.theorems_in(Split::Test).size(), 33u);
}

TEST(Split, DeterministicAndSeedSensitive) {
  Corpus a = small_corpus(), b = small_corpus(), d = small_corpus();
  split_corpus(a, {0.5, 0.2, 0.3}, 11);
  split_corpus(b, {0.5, 0.2, 0.3}, 11);
  split_corpus(d, {0.5, 0.2, 0.3}, 12);
  EXPECT_EQ(a.split, b.split);
  EXPECT_EQ(a.fingerprint(), b.fingerprint());
  EXPECT_NE(a.split, d.split);
}

TEST(Split, RejectsBadFractions) {
  Corpus c = small_corpus();
  EXPECT_THROW(split_corpus(c, {0.5, 0.5, 0.5}, 1), BadFractions);
  EXPECT_THROW(split_corpus(c, {1.2, -0.1, -0.1}, 1), BadFractions);
}

TEST(Io, SaveLoadRoundTrip) {
  Corpus c = small_corpus();
  split_corpus(c, {0.75, 0.05, 0.20}, 9);
  std::string dir = scratch_dir("io");
  save_corpus(c, dir);
  Corpus back = load_corpus(dir);
  EXPECT_EQ(back.fingerprint(), c.fingerprint());
  EXPECT_EQ(back.datapoints, c.datapoints);
  EXPECT_EQ(back.model, c.model);
  EXPECT_EQ(back.split, c.split);
  EXPECT_EQ(back.certificates.size(), c.certificates.size());
  for (const auto& t : back.theorems) {
    ProofCheck pc = check_proof(t, t.ground_truth_proof, back.library);
    ASSERT_TRUE(pc.ok) << t.name << ": " << pc.message;
  }
  std::filesystem::remove_all(dir);
}

TEST(Io, MissingDirectoryIsAnError) {
  EXPECT_THROW(load_corpus(scratch_dir("absent")), Error);
}

TEST(Io, TamperedCertificateIsRejected) {
  std::string dir = scratch_dir("tamper");
  save_corpus(small_corpus(), dir);
  auto certs = std::filesystem::path(dir) / "certs";
  ASSERT_FALSE(std::filesystem::is_empty(certs));
  auto first = std::filesystem::directory_iterator(certs)->path();
  std::filesystem::rename(first, certs / "cert-c000000000000.json");
  EXPECT_THROW(load_corpus(dir), Error);
  std::filesystem::remove_all(dir);
}

TEST(Model, JsonRoundTripAndValidation) {
  const FiniteModel& m = small_corpus().model;
  EXPECT_EQ(model_from_json(model_to_json(m)), m);
  auto j = model_to_json(m);
  j["predicates"].begin().value()["values"].push_back(1);
  EXPECT_THROW(model_from_json(j), Error);
}

TEST(StructuralProve, FindsStructuralProofs) {
  TheoremLibrary lib(Signature{{{"s", 1}, {"t", 1}}, {{"a", 0}}});
  for (const char* s : {"p & q -> q & p", "p | q -> q | p", "(p & (q | r)) -> (p & q) | (p & r)",
                        "forall x. s(x) -> s(x) | t(x)", "s(a) -> exists x. s(x)"}) {
    Formula f = parse_formula(s);
    auto proof = structural_prove(f, lib);
    ASSERT_TRUE(proof.has_value()) << s;
    Theorem t{"t", f, *proof, "", ""};
    EXPECT_TRUE(check_proof(t, *proof, lib).ok) << s;
  }
  EXPECT_FALSE(structural_prove(parse_formula("p -> q"), lib).has_value());
  EXPECT_FALSE(structural_prove(parse_formula("p | q"), lib).has_value());
}

TEST(Profile, ValidationRejectsNonsense) {
  GeneratorProfile p;
  EXPECT_NO_THROW(p.validate());
  p.min_disjuncts = 1;
  EXPECT_THROW(p.validate(), InvalidProfile);
  p = GeneratorProfile{};
  p.structural_fraction = 0.8;
  EXPECT_THROW(p.validate(), InvalidProfile);
  p = GeneratorProfile{};
  p.hypothetical_predicates = 4;
  EXPECT_THROW(p.validate(), InvalidProfile);
  EXPECT_THROW(generate_corpus(1, 0, 5, GeneratorProfile{}), InvalidProfile);
}

// Composite theorems defeat a standalone hammer run at the profile budget.
TEST(Generator, CompositesDefeatTheStandaloneHammer) {
  GeneratorProfile p;
  Corpus c = generate_corpus(3, 1, 20, p);
  int composites = 0;
  for (const auto& t : c.theorems) {
    if (t.family != "composite") continue;
    ++composites;
    HammerBudget b;
    b.max_inferences = p.standalone_inferences;
    b.wallclock_seconds.reset();
    EXPECT_NE(hammer(ProofState::initial(t.statement), c.library, b).status, HammerStatus::Proved) << t.name;
  }
  EXPECT_GT(composites, 0);
}

}  // namespace
}  // namespace thor
