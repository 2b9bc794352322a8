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

// End-to-end acceptance run on the shipped seed corpus. Prints one PASS/FAIL
// line per criterion and exits nonzero if any criterion fails.

#include <chrono>
#include <cstdio>
#include <iostream>
#include <regex>
#include <set>
#include <sstream>
#include <thread>

#include "test_support.hpp"
#include "thor/harness.hpp"

namespace thor {
namespace {

constexpr uint64_t kSeed = 20240601;

// Frozen from the first green run of this binary on the shipped corpus.
struct Frozen {
  int test_theorems;
  int thor, policy_only, hammer_only, thor_only;
};
constexpr Frozen kFrozen{240, 218, 61, 153, 65};

class Clock {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

struct Verdict {
  int id;
  bool pass;
  std::string detail;
};

std::vector<Verdict> verdicts;

void report(int id, bool pass, const std::string& detail) {
  verdicts.push_back({id, pass, detail});
  std::printf("%s criterion %d: %s\n", pass ? "PASS" : "FAIL", id, detail.c_str());
  std::fflush(stdout);
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

HammerBudget no_clock(long inferences) {
  HammerBudget b;
  b.wallclock_seconds.reset();
  b.max_inferences = inferences;
  return b;
}

// --- Oracles ------------------------------------------------------------------

// Davis-Putnam-Logemann-Loveland over literals +-(v+1).
bool dpll(std::vector<std::vector<int>> clauses, std::vector<int> assignment) {
  while (true) {
    std::vector<std::vector<int>> reduced;
    int unit = 0;
    for (const auto& c : clauses) {
      std::vector<int> rest;
      bool satisfied = false;
      for (int l : c) {
        int v = std::abs(l) - 1;
        if (assignment[static_cast<size_t>(v)] == 0) {
          rest.push_back(l);
        } else if ((assignment[static_cast<size_t>(v)] > 0) == (l > 0)) {
          satisfied = true;
          break;
        }
      }
      if (satisfied) continue;
      if (rest.empty()) return false;
      if (rest.size() == 1 && unit == 0) unit = rest[0];
      reduced.push_back(std::move(rest));
    }
    if (reduced.empty()) return true;
    clauses = std::move(reduced);
    if (unit == 0) break;
    assignment[static_cast<size_t>(std::abs(unit) - 1)] = unit > 0 ? 1 : -1;
  }
  int v = std::abs(clauses[0][0]) - 1;
  for (int value : {1, -1}) {
    std::vector<int> next = assignment;
    next[static_cast<size_t>(v)] = value;
    if (dpll(clauses, next)) return true;
  }
  return false;
}

bool clauses_satisfiable(const std::vector<InputClause>& clauses, const std::vector<std::string>& atoms) {
  return testing_support::exists_assignment(atoms, [&](const auto& v) {
    for (const auto& c : clauses) {
      bool any = false;
      for (const auto& l : c.clause) any = any || (v.at(l.predicate) == l.positive);
      if (!any) return false;
    }
    return true;
  });
}

// Library holding only `names`, in library order.
TheoremLibrary restricted(const TheoremLibrary& lib, const std::vector<std::string>& names) {
  std::set<std::string> keep(names.begin(), names.end());
  TheoremLibrary out(lib.signature());
  for (const auto& f : lib.facts())
    if (keep.count(f.name)) out.add_fact(f.name, f.formula);
  return out;
}

struct ReconstructionTally {
  long proved = 0;
  long failures = 0;
  std::string first_failure;

  void check(const ProofState& state, const HammerResult& r, const TheoremLibrary& lib, const HammerBudget& b) {
    if (r.status != HammerStatus::Proved) return;
    ++proved;
    const Goal& goal = state.goals.front();
    std::vector<NamedFormula> premises;
    for (const auto& name : r.used_premises)
      premises.push_back({ClauseOrigin::Kind::Premise, name, lib.find(name)->formula});
    bool accepted = r.certificate && check_certificate(goal, premises, *r.certificate).ok &&
                    apply_step(state, ProofStep::by_certificate(r.certificate, r.used_premises), lib).ok();
    bool reproves = hammer(state, restricted(lib, r.used_premises), b).status == HammerStatus::Proved;
    if (!accepted || !reproves) {
      if (failures++ == 0) first_failure = to_string(state);
    }
  }
};

// Renames one constant to another throughout the statement.
std::optional<Formula> perturb(const Formula& f, const Signature& sig, Rng& rng) {
  std::string text = to_string(f);
  std::vector<std::string> present, all;
  for (const auto& [name, arity] : sig.functions) {
    if (arity != 0) continue;
    all.push_back(name);
    if (std::regex_search(text, std::regex("\\b" + name + "\\b"))) present.push_back(name);
  }
  if (present.empty() || all.size() < 2) return std::nullopt;
  const std::string& from = rng.pick(present);
  std::string to = rng.pick(all);
  if (to == from) return std::nullopt;
  return parse_formula(std::regex_replace(text, std::regex("\\b" + from + "\\b"), to));
}

// --- Criteria -----------------------------------------------------------------

void criterion_2() {
  Clock clock;
  std::vector<std::string> atoms{"a0", "a1", "a2", "a3"};
  std::vector<Formula> level0;
  for (const auto& a : atoms) level0.push_back(make_atom(a));
  auto grow = [](const std::vector<Formula>& below, const std::vector<Formula>& leaves) {
    std::vector<Formula> out = leaves;
    for (const auto& x : below) out.push_back(make_not(x));
    for (const auto& x : below)
      for (const auto& y : below) {
        out.push_back(make_and(x, y));
        out.push_back(make_or(x, y));
        out.push_back(make_implies(x, y));
      }
    return out;
  };
  std::vector<Formula> upto1 = grow(level0, level0);
  std::vector<Formula> all = grow(upto1, level0);
  size_t exhaustive = all.size();
  Rng rng(kSeed);
  for (int i = 0; i < 5000; ++i) {
    const Formula& x = rng.pick(all);
    const Formula& y = all[rng.below(exhaustive)];
    switch (rng.below(4)) {
      case 0: all.push_back(make_not(x)); break;
      case 1: all.push_back(make_and(x, y)); break;
      case 2: all.push_back(make_or(x, y)); break;
      default: all.push_back(make_implies(x, y)); break;
    }
  }
  long disagreements = 0;
  for (const auto& f : all) {
    bool truth = testing_support::exists_assignment(
        atoms, [&](const auto& v) { return testing_support::eval_prop(f, v); });
    bool clauses;
    try {
      clauses = clauses_satisfiable(clausify({}, f).clauses, atoms);
    } catch (const Error&) {
      ++disagreements;
      continue;
    }
    disagreements += truth != clauses;
  }
  double t = clock.seconds();
  report(2, disagreements == 0 && all.size() >= 5000 && t <= 60,
         std::to_string(all.size()) + " formulas (" + std::to_string(exhaustive) +
             " exhaustive to depth 2, 5000 sampled at depth 3), " + std::to_string(disagreements) +
             " disagreements, " + fmt("%.1fs", t));
}

void criterion_3() {
  Clock clock;
  Rng rng(kSeed + 3);
  int disagreements = 0, unsat = 0;
  for (int trial = 0; trial < 200; ++trial) {
    int nvars = rng.range(3, 8);
    int nclauses = rng.range(nvars, 6 * nvars);
    std::vector<std::vector<int>> cnf;
    Goal goal;
    for (int c = 0; c < nclauses; ++c) {
      std::vector<int> cl;
      std::vector<Formula> lits;
      for (int k = 0; k < 3; ++k) {
        int v = rng.range(0, nvars - 1);
        bool pos = rng.chance(0.5);
        cl.push_back(pos ? v + 1 : -(v + 1));
        Formula a = make_atom("v" + std::to_string(v));
        lits.push_back(pos ? a : make_not(a));
      }
      cnf.push_back(cl);
      goal.hypotheses.push_back({"h" + std::to_string(c), make_or_all(lits)});
    }
    goal.conclusion = make_atom("goal_atom");
    bool sat = dpll(cnf, std::vector<int>(static_cast<size_t>(nvars), 0));
    HammerResult r = hammer_goal(goal, TheoremLibrary(), no_clock(2000000));
    unsat += !sat;
    disagreements += (r.status == HammerStatus::Proved) != !sat;
  }
  double t = clock.seconds();
  report(3, disagreements == 0 && t <= 60,
         "200 instances (" + std::to_string(unsat) + " unsat), " + std::to_string(disagreements) +
             " disagreements with DPLL, " + fmt("%.1fs", t));
}

struct Run {
  RunConfig config;
  Corpus raw;
  PreprocessResult full;
  RetrievalPolicyModel thor_model;
  RetrievalPolicyModel raw_model;
};

void criterion_5(const Run& run, int jobs) {
  Clock clock;
  const Corpus& c = run.raw;
  HammerBudget budget = run.config.search.in_search_hammer();
  HammerBudget generous = no_clock(10 * budget.max_inferences);
  const auto shortcut = preprocess_corpus(c, budget, true, jobs);
  long alphabet = 0, untouched = 0, not_subset = 0, escalated = 0;
  for (size_t i = 0; i < c.datapoints.size(); ++i) {
    const Datapoint& orig = c.datapoints[i];
    bool train = c.split.at(orig.theorem) == Split::Train;
    for (const auto* r : {&run.full, &shortcut}) {
      const Datapoint& d = r->corpus.datapoints[i];
      if (train) {
        alphabet += !(d.step == orig.step || d.step == kHammerToken) || d.state != orig.state ||
                    d.context != orig.context;
      } else {
        untouched += !(d == orig);
      }
    }
    if (shortcut.corpus.datapoints[i].step == kHammerToken && orig.step != kHammerToken &&
        run.full.corpus.datapoints[i].step != kHammerToken) {
      ++escalated;
      not_subset += hammer(parse_state(orig.state), c.library, generous).status != HammerStatus::Proved;
    }
  }
  auto again = preprocess_corpus(run.full.corpus, budget, false, jobs);
  auto again_shortcut = preprocess_corpus(shortcut.corpus, budget, true, jobs);
  long idem = 0;
  for (size_t i = 0; i < c.datapoints.size(); ++i) {
    idem += !(again.corpus.datapoints[i] == run.full.corpus.datapoints[i]);
    idem += !(again_shortcut.corpus.datapoints[i] == shortcut.corpus.datapoints[i]);
  }
  long violations = alphabet + untouched + not_subset + idem;
  std::ostringstream os;
  os << "full run replaced " << run.full.report.replaced << "/"
     << run.full.report.replaced + run.full.report.kept << " train steps, shortcut " << shortcut.report.shortcut
     << " (" << escalated << " needed the generous budget); violations: alphabet " << alphabet << ", non-train "
     << untouched << ", subset " << not_subset << ", idempotence " << idem << "; " << fmt("%.1fs", clock.seconds());
  report(5, violations == 0, os.str());
}

}  // namespace

int acceptance_main() {
  Clock total;
  int jobs = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  std::printf("acceptance run: seed %llu, %d worker(s)\n", static_cast<unsigned long long>(kSeed), jobs);

  criterion_2();
  criterion_3();

  // Shipped pipeline: gen-corpus, preprocess, train, eval, ablate.
  Clock pipeline_clock;
  Run run;
  Corpus& c = run.raw;
  c = generate_corpus(kSeed, run.config.theories, run.config.theorems_per_theory, run.config.profile);
  split_corpus(c, run.config.split, kSeed);
  run.full = preprocess_corpus(c, run.config.search.in_search_hammer(), false, jobs);
  run.thor_model = RetrievalPolicyModel::train(run.full.corpus, true, run.config.policy);
  run.raw_model = RetrievalPolicyModel::train(c, true, run.config.policy);

  EvalOptions o;
  o.config = run.config.search;
  o.standalone = run.config.standalone_hammer();
  o.seed = kSeed;
  o.jobs = 1;
  std::map<std::pair<System, std::string>, std::vector<TraceEvent>> traces;
  std::map<std::pair<System, std::string>, SearchStats> trace_stats;
  o.trace = [&](System s, const std::string& theorem, const SearchOutcome& out) {
    traces[{s, theorem}] = out.trace;
    trace_stats[{s, theorem}] = out.stats;
  };
  EvalReport first = run_eval(c, {&run.thor_model, &run.raw_model}, o);
  double eval_seconds = pipeline_clock.seconds();
  AblationReport ablation = run_ablations(c, run.full.corpus, run.config, kSeed, jobs);
  double pipeline_seconds = pipeline_clock.seconds();
  std::printf("\n%s\n%s\n%s\n", first.render_table().c_str(), first.histograms().render_text().c_str(),
              ablation.render_table().c_str());

  // 1: soundness of machine-found proofs.
  {
    Clock clock;
    long proofs = 0, violations = 0, false_attempts = 0;
    auto sound = [&](const Theorem& t, const std::vector<ProofStep>& proof) {
      ++proofs;
      violations += !check_proof(t, proof, c.library).ok || !eval_in_model(t.statement, c.model);
    };
    for (const EvalReport* r : {&first, &ablation.base, &ablation.learning_how, &ablation.no_context,
                                &ablation.temperature}) {
      for (const auto& [s, rows] : r->outcomes)
        for (size_t i = 0; i < rows.size(); ++i)
          if (rows[i].proved) {
            ++proofs;
            violations += !eval_in_model(c.find_theorem(r->theorems[i])->statement, c.model);
          }
    }
    SearchContext ctx{run.thor_model, c.library, &c.certificates};
    for (const auto& t : c.theorems) {
      if (c.split.at(t.name) == Split::Test) continue;
      auto out = best_first_search(t, ctx, run.config.search, kSeed);
      if (out.proof) sound(t, *out.proof);
    }
    // Statements false in the model must never be proved.
    Rng rng(kSeed + 1);
    SearchConfig probe = run.config.search;
    probe.max_queries = 60;
    for (size_t i = 0; i < c.theorems.size() && false_attempts < 200; i += 3) {
      auto f = perturb(c.theorems[i].statement, c.library.signature(), rng);
      if (!f || eval_in_model(*f, c.model)) continue;
      ++false_attempts;
      Theorem t{c.theorems[i].name + "_false", *f, {}, c.theorems[i].theory, "perturbed"};
      auto out = best_first_search(t, ctx, probe, kSeed);
      violations += out.status == SearchStatus::Proved;
      violations += hammer(ProofState::initial(*f), c.library, o.standalone).status == HammerStatus::Proved;
    }
    double t = clock.seconds();
    report(1, proofs >= 1000 && violations == 0 && t <= 120,
           std::to_string(proofs) + " machine-found proofs, " + std::to_string(false_attempts) +
               " false statements attempted, " + std::to_string(violations) + " violations, " +
               fmt("%.1fs", t));
  }

  // 4: reconstruction round trip over every hammer success on theorem roots
  // and on a sample of training states.
  {
    Clock clock;
    ReconstructionTally tally;
    for (const auto& t : c.theorems) {
      ProofState s = ProofState::initial(t.statement);
      tally.check(s, hammer(s, c.library, o.standalone), c.library, o.standalone);
    }
    std::set<std::string> seen;
    HammerBudget in_search = run.config.search.in_search_hammer();
    for (size_t i = 0; i < c.datapoints.size() && seen.size() < 1500; i += 7) {
      if (!seen.insert(c.datapoints[i].state).second) continue;
      ProofState s = parse_state(c.datapoints[i].state);
      tally.check(s, hammer(s, c.library, in_search), c.library, in_search);
    }
    double t = clock.seconds();
    report(4, tally.proved > 0 && tally.failures == 0 && t <= 120,
           std::to_string(tally.proved) + " hammer proofs reconstructed, " + std::to_string(tally.failures) +
               " failures" + (tally.failures ? " (first: " + tally.first_failure + ")" : "") + ", " +
               fmt("%.1fs", t));
  }

  criterion_5(run, jobs);

  // 6: the Thor-only regime.
  {
    int n = static_cast<int>(first.theorems.size());
    int thor = first.solved(System::Thor), pol = first.solved(System::PolicyOnly),
        ham = first.solved(System::HammerOnly), only = first.thor_only();
    bool regime = n >= 200 && thor > pol && thor > ham && 100.0 * only / n >= 5.0;
    bool frozen = n == kFrozen.test_theorems && thor == kFrozen.thor && pol == kFrozen.policy_only &&
                  ham == kFrozen.hammer_only && only == kFrozen.thor_only;
    std::ostringstream os;
    os << n << " test theorems: Thor " << fmt("%.1f%%", first.rate(System::Thor)) << ", policy-only "
       << fmt("%.1f%%", first.rate(System::PolicyOnly)) << ", hammer-only "
       << fmt("%.1f%%", first.rate(System::HammerOnly)) << ", Thor-only " << only << " ("
       << fmt("%.1f%%", 100.0 * only / std::max(1, n)) << "); frozen values "
       << (frozen ? "match" : "DIFFER") << "; pipeline " << fmt("%.1fs", pipeline_seconds) << " on " << jobs
       << " worker(s)";
    report(6, regime && frozen && pipeline_seconds <= 600, os.str());
  }

  // 7: search invariants on every trace of the criterion-6 run.
  {
    long traces_checked = 0, violations = 0;
    for (const auto& [key, events] : traces) {
      ++traces_checked;
      const SearchStats& st = trace_stats.at(key);
      violations += st.queries > 300 || st.max_queue_size > 32;
      double last = 0;
      int pops = 0;
      for (const auto& ev : events) {
        violations += ev.queue_size > 32;
        if (ev.kind != TraceEvent::Kind::Pop) continue;
        ++pops;
        violations += ev.priority > last || ev.priority > 0;
        last = ev.priority;
      }
      violations += pops != st.queries;
    }
    report(7, traces_checked > 0 && violations == 0,
           std::to_string(traces_checked) + " traces, " + std::to_string(violations) + " violations");
  }

  // 8: ablations.
  {
    std::string table = ablation.render_table();
    bool rendered = table.find("Learning how to select premises") != std::string::npos &&
                    table.find("No proof context") != std::string::npos &&
                    table.find("Sampling temperature T = 1.0") != std::string::npos;
    std::ostringstream os;
    os << "base " << fmt("%.1f%%", ablation.base.rate(System::Thor)) << ", learning-how "
       << fmt("%.1f%%", ablation.learning_how.rate(System::Thor)) << ", no-context "
       << fmt("%.1f%%", ablation.no_context.rate(System::Thor)) << ", T=1.0 "
       << fmt("%.1f%%", ablation.temperature.rate(System::Thor)) << "; supports compared on "
       << ablation.support_queries << " queries, " << ablation.support_mismatches << " mismatches";
    report(8, rendered && ablation.support_queries > 0 && ablation.support_mismatches == 0, os.str());
  }

  // 9: determinism of two full eval runs.
  {
    Clock clock;
    EvalOptions again = o;
    again.trace = nullptr;
    EvalReport second = run_eval(c, {&run.thor_model, &run.raw_model}, again);
    std::string a = first.to_json().dump(2), b = second.to_json().dump(2);
    report(9, a == b,
           std::string(a == b ? "byte-identical" : "different") + " JSON reports (" + std::to_string(a.size()) +
               " bytes), " + fmt("%.1fs", clock.seconds()));
  }

  // 10: premise-selection gap on the policy-only traces.
  {
    std::vector<TraceEvent> all;
    for (const auto& [key, events] : traces)
      if (key.first == System::PolicyOnly) all.insert(all.end(), events.begin(), events.end());
    auto m = premise_step_success_metric(all);
    bool gap = m.premise_rate() && m.plain_rate() && *m.premise_rate() < *m.plain_rate();
    std::ostringstream os;
    os << "premise-bearing " << m.premise_advances << "/" << m.premise_attempts << " ("
       << (m.premise_rate() ? fmt("%.1f%%", *m.premise_rate()) : "n/a") << ") vs premise-free "
       << m.plain_advances << "/" << m.plain_attempts << " ("
       << (m.plain_rate() ? fmt("%.1f%%", *m.plain_rate()) : "n/a") << ")";
    report(10, gap, os.str());
  }

  std::sort(verdicts.begin(), verdicts.end(), [](const Verdict& a, const Verdict& b) { return a.id < b.id; });
  std::printf("\nsummary (eval finished at %.1fs, total %.1fs)\n", eval_seconds, total.seconds());
  bool ok = true;
  for (const auto& v : verdicts) {
    std::printf("%s %d\n", v.pass ? "PASS" : "FAIL", v.id);
    ok = ok && v.pass;
  }
  return ok ? 0 : 1;
}

}  // namespace thor

int main() {
  try {
    return thor::acceptance_main();
  } catch (const std::exception& e) {
    std::fprintf(stderr, "acceptance run aborted: %s\n", e.what());
    return 2;
  }
}
