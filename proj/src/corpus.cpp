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

#include "thor/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <functional>
#include <numeric>
#include <sstream>

namespace thor {

using nlohmann::json;

// --- Datapoints ---------------------------------------------------------------

std::string serialize_datapoint(const Datapoint& dp) {
  json j;
  j["theorem"] = dp.theorem;
  j["context"] = dp.context;
  j["state"] = dp.state;
  j["step"] = dp.step;
  j["hammer_solvable"] = dp.hammer_solvable ? json(*dp.hammer_solvable) : json(nullptr);
  return j.dump();
}

Datapoint parse_datapoint(std::string_view text, int line) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("malformed datapoint: ") + e.what(), line,
                     static_cast<int>(e.byte));
  }
  auto field = [&](const char* key) -> std::string {
    auto it = j.find(key);
    if (it == j.end() || !it->is_string())
      throw ParseError(std::string("datapoint field '") + key + "' missing or not a string",
                       line, 1);
    return it->get<std::string>();
  };
  if (!j.is_object()) throw ParseError("datapoint is not an object", line, 1);
  Datapoint dp;
  dp.theorem = field("theorem");
  dp.context = field("context");
  dp.state = field("state");
  dp.step = field("step");
  auto hs = j.find("hammer_solvable");
  if (hs != j.end() && !hs->is_null()) {
    if (!hs->is_boolean()) throw ParseError("hammer_solvable must be boolean or null", line, 1);
    dp.hammer_solvable = hs->get<bool>();
  }
  return dp;
}

std::string prompt_of(const Datapoint& dp) {
  return "<SOS> <CTXT> " + dp.context + " <PRF_STT> " + dp.state + " <PRF_STP>";
}

std::string target_of(const Datapoint& dp) { return dp.step + " <EOS>"; }

std::vector<Datapoint> datapoints_of(const Theorem& theorem, const TheoremLibrary& library) {
  std::vector<Datapoint> out;
  ProofState state = ProofState::initial(theorem.statement);
  std::string context;
  for (size_t i = 0; i < theorem.ground_truth_proof.size(); ++i) {
    const ProofStep& step = theorem.ground_truth_proof[i];
    Datapoint dp{theorem.name, context, to_string(state), to_string(step), std::nullopt};
    StepResult r = apply_step(state, step, library);
    if (!r.ok())
      throw ReplayFailure(theorem.name + ": step " + std::to_string(i) + " (" + dp.step +
                          ") failed: " + r.message);
    out.push_back(std::move(dp));
    state = std::move(*r.state);
    context = to_string(step);
  }
  if (!is_proved(state)) throw ReplayFailure(theorem.name + ": proof leaves goals open");
  return out;
}

const char* to_string(Split s) {
  switch (s) {
    case Split::Train: return "train";
    case Split::Valid: return "valid";
    case Split::Test: return "test";
  }
  return "?";
}

Split split_from_string(std::string_view s) {
  if (s == "train") return Split::Train;
  if (s == "valid") return Split::Valid;
  if (s == "test") return Split::Test;
  throw Error("unknown split '" + std::string(s) + "'");
}

// --- Profile ------------------------------------------------------------------

GeneratorProfile GeneratorProfile::minimal() {
  GeneratorProfile p;
  p.constants = 3;
  p.base_predicates = 3;
  p.hypothetical_predicates = 6;
  p.derived_predicates = 3;
  p.binary_predicates = 1;
  p.bridge_predicates = 3;
  p.goal_predicates = 1;
  p.disjunctive_axioms = 1;
  p.min_disjuncts = 2;
  p.max_disjuncts = 3;
  p.standalone_inferences = 0;
  return p;
}

void GeneratorProfile::validate() const {
  auto need = [](bool ok, const char* what) {
    if (!ok) throw InvalidProfile(std::string("invalid profile: ") + what);
  };
  need(domain_size >= 1 && domain_size <= 8, "domain_size must be in [1,8]");
  need(constants >= 1, "constants must be positive");
  need(base_predicates >= 2, "base_predicates must be at least 2");
  need(hypothetical_predicates >= 2, "hypothetical_predicates must be at least 2");
  need(derived_predicates >= 1, "derived_predicates must be positive");
  need(binary_predicates >= 0, "binary_predicates must be nonnegative");
  need(goal_predicates >= 1, "goal_predicates must be positive");
  need(disjunctive_axioms >= 0, "disjunctive_axioms must be nonnegative");
  need(min_disjuncts >= 2 && min_disjuncts <= max_disjuncts, "need 2 <= min_disjuncts <= max_disjuncts");
  need(bridge_predicates >= max_disjuncts, "bridge_predicates must cover max_disjuncts");
  need(2 * bridge_predicates <= hypothetical_predicates,
       "bridges need two hypothetical predicates each");
  need(max_proof_depth >= 1 && max_premises >= 1, "proof depth and premise caps must be positive");
  need(structural_fraction >= 0 && premise_fraction >= 0 &&
           structural_fraction + premise_fraction <= 1.0 + 1e-9,
       "family fractions must be nonnegative and sum to at most 1");
  need(certificate_finish_rate >= 0 && certificate_finish_rate <= 1, "certificate_finish_rate in [0,1]");
  need(composite_retries >= 1, "composite_retries must be positive");
  need(certificate_inferences >= 1 && standalone_inferences >= 0, "budgets must be nonnegative");
}

// --- Corpus -------------------------------------------------------------------

const Theorem* Corpus::find_theorem(const std::string& name) const {
  for (const auto& t : theorems)
    if (t.name == name) return &t;
  return nullptr;
}

std::vector<const Theorem*> Corpus::theorems_in(Split s) const {
  std::vector<const Theorem*> out;
  for (const auto& t : theorems) {
    auto it = split.find(t.name);
    if (it != split.end() && it->second == s) out.push_back(&t);
  }
  return out;
}

namespace {

json library_json(const TheoremLibrary& lib) {
  json j;
  j["version"] = 1;
  j["signature"]["predicates"] = lib.signature().predicates;
  j["signature"]["functions"] = lib.signature().functions;
  json facts = json::array();
  for (const auto& f : lib.facts()) facts.push_back({{"name", f.name}, {"formula", to_string(f.formula)}});
  j["facts"] = std::move(facts);
  return j;
}

std::string theorem_line(const Theorem& t) {
  json j;
  j["name"] = t.name;
  j["theory"] = t.theory;
  j["family"] = t.family;
  j["statement"] = to_string(t.statement);
  json proof = json::array();
  for (const auto& s : t.ground_truth_proof) proof.push_back(to_string(s));
  j["proof"] = std::move(proof);
  return j.dump();
}

json split_json(const Corpus& c) {
  json j;
  j["version"] = 1;
  j["fractions"] = c.fractions;
  j["seed"] = c.split_seed;
  json a = json::object();
  for (const auto& [name, s] : c.split) a[name] = to_string(s);
  j["assignment"] = std::move(a);
  return j;
}

std::string theorems_text(const Corpus& c) {
  std::string out;
  for (const auto& t : c.theorems) out += theorem_line(t) + "\n";
  return out;
}

}  // namespace

std::string Corpus::fingerprint() const {
  uint64_t h = fnv1a(library_json(library).dump());
  h = fnv1a(theorems_text(*this), h);
  h = fnv1a(split_json(*this).dump(), h);
  return to_hex(h, 16);
}

// --- Structural prover --------------------------------------------------------

namespace {

class StructuralProver {
 public:
  StructuralProver(const TheoremLibrary& lib, int max_steps) : lib_(lib), max_steps_(max_steps) {}

  bool prove(const ProofState& s, std::vector<ProofStep>& steps) {
    if (is_proved(s)) return true;
    if (static_cast<int>(steps.size()) >= max_steps_) return false;
    for (const auto& step : candidates(s)) {
      StepResult r = apply_step(s, step, lib_);
      if (!r.ok()) continue;
      steps.push_back(step);
      if (prove(*r.state, steps)) return true;
      steps.pop_back();
      if (invertible(step)) return false;
    }
    return false;
  }

 private:
  static bool invertible(const ProofStep& s) {
    using K = ProofStep::Kind;
    return s.kind != K::Left && s.kind != K::Right && s.kind != K::ExistsWitness;
  }

  std::vector<ProofStep> candidates(const ProofState& s) const {
    using K = ProofStep::Kind;
    const Goal& g = s.goals.front();
    std::vector<ProofStep> out;
    if (apply_step(s, ProofStep::simple(K::Assumption), lib_).ok()) {
      out.push_back(ProofStep::simple(K::Assumption));
      return out;
    }
    for (const auto& h : g.hypotheses)
      if (h.formula->kind == FormulaKind::And) return {ProofStep::named(K::Destruct, h.name)};
    for (const auto& h : g.hypotheses)
      if (h.formula->kind == FormulaKind::Or) return {ProofStep::named(K::Cases, h.name)};
    switch (g.conclusion->kind) {
      case FormulaKind::Implies:
      case FormulaKind::Forall: return {ProofStep::simple(K::Intro)};
      case FormulaKind::And: return {ProofStep::simple(K::Split)};
      case FormulaKind::Or: return {ProofStep::simple(K::Left), ProofStep::simple(K::Right)};
      case FormulaKind::Exists: {
        std::set<std::string> consts;
        for (const auto& h : g.hypotheses) collect_constants(h.formula, consts);
        collect_constants(g.conclusion, consts);
        for (const auto& c : consts) out.push_back(ProofStep::exists(make_app(c)));
        return out;
      }
      default: return out;
    }
  }

  const TheoremLibrary& lib_;
  int max_steps_;
};

}  // namespace

std::optional<std::vector<ProofStep>> structural_prove(const Formula& statement,
                                                       const TheoremLibrary& library,
                                                       int max_steps) {
  std::vector<ProofStep> steps;
  StructuralProver p(library, max_steps);
  if (!p.prove(ProofState::initial(statement), steps)) return std::nullopt;
  return steps;
}

// --- Generator ----------------------------------------------------------------

namespace {

struct Arg {
  int var = 0;
  bool apply_f = false;
};

struct AtomPattern {
  std::string pred;
  std::vector<Arg> args;
};

struct RuleDef {
  std::string fact;
  std::vector<AtomPattern> body;
  AtomPattern head;
  int nvars = 1;
};

struct GroundAtom {
  std::string pred;
  std::vector<int> args;  // ground term ids
  auto operator<=>(const GroundAtom&) const = default;
};

struct Derivation {
  int depth = 0;
  int rule = -1;  // -1: ground fact
  std::string fact;
  std::vector<GroundAtom> body;
};

class TheoryBuilder {
 public:
  TheoryBuilder(int index, uint64_t seed, const GeneratorProfile& p, Corpus& corpus)
      : p_(p), corpus_(corpus), rng_(seed) {
    std::string num = std::to_string(index);
    if (num.size() < 2) num = "0" + num;
    theory_ = "t" + num;
    prefix_ = theory_ + "_";
  }

  void build() {
    make_symbols();
    make_model();
    seed_ground_facts();
    close();
    make_goals();
    make_facts();
  }

  std::vector<Theorem> theorems(int count);

 private:
  // --- symbols and model ---

  std::string sym(const std::string& kind, int i) const { return prefix_ + kind + std::to_string(i); }

  void make_symbols() {
    Signature& sig = corpus_.library.mutable_signature();
    for (int i = 0; i < p_.constants; ++i) {
      consts_.push_back(sym("c", i));
      sig.functions[consts_.back()] = 0;
    }
    fn_ = sym("f", 0);
    sig.functions[fn_] = 1;
    auto unary = [&](const std::string& kind, int n, std::vector<std::string>& out) {
      for (int i = 0; i < n; ++i) {
        out.push_back(sym(kind, i));
        sig.predicates[out.back()] = 1;
      }
    };
    unary("b", p_.base_predicates, base_);
    unary("u", p_.hypothetical_predicates, hyp_);
    unary("d", p_.derived_predicates, derived_);
    unary("m", p_.bridge_predicates, bridge_);
    unary("g", p_.goal_predicates, goal_);
    for (int i = 0; i < p_.binary_predicates; ++i) {
      binary_.push_back(sym("r", i));
      sig.predicates[binary_.back()] = 2;
    }
  }

  int dom() const { return p_.domain_size; }
  int nconst() const { return p_.constants; }

  std::vector<int>& table(const std::string& pred) { return corpus_.model.predicates[pred].values; }
  bool holds(const std::string& pred, int e) { return table(pred)[static_cast<size_t>(e)] != 0; }

  void new_table(const std::string& pred, int arity) {
    auto& t = corpus_.model.predicates[pred];
    t.arity = arity;
    t.values.assign(static_cast<size_t>(std::pow(dom(), arity)), 0);
  }

  void make_model() {
    corpus_.model.domain_size = dom();
    for (const auto& c : consts_) corpus_.model.functions[c] = {0, {static_cast<int>(rng_.below(static_cast<uint64_t>(dom())))}};
    std::vector<int> f;
    for (int e = 0; e < dom(); ++e) f.push_back(static_cast<int>(rng_.below(static_cast<uint64_t>(dom()))));
    corpus_.model.functions[fn_] = {1, f};

    for (const auto& b : base_) {
      new_table(b, 1);
      for (int e = 0; e < dom(); ++e) table(b)[static_cast<size_t>(e)] = rng_.chance(0.5);
    }
    for (const auto& u : hyp_) {
      new_table(u, 1);
      for (int e = 0; e < dom(); ++e) table(u)[static_cast<size_t>(e)] = rng_.chance(0.4);
    }

    // Derived predicates: 1-2 rules each over base and earlier derived ones.
    for (size_t i = 0; i < derived_.size(); ++i) {
      new_table(derived_[i], 1);
      std::vector<std::string> pool = base_;
      pool.insert(pool.end(), derived_.begin(), derived_.begin() + static_cast<long>(i));
      int nrules = rng_.chance(0.35) ? 2 : 1;
      for (int r = 0; r < nrules; ++r) {
        RuleDef rule;
        int nbody = rng_.range(1, 3);
        std::set<std::string> used;
        for (int k = 0; k < nbody; ++k) {
          std::string p = rng_.pick(pool);
          if (used.insert(p).second) rule.body.push_back({p, {{0, false}}});
        }
        rule.head = {derived_[i], {{0, rng_.chance(0.15)}}};
        add_rule(std::move(rule));
      }
    }
    for (const auto& r : binary_) {
      new_table(r, 2);
      int nrules = rng_.range(1, 2);
      for (int k = 0; k < nrules; ++k) {
        RuleDef rule;
        rule.nvars = 2;
        rule.body.push_back({rng_.pick(rng_.chance(0.5) ? base_ : derived_), {{0, false}}});
        rule.body.push_back({rng_.pick(rng_.chance(0.5) ? base_ : derived_), {{1, false}}});
        rule.head = {r, {{0, false}, {1, false}}};
        add_rule(std::move(rule));
      }
    }
    // Bridges m_i(x) <- u_a(x), u_b(x) over pairwise disjoint pairs.
    std::vector<int> perm(hyp_.size());
    std::iota(perm.begin(), perm.end(), 0);
    rng_.shuffle(perm);
    for (size_t i = 0; i < bridge_.size(); ++i) {
      new_table(bridge_[i], 1);
      int a = perm[2 * i], b = perm[2 * i + 1];
      RuleDef rule;
      rule.body = {{hyp_[static_cast<size_t>(a)], {{0, false}}}, {hyp_[static_cast<size_t>(b)], {{0, false}}}};
      rule.head = {bridge_[i], {{0, false}}};
      bridge_rule_.push_back(static_cast<int>(rules_.size()));
      bridge_pair_.push_back({hyp_[static_cast<size_t>(a)], hyp_[static_cast<size_t>(b)]});
      add_rule(std::move(rule));
    }
  }

  // Goals g(x) <- m_i(x), side(x) for every bridge; the side predicate is
  // derivable for at least one constant.
  void make_goals() {
    std::vector<std::string> sides;
    for (const auto& d : derived_)
      for (int c = 0; c < nconst(); ++c)
        if (known_.count(GroundAtom{d, {c}})) {
          sides.push_back(d);
          break;
        }
    if (sides.empty()) sides = base_;
    for (const auto& g : goal_) {
      new_table(g, 1);
      std::string side = rng_.pick(sides);
      goal_side_.push_back(side);
      std::vector<int> rules;
      for (const auto& m : bridge_) {
        RuleDef rule;
        rule.body = {{m, {{0, false}}}, {side, {{0, false}}}};
        rule.head = {g, {{0, false}}};
        rules.push_back(static_cast<int>(rules_.size()));
        add_rule(std::move(rule));
      }
      goal_rules_.push_back(rules);
    }
  }

  void seed_ground_facts() {
    for (const auto& b : base_)
      for (int c = 0; c < nconst(); ++c)
        if (holds(b, element(c))) known_[GroundAtom{b, {c}}] = Derivation{};
  }

  // Registers a rule and makes it true in the model by extending the head's
  // table; rules are added in dependency order.
  void add_rule(RuleDef rule) {
    const auto& f = corpus_.model.functions[fn_].values;
    for (int e0 = 0; e0 < dom(); ++e0)
      for (int e1 = 0; e1 < (rule.nvars == 2 ? dom() : 1); ++e1) {
        int env[2] = {e0, e1};
        bool ok = true;
        for (const auto& a : rule.body) ok = ok && holds_at(a, env, f);
        if (!ok) continue;
        size_t idx = 0;
        for (const auto& arg : rule.head.args) {
          int e = env[arg.var];
          if (arg.apply_f) e = f[static_cast<size_t>(e)];
          idx = idx * static_cast<size_t>(dom()) + static_cast<size_t>(e);
        }
        table(rule.head.pred)[idx] = 1;
      }
    rules_.push_back(std::move(rule));
  }

  bool holds_at(const AtomPattern& a, const int* env, const std::vector<int>& f) {
    size_t idx = 0;
    for (const auto& arg : a.args) {
      int e = env[arg.var];
      if (arg.apply_f) e = f[static_cast<size_t>(e)];
      idx = idx * static_cast<size_t>(dom()) + static_cast<size_t>(e);
    }
    return table(a.pred)[idx] != 0;
  }

  // --- facts ---

  Term var_term(const Arg& a) const {
    Term v = make_var(a.var == 0 ? "x" : "y");
    return a.apply_f ? make_app(fn_, {v}) : v;
  }

  Formula pattern_formula(const AtomPattern& a) const {
    std::vector<Term> args;
    for (const auto& arg : a.args) args.push_back(var_term(arg));
    return make_atom(a.pred, std::move(args));
  }

  Formula rule_formula(const RuleDef& r) const {
    Formula f = pattern_formula(r.head);
    for (size_t i = r.body.size(); i-- > 0;) f = make_implies(pattern_formula(r.body[i]), f);
    if (r.nvars == 2) f = make_forall("y", f);
    return make_forall("x", f);
  }

  Term ground_term(int id) const {
    if (id < nconst()) return make_app(consts_[static_cast<size_t>(id)]);
    return make_app(fn_, {make_app(consts_[static_cast<size_t>(id - nconst())])});
  }

  Formula atom_formula(const GroundAtom& a) const {
    std::vector<Term> args;
    for (int t : a.args) args.push_back(ground_term(t));
    return make_atom(a.pred, std::move(args));
  }

  void make_facts() {
    std::vector<std::pair<Formula, int>> pending;  // formula, rule index or -1
    for (const auto& b : base_)
      for (int c = 0; c < nconst(); ++c)
        if (holds(b, element(c))) pending.push_back({make_atom(b, {ground_term(c)}), -1});
    for (size_t r = 0; r < rules_.size(); ++r) pending.push_back({rule_formula(rules_[r]), static_cast<int>(r)});
    for (int k = 0; k < p_.disjunctive_axioms; ++k)
      if (auto f = true_non_horn_axiom(k)) pending.push_back({*f, -1});

    rng_.shuffle(pending);
    int next = 0;
    for (auto& [f, rule] : pending) {
      std::string name = prefix_ + "ax" + std::to_string(next++);
      if (!eval_in_model(f, corpus_.model))
        throw InvariantError("generated axiom " + name + " is false in its model");
      corpus_.library.add_fact(name, f);
      if (rule >= 0) {
        rules_[static_cast<size_t>(rule)].fact = name;
      } else if (f->kind == FormulaKind::Atom) {
        GroundAtom a{f->name, {}};
        for (const auto& t : f->args)
          a.args.push_back(static_cast<int>(std::find(consts_.begin(), consts_.end(), t->name) - consts_.begin()));
        known_[a] = Derivation{0, -1, name, {}};
      }
    }
  }

  std::optional<Formula> true_non_horn_axiom(int k) {
    for (int tries = 0; tries < 50; ++tries) {
      Formula f;
      Term x = make_var("x");
      auto atom = [&](const std::string& p) { return make_atom(p, {x}); };
      if (k % 2 == 0) {
        std::string a = rng_.pick(base_), b = rng_.pick(base_), c = rng_.pick(derived_);
        if (a == b) continue;
        f = make_forall("x", make_implies(atom(a), make_or(atom(b), atom(c))));
      } else {
        std::string a = rng_.pick(base_), b = rng_.pick(derived_);
        f = make_exists("x", make_and(atom(a), atom(b)));
      }
      if (eval_in_model(f, corpus_.model)) return f;
    }
    return std::nullopt;
  }

  int element(int term_id) const {
    const auto& c = corpus_.model.functions.at(consts_[static_cast<size_t>(term_id % nconst())]).values[0];
    if (term_id < nconst()) return c;
    return corpus_.model.functions.at(fn_).values[static_cast<size_t>(c)];
  }

  // Forward chaining to a fixpoint with minimal derivation depth.
  void close() {
    bool changed = true;
    while (changed) {
      changed = false;
      for (size_t r = 0; r < rules_.size(); ++r) {
        const RuleDef& rule = rules_[r];
        for (int c0 = 0; c0 < nconst(); ++c0)
          for (int c1 = 0; c1 < (rule.nvars == 2 ? nconst() : 1); ++c1) {
            int env[2] = {c0, c1};
            Derivation d;
            d.rule = static_cast<int>(r);
            int depth = 0;
            bool ok = true;
            for (const auto& a : rule.body) {
              GroundAtom ga = instantiate(a, env);
              auto it = known_.find(ga);
              if (it == known_.end()) {
                ok = false;
                break;
              }
              depth = std::max(depth, it->second.depth);
              d.body.push_back(ga);
            }
            if (!ok) continue;
            d.depth = depth + 1;
            if (d.depth > p_.max_proof_depth) continue;
            GroundAtom head = instantiate(rule.head, env);
            auto it = known_.find(head);
            if (it == known_.end() || it->second.depth > d.depth) {
              known_[head] = d;
              changed = true;
            }
          }
      }
    }
  }

  GroundAtom instantiate(const AtomPattern& a, const int* env) const {
    GroundAtom g{a.pred, {}};
    for (const auto& arg : a.args) g.args.push_back(arg.apply_f ? nconst() + env[arg.var] : env[arg.var]);
    return g;
  }

  const std::string& fact_of(const Derivation& d) const {
    return d.rule >= 0 ? rules_[static_cast<size_t>(d.rule)].fact : d.fact;
  }

  void premises_of(const GroundAtom& a, std::set<std::string>& out) const {
    const Derivation& d = known_.at(a);
    out.insert(fact_of(d));
    for (const auto& b : d.body) premises_of(b, out);
  }

  // --- proofs ---

  struct Builder {
    const TheoremLibrary& lib;
    ProofState state;
    std::vector<ProofStep> steps;

    void step(ProofStep s) {
      StepResult r = apply_step(state, s, lib);
      if (!r.ok()) throw InvariantError("generator produced an invalid step " + to_string(s) + ": " + r.message);
      state = std::move(*r.state);
      steps.push_back(std::move(s));
    }
    void step(const std::string& text) { step(parse_step(text)); }
  };

  HammerBudget certificate_budget() const {
    HammerBudget b;
    b.max_inferences = p_.certificate_inferences;
    b.wallclock_seconds.reset();
    return b;
  }

  // Closes the first goal with a hammer certificate; false if the hammer fails.
  bool finish_by_certificate(Builder& b) {
    HammerResult r = hammer(b.state, corpus_.library, certificate_budget());
    if (r.status != HammerStatus::Proved) return false;
    corpus_.certificates.add(r.certificate);
    b.step(ProofStep::by_certificate(r.certificate, r.used_premises));
    return true;
  }

  void apply_chain(Builder& b, const GroundAtom& a) {
    const Derivation& d = known_.at(a);
    b.step("apply " + fact_of(d));
    for (const auto& sub : d.body) apply_chain(b, sub);
  }

  void prove_atom(Builder& b, const GroundAtom& a) {
    if (rng_.chance(p_.certificate_finish_rate) && finish_by_certificate(b)) return;
    apply_chain(b, a);
  }

  std::optional<Theorem> structural(int serial);
  std::optional<Theorem> premise_heavy(int serial);
  std::optional<Theorem> composite(int serial);
  void finish_branch(Builder& b, size_t gi, size_t mi, int c);

  Theorem make_theorem(int serial, const std::string& family, Formula statement,
                       std::vector<ProofStep> proof) const {
    return Theorem{prefix_ + "thm" + std::to_string(serial), std::move(statement), std::move(proof),
                   theory_, family};
  }

  Formula random_ground_atom(bool any_kind = true) {
    std::vector<std::string> pool = base_;
    if (any_kind) {
      pool.insert(pool.end(), hyp_.begin(), hyp_.end());
      pool.insert(pool.end(), derived_.begin(), derived_.end());
    }
    return make_atom(rng_.pick(pool), {make_app(rng_.pick(consts_))});
  }

  std::vector<GroundAtom> derived_atoms(int max_premises) const {
    std::vector<GroundAtom> out;
    for (const auto& [a, d] : known_) {
      if (d.rule < 0) continue;
      if (std::find(bridge_.begin(), bridge_.end(), a.pred) != bridge_.end()) continue;
      if (std::find(goal_.begin(), goal_.end(), a.pred) != goal_.end()) continue;
      std::set<std::string> prem;
      premises_of(a, prem);
      if (static_cast<int>(prem.size()) <= max_premises) out.push_back(a);
    }
    return out;
  }

  const GeneratorProfile& p_;
  Corpus& corpus_;
  Rng rng_;
  std::string theory_, prefix_;
  std::vector<std::string> consts_, base_, hyp_, derived_, bridge_, goal_, binary_;
  std::string fn_;
  std::vector<RuleDef> rules_;
  std::vector<int> bridge_rule_;
  std::vector<std::pair<std::string, std::string>> bridge_pair_;
  std::vector<std::string> goal_side_;
  std::vector<std::vector<int>> goal_rules_;
  std::map<GroundAtom, Derivation> known_;
  std::set<std::string> statements_;

 public:
  std::set<std::string>& statements() { return statements_; }
};

std::optional<Theorem> TheoryBuilder::structural(int serial) {
  auto one = [&]() -> Formula {
    Formula a = random_ground_atom(), b = random_ground_atom(), c = random_ground_atom();
    std::string p = rng_.pick(base_), q = rng_.pick(derived_);
    Term x = make_var("x");
    Formula px = make_atom(p, {x}), qx = make_atom(q, {x});
    switch (rng_.below(12)) {
      case 0: return make_implies(a, a);
      case 1: return make_implies(make_and(a, b), make_and(b, a));
      case 2: return make_implies(make_or(a, b), make_or(b, a));
      case 3: return make_implies(a, make_implies(b, make_and(a, b)));
      case 4: return make_implies(make_and(make_and(a, b), c), make_and(a, make_and(b, c)));
      case 5: return make_implies(make_and(a, make_or(b, c)), make_or(make_and(a, b), make_and(a, c)));
      case 6: return make_forall("x", make_implies(px, make_or(px, qx)));
      case 7: {
        Term k = make_app(rng_.pick(consts_));
        return make_implies(make_atom(p, {k}), make_exists("x", make_atom(p, {x})));
      }
      case 8: return make_implies(a, make_or(b, a));
      case 9: return make_implies(make_and(make_or(a, b), c), make_or(make_and(a, c), make_and(b, c)));
      case 10: return make_forall("x", make_implies(make_and(px, qx), qx));
      default: return make_implies(make_and(a, b), make_or(a, c));
    }
  };
  Formula stmt = rng_.chance(0.25) ? make_and(one(), one()) : one();
  if (!statements_.insert(to_string(stmt)).second) return std::nullopt;
  auto proof = structural_prove(stmt, corpus_.library);
  if (!proof) throw InvariantError("structural template without a structural proof: " + to_string(stmt));
  return make_theorem(serial, "structural", stmt, *proof);
}

std::optional<Theorem> TheoryBuilder::premise_heavy(int serial) {
  auto atoms = derived_atoms(p_.max_premises);
  if (atoms.empty()) return std::nullopt;
  Builder b{corpus_.library, {}, {}};
  Formula stmt;
  int variant = static_cast<int>(rng_.below(4));
  const GroundAtom& a = rng_.pick(atoms);
  if (variant == 1 && a.args.size() == 1 && a.args[0] < nconst()) {
    stmt = make_exists("x", make_atom(a.pred, {make_var("x")}));
    if (!statements_.insert(to_string(stmt)).second) return std::nullopt;
    b.state = ProofState::initial(stmt);
    b.step(ProofStep::exists(ground_term(a.args[0])));
    prove_atom(b, a);
  } else if (variant == 2) {
    const GroundAtom& a2 = rng_.pick(atoms);
    std::set<std::string> prem;
    premises_of(a, prem);
    premises_of(a2, prem);
    if (a == a2 || static_cast<int>(prem.size()) > p_.max_premises) return std::nullopt;
    stmt = make_and(atom_formula(a), atom_formula(a2));
    if (!statements_.insert(to_string(stmt)).second) return std::nullopt;
    b.state = ProofState::initial(stmt);
    b.step("split");
    prove_atom(b, a);
    prove_atom(b, a2);
  } else if (variant == 3) {
    // One bridge: u_a(c) & u_b(c) -> g(c).
    size_t gi = rng_.below(goal_.size());
    std::vector<int> cs;
    for (int c = 0; c < nconst(); ++c)
      if (known_.count(GroundAtom{goal_side_[gi], {c}})) cs.push_back(c);
    if (cs.empty()) return std::nullopt;
    int c = rng_.pick(cs);
    size_t mi = rng_.below(bridge_.size());
    Term ct = ground_term(c);
    stmt = make_implies(make_and(make_atom(bridge_pair_[mi].first, {ct}), make_atom(bridge_pair_[mi].second, {ct})),
                        make_atom(goal_[gi], {ct}));
    if (!statements_.insert(to_string(stmt)).second) return std::nullopt;
    b.state = ProofState::initial(stmt);
    b.step("intro");
    finish_branch(b, gi, mi, c);
  } else {
    stmt = atom_formula(a);
    if (!statements_.insert(to_string(stmt)).second) return std::nullopt;
    b.state = ProofState::initial(stmt);
    prove_atom(b, a);
  }
  return make_theorem(serial, "premise", stmt, std::move(b.steps));
}

void TheoryBuilder::finish_branch(Builder& b, size_t gi, size_t mi, int c) {
  if (rng_.chance(p_.certificate_finish_rate) && finish_by_certificate(b)) return;
  const Goal& g = b.state.goals.front();
  std::string conj;
  for (const auto& h : g.hypotheses)
    if (h.formula->kind == FormulaKind::And) conj = h.name;
  b.step(ProofStep::named(ProofStep::Kind::Destruct, conj));
  b.step("apply " + rules_[static_cast<size_t>(goal_rules_[gi][mi])].fact);
  b.step("apply " + rules_[static_cast<size_t>(bridge_rule_[mi])].fact);
  b.step("assumption");
  b.step("assumption");
  apply_chain(b, GroundAtom{goal_side_[gi], {c}});
}

std::optional<Theorem> TheoryBuilder::composite(int serial) {
  size_t gi = rng_.below(goal_.size());
  std::vector<int> cs;
  for (int c = 0; c < nconst(); ++c)
    if (known_.count(GroundAtom{goal_side_[gi], {c}})) cs.push_back(c);
  if (cs.empty()) return std::nullopt;
  int c = rng_.pick(cs);
  Term ct = ground_term(c);
  int n = rng_.range(p_.min_disjuncts, p_.max_disjuncts);
  for (int attempt = 0; attempt < p_.composite_retries; ++attempt) {
    std::vector<size_t> mids(bridge_.size());
    std::iota(mids.begin(), mids.end(), 0);
    rng_.shuffle(mids);
    mids.resize(static_cast<size_t>(n));
    std::vector<Formula> ds;
    for (size_t mi : mids)
      ds.push_back(make_and(make_atom(bridge_pair_[mi].first, {ct}), make_atom(bridge_pair_[mi].second, {ct})));
    Formula stmt = make_implies(make_or_all(ds), make_atom(goal_[gi], {ct}));
    if (statements_.count(to_string(stmt))) continue;
    if (p_.standalone_inferences > 0) {
      HammerBudget hb;
      hb.max_inferences = p_.standalone_inferences;
      hb.wallclock_seconds.reset();
      HammerResult r = hammer(ProofState::initial(stmt), corpus_.library, hb);
      if (r.status == HammerStatus::Proved) {
        n = std::min(n + 1, p_.max_disjuncts);
        continue;
      }
    }
    statements_.insert(to_string(stmt));
    Builder b{corpus_.library, ProofState::initial(stmt), {}};
    b.step("intro");
    for (size_t k = 0; k < mids.size(); ++k) {
      const Goal& g = b.state.goals.front();
      std::string disj;
      for (const auto& h : g.hypotheses)
        if (h.formula->kind == FormulaKind::Or) disj = h.name;
      if (!disj.empty()) b.step(ProofStep::named(ProofStep::Kind::Cases, disj));
      finish_branch(b, gi, mids[k], c);
    }
    return make_theorem(serial, "composite", stmt, std::move(b.steps));
  }
  return std::nullopt;
}

std::vector<Theorem> TheoryBuilder::theorems(int count) {
  int n_struct = static_cast<int>(std::lround(count * p_.structural_fraction));
  int n_prem = static_cast<int>(std::lround(count * p_.premise_fraction));
  n_struct = std::min(n_struct, count);
  n_prem = std::min(n_prem, count - n_struct);
  int n_comp = count - n_struct - n_prem;

  std::vector<Theorem> out;
  int serial = 0;
  auto fill = [&](int want, auto make) {
    int made = 0;
    for (int tries = 0; made < want && tries < 4 * want + 8; ++tries)
      if (auto t = (this->*make)(serial)) {
        out.push_back(std::move(*t));
        ++serial;
        ++made;
      }
    return made;
  };
  int comp = fill(n_comp, &TheoryBuilder::composite);
  int prem = fill(n_prem + (n_comp - comp), &TheoryBuilder::premise_heavy);
  fill(count - comp - prem, &TheoryBuilder::structural);
  return out;
}

}  // namespace

namespace {

constexpr int kTheoryAttempts = 4;

// Theories share no symbols, so each is built against its own library and
// merged afterwards; premise selection sees the same candidates either way.
Corpus build_theory(int index, uint64_t seed, int count, const GeneratorProfile& profile) {
  for (int attempt = 0; attempt < kTheoryAttempts; ++attempt) {
    Corpus part;
    uint64_t s = attempt == 0 ? seed : derive_seed(seed, static_cast<uint64_t>(attempt));
    TheoryBuilder tb(index, s, profile, part);
    tb.build();
    part.theorems = tb.theorems(count);
    bool has_composite = std::any_of(part.theorems.begin(), part.theorems.end(),
                                     [](const Theorem& t) { return t.family == "composite"; });
    if (has_composite || count * (1.0 - profile.structural_fraction - profile.premise_fraction) < 0.5)
      return part;
  }
  throw InvariantError("theory " + std::to_string(index) + " has no composite theorem after " +
                       std::to_string(kTheoryAttempts) + " attempts");
}

}  // namespace

Corpus generate_corpus(uint64_t seed, int n_theories, int theorems_per_theory,
                       const GeneratorProfile& profile) {
  profile.validate();
  if (n_theories < 1 || theorems_per_theory < 1)
    throw InvalidProfile("need at least one theory and one theorem per theory");
  Corpus corpus;
  corpus.model.domain_size = profile.domain_size;
  for (int i = 0; i < n_theories; ++i) {
    Corpus part = build_theory(i, derive_seed(seed, static_cast<uint64_t>(i)), theorems_per_theory, profile);
    Signature& sig = corpus.library.mutable_signature();
    for (const auto& [k, v] : part.library.signature().predicates) sig.predicates[k] = v;
    for (const auto& [k, v] : part.library.signature().functions) sig.functions[k] = v;
    for (const auto& f : part.library.facts()) corpus.library.add_fact(f.name, f.formula);
    for (auto& [k, v] : part.model.predicates) corpus.model.predicates[k] = std::move(v);
    for (auto& [k, v] : part.model.functions) corpus.model.functions[k] = std::move(v);
    for (const auto& [id, cert] : part.certificates.all()) corpus.certificates.add(cert);
    for (auto& t : part.theorems) corpus.theorems.push_back(std::move(t));
  }
  for (const auto& t : corpus.theorems) {
    ProofCheck pc = check_proof(t, t.ground_truth_proof, corpus.library);
    if (!pc.ok) throw InvariantError("ground truth of " + t.name + " does not check: " + pc.message);
    auto dps = datapoints_of(t, corpus.library);
    corpus.datapoints.insert(corpus.datapoints.end(), dps.begin(), dps.end());
    corpus.split[t.name] = Split::Train;
  }
  return corpus;
}

void split_corpus(Corpus& corpus, std::array<double, 3> fractions, uint64_t seed) {
  double sum = 0;
  for (double f : fractions) {
    if (!(f >= 0) || !std::isfinite(f)) throw BadFractions("split fractions must be nonnegative");
    sum += f;
  }
  if (std::abs(sum - 1.0) > 1e-6) throw BadFractions("split fractions must sum to 1");

  std::vector<std::string> names;
  for (const auto& t : corpus.theorems) names.push_back(t.name);
  Rng rng(seed);
  rng.shuffle(names);

  size_t n = names.size();
  std::array<size_t, 3> counts{};
  std::array<double, 3> rem{};
  size_t assigned = 0;
  for (int i = 0; i < 3; ++i) {
    double exact = fractions[static_cast<size_t>(i)] * static_cast<double>(n);
    counts[static_cast<size_t>(i)] = static_cast<size_t>(std::floor(exact + 1e-9));
    rem[static_cast<size_t>(i)] = exact - static_cast<double>(counts[static_cast<size_t>(i)]);
    assigned += counts[static_cast<size_t>(i)];
  }
  std::array<int, 3> order{0, 1, 2};
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return rem[static_cast<size_t>(a)] > rem[static_cast<size_t>(b)]; });
  for (size_t k = 0; assigned < n; ++k, ++assigned) ++counts[static_cast<size_t>(order[k % 3])];

  corpus.split.clear();
  size_t pos = 0;
  const Split kinds[3] = {Split::Train, Split::Valid, Split::Test};
  for (int i = 0; i < 3; ++i)
    for (size_t k = 0; k < counts[static_cast<size_t>(i)]; ++k) corpus.split[names[pos++]] = kinds[i];
  corpus.fractions = fractions;
  corpus.split_seed = seed;
}

// --- IO -----------------------------------------------------------------------

json model_to_json(const FiniteModel& m) {
  auto tables = [](const std::map<std::string, FiniteModel::Table>& ts) {
    json j = json::object();
    for (const auto& [name, t] : ts) j[name] = {{"arity", t.arity}, {"values", t.values}};
    return j;
  };
  return {{"domain_size", m.domain_size}, {"predicates", tables(m.predicates)}, {"functions", tables(m.functions)}};
}

FiniteModel model_from_json(const json& j) {
  try {
    FiniteModel m;
    m.domain_size = j.at("domain_size").get<int>();
    if (m.domain_size < 1) throw Error("model domain must be nonempty");
    auto tables = [&](const json& src, std::map<std::string, FiniteModel::Table>& dst) {
      for (const auto& [name, t] : src.items()) {
        FiniteModel::Table table{t.at("arity").get<int>(), t.at("values").get<std::vector<int>>()};
        if (table.values.size() != static_cast<size_t>(std::pow(m.domain_size, table.arity)))
          throw Error("model table '" + name + "' has the wrong size");
        dst[name] = std::move(table);
      }
    };
    tables(j.at("predicates"), m.predicates);
    tables(j.at("functions"), m.functions);
    return m;
  } catch (const json::exception& e) {
    throw Error(std::string("malformed model: ") + e.what());
  }
}

namespace {

namespace fs = std::filesystem;

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line))
    if (!trim(line).empty()) out.push_back(line);
  return out;
}

json parse_json(const std::string& text, const std::string& what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error("malformed " + what + ": " + e.what());
  }
}

}  // namespace

void save_corpus(const Corpus& corpus, const std::string& dir) {
  fs::create_directories(fs::path(dir) / "certs");
  write_file_atomic((fs::path(dir) / "library.json").string(), library_json(corpus.library).dump(1) + "\n");
  write_file_atomic((fs::path(dir) / "theorems.jsonl").string(), theorems_text(corpus));
  std::string dps;
  for (const auto& dp : corpus.datapoints) dps += serialize_datapoint(dp) + "\n";
  write_file_atomic((fs::path(dir) / "datapoints.jsonl").string(), dps);
  write_file_atomic((fs::path(dir) / "split.json").string(), split_json(corpus).dump(1) + "\n");
  write_file_atomic((fs::path(dir) / "model.json").string(), model_to_json(corpus.model).dump() + "\n");
  for (const auto& [id, cert] : corpus.certificates.all())
    write_file_atomic((fs::path(dir) / "certs" / ("cert-" + id + ".json")).string(), to_json(*cert).dump() + "\n");
}

Corpus load_corpus(const std::string& dir) {
  fs::path root(dir);
  if (!fs::is_directory(root)) throw Error("corpus directory '" + dir + "' does not exist");
  Corpus c;
  try {
    json lib = parse_json(read_file((root / "library.json").string()), "library.json");
    Signature sig;
    sig.predicates = lib.at("signature").at("predicates").get<std::map<std::string, int>>();
    sig.functions = lib.at("signature").at("functions").get<std::map<std::string, int>>();
    c.library = TheoremLibrary(std::move(sig));
    for (const auto& f : lib.at("facts"))
      c.library.add_fact(f.at("name").get<std::string>(), parse_formula(f.at("formula").get<std::string>()));

    if (fs::is_directory(root / "certs")) {
      std::vector<fs::path> files;
      for (const auto& e : fs::directory_iterator(root / "certs")) files.push_back(e.path());
      std::sort(files.begin(), files.end());
      for (const auto& path : files) {
        auto cert = std::make_shared<const Certificate>(
            certificate_from_json(parse_json(read_file(path.string()), path.filename().string())));
        std::string id = c.certificates.add(cert);
        if (path.filename().string() != "cert-" + id + ".json")
          throw Error("certificate file " + path.filename().string() + " does not match its content");
      }
    }

    for (const auto& line : lines_of(read_file((root / "theorems.jsonl").string()))) {
      json j = parse_json(line, "theorems.jsonl");
      Theorem t;
      t.name = j.at("name").get<std::string>();
      t.theory = j.at("theory").get<std::string>();
      t.family = j.at("family").get<std::string>();
      t.statement = parse_formula(j.at("statement").get<std::string>());
      for (const auto& s : j.at("proof")) t.ground_truth_proof.push_back(parse_step(s.get<std::string>(), &c.certificates));
      c.theorems.push_back(std::move(t));
    }

    int n = 0;
    for (const auto& line : lines_of(read_file((root / "datapoints.jsonl").string())))
      c.datapoints.push_back(parse_datapoint(line, ++n));

    json sp = parse_json(read_file((root / "split.json").string()), "split.json");
    c.fractions = sp.at("fractions").get<std::array<double, 3>>();
    c.split_seed = sp.at("seed").get<uint64_t>();
    for (const auto& [name, s] : sp.at("assignment").items()) c.split[name] = split_from_string(s.get<std::string>());

    c.model = model_from_json(parse_json(read_file((root / "model.json").string()), "model.json"));
  } catch (const json::exception& e) {
    throw Error("malformed corpus in '" + dir + "': " + e.what());
  }
  return c;
}

}  // namespace thor
