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

#include "thor/kernel.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>

namespace thor {

namespace {

// Index N of a name of the form <prefix>N, or -1.
int suffix_index(const std::string& name, std::string_view prefix) {
  if (name.size() <= prefix.size() || name.compare(0, prefix.size(), prefix) != 0)
    return -1;
  int v = 0;
  auto first = name.data() + prefix.size(), last = name.data() + name.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last) return -1;
  return v;
}

// Prints with bound variables renamed by binding depth, so that two formulas
// print identically iff they are alpha-equivalent.
void canonical_term(const Term& t, std::vector<std::string>& scope,
                    std::string& out) {
  if (t->is_var) {
    for (size_t i = scope.size(); i-- > 0;)
      if (scope[i] == t->name) {
        out += '%';
        out += std::to_string(i);
        return;
      }
    out += '?';
    out += t->name;
    return;
  }
  out += t->name;
  if (t->args.empty()) return;
  out += '(';
  for (size_t i = 0; i < t->args.size(); ++i) {
    if (i) out += ',';
    canonical_term(t->args[i], scope, out);
  }
  out += ')';
}

void canonical_formula(const Formula& f, std::vector<std::string>& scope,
                       std::string& out) {
  switch (f->kind) {
    case FormulaKind::Atom:
      out += f->name;
      out += '(';
      for (size_t i = 0; i < f->args.size(); ++i) {
        if (i) out += ',';
        canonical_term(f->args[i], scope, out);
      }
      out += ')';
      return;
    case FormulaKind::Not:
      out += "~[";
      canonical_formula(f->lhs, scope, out);
      out += ']';
      return;
    case FormulaKind::And:
    case FormulaKind::Or:
    case FormulaKind::Implies:
      out += f->kind == FormulaKind::And ? "&[" : f->kind == FormulaKind::Or ? "|[" : ">[";
      canonical_formula(f->lhs, scope, out);
      out += ';';
      canonical_formula(f->rhs, scope, out);
      out += ']';
      return;
    case FormulaKind::Forall:
    case FormulaKind::Exists:
      out += f->kind == FormulaKind::Forall ? "A[" : "E[";
      scope.push_back(f->name);
      canonical_formula(f->lhs, scope, out);
      scope.pop_back();
      out += ']';
      return;
  }
}

std::string canonical(const Formula& f) {
  std::vector<std::string> scope;
  std::string out;
  canonical_formula(f, scope, out);
  return out;
}

}  // namespace

// --- States -------------------------------------------------------------------

const Hypothesis* Goal::find(const std::string& name) const {
  for (const auto& h : hypotheses)
    if (h.name == name) return &h;
  return nullptr;
}

ProofState ProofState::initial(const Formula& statement) {
  ProofState s;
  s.goals.push_back(Goal{{}, statement});
  std::set<std::string> consts;
  collect_constants(statement, consts);
  for (const auto& c : consts)
    if (suffix_index(c, "_c") >= 0) s.local_constants.insert(c);
  return s;
}

bool is_proved(const ProofState& s) { return s.goals.empty(); }

// --- Steps --------------------------------------------------------------------

ProofStep ProofStep::simple(Kind k) {
  ProofStep s;
  s.kind = k;
  return s;
}

ProofStep ProofStep::exists(Term t) {
  ProofStep s;
  s.kind = Kind::ExistsWitness;
  s.witness = std::move(t);
  return s;
}

ProofStep ProofStep::named(Kind k, std::string name) {
  ProofStep s;
  s.kind = k;
  s.name = std::move(name);
  return s;
}

ProofStep ProofStep::by_certificate(std::shared_ptr<const Certificate> cert,
                                    std::vector<std::string> premises) {
  ProofStep s;
  s.kind = Kind::ByCertificate;
  s.name = certificate_id(*cert);
  s.certificate = std::move(cert);
  s.premises = std::move(premises);
  return s;
}

ProofStep ProofStep::hammer() { return simple(Kind::Hammer); }

std::string to_string(const ProofStep& step) {
  using K = ProofStep::Kind;
  switch (step.kind) {
    case K::Intro: return "intro";
    case K::Split: return "split";
    case K::Left: return "left";
    case K::Right: return "right";
    case K::ExistsWitness: return "exists " + to_string(step.witness);
    case K::Assumption: return "assumption";
    case K::Destruct: return "destruct " + step.name;
    case K::Cases: return "cases " + step.name;
    case K::Apply: return "apply " + step.name;
    case K::ByCertificate:
      return "by_cert " + step.name + " [" + join(step.premises, ",") + "]";
    case K::Hammer: return "<hammer>";
  }
  return "";
}

ProofStep parse_step(std::string_view text, const CertificateStore* store) {
  using K = ProofStep::Kind;
  FormulaParser p(text);
  if (p.accept(TokenKind::Hammer)) {
    if (!p.at_end()) p.fail("trailing input");
    return ProofStep::hammer();
  }
  if (p.peek().kind != TokenKind::Ident) p.fail("expected a proof step");
  std::string word = p.next().text;
  auto name_arg = [&](const char* what) {
    if (p.peek().kind != TokenKind::Ident) p.fail(std::string("expected ") + what);
    return p.next().text;
  };
  ProofStep step;
  if (word == "intro") {
    step = ProofStep::simple(K::Intro);
  } else if (word == "split") {
    step = ProofStep::simple(K::Split);
  } else if (word == "left") {
    step = ProofStep::simple(K::Left);
  } else if (word == "right") {
    step = ProofStep::simple(K::Right);
  } else if (word == "assumption") {
    step = ProofStep::simple(K::Assumption);
  } else if (word == "exists") {
    step = ProofStep::exists(p.parse_term());
  } else if (word == "destruct") {
    step = ProofStep::named(K::Destruct, name_arg("hypothesis name"));
  } else if (word == "cases") {
    step = ProofStep::named(K::Cases, name_arg("hypothesis name"));
  } else if (word == "apply") {
    step = ProofStep::named(K::Apply, name_arg("fact name"));
  } else if (word == "by_cert") {
    step.kind = K::ByCertificate;
    step.name = name_arg("certificate id");
    if (store) step.certificate = store->find(step.name);
    if (p.accept(TokenKind::LBracket)) {
      if (!p.accept(TokenKind::RBracket)) {
        do {
          step.premises.push_back(name_arg("premise name"));
        } while (p.accept(TokenKind::Comma));
        p.expect(TokenKind::RBracket, "']'");
      }
    } else if (step.certificate) {
      step.premises = step.certificate->premise_names();
    }
  } else {
    p.fail("unknown tactic '" + word + "'");
  }
  if (!p.at_end()) p.fail("trailing input");
  return step;
}

// --- Library ------------------------------------------------------------------

void TheoremLibrary::add_fact(std::string name, Formula formula) {
  if (!is_identifier(name)) throw Error("invalid fact name '" + name + "'");
  if (index_.count(name)) throw Error("duplicate fact name '" + name + "'");
  if (!is_closed(formula)) throw Error("fact " + name + " is not closed");
  std::string err = check_well_formed(formula, signature_);
  if (!err.empty()) throw Error("fact " + name + ": " + err);
  index_.emplace(name, facts_.size());
  by_text_[canonical(formula)].push_back(facts_.size());
  std::set<std::string> syms;
  collect_symbols(formula, syms);
  for (const auto& sym : syms) by_symbol_[sym].push_back(facts_.size());
  symbols_.emplace_back(syms.begin(), syms.end());
  facts_.push_back({std::move(name), std::move(formula)});
}

const TheoremLibrary::Fact* TheoremLibrary::find(const std::string& name) const {
  auto it = index_.find(name);
  return it == index_.end() ? nullptr : &facts_[it->second];
}

int TheoremLibrary::position(const std::string& name) const {
  auto it = index_.find(name);
  return it == index_.end() ? -1 : static_cast<int>(it->second);
}

const std::vector<size_t>& TheoremLibrary::facts_with_symbol(
    const std::string& symbol) const {
  static const std::vector<size_t> kNone;
  auto it = by_symbol_.find(symbol);
  return it == by_symbol_.end() ? kNone : it->second;
}

bool TheoremLibrary::contains_alpha(const Formula& f) const {
  return by_text_.count(canonical(f)) > 0;
}

// --- apply_step ---------------------------------------------------------------

namespace {

class FormulaUnifier {
 public:
  explicit FormulaUnifier(const std::set<std::string>& flex) : flex_(flex) {}

  bool unify(const Formula& a, const Formula& b, int depth) {
    if (a->kind != b->kind) return false;
    switch (a->kind) {
      case FormulaKind::Atom:
        if (a->name != b->name || a->args.size() != b->args.size()) return false;
        for (size_t i = 0; i < a->args.size(); ++i)
          if (!unify(a->args[i], b->args[i])) return false;
        return true;
      case FormulaKind::Not:
        return unify(a->lhs, b->lhs, depth);
      case FormulaKind::And:
      case FormulaKind::Or:
      case FormulaKind::Implies:
        return unify(a->lhs, b->lhs, depth) && unify(a->rhs, b->rhs, depth);
      case FormulaKind::Forall:
      case FormulaKind::Exists: {
        // Bound variables on both sides become the same rigid marker.
        Term marker = make_var("%" + std::to_string(depth));
        return unify(substitute(a->lhs, a->name, marker),
                     substitute(b->lhs, b->name, marker), depth + 1);
      }
    }
    return false;
  }

  Term resolve(const Term& t) const {
    Term w = walk(t);
    if (w->is_var || w->args.empty()) return w;
    std::vector<Term> args;
    for (const auto& a : w->args) args.push_back(resolve(a));
    return make_app(w->name, std::move(args));
  }

  bool bound(const std::string& v) const { return subst_.count(v) > 0; }

 private:
  bool is_flex(const Term& t) const { return t->is_var && flex_.count(t->name); }

  Term walk(Term t) const {
    while (is_flex(t)) {
      auto it = subst_.find(t->name);
      if (it == subst_.end()) break;
      t = it->second;
    }
    return t;
  }

  bool occurs(const std::string& v, const Term& t) const {
    Term w = walk(t);
    if (w->is_var) return w->name == v;
    for (const auto& a : w->args)
      if (occurs(v, a)) return true;
    return false;
  }

  bool unify(const Term& x, const Term& y) {
    Term a = walk(x), b = walk(y);
    if (a->is_var && b->is_var && a->name == b->name) return true;
    if (is_flex(a)) {
      if (occurs(a->name, b)) return false;
      subst_[a->name] = b;
      return true;
    }
    if (is_flex(b)) return unify(b, a);
    if (a->is_var || b->is_var) return false;
    if (a->name != b->name || a->args.size() != b->args.size()) return false;
    for (size_t i = 0; i < a->args.size(); ++i)
      if (!unify(a->args[i], b->args[i])) return false;
    return true;
  }

  const std::set<std::string>& flex_;
  Substitution subst_;
};

bool contains_var(const Term& t) {
  if (t->is_var) return true;
  for (const auto& a : t->args)
    if (contains_var(a)) return true;
  return false;
}

StepResult fail(std::string message) {
  StepResult r;
  r.message = std::move(message);
  return r;
}

int next_hyp_index(const ProofState& s) {
  int best = -1;
  for (const auto& g : s.goals)
    for (const auto& h : g.hypotheses) best = std::max(best, suffix_index(h.name, "h"));
  return best + 1;
}

int next_const_index(const ProofState& s) {
  int best = -1;
  for (const auto& c : s.local_constants) best = std::max(best, suffix_index(c, "_c"));
  return best + 1;
}

void refresh_local_constants(ProofState& s) {
  std::set<std::string> consts;
  for (const auto& g : s.goals) {
    for (const auto& h : g.hypotheses) collect_constants(h.formula, consts);
    collect_constants(g.conclusion, consts);
  }
  s.local_constants.clear();
  for (const auto& c : consts)
    if (suffix_index(c, "_c") >= 0) s.local_constants.insert(c);
}

// Replaces the first goal with `replacement`.
StepResult replace_first(const ProofState& state, std::vector<Goal> replacement) {
  ProofState next;
  next.goals = std::move(replacement);
  next.goals.insert(next.goals.end(), state.goals.begin() + 1, state.goals.end());
  next.step_count = state.step_count + 1;
  refresh_local_constants(next);
  StepResult r;
  r.state = std::move(next);
  return r;
}

std::vector<Hypothesis> without(const std::vector<Hypothesis>& hs,
                                const std::string& name) {
  std::vector<Hypothesis> out;
  for (const auto& h : hs)
    if (h.name != name) out.push_back(h);
  return out;
}

StepResult apply_fact(const ProofState& state, const Goal& goal,
                      const std::string& fact_name,
                      const TheoremLibrary& library) {
  const auto* fact = library.find(fact_name);
  if (!fact) return fail("unknown fact " + fact_name);
  // Normalize to forall-prefix over an implication chain P1 -> ... -> Pn -> Q.
  Formula f = fact->formula;
  std::set<std::string> vars;
  while (f->kind == FormulaKind::Forall) {
    vars.insert(f->name);
    f = f->lhs;
  }
  std::vector<Formula> premises;
  while (f->kind == FormulaKind::Implies) {
    premises.push_back(f->lhs);
    f = f->rhs;
  }
  if (f->kind == FormulaKind::Exists || f->kind == FormulaKind::Forall)
    return fail("fact " + fact_name + " is not an implication chain");
  FormulaUnifier u(vars);
  if (!u.unify(f, goal.conclusion, 0))
    return fail("conclusion does not unify with " + fact_name);
  Substitution sigma;
  for (const auto& v : vars) {
    if (!u.bound(v)) return fail("fact variable " + v + " left uninstantiated");
    Term t = u.resolve(make_var(v));
    if (contains_var(t)) return fail("fact variable " + v + " escapes its scope");
    sigma[v] = t;
  }
  std::vector<Goal> subgoals;
  for (const auto& p : premises)
    subgoals.push_back(Goal{goal.hypotheses, apply_subst(p, sigma)});
  return replace_first(state, std::move(subgoals));
}

}  // namespace

StepResult apply_step(const ProofState& state, const ProofStep& step,
                      const TheoremLibrary& library) {
  using K = ProofStep::Kind;
  if (state.goals.empty()) {
    StepResult r;
    r.error = StepErrorKind::NoOpenGoal;
    r.message = "no open goal";
    return r;
  }
  const Goal& goal = state.goals.front();
  const Formula& concl = goal.conclusion;

  switch (step.kind) {
    case K::Intro: {
      if (concl->kind == FormulaKind::Implies) {
        Goal g = goal;
        g.hypotheses.push_back(
            {"h" + std::to_string(next_hyp_index(state)), concl->lhs});
        g.conclusion = concl->rhs;
        return replace_first(state, {std::move(g)});
      }
      if (concl->kind == FormulaKind::Forall) {
        Term c = make_app("_c" + std::to_string(next_const_index(state)));
        return replace_first(state,
                             {Goal{goal.hypotheses, substitute(concl->lhs, concl->name, c)}});
      }
      return fail("intro needs an implication or universal goal");
    }
    case K::Split:
      if (concl->kind != FormulaKind::And) return fail("split needs a conjunction");
      return replace_first(state, {Goal{goal.hypotheses, concl->lhs},
                                   Goal{goal.hypotheses, concl->rhs}});
    case K::Left:
    case K::Right:
      if (concl->kind != FormulaKind::Or) return fail("left/right need a disjunction");
      return replace_first(
          state, {Goal{goal.hypotheses, step.kind == K::Left ? concl->lhs : concl->rhs}});
    case K::ExistsWitness: {
      if (concl->kind != FormulaKind::Exists) return fail("exists needs an existential goal");
      if (!step.witness || !term_is_ground(step.witness)) return fail("witness must be ground");
      std::string err =
          check_well_formed(step.witness, library.signature(), state.local_constants);
      if (!err.empty()) return fail("ill-formed witness: " + err);
      return replace_first(
          state, {Goal{goal.hypotheses, substitute(concl->lhs, concl->name, step.witness)}});
    }
    case K::Assumption:
      for (const auto& h : goal.hypotheses)
        if (alpha_equal(h.formula, concl)) return replace_first(state, {});
      if (library.contains_alpha(concl)) return replace_first(state, {});
      return fail("conclusion matches no hypothesis or fact");
    case K::Destruct: {
      const Hypothesis* h = goal.find(step.name);
      if (!h) return fail("unknown hypothesis " + step.name);
      if (h->formula->kind != FormulaKind::And) return fail("destruct needs a conjunction");
      int k = next_hyp_index(state);
      Goal g{without(goal.hypotheses, step.name), concl};
      g.hypotheses.push_back({"h" + std::to_string(k), h->formula->lhs});
      g.hypotheses.push_back({"h" + std::to_string(k + 1), h->formula->rhs});
      return replace_first(state, {std::move(g)});
    }
    case K::Cases: {
      const Hypothesis* h = goal.find(step.name);
      if (!h) return fail("unknown hypothesis " + step.name);
      if (h->formula->kind != FormulaKind::Or) return fail("cases needs a disjunction");
      std::string fresh = "h" + std::to_string(next_hyp_index(state));
      Goal a{without(goal.hypotheses, step.name), concl};
      Goal b = a;
      a.hypotheses.push_back({fresh, h->formula->lhs});
      b.hypotheses.push_back({fresh, h->formula->rhs});
      return replace_first(state, {std::move(a), std::move(b)});
    }
    case K::Apply:
      return apply_fact(state, goal, step.name, library);
    case K::ByCertificate: {
      if (!step.certificate) return fail("unknown certificate " + step.name);
      std::vector<NamedFormula> premises;
      for (const auto& name : step.premises) {
        const auto* fact = library.find(name);
        if (!fact) return fail("unknown premise " + name);
        premises.push_back({ClauseOrigin::Kind::Premise, name, fact->formula});
      }
      CertificateCheck check = check_certificate(goal, premises, *step.certificate);
      if (!check.ok) return fail("certificate rejected: " + check.message);
      return replace_first(state, {});
    }
    case K::Hammer:
      return fail("<hammer> is resolved by the search, not the kernel");
  }
  return fail("unknown step");
}

ProofCheck check_proof(const Theorem& theorem, const std::vector<ProofStep>& steps,
                       const TheoremLibrary& library) {
  ProofCheck out;
  ProofState state = ProofState::initial(theorem.statement);
  for (size_t i = 0; i < steps.size(); ++i) {
    StepResult r = apply_step(state, steps[i], library);
    if (!r.ok()) {
      out.failing_index = static_cast<int>(i);
      out.message = "step " + std::to_string(i) + " (" + to_string(steps[i]) +
                    "): " + r.message;
      return out;
    }
    state = std::move(*r.state);
  }
  if (!is_proved(state)) {
    out.failing_index = static_cast<int>(steps.size());
    out.message = std::to_string(state.goals.size()) + " goal(s) left open";
    return out;
  }
  out.ok = true;
  return out;
}

// --- Certificate checking -----------------------------------------------------

namespace {

bool clause_vars_ok(const Term& t) {
  if (t->is_var) return suffix_index(t->name, "X") >= 0;
  for (const auto& a : t->args)
    if (!clause_vars_ok(a)) return false;
  return true;
}

bool clause_vars_ok(const Clause& c) {
  for (const auto& l : c)
    for (const auto& a : l.args)
      if (!clause_vars_ok(a)) return false;
  return true;
}

Term rename_xy(const Term& t) {
  if (t->is_var) return make_var("Y" + t->name.substr(1));
  if (t->args.empty()) return t;
  std::vector<Term> args;
  for (const auto& a : t->args) args.push_back(rename_xy(a));
  return make_app(t->name, std::move(args));
}

Clause rename_apart(const Clause& c) {
  Clause out = c;
  for (auto& l : out)
    for (auto& a : l.args) a = rename_xy(a);
  return out;
}

bool same_atom(const Literal& a, const Literal& b) {
  if (a.predicate != b.predicate || a.args.size() != b.args.size()) return false;
  for (size_t i = 0; i < a.args.size(); ++i)
    if (!term_equal(a.args[i], b.args[i])) return false;
  return true;
}

CertificateCheck reject(int index, std::string message) {
  CertificateCheck c;
  c.failing_inference = index;
  c.message = std::move(message);
  return c;
}

}  // namespace

CertificateCheck check_certificate(const Goal& goal,
                                   const std::vector<NamedFormula>& premises,
                                   const Certificate& cert) {
  std::vector<NamedFormula> formulas;
  for (const auto& h : goal.hypotheses)
    formulas.push_back({ClauseOrigin::Kind::Hypothesis, h.name, h.formula});
  for (const auto& p : premises) {
    NamedFormula nf = p;
    nf.kind = ClauseOrigin::Kind::Premise;
    formulas.push_back(nf);
  }
  ClausifyResult cnf;
  try {
    cnf = clausify(formulas, make_not(goal.conclusion));
  } catch (const Error& e) {
    return reject(-1, e.what());
  }

  std::map<int, Clause> table;
  for (const auto& in : cert.inputs) {
    if (table.count(in.id)) return reject(-1, "duplicate clause id " + std::to_string(in.id));
    if (!clause_vars_ok(in.clause)) return reject(-1, "bad variable names in input");
    const InputClause* ours = nullptr;
    for (const auto& c : cnf.clauses)
      if (c.origin == in.origin) {
        ours = &c;
        break;
      }
    if (!ours)
      return reject(-1, std::string("input ") + std::to_string(in.id) + " (" +
                            to_string(in.origin.kind) + " " + in.origin.name +
                            ") is not a clause of the problem");
    if (!subsumes(ours->clause, in.clause))
      return reject(-1, "input " + std::to_string(in.id) + " does not match its origin");
    table.emplace(in.id, in.clause);
  }

  for (size_t k = 0; k < cert.inferences.size(); ++k) {
    const auto& inf = cert.inferences[k];
    int idx = static_cast<int>(k);
    if (table.count(inf.id)) return reject(idx, "duplicate clause id");
    if (!clause_vars_ok(inf.clause)) return reject(idx, "bad variable names");
    for (int p : inf.parents)
      if (!table.count(p) || p >= inf.id) return reject(idx, "parent not yet derived");

    Clause derived;
    if (inf.rule == Certificate::Inference::Rule::Resolve) {
      if (inf.parents.size() != 2 || inf.literals.size() != 2)
        return reject(idx, "resolution needs two parents");
      const Clause& c1 = table.at(inf.parents[0]);
      Clause c2 = rename_apart(table.at(inf.parents[1]));
      int i1 = inf.literals[0], i2 = inf.literals[1];
      if (i1 < 0 || i2 < 0 || i1 >= static_cast<int>(c1.size()) ||
          i2 >= static_cast<int>(c2.size()))
        return reject(idx, "literal index out of range");
      Literal l1 = apply_subst(c1[static_cast<size_t>(i1)], inf.unifier);
      Literal l2 = apply_subst(c2[static_cast<size_t>(i2)], inf.unifier);
      if (l1.positive == l2.positive || !same_atom(l1, l2))
        return reject(idx, "unifier does not make the literals complementary");
      for (size_t i = 0; i < c1.size(); ++i)
        if (static_cast<int>(i) != i1) derived.push_back(apply_subst(c1[i], inf.unifier));
      for (size_t i = 0; i < c2.size(); ++i)
        if (static_cast<int>(i) != i2) derived.push_back(apply_subst(c2[i], inf.unifier));
    } else {
      if (inf.parents.size() != 1 || inf.literals.size() < 2)
        return reject(idx, "factoring needs one parent and two literals");
      const Clause& c = table.at(inf.parents[0]);
      std::set<int> merged;
      for (int i : inf.literals) {
        if (i < 0 || i >= static_cast<int>(c.size()) || !merged.insert(i).second)
          return reject(idx, "bad factoring literal index");
      }
      Literal first = apply_subst(c[static_cast<size_t>(inf.literals[0])], inf.unifier);
      for (size_t j = 1; j < inf.literals.size(); ++j) {
        Literal other = apply_subst(c[static_cast<size_t>(inf.literals[j])], inf.unifier);
        if (other.positive != first.positive || !same_atom(first, other))
          return reject(idx, "unifier does not merge the literals");
      }
      for (size_t i = 0; i < c.size(); ++i) {
        if (merged.count(static_cast<int>(i)) && static_cast<int>(i) != inf.literals[0])
          continue;
        derived.push_back(apply_subst(c[i], inf.unifier));
      }
    }
    if (!subsumes(derived, inf.clause))
      return reject(idx, "recorded clause is not implied by its inference");
    table.emplace(inf.id, inf.clause);
  }

  auto it = table.find(cert.conclusion);
  if (it == table.end()) return reject(-1, "conclusion id not derived");
  if (!it->second.empty()) return reject(-1, "conclusion is not the empty clause");
  CertificateCheck ok;
  ok.ok = true;
  return ok;
}

// --- Goal/state text ----------------------------------------------------------

std::string to_string(const Goal& g) {
  std::string out;
  for (size_t i = 0; i < g.hypotheses.size(); ++i) {
    if (i) out += ", ";
    out += g.hypotheses[i].name;
    out += ": ";
    out += to_string(g.hypotheses[i].formula);
  }
  if (!out.empty()) out += ' ';
  out += kTurnstile;
  out += ' ';
  out += to_string(g.conclusion);
  return out;
}

std::string to_string(const ProofState& s) {
  std::vector<std::string> parts;
  for (const auto& g : s.goals) parts.push_back(to_string(g));
  return join(parts, " || ");
}

static Goal parse_goal_tokens(FormulaParser& p) {
  Goal g;
  if (!p.accept(TokenKind::Turnstile)) {
    while (true) {
      if (p.peek().kind != TokenKind::Ident) p.fail("expected hypothesis name");
      std::string name = p.next().text;
      p.expect(TokenKind::Colon, "':'");
      g.hypotheses.push_back({name, p.parse_formula()});
      if (p.accept(TokenKind::Comma)) continue;
      p.expect(TokenKind::Turnstile, "turnstile");
      break;
    }
  }
  g.conclusion = p.parse_formula();
  return g;
}

Goal parse_goal(std::string_view text) {
  FormulaParser p(text);
  Goal g = parse_goal_tokens(p);
  if (!p.at_end()) p.fail("trailing input");
  return g;
}

ProofState parse_state(std::string_view text) {
  ProofState s;
  FormulaParser p(text);
  if (!p.at_end()) {
    do {
      s.goals.push_back(parse_goal_tokens(p));
    } while (p.accept(TokenKind::GoalSep));
    if (!p.at_end()) p.fail("trailing input");
  }
  refresh_local_constants(s);
  return s;
}

// --- Finite models ------------------------------------------------------------

int eval_term(const Term& t, const FiniteModel& m,
              const std::map<std::string, int>& env) {
  if (t->is_var) {
    auto it = env.find(t->name);
    if (it == env.end()) throw UnknownSymbol("unbound variable " + t->name);
    return it->second;
  }
  auto it = m.functions.find(t->name);
  if (it == m.functions.end()) throw UnknownSymbol("unknown function " + t->name);
  if (it->second.arity != static_cast<int>(t->args.size()))
    throw UnknownSymbol("arity mismatch for " + t->name);
  size_t idx = 0;
  for (const auto& a : t->args)
    idx = idx * static_cast<size_t>(m.domain_size) + static_cast<size_t>(eval_term(a, m, env));
  return it->second.values.at(idx);
}

bool eval_in_model(const Formula& f, const FiniteModel& m,
                   std::map<std::string, int>& env) {
  switch (f->kind) {
    case FormulaKind::Atom: {
      auto it = m.predicates.find(f->name);
      if (it == m.predicates.end()) throw UnknownSymbol("unknown predicate " + f->name);
      if (it->second.arity != static_cast<int>(f->args.size()))
        throw UnknownSymbol("arity mismatch for " + f->name);
      size_t idx = 0;
      for (const auto& a : f->args)
        idx = idx * static_cast<size_t>(m.domain_size) +
              static_cast<size_t>(eval_term(a, m, env));
      return it->second.values.at(idx) != 0;
    }
    case FormulaKind::Not:
      return !eval_in_model(f->lhs, m, env);
    case FormulaKind::And:
      return eval_in_model(f->lhs, m, env) && eval_in_model(f->rhs, m, env);
    case FormulaKind::Or:
      return eval_in_model(f->lhs, m, env) || eval_in_model(f->rhs, m, env);
    case FormulaKind::Implies:
      return !eval_in_model(f->lhs, m, env) || eval_in_model(f->rhs, m, env);
    case FormulaKind::Forall:
    case FormulaKind::Exists: {
      bool universal = f->kind == FormulaKind::Forall;
      auto saved = env.find(f->name) != env.end()
                       ? std::optional<int>(env[f->name])
                       : std::nullopt;
      bool result = universal;
      for (int d = 0; d < m.domain_size; ++d) {
        env[f->name] = d;
        bool v = eval_in_model(f->lhs, m, env);
        if (universal && !v) {
          result = false;
          break;
        }
        if (!universal && v) {
          result = true;
          break;
        }
      }
      if (saved)
        env[f->name] = *saved;
      else
        env.erase(f->name);
      return result;
    }
  }
  return false;
}

bool eval_in_model(const Formula& f, const FiniteModel& m) {
  std::map<std::string, int> env;
  return eval_in_model(f, m, env);
}

}  // namespace thor
