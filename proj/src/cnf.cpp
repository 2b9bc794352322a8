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

#include "thor/cnf.hpp"

#include <algorithm>
#include <functional>
#include <numeric>
#include <set>

namespace thor {

std::string to_string(const Literal& l) {
  std::string out = l.positive ? "" : "~";
  out += to_string(make_atom(l.predicate, l.args));
  return out;
}

std::string to_string(const Clause& c) {
  if (c.empty()) return "$false";
  std::vector<std::string> parts;
  parts.reserve(c.size());
  for (const auto& l : c) parts.push_back(to_string(l));
  return join(parts, " | ");
}

Literal parse_literal(std::string_view text) {
  FormulaParser p(text, FormulaParser::VarMode::UpperCase);
  Literal l;
  if (p.accept(TokenKind::Not)) l.positive = false;
  Formula f = p.parse_formula();
  if (!p.at_end() || f->kind != FormulaKind::Atom)
    p.fail("expected a literal");
  l.predicate = f->name;
  l.args = f->args;
  return l;
}

Literal apply_subst(const Literal& l, const Substitution& s) {
  Literal out{l.positive, l.predicate, {}};
  out.args.reserve(l.args.size());
  for (const auto& a : l.args) out.args.push_back(apply_subst(a, s));
  return out;
}

bool literal_equal(const Literal& a, const Literal& b) {
  if (a.positive != b.positive || a.predicate != b.predicate ||
      a.args.size() != b.args.size())
    return false;
  for (size_t i = 0; i < a.args.size(); ++i)
    if (!term_equal(a.args[i], b.args[i])) return false;
  return true;
}

namespace {

void print_masked(const Term& t, std::string& out) {
  if (t->is_var) {
    out += '?';
    return;
  }
  out += t->name;
  if (t->args.empty()) return;
  out += '(';
  for (size_t i = 0; i < t->args.size(); ++i) {
    if (i) out += ',';
    print_masked(t->args[i], out);
  }
  out += ')';
}

std::string masked(const Literal& l) {
  std::string out = l.positive ? "" : "~";
  out += l.predicate;
  out += '(';
  for (size_t i = 0; i < l.args.size(); ++i) {
    if (i) out += ',';
    print_masked(l.args[i], out);
  }
  out += ')';
  return out;
}

void collect_vars(const Term& t, std::vector<std::string>& order,
                  std::set<std::string>& seen) {
  if (t->is_var) {
    if (seen.insert(t->name).second) order.push_back(t->name);
    return;
  }
  for (const auto& a : t->args) collect_vars(a, order, seen);
}

}  // namespace

Clause normalize_clause(Clause c) {
  std::vector<std::string> keys;
  keys.reserve(c.size());
  for (const auto& l : c) keys.push_back(masked(l));
  std::vector<size_t> idx(c.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(),
                   [&](size_t a, size_t b) { return keys[a] < keys[b]; });

  std::vector<std::string> order;
  std::set<std::string> seen;
  for (size_t i : idx)
    for (const auto& a : c[i].args) collect_vars(a, order, seen);
  Substitution rename;
  for (size_t i = 0; i < order.size(); ++i)
    rename[order[i]] = make_var("X" + std::to_string(i));

  std::vector<std::pair<std::string, Literal>> printed;
  printed.reserve(c.size());
  for (size_t i : idx) {
    Literal l = apply_subst(c[i], rename);
    printed.emplace_back(to_string(l), std::move(l));
  }
  std::stable_sort(printed.begin(), printed.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });
  Clause out;
  out.reserve(printed.size());
  for (size_t i = 0; i < printed.size(); ++i) {
    if (i && printed[i].first == printed[i - 1].first) continue;
    out.push_back(std::move(printed[i].second));
  }
  return out;
}

bool is_tautology(const Clause& c) {
  for (size_t i = 0; i < c.size(); ++i)
    for (size_t j = i + 1; j < c.size(); ++j) {
      if (c[i].positive == c[j].positive) continue;
      Literal flipped = c[j];
      flipped.positive = !flipped.positive;
      if (literal_equal(c[i], flipped)) return true;
    }
  return false;
}

namespace {

bool match_term(const Term& pattern, const Term& target, Substitution& s,
                std::vector<std::string>& trail) {
  if (pattern->is_var) {
    auto it = s.find(pattern->name);
    if (it != s.end()) return term_equal(it->second, target);
    s.emplace(pattern->name, target);
    trail.push_back(pattern->name);
    return true;
  }
  if (target->is_var || pattern->name != target->name ||
      pattern->args.size() != target->args.size())
    return false;
  for (size_t i = 0; i < pattern->args.size(); ++i)
    if (!match_term(pattern->args[i], target->args[i], s, trail)) return false;
  return true;
}

bool subsumes_from(const Clause& g, size_t i, const Clause& d, Substitution& s) {
  if (i == g.size()) return true;
  const Literal& l = g[i];
  for (const auto& m : d) {
    if (m.positive != l.positive || m.predicate != l.predicate ||
        m.args.size() != l.args.size())
      continue;
    std::vector<std::string> trail;
    bool ok = true;
    for (size_t k = 0; k < l.args.size() && ok; ++k)
      ok = match_term(l.args[k], m.args[k], s, trail);
    if (ok && subsumes_from(g, i + 1, d, s)) return true;
    for (const auto& v : trail) s.erase(v);
  }
  return false;
}

}  // namespace

bool subsumes(const Clause& general, const Clause& specific) {
  Substitution s;
  return subsumes_from(general, 0, specific, s);
}

const char* to_string(ClauseOrigin::Kind k) {
  switch (k) {
    case ClauseOrigin::Kind::Premise:
      return "premise";
    case ClauseOrigin::Kind::Hypothesis:
      return "hypothesis";
    case ClauseOrigin::Kind::NegatedGoal:
      return "negated_goal";
    case ClauseOrigin::Kind::Derived:
      return "derived";
  }
  return "derived";
}

ClauseOrigin::Kind origin_kind_from_string(std::string_view s) {
  if (s == "premise") return ClauseOrigin::Kind::Premise;
  if (s == "hypothesis") return ClauseOrigin::Kind::Hypothesis;
  if (s == "negated_goal") return ClauseOrigin::Kind::NegatedGoal;
  if (s == "derived") return ClauseOrigin::Kind::Derived;
  throw Error("unknown clause origin '" + std::string(s) + "'");
}

// --- Clausification -----------------------------------------------------------

Formula to_nnf(const Formula& f) {
  std::function<Formula(const Formula&, bool)> go = [&](const Formula& g,
                                                        bool pos) -> Formula {
    switch (g->kind) {
      case FormulaKind::Atom:
        return pos ? g : make_not(g);
      case FormulaKind::Not:
        return go(g->lhs, !pos);
      case FormulaKind::And:
        return pos ? make_and(go(g->lhs, true), go(g->rhs, true))
                   : make_or(go(g->lhs, false), go(g->rhs, false));
      case FormulaKind::Or:
        return pos ? make_or(go(g->lhs, true), go(g->rhs, true))
                   : make_and(go(g->lhs, false), go(g->rhs, false));
      case FormulaKind::Implies:
        return pos ? make_or(go(g->lhs, false), go(g->rhs, true))
                   : make_and(go(g->lhs, true), go(g->rhs, false));
      case FormulaKind::Forall:
        return pos ? make_forall(g->name, go(g->lhs, true))
                   : make_exists(g->name, go(g->lhs, false));
      case FormulaKind::Exists:
        return pos ? make_exists(g->name, go(g->lhs, true))
                   : make_forall(g->name, go(g->lhs, false));
    }
    return g;
  };
  return go(f, true);
}

namespace {

class Clausifier {
 public:
  explicit Clausifier(size_t max_clauses) : max_clauses_(max_clauses) {}

  std::vector<Clause> run(const Formula& f, std::vector<std::string>& skolems) {
    skolems_ = &skolems;
    next_var_ = 0;
    Substitution env;
    std::vector<Term> universals;
    Formula matrix = skolemize(to_nnf(f), env, universals);
    return cnf(matrix);
  }

 private:
  Formula skolemize(const Formula& f, const Substitution& env,
                    std::vector<Term>& universals) {
    switch (f->kind) {
      case FormulaKind::Atom:
        return apply_subst(f, env);
      case FormulaKind::Not:
        return make_not(skolemize(f->lhs, env, universals));
      case FormulaKind::And:
        return make_and(skolemize(f->lhs, env, universals),
                        skolemize(f->rhs, env, universals));
      case FormulaKind::Or:
        return make_or(skolemize(f->lhs, env, universals),
                       skolemize(f->rhs, env, universals));
      case FormulaKind::Implies:
        throw InvariantError("implication survived NNF");
      case FormulaKind::Forall: {
        Term v = make_var("V" + std::to_string(next_var_++));
        Substitution inner = env;
        inner[f->name] = v;
        universals.push_back(v);
        Formula body = skolemize(f->lhs, inner, universals);
        universals.pop_back();
        return body;
      }
      case FormulaKind::Exists: {
        std::string sym = "_sk" + std::to_string(skolem_counter_++);
        skolems_->push_back(sym);
        Substitution inner = env;
        inner[f->name] = make_app(sym, universals);
        return skolemize(f->lhs, inner, universals);
      }
    }
    return f;
  }

  std::vector<Clause> cnf(const Formula& f) {
    switch (f->kind) {
      case FormulaKind::Atom:
        return {Clause{Literal{true, f->name, f->args}}};
      case FormulaKind::Not:
        return {Clause{Literal{false, f->lhs->name, f->lhs->args}}};
      case FormulaKind::And: {
        auto a = cnf(f->lhs);
        auto b = cnf(f->rhs);
        a.insert(a.end(), std::make_move_iterator(b.begin()),
                 std::make_move_iterator(b.end()));
        return a;
      }
      case FormulaKind::Or: {
        auto a = cnf(f->lhs);
        auto b = cnf(f->rhs);
        if (a.size() * b.size() > max_clauses_)
          throw Error("clausification exceeds " + std::to_string(max_clauses_) +
                      " clauses");
        std::vector<Clause> out;
        out.reserve(a.size() * b.size());
        for (const auto& x : a)
          for (const auto& y : b) {
            Clause c = x;
            c.insert(c.end(), y.begin(), y.end());
            out.push_back(std::move(c));
          }
        return out;
      }
      default:
        throw InvariantError("unexpected connective in clausified matrix");
    }
  }

  size_t max_clauses_;
  int next_var_ = 0;
  int skolem_counter_ = 0;
  std::vector<std::string>* skolems_ = nullptr;
};

}  // namespace

ClausifyResult clausify(const std::vector<NamedFormula>& formulas,
                        const Formula& negated_goal, size_t max_clauses) {
  ClausifyResult result;
  Clausifier clausifier(max_clauses);
  size_t total = 0;

  auto add = [&](ClauseOrigin::Kind kind, const std::string& name,
                 const Formula& f) {
    std::string key = std::string(to_string(kind)) + ":" + name;
    auto& skolems = result.skolems[key];
    std::set<std::string> seen;
    int index = 0;
    for (auto& raw : clausifier.run(f, skolems)) {
      Clause c = normalize_clause(std::move(raw));
      if (is_tautology(c)) continue;
      if (!seen.insert(to_string(c)).second) continue;
      if (++total > max_clauses)
        throw Error("clausification exceeds " + std::to_string(max_clauses) +
                    " clauses");
      result.clauses.push_back({ClauseOrigin{kind, name, index++}, std::move(c)});
    }
  };

  for (const auto& nf : formulas) add(nf.kind, nf.name, nf.formula);
  add(ClauseOrigin::Kind::NegatedGoal, "goal", negated_goal);
  return result;
}

}  // namespace thor
