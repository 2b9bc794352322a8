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

#include "thor/logic.hpp"

#include <algorithm>
#include <cctype>

namespace thor {

Term make_var(std::string name) {
  auto n = std::make_shared<TermNode>();
  n->is_var = true;
  n->name = std::move(name);
  return n;
}

Term make_app(std::string name, std::vector<Term> args) {
  auto n = std::make_shared<TermNode>();
  n->name = std::move(name);
  n->args = std::move(args);
  return n;
}

bool term_equal(const Term& a, const Term& b) {
  if (a == b) return true;
  if (a->is_var != b->is_var || a->name != b->name ||
      a->args.size() != b->args.size())
    return false;
  for (size_t i = 0; i < a->args.size(); ++i)
    if (!term_equal(a->args[i], b->args[i])) return false;
  return true;
}

bool term_is_ground(const Term& t) {
  if (t->is_var) return false;
  for (const auto& a : t->args)
    if (!term_is_ground(a)) return false;
  return true;
}

static void print_term(const Term& t, std::string& out) {
  out += t->name;
  if (t->is_var || t->args.empty()) return;
  out += '(';
  for (size_t i = 0; i < t->args.size(); ++i) {
    if (i) out += ',';
    print_term(t->args[i], out);
  }
  out += ')';
}

std::string to_string(const Term& t) {
  std::string out;
  print_term(t, out);
  return out;
}

namespace {

std::shared_ptr<FormulaNode> node(FormulaKind k) {
  auto n = std::make_shared<FormulaNode>();
  n->kind = k;
  return n;
}

int precedence(const Formula& f) {
  switch (f->kind) {
    case FormulaKind::Forall:
    case FormulaKind::Exists:
      return 0;
    case FormulaKind::Implies:
      return 1;
    case FormulaKind::Or:
      return 2;
    case FormulaKind::And:
      return 3;
    case FormulaKind::Not:
      return 4;
    case FormulaKind::Atom:
      return 5;
  }
  return 5;
}

void print_formula(const Formula& f, std::string& out);

void print_child(const Formula& f, bool parens, std::string& out) {
  if (parens) out += '(';
  print_formula(f, out);
  if (parens) out += ')';
}

void print_formula(const Formula& f, std::string& out) {
  switch (f->kind) {
    case FormulaKind::Atom:
      out += f->name;
      if (!f->args.empty()) {
        out += '(';
        for (size_t i = 0; i < f->args.size(); ++i) {
          if (i) out += ',';
          print_term(f->args[i], out);
        }
        out += ')';
      }
      return;
    case FormulaKind::Not:
      out += '~';
      print_child(f->lhs, precedence(f->lhs) < 4, out);
      return;
    case FormulaKind::And:
    case FormulaKind::Or:
    case FormulaKind::Implies: {
      int p = precedence(f);
      const char* op = f->kind == FormulaKind::And  ? " & "
                       : f->kind == FormulaKind::Or ? " | "
                                                    : " -> ";
      print_child(f->lhs, precedence(f->lhs) <= p, out);
      out += op;
      print_child(f->rhs, precedence(f->rhs) < p, out);
      return;
    }
    case FormulaKind::Forall:
    case FormulaKind::Exists:
      out += f->kind == FormulaKind::Forall ? "forall " : "exists ";
      out += f->name;
      out += ". ";
      print_formula(f->lhs, out);
      return;
  }
}

}  // namespace

Formula make_atom(std::string pred, std::vector<Term> args) {
  auto n = node(FormulaKind::Atom);
  n->name = std::move(pred);
  n->args = std::move(args);
  return n;
}

Formula make_not(Formula f) {
  auto n = node(FormulaKind::Not);
  n->lhs = std::move(f);
  return n;
}

static Formula make_binary(FormulaKind k, Formula a, Formula b) {
  auto n = node(k);
  n->lhs = std::move(a);
  n->rhs = std::move(b);
  return n;
}

Formula make_and(Formula a, Formula b) {
  return make_binary(FormulaKind::And, std::move(a), std::move(b));
}
Formula make_or(Formula a, Formula b) {
  return make_binary(FormulaKind::Or, std::move(a), std::move(b));
}
Formula make_implies(Formula a, Formula b) {
  return make_binary(FormulaKind::Implies, std::move(a), std::move(b));
}

Formula make_forall(std::string var, Formula body) {
  auto n = node(FormulaKind::Forall);
  n->name = std::move(var);
  n->lhs = std::move(body);
  return n;
}

Formula make_exists(std::string var, Formula body) {
  auto n = node(FormulaKind::Exists);
  n->name = std::move(var);
  n->lhs = std::move(body);
  return n;
}

Formula make_and_all(const std::vector<Formula>& fs) {
  Formula acc = fs.back();
  for (size_t i = fs.size() - 1; i-- > 0;) acc = make_and(fs[i], acc);
  return acc;
}

Formula make_or_all(const std::vector<Formula>& fs) {
  Formula acc = fs.back();
  for (size_t i = fs.size() - 1; i-- > 0;) acc = make_or(fs[i], acc);
  return acc;
}

std::string to_string(const Formula& f) {
  std::string out;
  print_formula(f, out);
  return out;
}

namespace {

using Scope = std::vector<std::string>;

int bound_index(const Scope& s, const std::string& name) {
  for (size_t i = s.size(); i-- > 0;)
    if (s[i] == name) return static_cast<int>(s.size() - 1 - i);
  return -1;
}

bool alpha_term(const Term& a, const Scope& sa, const Term& b,
                const Scope& sb) {
  if (a->is_var != b->is_var) return false;
  if (a->is_var) {
    int ia = bound_index(sa, a->name), ib = bound_index(sb, b->name);
    if (ia != ib) return false;
    return ia >= 0 || a->name == b->name;
  }
  if (a->name != b->name || a->args.size() != b->args.size()) return false;
  for (size_t i = 0; i < a->args.size(); ++i)
    if (!alpha_term(a->args[i], sa, b->args[i], sb)) return false;
  return true;
}

bool alpha_rec(const Formula& a, Scope& sa, const Formula& b, Scope& sb) {
  if (a->kind != b->kind) return false;
  switch (a->kind) {
    case FormulaKind::Atom:
      if (a->name != b->name || a->args.size() != b->args.size()) return false;
      for (size_t i = 0; i < a->args.size(); ++i)
        if (!alpha_term(a->args[i], sa, b->args[i], sb)) return false;
      return true;
    case FormulaKind::Not:
      return alpha_rec(a->lhs, sa, b->lhs, sb);
    case FormulaKind::And:
    case FormulaKind::Or:
    case FormulaKind::Implies:
      return alpha_rec(a->lhs, sa, b->lhs, sb) &&
             alpha_rec(a->rhs, sa, b->rhs, sb);
    case FormulaKind::Forall:
    case FormulaKind::Exists: {
      sa.push_back(a->name);
      sb.push_back(b->name);
      bool ok = alpha_rec(a->lhs, sa, b->lhs, sb);
      sa.pop_back();
      sb.pop_back();
      return ok;
    }
  }
  return false;
}

void free_vars_term(const Term& t, Scope& scope, std::set<std::string>& out) {
  if (t->is_var) {
    if (bound_index(scope, t->name) < 0) out.insert(t->name);
    return;
  }
  for (const auto& a : t->args) free_vars_term(a, scope, out);
}

void free_vars_rec(const Formula& f, Scope& scope, std::set<std::string>& out) {
  switch (f->kind) {
    case FormulaKind::Atom:
      for (const auto& a : f->args) free_vars_term(a, scope, out);
      return;
    case FormulaKind::Not:
      free_vars_rec(f->lhs, scope, out);
      return;
    case FormulaKind::And:
    case FormulaKind::Or:
    case FormulaKind::Implies:
      free_vars_rec(f->lhs, scope, out);
      free_vars_rec(f->rhs, scope, out);
      return;
    case FormulaKind::Forall:
    case FormulaKind::Exists:
      scope.push_back(f->name);
      free_vars_rec(f->lhs, scope, out);
      scope.pop_back();
      return;
  }
}

Term subst_term(const Term& t, const std::string& var, const Term& value) {
  if (t->is_var) return t->name == var ? value : t;
  if (t->args.empty()) return t;
  std::vector<Term> args;
  args.reserve(t->args.size());
  bool changed = false;
  for (const auto& a : t->args) {
    args.push_back(subst_term(a, var, value));
    changed |= args.back() != a;
  }
  return changed ? make_app(t->name, std::move(args)) : t;
}

}  // namespace

bool alpha_equal(const Formula& a, const Formula& b) {
  Scope sa, sb;
  return alpha_rec(a, sa, b, sb);
}

std::set<std::string> free_vars(const Formula& f) {
  std::set<std::string> out;
  Scope scope;
  free_vars_rec(f, scope, out);
  return out;
}

bool is_closed(const Formula& f) { return free_vars(f).empty(); }

Formula substitute(const Formula& f, const std::string& var,
                   const Term& value) {
  switch (f->kind) {
    case FormulaKind::Atom: {
      std::vector<Term> args;
      args.reserve(f->args.size());
      for (const auto& a : f->args) args.push_back(subst_term(a, var, value));
      return make_atom(f->name, std::move(args));
    }
    case FormulaKind::Not:
      return make_not(substitute(f->lhs, var, value));
    case FormulaKind::And:
    case FormulaKind::Or:
    case FormulaKind::Implies:
      return make_binary(f->kind, substitute(f->lhs, var, value),
                         substitute(f->rhs, var, value));
    case FormulaKind::Forall:
    case FormulaKind::Exists: {
      if (f->name == var) return f;
      auto n = node(f->kind);
      n->name = f->name;
      n->lhs = substitute(f->lhs, var, value);
      return n;
    }
  }
  return f;
}

Term apply_subst(const Term& t, const Substitution& s) {
  if (t->is_var) {
    auto it = s.find(t->name);
    return it == s.end() ? t : it->second;
  }
  if (t->args.empty()) return t;
  std::vector<Term> args;
  args.reserve(t->args.size());
  for (const auto& a : t->args) args.push_back(apply_subst(a, s));
  return make_app(t->name, std::move(args));
}

Formula apply_subst(const Formula& f, const Substitution& s) {
  switch (f->kind) {
    case FormulaKind::Atom: {
      std::vector<Term> args;
      args.reserve(f->args.size());
      for (const auto& a : f->args) args.push_back(apply_subst(a, s));
      return make_atom(f->name, std::move(args));
    }
    case FormulaKind::Not:
      return make_not(apply_subst(f->lhs, s));
    case FormulaKind::And:
    case FormulaKind::Or:
    case FormulaKind::Implies:
      return make_binary(f->kind, apply_subst(f->lhs, s),
                         apply_subst(f->rhs, s));
    case FormulaKind::Forall:
    case FormulaKind::Exists: {
      if (s.count(f->name)) {
        Substitution inner = s;
        inner.erase(f->name);
        auto n = node(f->kind);
        n->name = f->name;
        n->lhs = apply_subst(f->lhs, inner);
        return n;
      }
      auto n = node(f->kind);
      n->name = f->name;
      n->lhs = apply_subst(f->lhs, s);
      return n;
    }
  }
  return f;
}

void collect_constants(const Term& t, std::set<std::string>& out) {
  if (t->is_var) return;
  out.insert(t->name);
  for (const auto& a : t->args) collect_constants(a, out);
}

void collect_constants(const Formula& f, std::set<std::string>& out) {
  switch (f->kind) {
    case FormulaKind::Atom:
      for (const auto& a : f->args) collect_constants(a, out);
      return;
    case FormulaKind::Not:
    case FormulaKind::Forall:
    case FormulaKind::Exists:
      collect_constants(f->lhs, out);
      return;
    default:
      collect_constants(f->lhs, out);
      collect_constants(f->rhs, out);
  }
}

void collect_symbols(const Formula& f, std::set<std::string>& out) {
  if (f->kind == FormulaKind::Atom) out.insert(f->name);
  switch (f->kind) {
    case FormulaKind::Atom:
      for (const auto& a : f->args) collect_constants(a, out);
      return;
    case FormulaKind::Not:
    case FormulaKind::Forall:
    case FormulaKind::Exists:
      collect_symbols(f->lhs, out);
      return;
    default:
      collect_symbols(f->lhs, out);
      collect_symbols(f->rhs, out);
  }
}

std::string check_well_formed(const Term& t, const Signature& sig,
                              const std::set<std::string>& extra) {
  if (t->is_var) return {};
  if (t->args.empty() && extra.count(t->name)) return {};
  auto it = sig.functions.find(t->name);
  if (it == sig.functions.end()) return "unknown function symbol " + t->name;
  if (it->second != static_cast<int>(t->args.size()))
    return "arity mismatch for " + t->name;
  for (const auto& a : t->args) {
    std::string e = check_well_formed(a, sig, extra);
    if (!e.empty()) return e;
  }
  return {};
}

std::string check_well_formed(const Formula& f, const Signature& sig,
                              const std::set<std::string>& extra) {
  switch (f->kind) {
    case FormulaKind::Atom: {
      auto it = sig.predicates.find(f->name);
      if (it == sig.predicates.end()) return "unknown predicate " + f->name;
      if (it->second != static_cast<int>(f->args.size()))
        return "arity mismatch for " + f->name;
      for (const auto& a : f->args) {
        std::string e = check_well_formed(a, sig, extra);
        if (!e.empty()) return e;
      }
      return {};
    }
    case FormulaKind::Not:
    case FormulaKind::Forall:
    case FormulaKind::Exists:
      return check_well_formed(f->lhs, sig, extra);
    default: {
      std::string e = check_well_formed(f->lhs, sig, extra);
      return e.empty() ? check_well_formed(f->rhs, sig, extra) : e;
    }
  }
}

// --- Lexer --------------------------------------------------------------------

bool is_identifier(std::string_view s) {
  if (s.empty()) return false;
  auto head = static_cast<unsigned char>(s[0]);
  if (!(std::isalpha(head) || head == '_')) return false;
  for (char c : s) {
    auto u = static_cast<unsigned char>(c);
    if (!(std::isalnum(u) || u == '_')) return false;
  }
  return true;
}

std::vector<Token> tokenize(std::string_view text) {
  std::vector<Token> out;
  size_t i = 0;
  auto push = [&](TokenKind k, size_t len) {
    out.push_back({k, std::string(text.substr(i, len)), static_cast<int>(i + 1)});
    i += len;
  };
  while (i < text.size()) {
    auto c = static_cast<unsigned char>(text[i]);
    if (std::isspace(c)) {
      ++i;
      continue;
    }
    if (std::isalpha(c) || c == '_') {
      size_t j = i;
      while (j < text.size() &&
             (std::isalnum(static_cast<unsigned char>(text[j])) ||
              text[j] == '_'))
        ++j;
      push(TokenKind::Ident, j - i);
      continue;
    }
    std::string_view rest = text.substr(i);
    if (rest.starts_with("\xE2\x8A\xA2")) {
      push(TokenKind::Turnstile, 3);
    } else if (rest.starts_with("<hammer>")) {
      push(TokenKind::Hammer, 8);
    } else if (rest.starts_with("||")) {
      push(TokenKind::GoalSep, 2);
    } else if (rest.starts_with("|-")) {
      push(TokenKind::Turnstile, 2);
    } else if (rest.starts_with("->")) {
      push(TokenKind::Arrow, 2);
    } else {
      switch (c) {
        case '(': push(TokenKind::LParen, 1); break;
        case ')': push(TokenKind::RParen, 1); break;
        case ',': push(TokenKind::Comma, 1); break;
        case '.': push(TokenKind::Dot, 1); break;
        case ':': push(TokenKind::Colon, 1); break;
        case '~': push(TokenKind::Not, 1); break;
        case '&': push(TokenKind::And, 1); break;
        case '|': push(TokenKind::Or, 1); break;
        case '[': push(TokenKind::LBracket, 1); break;
        case ']': push(TokenKind::RBracket, 1); break;
        default:
          throw ParseError(std::string("unexpected character '") +
                               static_cast<char>(c) + "'",
                           1, static_cast<int>(i + 1));
      }
    }
  }
  out.push_back({TokenKind::End, "", static_cast<int>(text.size() + 1)});
  return out;
}

// --- Parser -------------------------------------------------------------------

FormulaParser::FormulaParser(std::string_view text, VarMode mode)
    : tokens_(tokenize(text)), mode_(mode) {}

bool FormulaParser::accept(TokenKind k) {
  if (peek().kind != k) return false;
  ++pos_;
  return true;
}

void FormulaParser::expect(TokenKind k, const char* what) {
  if (!accept(k)) fail(std::string("expected ") + what);
}

void FormulaParser::fail(const std::string& what) const {
  const Token& t = peek();
  throw ParseError(what + (t.kind == TokenKind::End ? " at end of input"
                                                    : " near '" + t.text + "'"),
                   1, t.column);
}

bool FormulaParser::is_variable(const std::string& name) const {
  if (mode_ == VarMode::UpperCase)
    return std::isupper(static_cast<unsigned char>(name[0])) != 0;
  return std::find(bound_.begin(), bound_.end(), name) != bound_.end();
}

Formula FormulaParser::parse_formula() { return parse_impl(); }

Formula FormulaParser::parse_impl() {
  Formula lhs = parse_disj();
  if (accept(TokenKind::Arrow)) return make_implies(lhs, parse_impl());
  return lhs;
}

Formula FormulaParser::parse_disj() {
  Formula lhs = parse_conj();
  if (accept(TokenKind::Or)) return make_or(lhs, parse_disj());
  return lhs;
}

Formula FormulaParser::parse_conj() {
  Formula lhs = parse_unary();
  if (accept(TokenKind::And)) return make_and(lhs, parse_conj());
  return lhs;
}

Formula FormulaParser::parse_unary() {
  if (accept(TokenKind::Not)) return make_not(parse_unary());
  if (accept(TokenKind::LParen)) {
    Formula f = parse_formula();
    expect(TokenKind::RParen, "')'");
    return f;
  }
  if (peek().kind == TokenKind::Ident &&
      (peek().text == "forall" || peek().text == "exists"))
    return parse_quantifier();
  return parse_atom();
}

Formula FormulaParser::parse_quantifier() {
  bool universal = next().text == "forall";
  if (peek().kind != TokenKind::Ident) fail("expected bound variable");
  std::string var = next().text;
  expect(TokenKind::Dot, "'.'");
  bound_.push_back(var);
  Formula body = parse_formula();
  bound_.pop_back();
  return universal ? make_forall(var, body) : make_exists(var, body);
}

Formula FormulaParser::parse_atom() {
  if (peek().kind != TokenKind::Ident) fail("expected formula");
  std::string pred = next().text;
  if (pred == "forall" || pred == "exists") fail("misplaced quantifier");
  std::vector<Term> args;
  if (accept(TokenKind::LParen)) {
    do {
      args.push_back(parse_term());
    } while (accept(TokenKind::Comma));
    expect(TokenKind::RParen, "')'");
  }
  return make_atom(pred, std::move(args));
}

Term FormulaParser::parse_term() {
  if (peek().kind != TokenKind::Ident) fail("expected term");
  std::string name = next().text;
  if (peek().kind == TokenKind::LParen) {
    ++pos_;
    std::vector<Term> args;
    do {
      args.push_back(parse_term());
    } while (accept(TokenKind::Comma));
    expect(TokenKind::RParen, "')'");
    return make_app(name, std::move(args));
  }
  if (is_variable(name)) return make_var(name);
  return make_app(name);
}

Formula parse_formula(std::string_view text) {
  FormulaParser p(text);
  Formula f = p.parse_formula();
  if (!p.at_end()) p.fail("trailing input");
  return f;
}

Term parse_term(std::string_view text) {
  FormulaParser p(text);
  Term t = p.parse_term();
  if (!p.at_end()) p.fail("trailing input");
  return t;
}

}  // namespace thor
