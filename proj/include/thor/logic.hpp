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

// First-order syntax without equality: terms, formulas, signatures, the
// canonical printer and the textual grammar.
//
//   formula  ::= 'forall' x '.' formula | 'exists' x '.' formula | impl
//   impl     ::= disj ['->' formula]            (right associative)
//   disj     ::= conj ['|' disj]                (right associative)
//   conj     ::= unary ['&' conj]               (right associative)
//   unary    ::= '~' unary | atom | '(' formula ')' | quantifier
//   atom     ::= pred ['(' term {',' term} ')']
//
// Identifiers bound by an enclosing quantifier are variables; every other
// identifier in term position is a constant or function application. In
// clause text (certificates) identifiers starting with an upper-case letter
// are variables instead.

#ifndef THOR_LOGIC_HPP_
#define THOR_LOGIC_HPP_

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "thor/util.hpp"

namespace thor {

struct TermNode;
using Term = std::shared_ptr<const TermNode>;

struct TermNode {
  bool is_var = false;
  std::string name;
  std::vector<Term> args;
};

Term make_var(std::string name);
Term make_app(std::string name, std::vector<Term> args = {});

bool term_equal(const Term& a, const Term& b);
bool term_is_ground(const Term& t);
std::string to_string(const Term& t);

enum class FormulaKind { Atom, Not, And, Or, Implies, Forall, Exists };

struct FormulaNode;
using Formula = std::shared_ptr<const FormulaNode>;

struct FormulaNode {
  FormulaKind kind = FormulaKind::Atom;
  std::string name;        // predicate (Atom) or bound variable (quantifiers)
  std::vector<Term> args;  // Atom only
  Formula lhs;             // Not/quantifier body, or left operand
  Formula rhs;             // right operand of binary connectives
};

Formula make_atom(std::string pred, std::vector<Term> args = {});
Formula make_not(Formula f);
Formula make_and(Formula a, Formula b);
Formula make_or(Formula a, Formula b);
Formula make_implies(Formula a, Formula b);
Formula make_forall(std::string var, Formula body);
Formula make_exists(std::string var, Formula body);

// Right-nested conjunction / disjunction of a nonempty list.
Formula make_and_all(const std::vector<Formula>& fs);
Formula make_or_all(const std::vector<Formula>& fs);

std::string to_string(const Formula& f);

// Syntactic identity up to renaming of bound variables.
bool alpha_equal(const Formula& a, const Formula& b);

std::set<std::string> free_vars(const Formula& f);
bool is_closed(const Formula& f);

// Replaces free occurrences of `var` by `value`. `value` must not contain
// variables that could be captured; the kernel only substitutes ground terms.
Formula substitute(const Formula& f, const std::string& var, const Term& value);

using Substitution = std::map<std::string, Term>;
Term apply_subst(const Term& t, const Substitution& s);
// Applies `s` to the free variables of `f`.
Formula apply_subst(const Formula& f, const Substitution& s);

// Predicate and function/constant names occurring in `f`.
void collect_symbols(const Formula& f, std::set<std::string>& out);
void collect_constants(const Term& t, std::set<std::string>& out);
void collect_constants(const Formula& f, std::set<std::string>& out);

struct Signature {
  std::map<std::string, int> predicates;
  std::map<std::string, int> functions;  // constants have arity 0

  bool operator==(const Signature&) const = default;
};

// Checks arities against `sig`. Constants in `extra_constants` are accepted
// as 0-ary functions. Returns an error description, or empty when ok.
std::string check_well_formed(const Formula& f, const Signature& sig,
                              const std::set<std::string>& extra_constants = {});
std::string check_well_formed(const Term& t, const Signature& sig,
                              const std::set<std::string>& extra_constants = {});

// --- Lexing and parsing -----------------------------------------------------

enum class TokenKind {
  Ident,
  LParen,
  RParen,
  Comma,
  Dot,
  Colon,
  Not,
  And,
  Or,
  Arrow,
  Turnstile,
  GoalSep,  // "||"
  LBracket,
  RBracket,
  Hammer,  // "<hammer>"
  End
};

struct Token {
  TokenKind kind;
  std::string text;
  int column;  // 1-based byte column
};

std::vector<Token> tokenize(std::string_view text);

class FormulaParser {
 public:
  enum class VarMode { Bound, UpperCase };

  FormulaParser(std::string_view text, VarMode mode = VarMode::Bound);

  Formula parse_formula();
  Term parse_term();
  const Token& peek() const { return tokens_[pos_]; }
  Token next() { return tokens_[pos_++]; }
  bool at_end() const { return tokens_[pos_].kind == TokenKind::End; }
  bool accept(TokenKind k);
  void expect(TokenKind k, const char* what);
  [[noreturn]] void fail(const std::string& what) const;

 private:
  Formula parse_impl();
  Formula parse_disj();
  Formula parse_conj();
  Formula parse_unary();
  Formula parse_quantifier();
  Formula parse_atom();
  bool is_variable(const std::string& name) const;

  std::vector<Token> tokens_;
  size_t pos_ = 0;
  VarMode mode_;
  std::vector<std::string> bound_;
};

Formula parse_formula(std::string_view text);
Term parse_term(std::string_view text);

bool is_identifier(std::string_view s);

}  // namespace thor

#endif  // THOR_LOGIC_HPP_
