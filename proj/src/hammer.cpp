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

#include "thor/hammer.hpp"

#include <algorithm>
#include <chrono>
#include <queue>
#include <unordered_map>
#include <unordered_set>

namespace thor {

const char* to_string(HammerStatus s) {
  switch (s) {
    case HammerStatus::Proved: return "proved";
    case HammerStatus::Saturated: return "saturated";
    case HammerStatus::BudgetExhausted: return "budget_exhausted";
  }
  return "?";
}

// --- Premise selection --------------------------------------------------------

std::set<std::string> goal_symbols(const Goal& goal) {
  std::set<std::string> out;
  for (const auto& h : goal.hypotheses) collect_symbols(h.formula, out);
  collect_symbols(goal.conclusion, out);
  return out;
}

std::vector<std::string> select_premises(const Goal& goal,
                                         const TheoremLibrary& library, int k,
                                         const RelevanceParams& params) {
  std::vector<std::string> out;
  if (k <= 0) return out;
  std::set<std::string> relevant = goal_symbols(goal);
  const size_t n = library.facts().size();
  std::vector<char> taken(n, 0);

  auto score = [&](size_t i) {
    double hit = 0, miss = 0;
    for (const auto& s : library.symbols_of(i)) (relevant.count(s) ? hit : miss) += 1;
    if (hit == 0) return 0.0;
    return hit / (hit + params.irrelevance_weight * miss);
  };
  // Only facts sharing a symbol with `relevant` can score above zero.
  auto candidates = [&] {
    std::set<size_t> c;
    for (const auto& s : relevant)
      for (size_t i : library.facts_with_symbol(s))
        if (!taken[i]) c.insert(i);
    return c;
  };

  double p = params.initial_threshold;
  while (static_cast<int>(out.size()) < k && p >= params.floor) {
    std::vector<std::pair<double, size_t>> pass;
    for (size_t i : candidates()) {
      double s = score(i);
      if (s >= p) pass.emplace_back(s, i);
    }
    std::stable_sort(pass.begin(), pass.end(), [](const auto& a, const auto& b) {
      return a.first > b.first || (a.first == b.first && a.second < b.second);
    });
    for (const auto& [s, i] : pass) {
      if (static_cast<int>(out.size()) >= k) break;
      taken[i] = 1;
      out.push_back(library.facts()[i].name);
    }
    for (const auto& [s, i] : pass)
      if (taken[i])
        for (const auto& sym : library.symbols_of(i)) relevant.insert(sym);
    p *= params.decay;
  }
  if (static_cast<int>(out.size()) < k) {
    std::vector<std::pair<double, size_t>> rest;
    for (size_t i : candidates()) {
      double s = score(i);
      if (s > 0) rest.emplace_back(s, i);
    }
    std::stable_sort(rest.begin(), rest.end(), [](const auto& a, const auto& b) {
      return a.first > b.first || (a.first == b.first && a.second < b.second);
    });
    for (const auto& [s, i] : rest) {
      if (static_cast<int>(out.size()) >= k) break;
      out.push_back(library.facts()[i].name);
    }
  }
  return out;
}

// --- Prover data structures ---------------------------------------------------

namespace {

// Hash-consed terms. Atoms are terms whose head is a predicate symbol.
// Negative heads are variables: head -1-i is variable i of its clause.
struct TermRec {
  int head;
  uint32_t arg_begin;
  uint32_t arity;
  uint32_t weight;
  bool has_vars;
  int next;  // hash chain
};

class TermBank {
 public:
  int var(int i) {
    while (static_cast<int>(vars_.size()) <= i)
      vars_.push_back(intern(-1 - static_cast<int>(vars_.size()), nullptr, 0));
    return vars_[static_cast<size_t>(i)];
  }
  int app(int head, const int* args, uint32_t n) { return intern(head, args, n); }
  int existing_var(int i) const { return vars_.at(static_cast<size_t>(i)); }

  const TermRec& operator[](int t) const { return recs_[static_cast<size_t>(t)]; }
  const int* args(int t) const { return pool_.data() + recs_[static_cast<size_t>(t)].arg_begin; }
  bool is_var(int t) const { return recs_[static_cast<size_t>(t)].head < 0; }
  int var_index(int t) const { return -1 - recs_[static_cast<size_t>(t)].head; }

 private:
  int intern(int head, const int* args, uint32_t n) {
    uint64_t h = splitmix64(static_cast<uint64_t>(static_cast<uint32_t>(head)) ^ (uint64_t{n} << 32));
    for (uint32_t i = 0; i < n; ++i) h = splitmix64(h ^ static_cast<uint64_t>(args[i]));
    auto [it, fresh] = heads_.try_emplace(h, -1);
    for (int t = it->second; t >= 0; t = recs_[static_cast<size_t>(t)].next) {
      const TermRec& r = recs_[static_cast<size_t>(t)];
      if (r.head == head && r.arity == n &&
          std::equal(args, args + n, pool_.begin() + r.arg_begin))
        return t;
    }
    TermRec r{head, static_cast<uint32_t>(pool_.size()), n, 1, head < 0, it->second};
    for (uint32_t i = 0; i < n; ++i) {
      const TermRec& a = recs_[static_cast<size_t>(args[i])];
      r.weight += a.weight;
      r.has_vars = r.has_vars || a.has_vars;
    }
    pool_.insert(pool_.end(), args, args + n);
    int id = static_cast<int>(recs_.size());
    recs_.push_back(r);
    it->second = id;
    return id;
  }

  std::vector<TermRec> recs_;
  std::vector<int> pool_;
  std::unordered_map<uint64_t, int> heads_;
  std::vector<int> vars_;
};

class SymbolTable {
 public:
  int intern(const std::string& key) {
    auto [it, fresh] = ids_.try_emplace(key, static_cast<int>(names_.size()));
    if (fresh) names_.push_back(key);
    return it->second;
  }
  // Keys carry a one-character namespace prefix.
  const std::string& key(int id) const { return names_[static_cast<size_t>(id)]; }
  std::string name(int id) const { return key(id).substr(1); }

 private:
  std::unordered_map<std::string, int> ids_;
  std::vector<std::string> names_;
};

struct PLit {
  int atom;
  bool positive;
  bool operator==(const PLit&) const = default;
};

enum class Rule : uint8_t { Input, Resolve, Factor };

struct PClause {
  std::vector<PLit> lits;
  int nvars = 0;
  uint32_t weight = 0;
  uint64_t mask = 0;
  Rule rule = Rule::Input;
  int parents[2] = {-1, -1};
  int literals[2] = {-1, -1};
  int input = -1;  // index into the inputs for Rule::Input
};

struct ClauseKeyHash {
  size_t operator()(const std::vector<PLit>& lits) const {
    uint64_t h = lits.size();
    for (const auto& l : lits) h = splitmix64(h ^ (static_cast<uint64_t>(l.atom) << 1 | l.positive));
    return static_cast<size_t>(h);
  }
};

}  // namespace

class InferenceLog {
 public:
  SymbolTable symbols;
  TermBank bank;
  std::vector<PClause> clauses;
  std::vector<ClauseOrigin> origins;
  int empty = -1;
};

namespace {

// Substitution over two renamed-apart clauses: variable i of side s occupies
// slot s * width + i.
class Bindings {
 public:
  explicit Bindings(const TermBank& bank) : bank_(bank) {}

  void reset(int width) {
    for (int s : trail_) slots_[static_cast<size_t>(s)].term = -1;
    trail_.clear();
    width_ = width;
    if (slots_.size() < static_cast<size_t>(2 * width)) slots_.resize(static_cast<size_t>(2 * width), {-1, 0});
  }
  size_t mark() const { return trail_.size(); }
  void undo(size_t m) {
    while (trail_.size() > m) {
      slots_[static_cast<size_t>(trail_.back())].term = -1;
      trail_.pop_back();
    }
  }

  void deref(int& t, int& side) const {
    while (bank_.is_var(t)) {
      const Slot& b = slots_[static_cast<size_t>(side * width_ + bank_.var_index(t))];
      if (b.term < 0) return;
      t = b.term;
      side = b.side;
    }
  }

  bool unify(int a, int as, int b, int bs) {
    deref(a, as);
    deref(b, bs);
    if (a == b && (as == bs || !bank_[a].has_vars)) return true;
    if (bank_.is_var(a)) return bind(a, as, b, bs);
    if (bank_.is_var(b)) return bind(b, bs, a, as);
    const TermRec& ra = bank_[a];
    const TermRec& rb = bank_[b];
    if (ra.head != rb.head || ra.arity != rb.arity) return false;
    const int* xa = bank_.args(a);
    const int* xb = bank_.args(b);
    for (uint32_t i = 0; i < ra.arity; ++i)
      if (!unify(xa[i], as, xb[i], bs)) return false;
    return true;
  }

  // One-way matching: binds variables of side 0 only; `target` is rigid.
  bool match(int pattern, int target) {
    const TermRec& rp = bank_[pattern];
    if (!rp.has_vars) return pattern == target;
    if (rp.head < 0) {
      Slot& s = slots_[static_cast<size_t>(bank_.var_index(pattern))];
      if (s.term >= 0) return s.term == target;
      s.term = target;
      trail_.push_back(bank_.var_index(pattern));
      return true;
    }
    const TermRec& rt = bank_[target];
    if (rp.head != rt.head || rp.arity != rt.arity) return false;
    const int* xp = bank_.args(pattern);
    const int* xt = bank_.args(target);
    for (uint32_t i = 0; i < rp.arity; ++i)
      if (!match(xp[i], xt[i])) return false;
    return true;
  }

  bool bound(int side, int var) const {
    return slots_[static_cast<size_t>(side * width_ + var)].term >= 0;
  }
  int width() const { return width_; }

 private:
  struct Slot {
    int term;
    int side;
  };

  bool occurs(int v, int vs, int t, int ts) const {
    deref(t, ts);
    if (bank_.is_var(t)) return t == v && ts == vs;
    if (!bank_[t].has_vars) return false;
    const int* xs = bank_.args(t);
    for (uint32_t i = 0; i < bank_[t].arity; ++i)
      if (occurs(v, vs, xs[i], ts)) return true;
    return false;
  }

  bool bind(int v, int vs, int t, int ts) {
    if (occurs(v, vs, t, ts)) return false;
    int slot = vs * width_ + bank_.var_index(v);
    slots_[static_cast<size_t>(slot)] = {t, ts};
    trail_.push_back(slot);
    return true;
  }

  const TermBank& bank_;
  std::vector<Slot> slots_;
  std::vector<int> trail_;
  int width_ = 0;
};

// Applies bindings and renames the remaining variables densely in order of
// first occurrence.
class Instantiator {
 public:
  Instantiator(TermBank& bank, const Bindings& b) : bank_(bank), b_(b) {}

  void reset() {
    renamed_.clear();
    next_ = 0;
  }
  int next_var() const { return next_; }

  int apply(int t, int side) {
    b_.deref(t, side);
    const TermRec& r = bank_[t];
    if (!r.has_vars) return t;
    if (r.head < 0) {
      int key = side * b_.width() + bank_.var_index(t);
      auto [it, fresh] = renamed_.try_emplace(key, next_);
      if (fresh) ++next_;
      return bank_.var(it->second);
    }
    int head = r.head;
    uint32_t n = r.arity;
    int buf[16];
    std::vector<int> big;
    int* args = buf;
    if (n > 16) {
      big.resize(n);
      args = big.data();
    }
    for (uint32_t i = 0; i < n; ++i) args[i] = apply(bank_.args(t)[i], side);
    return bank_.app(head, args, n);
  }

 private:
  TermBank& bank_;
  const Bindings& b_;
  std::unordered_map<int, int> renamed_;
  int next_ = 0;
};

class Prover {
 public:
  Prover(const HammerBudget& budget, const std::atomic<bool>* cancel)
      : log_(std::make_shared<InferenceLog>()),
        budget_(budget),
        cancel_(cancel),
        bindings_(log_->bank),
        inst_(log_->bank, bindings_) {
    if (budget.wallclock_seconds)
      deadline_ = std::chrono::steady_clock::now() +
                  std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                      std::chrono::duration<double>(*budget.wallclock_seconds));
  }

  SaturationResult run(const std::vector<InputClause>& inputs) {
    for (const auto& in : inputs) {
      PClause c;
      c.input = static_cast<int>(log_->origins.size());
      log_->origins.push_back(in.origin);
      std::map<std::string, int> vars;
      for (const auto& l : in.clause)
        c.lits.push_back({convert_atom(l, vars), l.positive});
      c.nvars = static_cast<int>(vars.size());
      if (offer(std::move(c))) return finish(HammerStatus::Proved);
    }
    while (!passive_.empty()) {
      int g = passive_.top().second;
      passive_.pop();
      if (forward_subsumed(g)) continue;
      activate(g);
      if (auto s = factor(g)) return finish(*s);
      if (auto s = resolve(g)) return finish(*s);
    }
    return finish(HammerStatus::Saturated);
  }

 private:
  using Status = std::optional<HammerStatus>;

  int convert_term(const Term& t, std::map<std::string, int>& vars) {
    if (t->is_var) {
      auto [it, fresh] = vars.try_emplace(t->name, static_cast<int>(vars.size()));
      return log_->bank.var(it->second);
    }
    std::vector<int> args;
    for (const auto& a : t->args) args.push_back(convert_term(a, vars));
    return log_->bank.app(log_->symbols.intern("f" + t->name), args.data(),
                          static_cast<uint32_t>(args.size()));
  }

  int convert_atom(const Literal& l, std::map<std::string, int>& vars) {
    std::vector<int> args;
    for (const auto& a : l.args) args.push_back(convert_term(a, vars));
    return log_->bank.app(log_->symbols.intern("p" + l.predicate), args.data(),
                          static_cast<uint32_t>(args.size()));
  }

  // Deduplicates, drops tautologies and duplicates, and queues the clause.
  // Returns true when the clause is empty.
  bool offer(PClause c) {
    std::vector<PLit> lits;
    for (const auto& l : c.lits)
      if (std::find(lits.begin(), lits.end(), l) == lits.end()) lits.push_back(l);
    for (const auto& l : lits)
      if (std::find(lits.begin(), lits.end(), PLit{l.atom, !l.positive}) != lits.end())
        return false;
    c.lits = std::move(lits);
    if (!seen_.insert(c.lits).second) return false;
    c.weight = 0;
    c.mask = 0;
    for (const auto& l : c.lits) {
      c.weight += log_->bank[l.atom].weight;
      c.mask |= uint64_t{1} << ((static_cast<uint64_t>(log_->bank[l.atom].head) * 2 + l.positive) % 64);
    }
    int id = static_cast<int>(log_->clauses.size());
    bool empty = c.lits.empty();
    log_->clauses.push_back(std::move(c));
    if (empty) {
      log_->empty = id;
      return true;
    }
    passive_.push({{log_->clauses.back().weight, id}, id});
    return false;
  }

  bool forward_subsumed(int g) {
    const PClause& c = log_->clauses[static_cast<size_t>(g)];
    for (int a : active_) {
      const PClause& d = log_->clauses[static_cast<size_t>(a)];
      if ((d.mask & ~c.mask) != 0 || d.lits.size() > c.lits.size() || c.lits.size() > 64)
        continue;
      bindings_.reset(d.nvars);
      used_ = 0;
      if (subsumes_from(d, c, 0)) return true;
    }
    return false;
  }

  // Multiset subsumption: distinct literals of d map to distinct literals of
  // c, so a clause never deletes its own factors.
  bool subsumes_from(const PClause& d, const PClause& c, size_t i) {
    if (i == d.lits.size()) return true;
    const PLit& dl = d.lits[i];
    for (size_t j = 0; j < c.lits.size(); ++j) {
      const PLit& cl = c.lits[j];
      if (cl.positive != dl.positive || (used_ >> j & 1)) continue;
      size_t m = bindings_.mark();
      if (bindings_.match(dl.atom, cl.atom)) {
        used_ |= uint64_t{1} << j;
        if (subsumes_from(d, c, i + 1)) return true;
        used_ &= ~(uint64_t{1} << j);
      }
      bindings_.undo(m);
    }
    return false;
  }

  void activate(int g) {
    active_.push_back(g);
    const PClause& c = log_->clauses[static_cast<size_t>(g)];
    for (size_t i = 0; i < c.lits.size(); ++i)
      index_[key(c.lits[i].atom, c.lits[i].positive)].push_back({g, static_cast<int>(i)});
  }

  int64_t key(int atom, bool positive) const {
    return static_cast<int64_t>(log_->bank[atom].head) * 2 + positive;
  }

  // Counts one inference; fails when it would exceed the budget.
  Status charge() {
    if (inferences_ >= budget_.max_inferences) return HammerStatus::BudgetExhausted;
    ++inferences_;
    if (inferences_ % 256 == 0) {
      if (cancel_ && cancel_->load(std::memory_order_relaxed))
        return HammerStatus::BudgetExhausted;
      if (deadline_ && std::chrono::steady_clock::now() > *deadline_)
        return HammerStatus::BudgetExhausted;
    }
    return std::nullopt;
  }

  Status factor(int g) {
    size_t n = log_->clauses[static_cast<size_t>(g)].lits.size();
    for (size_t i = 0; i < n; ++i)
      for (size_t j = i + 1; j < n; ++j) {
        const PClause& c = log_->clauses[static_cast<size_t>(g)];
        if (c.lits[i].positive != c.lits[j].positive ||
            log_->bank[c.lits[i].atom].head != log_->bank[c.lits[j].atom].head)
          continue;
        bindings_.reset(c.nvars);
        if (!bindings_.unify(c.lits[i].atom, 0, c.lits[j].atom, 0)) continue;
        if (auto s = charge()) return s;
        PClause r;
        r.rule = Rule::Factor;
        r.parents[0] = g;
        r.literals[0] = static_cast<int>(i);
        r.literals[1] = static_cast<int>(j);
        inst_.reset();
        for (size_t k = 0; k < n; ++k)
          if (k != j) r.lits.push_back({inst_.apply(c.lits[k].atom, 0), c.lits[k].positive});
        r.nvars = inst_.next_var();
        if (offer(std::move(r))) return HammerStatus::Proved;
      }
    return std::nullopt;
  }

  Status resolve(int g) {
    size_t n = log_->clauses[static_cast<size_t>(g)].lits.size();
    for (size_t i = 0; i < n; ++i) {
      PLit gl = log_->clauses[static_cast<size_t>(g)].lits[i];
      auto it = index_.find(key(gl.atom, !gl.positive));
      if (it == index_.end()) continue;
      // The partner list cannot grow while we iterate: new clauses go to
      // the passive queue.
      const auto& partners = it->second;
      for (size_t p = 0; p < partners.size(); ++p) {
        auto [a, j] = partners[p];
        const PClause& c1 = log_->clauses[static_cast<size_t>(g)];
        const PClause& c2 = log_->clauses[static_cast<size_t>(a)];
        bindings_.reset(std::max(c1.nvars, c2.nvars));
        if (!bindings_.unify(gl.atom, 0, c2.lits[static_cast<size_t>(j)].atom, 1)) continue;
        if (auto s = charge()) return s;
        PClause r;
        r.rule = Rule::Resolve;
        r.parents[0] = g;
        r.parents[1] = a;
        r.literals[0] = static_cast<int>(i);
        r.literals[1] = j;
        inst_.reset();
        for (size_t k = 0; k < c1.lits.size(); ++k)
          if (k != i) r.lits.push_back({inst_.apply(c1.lits[k].atom, 0), c1.lits[k].positive});
        for (size_t k = 0; k < c2.lits.size(); ++k)
          if (static_cast<int>(k) != j)
            r.lits.push_back({inst_.apply(c2.lits[k].atom, 1), c2.lits[k].positive});
        r.nvars = inst_.next_var();
        if (offer(std::move(r))) return HammerStatus::Proved;
      }
    }
    return std::nullopt;
  }

  SaturationResult finish(HammerStatus status) {
    SaturationResult out;
    out.status = status;
    out.inferences_used = inferences_;
    if (status == HammerStatus::Proved) out.log = log_;
    return out;
  }

  std::shared_ptr<InferenceLog> log_;
  const HammerBudget& budget_;
  const std::atomic<bool>* cancel_;
  std::optional<std::chrono::steady_clock::time_point> deadline_;
  Bindings bindings_;
  Instantiator inst_;
  long inferences_ = 0;
  uint64_t used_ = 0;
  std::vector<int> active_;
  std::unordered_map<int64_t, std::vector<std::pair<int, int>>> index_;
  std::priority_queue<std::pair<std::pair<uint32_t, int>, int>,
                      std::vector<std::pair<std::pair<uint32_t, int>, int>>,
                      std::greater<>>
      passive_;
  std::unordered_set<std::vector<PLit>, ClauseKeyHash> seen_;
};

// --- Back-conversion ----------------------------------------------------------

Term to_term(const InferenceLog& log, const Bindings& b, int t, int side,
             bool resolved) {
  if (resolved) b.deref(t, side);
  if (log.bank.is_var(t))
    return make_var((side == 0 ? "X" : "Y") + std::to_string(log.bank.var_index(t)));
  std::vector<Term> args;
  const TermRec& r = log.bank[t];
  for (uint32_t i = 0; i < r.arity; ++i)
    args.push_back(to_term(log, b, log.bank.args(t)[i], side, resolved));
  return make_app(log.symbols.name(r.head), std::move(args));
}

Clause to_clause(const InferenceLog& log, const PClause& c) {
  Bindings none(log.bank);
  Clause out;
  for (const auto& l : c.lits) {
    Literal lit;
    lit.positive = l.positive;
    const TermRec& r = log.bank[l.atom];
    lit.predicate = log.symbols.name(r.head);
    for (uint32_t i = 0; i < r.arity; ++i)
      lit.args.push_back(to_term(log, none, log.bank.args(l.atom)[i], 0, false));
    out.push_back(std::move(lit));
  }
  return out;
}

}  // namespace

SaturationResult saturate(const std::vector<InputClause>& clauses,
                          const HammerBudget& budget,
                          const std::atomic<bool>* cancel) {
  Prover prover(budget, cancel);
  return prover.run(clauses);
}

Reconstruction reconstruct(const InferenceLog& log, const TheoremLibrary* library) {
  if (log.empty < 0 || log.empty >= static_cast<int>(log.clauses.size()) ||
      !log.clauses[static_cast<size_t>(log.empty)].lits.empty())
    throw InvariantError("inference log holds no refutation");

  std::vector<char> needed(log.clauses.size(), 0);
  std::vector<int> stack{log.empty};
  while (!stack.empty()) {
    int c = stack.back();
    stack.pop_back();
    if (needed[static_cast<size_t>(c)]) continue;
    needed[static_cast<size_t>(c)] = 1;
    const PClause& pc = log.clauses[static_cast<size_t>(c)];
    for (int p : pc.parents) {
      if (p < 0) continue;
      if (p >= c) throw InvariantError("inference log is not in DAG order");
      stack.push_back(p);
    }
  }

  Reconstruction out;
  std::map<int, int> dense;
  int next_id = 0;
  for (size_t c = 0; c < log.clauses.size(); ++c) {
    const PClause& pc = log.clauses[c];
    if (!needed[c] || pc.rule != Rule::Input) continue;
    dense[static_cast<int>(c)] = next_id;
    out.certificate.inputs.push_back(
        {next_id++, log.origins[static_cast<size_t>(pc.input)], to_clause(log, pc)});
  }
  Bindings b(log.bank);
  for (size_t c = 0; c < log.clauses.size(); ++c) {
    const PClause& pc = log.clauses[c];
    if (!needed[c] || pc.rule == Rule::Input) continue;
    Certificate::Inference inf;
    inf.id = next_id;
    dense[static_cast<int>(c)] = next_id++;
    const PClause& p1 = log.clauses[static_cast<size_t>(pc.parents[0])];
    const auto& l1 = p1.lits[static_cast<size_t>(pc.literals[0])];
    int sides = 1;
    if (pc.rule == Rule::Resolve) {
      inf.rule = Certificate::Inference::Rule::Resolve;
      const PClause& p2 = log.clauses[static_cast<size_t>(pc.parents[1])];
      const auto& l2 = p2.lits[static_cast<size_t>(pc.literals[1])];
      b.reset(std::max(p1.nvars, p2.nvars));
      if (!b.unify(l1.atom, 0, l2.atom, 1))
        throw InvariantError("logged resolution does not unify");
      inf.parents = {dense.at(pc.parents[0]), dense.at(pc.parents[1])};
      sides = 2;
    } else {
      inf.rule = Certificate::Inference::Rule::Factor;
      const auto& l2 = p1.lits[static_cast<size_t>(pc.literals[1])];
      b.reset(p1.nvars);
      if (!b.unify(l1.atom, 0, l2.atom, 0))
        throw InvariantError("logged factoring does not unify");
      inf.parents = {dense.at(pc.parents[0])};
    }
    inf.literals = {pc.literals[0], pc.literals[1]};
    for (int side = 0; side < sides; ++side) {
      const PClause& parent = log.clauses[static_cast<size_t>(pc.parents[side])];
      for (int v = 0; v < parent.nvars; ++v) {
        if (!b.bound(side, v)) continue;
        inf.unifier[(side == 0 ? "X" : "Y") + std::to_string(v)] =
            to_term(log, b, log.bank.existing_var(v), side, true);
      }
    }
    inf.clause = to_clause(log, pc);
    out.certificate.inferences.push_back(std::move(inf));
  }
  out.certificate.conclusion = dense.at(log.empty);

  std::vector<std::string> used = out.certificate.premise_names();
  if (library) {
    std::stable_sort(used.begin(), used.end(), [&](const auto& a, const auto& b) {
      return library->position(a) < library->position(b);
    });
  }
  out.used_premises = std::move(used);
  return out;
}

// --- End-to-end ---------------------------------------------------------------

namespace {

Term rename_symbols(const Term& t, const std::map<std::string, std::string>& m) {
  if (t->is_var) return t;
  std::vector<Term> args;
  for (const auto& a : t->args) args.push_back(rename_symbols(a, m));
  auto it = m.find(t->name);
  return make_app(it == m.end() ? t->name : it->second, std::move(args));
}

void rename_symbols(Clause& c, const std::map<std::string, std::string>& m) {
  for (auto& l : c)
    for (auto& a : l.args) a = rename_symbols(a, m);
}

std::vector<NamedFormula> problem(const Goal& goal, const TheoremLibrary& library,
                                  const std::vector<std::string>& premises) {
  std::vector<NamedFormula> fs;
  for (const auto& h : goal.hypotheses)
    fs.push_back({ClauseOrigin::Kind::Hypothesis, h.name, h.formula});
  for (const auto& name : premises)
    fs.push_back({ClauseOrigin::Kind::Premise, name, library.find(name)->formula});
  return fs;
}

}  // namespace

HammerResult hammer(const ProofState& state, const TheoremLibrary& library,
                    const HammerBudget& budget, const std::atomic<bool>* cancel) {
  if (state.goals.empty()) throw Error("hammer needs an open goal");
  return hammer_goal(state.goals.front(), library, budget, cancel);
}

HammerResult hammer_goal(const Goal& goal, const TheoremLibrary& library,
                         const HammerBudget& budget, const std::atomic<bool>* cancel) {
  HammerResult out;
  out.selected_premises = select_premises(goal, library, budget.max_selected_premises);
  Formula negated = make_not(goal.conclusion);
  ClausifyResult cnf;
  try {
    cnf = clausify(problem(goal, library, out.selected_premises), negated,
                   budget.max_clauses);
  } catch (const Error&) {
    out.status = HammerStatus::BudgetExhausted;
    return out;
  }
  SaturationResult sat = saturate(cnf.clauses, budget, cancel);
  out.status = sat.status;
  out.inferences_used = sat.inferences_used;
  if (sat.status != HammerStatus::Proved) return out;

  Reconstruction rec = reconstruct(*sat.log, &library);
  // Restate Skolem symbols as the kernel numbers them for the used premises.
  ClausifyResult kernel_cnf =
      clausify(problem(goal, library, rec.used_premises), negated, budget.max_clauses);
  std::map<std::string, std::string> rename;
  for (const auto& [key, ours] : cnf.skolems) {
    auto it = kernel_cnf.skolems.find(key);
    if (it == kernel_cnf.skolems.end()) continue;
    if (it->second.size() != ours.size()) throw InvariantError("Skolem count mismatch");
    for (size_t i = 0; i < ours.size(); ++i) rename[ours[i]] = it->second[i];
  }
  for (auto& in : rec.certificate.inputs) rename_symbols(in.clause, rename);
  for (auto& inf : rec.certificate.inferences) {
    rename_symbols(inf.clause, rename);
    for (auto& [v, t] : inf.unifier) t = rename_symbols(t, rename);
  }
  out.used_premises = rec.used_premises;
  out.certificate = std::make_shared<const Certificate>(std::move(rec.certificate));

  if (budget.verify_sufficiency) {
    std::vector<NamedFormula> premises;
    for (const auto& name : out.used_premises)
      premises.push_back({ClauseOrigin::Kind::Premise, name, library.find(name)->formula});
    if (!check_certificate(goal, premises, *out.certificate).ok)
      throw InvariantError("hammer certificate rejected by the kernel");
    TheoremLibrary restricted(library.signature());
    for (const auto& name : out.used_premises)
      restricted.add_fact(name, library.find(name)->formula);
    HammerBudget again = budget;
    again.verify_sufficiency = false;
    if (hammer_goal(goal, restricted, again, cancel).status != HammerStatus::Proved)
      throw InvariantError("used premises alone do not suffice");
  }
  return out;
}

}  // namespace thor
