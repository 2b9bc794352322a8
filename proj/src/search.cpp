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

#include "thor/search.hpp"

#include <chrono>
#include <set>
#include <thread>
#include <unordered_map>
#include <unordered_set>

namespace thor {

using nlohmann::json;

bool is_certificate_step(std::string_view step_text) { return step_text.rfind("by_cert ", 0) == 0; }

bool is_premise_bearing(std::string_view step_text) {
  return step_text.rfind("apply ", 0) == 0 || is_certificate_step(step_text);
}

// --- Preprocessing ------------------------------------------------------------

namespace {

ProofState replay_state(const Datapoint& dp) {
  ProofState s;
  try {
    s = parse_state(dp.state);
  } catch (const Error& e) {
    throw StateReplayError(dp.theorem + ": state does not parse: " + e.what());
  }
  if (s.goals.empty()) throw StateReplayError(dp.theorem + ": datapoint state has no open goal");
  return s;
}

bool hammer_solves(const ProofState& s, const TheoremLibrary& library, const HammerBudget& budget) {
  return hammer(s, library, budget).status == HammerStatus::Proved;
}

}  // namespace

Datapoint preprocess_datapoint(const Datapoint& dp, const TheoremLibrary& library,
                               const HammerBudget& budget) {
  ProofState s = replay_state(dp);
  Datapoint out = dp;
  out.hammer_solvable = hammer_solves(s, library, budget);
  if (*out.hammer_solvable) out.step = kHammerToken;
  return out;
}

double PreprocessReport::replacement_fraction() const {
  long total = replaced + kept + shortcut;
  return total == 0 ? 0.0 : static_cast<double>(replaced + shortcut) / static_cast<double>(total);
}

json PreprocessReport::to_json() const {
  return {{"replaced", replaced},
          {"kept", kept},
          {"shortcut", shortcut},
          {"hammer_calls", hammer_calls},
          {"replacement_fraction", replacement_fraction()}};
}

PreprocessResult preprocess_corpus(const Corpus& corpus, const HammerBudget& budget,
                                   bool use_trace_shortcut, int jobs) {
  PreprocessResult out{corpus, {}};
  std::vector<size_t> train;
  for (size_t i = 0; i < corpus.datapoints.size(); ++i) {
    auto it = corpus.split.find(corpus.datapoints[i].theorem);
    if (it != corpus.split.end() && it->second == Split::Train) train.push_back(i);
  }

  if (use_trace_shortcut) {
    for (size_t i : train) {
      Datapoint& dp = out.corpus.datapoints[i];
      if (is_certificate_step(dp.step)) {
        dp.step = kHammerToken;
        dp.hammer_solvable = true;
        ++out.report.shortcut;
      } else {
        ++out.report.kept;
      }
    }
    return out;
  }

  // Each distinct state is hammered once.
  std::unordered_map<std::string, size_t> index;
  std::vector<const Datapoint*> unique;
  for (size_t i : train) {
    const Datapoint& dp = corpus.datapoints[i];
    if (index.emplace(dp.state, unique.size()).second) unique.push_back(&dp);
  }
  std::vector<ProofState> states;
  for (const Datapoint* dp : unique) states.push_back(replay_state(*dp));
  std::vector<char> solved(unique.size(), 0);
  std::atomic<size_t> next{0};
  auto worker = [&] {
    for (size_t k = next++; k < unique.size(); k = next++)
      solved[k] = hammer_solves(states[k], corpus.library, budget);
  };
  int n = std::max(1, std::min<int>(jobs, static_cast<int>(unique.size())));
  std::vector<std::thread> pool;
  for (int t = 1; t < n; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  out.report.hammer_calls = static_cast<long>(unique.size());

  for (size_t i : train) {
    Datapoint& dp = out.corpus.datapoints[i];
    dp.hammer_solvable = solved[index.at(dp.state)] != 0;
    if (*dp.hammer_solvable) {
      dp.step = kHammerToken;
      ++out.report.replaced;
    } else {
      ++out.report.kept;
    }
  }
  return out;
}

// --- Search -------------------------------------------------------------------

void SearchConfig::validate() const {
  if (queue_cap < 1) throw Error("queue_cap must be at least 1");
  if (max_queries < 0) throw Error("max_queries must be nonnegative");
  if (samples_per_expansion < 1) throw Error("samples_per_expansion must be at least 1");
  if (!(temperature > 0)) throw Error("temperature must be positive");
  if (step_budget < 0 || total_budget < 0) throw Error("budgets must be nonnegative");
  if ((step_wallclock && !(*step_wallclock > 0)) || (total_wallclock && !(*total_wallclock > 0)))
    throw Error("wallclock limits must be positive");
}

HammerBudget SearchConfig::in_search_hammer() const {
  HammerBudget b = hammer_budget;
  b.max_inferences = std::min(b.max_inferences, step_budget);
  b.wallclock_seconds = step_wallclock;
  return b;
}

const char* to_string(SearchStatus s) {
  switch (s) {
    case SearchStatus::Proved: return "proved";
    case SearchStatus::QueueExhausted: return "queue_exhausted";
    case SearchStatus::QueryBudgetExhausted: return "query_budget_exhausted";
    case SearchStatus::TotalBudgetExhausted: return "total_budget_exhausted";
  }
  return "?";
}

json TraceEvent::to_json() const {
  static const char* kinds[] = {"pop", "candidate", "hammer"};
  json j{{"event", kinds[static_cast<int>(kind)]}, {"node", node}, {"query", query}};
  switch (kind) {
    case Kind::Pop:
      j["priority"] = priority;
      j["queue_size"] = queue_size;
      break;
    case Kind::Candidate:
      j["step"] = step;
      j["outcome"] = outcome;
      j["premise_bearing"] = premise_bearing;
      j["kernel"] = kernel;
      j["advanced"] = advanced;
      j["priority"] = priority;
      j["queue_size"] = queue_size;
      if (child >= 0) j["child"] = child;
      j["cost"] = cost;
      break;
    case Kind::Hammer:
      j["outcome"] = outcome;
      j["cost"] = cost;
      break;
  }
  return j;
}

namespace {

struct Node {
  ProofState state;
  double log_prob = 0;
  int parent = -1;
  std::optional<ProofStep> step;
  std::string incoming;
};

// Max-priority queue with a capacity; ties favour the older node.
class BoundedQueue {
 public:
  explicit BoundedQueue(size_t cap) : cap_(cap) {}

  void push(double priority, int id) {
    Key k{priority, id};
    if (set_.size() >= cap_) {
      auto worst = std::prev(set_.end());
      if (!Order{}(k, *worst)) return;
      set_.erase(worst);
    }
    set_.insert(k);
  }
  std::pair<double, int> pop() {
    auto k = *set_.begin();
    set_.erase(set_.begin());
    return {k.priority, k.id};
  }
  bool empty() const { return set_.empty(); }
  size_t size() const { return set_.size(); }

 private:
  struct Key {
    double priority;
    int id;
  };
  struct Order {
    bool operator()(const Key& a, const Key& b) const {
      return a.priority > b.priority || (a.priority == b.priority && a.id < b.id);
    }
  };
  size_t cap_;
  std::set<Key, Order> set_;
};

std::vector<ProofStep> path_to(const std::vector<Node>& nodes, int id) {
  std::vector<ProofStep> steps;
  for (int n = id; nodes[static_cast<size_t>(n)].parent >= 0; n = nodes[static_cast<size_t>(n)].parent)
    steps.push_back(*nodes[static_cast<size_t>(n)].step);
  std::reverse(steps.begin(), steps.end());
  return steps;
}

}  // namespace

SearchOutcome best_first_search(const Theorem& theorem, const SearchContext& ctx,
                                const SearchConfig& config, uint64_t seed, SearchMode mode) {
  config.validate();
  SearchOutcome out;
  SearchStats& st = out.stats;
  HammerFn run_hammer = ctx.hammer ? ctx.hammer : HammerFn([&](const ProofState& s, const HammerBudget& b) {
    return hammer(s, ctx.library, b, ctx.cancel);
  });
  const HammerBudget hb = config.in_search_hammer();
  std::optional<std::chrono::steady_clock::time_point> deadline;
  if (config.total_wallclock)
    deadline = std::chrono::steady_clock::now() +
               std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                   std::chrono::duration<double>(*config.total_wallclock));
  auto out_of_budget = [&] {
    return st.cost >= config.total_budget || (deadline && std::chrono::steady_clock::now() > *deadline) ||
           (ctx.cancel && ctx.cancel->load(std::memory_order_relaxed));
  };
  auto record = [&](TraceEvent e) {
    if (ctx.record_trace) out.trace.push_back(std::move(e));
  };

  std::vector<Node> nodes;
  nodes.push_back({ProofState::initial(theorem.statement), 0.0, -1, std::nullopt, ""});
  std::unordered_set<std::string> seen{to_string(nodes[0].state)};
  BoundedQueue queue(static_cast<size_t>(config.queue_cap));
  queue.push(0.0, 0);
  st.max_queue_size = 1;

  while (true) {
    if (queue.empty()) {
      out.status = SearchStatus::QueueExhausted;
      return out;
    }
    if (st.queries >= config.max_queries) {
      out.status = SearchStatus::QueryBudgetExhausted;
      return out;
    }
    if (out_of_budget()) {
      out.status = SearchStatus::TotalBudgetExhausted;
      return out;
    }
    auto [priority, id] = queue.pop();
    int query = st.queries++;
    ++st.nodes_expanded;
    TraceEvent pop;
    pop.node = id;
    pop.priority = priority;
    pop.queue_size = static_cast<int>(queue.size());
    pop.query = query;
    record(pop);

    // Copies: `nodes` grows below.
    const ProofState state = nodes[static_cast<size_t>(id)].state;
    const std::string state_text = to_string(state);
    PolicyQuery pq{nodes[static_cast<size_t>(id)].incoming, state_text};
    auto candidates = ctx.policy.suggest(pq, config.samples_per_expansion, config.temperature,
                                         derive_seed(seed, static_cast<uint64_t>(query)));

    for (const auto& cand : candidates) {
      if (out_of_budget()) break;
      ++st.candidates;
      TraceEvent ev;
      ev.kind = TraceEvent::Kind::Candidate;
      ev.node = id;
      ev.query = query;
      ev.step = cand.step_text;
      ev.priority = priority + cand.log_prob;

      bool is_hammer_token = cand.step_text == kHammerToken;
      bool via_hammer = (is_hammer_token && mode != SearchMode::PolicyOnly) ||
                        (mode == SearchMode::LearningHow && is_certificate_step(cand.step_text));
      std::optional<ProofState> child;
      std::optional<ProofStep> step;
      if (is_hammer_token && mode == SearchMode::PolicyOnly) {
        ev.outcome = "discarded";
      } else if (via_hammer) {
        HammerResult r = run_hammer(state, hb);
        ++st.hammer_calls;
        st.cost += r.inferences_used;
        ev.cost = r.inferences_used;
        TraceEvent hev;
        hev.kind = TraceEvent::Kind::Hammer;
        hev.node = id;
        hev.query = query;
        hev.outcome = to_string(r.status);
        hev.cost = r.inferences_used;
        record(hev);
        if (r.status == HammerStatus::Proved) {
          step = ProofStep::by_certificate(r.certificate, r.used_premises);
          StepResult sr = apply_step(state, *step, ctx.library);
          if (!sr.ok()) throw InvariantError("kernel rejected a hammer certificate: " + sr.message);
          ++st.hammer_successes;
          child = std::move(sr.state);
        } else {
          ev.outcome = "hammer_failed";
        }
      } else {
        st.cost += 1;
        ev.cost = 1;
        ev.kernel = true;
        ev.premise_bearing = is_premise_bearing(cand.step_text);
        (ev.premise_bearing ? st.premise_attempts : st.plain_attempts)++;
        try {
          step = parse_step(cand.step_text, ctx.certificates);
        } catch (const Error&) {
          ev.outcome = "unparseable";
        }
        if (step) {
          StepResult sr = apply_step(state, *step, ctx.library);
          if (sr.ok())
            child = std::move(sr.state);
          else
            ev.outcome = "inapplicable";
        }
      }

      if (child) {
        std::string text = to_string(*child);
        ev.advanced = text != state_text;
        if (ev.kernel && ev.advanced) (ev.premise_bearing ? st.premise_advances : st.plain_advances)++;
        if (is_proved(*child)) {
          nodes.push_back({std::move(*child), priority + cand.log_prob, id, std::move(step), ""});
          ev.outcome = "proved";
          ev.child = static_cast<int>(nodes.size()) - 1;
          record(ev);
          out.status = SearchStatus::Proved;
          out.proof = path_to(nodes, ev.child);
          return out;
        }
        if (!seen.insert(text).second) {
          ev.outcome = "duplicate";
        } else {
          std::string incoming = to_string(*step);
          nodes.push_back({std::move(*child), priority + cand.log_prob, id, std::move(step), std::move(incoming)});
          ev.child = static_cast<int>(nodes.size()) - 1;
          ev.outcome = "advanced";
          queue.push(nodes.back().log_prob, ev.child);
          st.max_queue_size = std::max(st.max_queue_size, static_cast<int>(queue.size()));
        }
      }
      ev.queue_size = static_cast<int>(queue.size());
      record(ev);
    }
  }
}

}  // namespace thor
