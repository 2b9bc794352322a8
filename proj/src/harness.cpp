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

#include "thor/harness.hpp"

#include <charconv>
#include <cmath>
#include <exception>
#include <filesystem>
#include <iomanip>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

namespace thor {

using nlohmann::json;

// --- Configuration ------------------------------------------------------------

namespace {

template <class T>
T parse_number(const std::string& v) {
  T out{};
  auto [end, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || end != v.data() + v.size())
    throw ConfigError("expected a number, got '" + v + "'");
  return out;
}

bool parse_bool(const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw ConfigError("expected true or false, got '" + v + "'");
}

std::optional<double> parse_optional(const std::string& v) {
  if (v == "none") return std::nullopt;
  return parse_number<double>(v);
}

json optional_json(const std::optional<double>& v) { return v ? json(*v) : json("none"); }

struct KeySpec {
  std::string name;
  std::function<void(RunConfig&, const std::string&)> set;
  std::function<json(const RunConfig&)> get;
};

#define THOR_KEY(NAME, FIELD, PARSE) \
  KeySpec{NAME, [](RunConfig& c, const std::string& v) { c.FIELD = PARSE(v); }, \
          [](const RunConfig& c) { return json(c.FIELD); }}

const std::vector<KeySpec>& key_specs() {
  static const std::vector<KeySpec> specs = [] {
    std::vector<KeySpec> k{
        THOR_KEY("queue_cap", search.queue_cap, parse_number<int>),
        THOR_KEY("max_queries", search.max_queries, parse_number<int>),
        THOR_KEY("samples_per_expansion", search.samples_per_expansion, parse_number<int>),
        THOR_KEY("temperature", search.temperature, parse_number<double>),
        THOR_KEY("step_budget", search.step_budget, parse_number<long>),
        THOR_KEY("total_budget", search.total_budget, parse_number<long>),
        KeySpec{"step_wallclock",
                [](RunConfig& c, const std::string& v) { c.search.step_wallclock = parse_optional(v); },
                [](const RunConfig& c) { return optional_json(c.search.step_wallclock); }},
        KeySpec{"total_wallclock",
                [](RunConfig& c, const std::string& v) { c.search.total_wallclock = parse_optional(v); },
                [](const RunConfig& c) { return optional_json(c.search.total_wallclock); }},
        THOR_KEY("hammer.max_selected_premises", search.hammer_budget.max_selected_premises,
                 parse_number<int>),
        THOR_KEY("hammer.max_inferences", search.hammer_budget.max_inferences, parse_number<long>),
        THOR_KEY("hammer.max_clauses", search.hammer_budget.max_clauses, parse_number<size_t>),
        THOR_KEY("standalone_factor", standalone_factor, parse_number<int>),
        THOR_KEY("theories", theories, parse_number<int>),
        THOR_KEY("theorems_per_theory", theorems_per_theory, parse_number<int>),
        KeySpec{"split",
                [](RunConfig& c, const std::string& v) {
                  auto parts = split(v, ",");
                  if (parts.size() != 3) throw ConfigError("split needs three fractions");
                  for (size_t i = 0; i < 3; ++i) c.split[i] = parse_number<double>(trim(parts[i]));
                },
                [](const RunConfig& c) { return json(c.split); }},
        THOR_KEY("trace_shortcut", trace_shortcut, parse_bool),
        THOR_KEY("policy.neighbors", policy.neighbors, parse_number<int>),
        THOR_KEY("policy.alpha", policy.alpha, parse_number<double>),
        THOR_KEY("profile.domain_size", profile.domain_size, parse_number<int>),
        THOR_KEY("profile.constants", profile.constants, parse_number<int>),
        THOR_KEY("profile.base_predicates", profile.base_predicates, parse_number<int>),
        THOR_KEY("profile.hypothetical_predicates", profile.hypothetical_predicates, parse_number<int>),
        THOR_KEY("profile.derived_predicates", profile.derived_predicates, parse_number<int>),
        THOR_KEY("profile.binary_predicates", profile.binary_predicates, parse_number<int>),
        THOR_KEY("profile.bridge_predicates", profile.bridge_predicates, parse_number<int>),
        THOR_KEY("profile.goal_predicates", profile.goal_predicates, parse_number<int>),
        THOR_KEY("profile.disjunctive_axioms", profile.disjunctive_axioms, parse_number<int>),
        THOR_KEY("profile.max_proof_depth", profile.max_proof_depth, parse_number<int>),
        THOR_KEY("profile.max_premises", profile.max_premises, parse_number<int>),
        THOR_KEY("profile.structural_fraction", profile.structural_fraction, parse_number<double>),
        THOR_KEY("profile.premise_fraction", profile.premise_fraction, parse_number<double>),
        THOR_KEY("profile.certificate_finish_rate", profile.certificate_finish_rate,
                 parse_number<double>),
        THOR_KEY("profile.min_disjuncts", profile.min_disjuncts, parse_number<int>),
        THOR_KEY("profile.max_disjuncts", profile.max_disjuncts, parse_number<int>),
        THOR_KEY("profile.composite_retries", profile.composite_retries, parse_number<int>),
        THOR_KEY("profile.certificate_inferences", profile.certificate_inferences, parse_number<long>),
        THOR_KEY("profile.standalone_inferences", profile.standalone_inferences, parse_number<long>),
    };
    return k;
  }();
  return specs;
}

#undef THOR_KEY

}  // namespace

HammerBudget RunConfig::standalone_hammer() const {
  HammerBudget b = search.in_search_hammer();
  b.max_inferences *= standalone_factor;
  if (b.wallclock_seconds) *b.wallclock_seconds *= standalone_factor;
  return b;
}

json RunConfig::to_json() const {
  json j = json::object();
  for (const auto& k : key_specs()) j[k.name] = k.get(*this);
  return j;
}

std::vector<std::string> config_keys() {
  std::vector<std::string> out{"profile"};
  for (const auto& k : key_specs()) out.push_back(k.name);
  return out;
}

RunConfig parse_config(std::string_view text, RunConfig base) {
  struct Line {
    int number;
    std::string key, value;
  };
  std::vector<Line> lines;
  std::set<std::string> seen;
  int number = 0;
  for (const auto& raw : split(text, "\n")) {
    ++number;
    std::string line = raw.substr(0, raw.find('#'));
    if (trim(line).empty()) continue;
    size_t eq = line.find('=');
    auto where = [&] { return " at line " + std::to_string(number); };
    if (eq == std::string::npos) throw ConfigError("expected key = value" + where());
    Line l{number, trim(line.substr(0, eq)), trim(line.substr(eq + 1))};
    if (l.key.empty() || l.value.empty()) throw ConfigError("expected key = value" + where());
    if (!seen.insert(l.key).second) throw ConfigError("duplicate key '" + l.key + "'" + where());
    lines.push_back(std::move(l));
  }

  // The profile preset applies before any individual profile field.
  for (const auto& l : lines) {
    if (l.key != "profile") continue;
    if (l.value == "default")
      base.profile = GeneratorProfile{};
    else if (l.value == "minimal")
      base.profile = GeneratorProfile::minimal();
    else
      throw ConfigError("unknown profile '" + l.value + "' at line " + std::to_string(l.number));
  }
  for (const auto& l : lines) {
    if (l.key == "profile") continue;
    auto it = std::find_if(key_specs().begin(), key_specs().end(),
                           [&](const KeySpec& k) { return k.name == l.key; });
    if (it == key_specs().end())
      throw ConfigError("unknown key '" + l.key + "' at line " + std::to_string(l.number));
    try {
      it->set(base, l.value);
    } catch (const ConfigError& e) {
      throw ConfigError(std::string(e.what()) + " for '" + l.key + "' at line " +
                        std::to_string(l.number));
    }
  }

  try {
    base.search.validate();
    base.profile.validate();
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  if (base.standalone_factor < 1) throw ConfigError("standalone_factor must be at least 1");
  if (base.theories < 1 || base.theorems_per_theory < 1)
    throw ConfigError("theories and theorems_per_theory must be positive");
  if (base.policy.neighbors < 1 || !(base.policy.alpha > 0))
    throw ConfigError("policy.neighbors and policy.alpha must be positive");
  return base;
}

// --- Premise statistics -------------------------------------------------------

std::optional<double> PremiseStepMetric::premise_rate() const {
  if (premise_attempts == 0) return std::nullopt;
  return 100.0 * static_cast<double>(premise_advances) / static_cast<double>(premise_attempts);
}

std::optional<double> PremiseStepMetric::plain_rate() const {
  if (plain_attempts == 0) return std::nullopt;
  return 100.0 * static_cast<double>(plain_advances) / static_cast<double>(plain_attempts);
}

namespace {

double round1(double x) { return std::round(x * 10.0) / 10.0; }

std::string percent(std::optional<double> v) {
  if (!v) return "n/a";
  std::ostringstream os;
  os << std::fixed << std::setprecision(1) << *v << "%";
  return os.str();
}

// Left-aligns by code points so that non-ASCII labels line up.
std::string pad(const std::string& s, size_t width) {
  size_t n = 0;
  for (unsigned char c : s) n += (c & 0xC0) != 0x80;
  return s + std::string(n < width ? width - n : 0, ' ');
}

json rate_json(std::optional<double> v) { return v ? json(round1(*v)) : json("n/a"); }

}  // namespace

json PremiseStepMetric::to_json() const {
  return {{"premise_attempts", premise_attempts}, {"premise_advances", premise_advances},
          {"plain_attempts", plain_attempts},     {"plain_advances", plain_advances},
          {"premise_rate", rate_json(premise_rate())}, {"plain_rate", rate_json(plain_rate())}};
}

PremiseStepMetric premise_step_success_metric(const std::vector<TraceEvent>& trace) {
  PremiseStepMetric m;
  for (const auto& ev : trace) {
    if (ev.kind != TraceEvent::Kind::Candidate || !ev.kernel) continue;
    if (ev.premise_bearing) {
      ++m.premise_attempts;
      m.premise_advances += ev.advanced;
    } else {
      ++m.plain_attempts;
      m.plain_advances += ev.advanced;
    }
  }
  return m;
}

PremiseStepMetric premise_step_success_metric(const std::vector<SearchStats>& stats) {
  PremiseStepMetric m;
  for (const auto& s : stats) {
    m.premise_attempts += s.premise_attempts;
    m.premise_advances += s.premise_advances;
    m.plain_attempts += s.plain_attempts;
    m.plain_advances += s.plain_advances;
  }
  return m;
}

int count_premises(const std::vector<ProofStep>& proof) {
  std::set<std::string> names;
  for (const auto& step : proof) {
    if (step.kind == ProofStep::Kind::Apply) names.insert(step.name);
    if (step.kind == ProofStep::Kind::ByCertificate)
      names.insert(step.premises.begin(), step.premises.end());
  }
  return static_cast<int>(names.size());
}

int count_premises(const std::vector<std::string>& proof_texts) {
  std::vector<ProofStep> steps;
  for (const auto& t : proof_texts) steps.push_back(parse_step(t));
  return count_premises(steps);
}

size_t premise_bucket(int premises) {
  return static_cast<size_t>(std::clamp(premises, 0, static_cast<int>(kPremiseBuckets.size()) - 1));
}

namespace {

void render_histogram(std::ostringstream& os, const std::string& title,
                      const std::map<std::string, Histogram>& rows) {
  os << title << "\n" << std::left << std::setw(14) << "system";
  for (const char* b : kPremiseBuckets) os << std::right << std::setw(7) << b;
  os << "\n";
  for (const auto& [system, h] : rows) {
    os << std::left << std::setw(14) << system;
    for (long n : h) os << std::right << std::setw(7) << n;
    os << "\n";
  }
}

}  // namespace

std::string PremiseHistograms::render_text() const {
  std::ostringstream os;
  render_histogram(os, "Premises in found proofs", found);
  os << "\n";
  render_histogram(os, "Premises in ground-truth proofs of solved theorems", ground_truth);
  return os.str();
}

std::string PremiseHistograms::render_csv() const {
  std::ostringstream os;
  os << "table,system";
  for (const char* b : kPremiseBuckets) os << "," << b;
  os << "\n";
  auto rows = [&](const char* table, const std::map<std::string, Histogram>& m) {
    for (const auto& [system, h] : m) {
      os << table << "," << system;
      for (long n : h) os << "," << n;
      os << "\n";
    }
  };
  rows("found", found);
  rows("ground_truth", ground_truth);
  return os.str();
}

json PremiseHistograms::to_json() const {
  auto conv = [](const std::map<std::string, Histogram>& m) {
    json j = json::object();
    for (const auto& [system, h] : m) {
      json row = json::object();
      for (size_t b = 0; b < h.size(); ++b) row[kPremiseBuckets[b]] = h[b];
      j[system] = row;
    }
    return j;
  };
  return {{"found", conv(found)}, {"ground_truth", conv(ground_truth)}};
}

// --- Reports ------------------------------------------------------------------

const char* to_string(System s) {
  switch (s) {
    case System::PolicyOnly: return "policy_only";
    case System::HammerOnly: return "hammer_only";
    case System::Thor: return "thor";
  }
  return "?";
}

System system_from_string(std::string_view s) {
  if (s == "policy_only" || s == "policy") return System::PolicyOnly;
  if (s == "hammer_only" || s == "hammer") return System::HammerOnly;
  if (s == "thor") return System::Thor;
  throw Error("unknown system '" + std::string(s) + "'");
}

int EvalReport::solved(System s) const {
  if (!has(s)) return 0;
  int n = 0;
  for (const auto& o : outcomes.at(s)) n += o.proved;
  return n;
}

double EvalReport::rate(System s) const {
  if (theorems.empty()) return 0.0;
  return 100.0 * solved(s) / static_cast<double>(theorems.size());
}

int EvalReport::union_solved(System a, System b) const {
  int n = 0;
  for (size_t i = 0; i < theorems.size(); ++i) {
    bool pa = has(a) && outcomes.at(a)[i].proved;
    bool pb = has(b) && outcomes.at(b)[i].proved;
    n += pa || pb;
  }
  return n;
}

double EvalReport::union_rate(System a, System b) const {
  if (theorems.empty()) return 0.0;
  return 100.0 * union_solved(a, b) / static_cast<double>(theorems.size());
}

int EvalReport::thor_only() const {
  if (!has(System::Thor)) return 0;
  int n = 0;
  for (size_t i = 0; i < theorems.size(); ++i) {
    bool other = false;
    for (System s : {System::PolicyOnly, System::HammerOnly})
      other = other || (has(s) && outcomes.at(s)[i].proved);
    n += outcomes.at(System::Thor)[i].proved && !other;
  }
  return n;
}

PremiseStepMetric EvalReport::premise_metric(System s) const {
  std::vector<SearchStats> stats;
  if (has(s))
    for (const auto& o : outcomes.at(s)) stats.push_back(o.stats);
  return premise_step_success_metric(stats);
}

PremiseHistograms EvalReport::histograms() const {
  PremiseHistograms h;
  for (const auto& [s, rows] : outcomes) {
    Histogram found{}, truth{};
    for (size_t i = 0; i < rows.size(); ++i) {
      if (!rows[i].proved) continue;
      ++found[premise_bucket(rows[i].premises)];
      ++truth[premise_bucket(ground_truth_premises[i])];
    }
    h.found[to_string(s)] = found;
    h.ground_truth[to_string(s)] = truth;
  }
  return h;
}

json EvalReport::to_json() const {
  json j;
  j["version"] = kReportVersion;
  j["label"] = label;
  j["corpus_fingerprint"] = corpus_fingerprint;
  j["models"] = models;
  j["seed"] = seed;
  j["config"] = config;
  j["test_theorems"] = theorems.size();

  json sys = json::array();
  for (System s : systems)
    sys.push_back({{"system", to_string(s)}, {"solved", solved(s)}, {"rate", round1(rate(s))}});
  j["systems"] = sys;

  json unions = json::array();
  for (System a : {System::PolicyOnly, System::Thor}) {
    if (!has(a) || !has(System::HammerOnly)) continue;
    unions.push_back({{"systems", {to_string(a), to_string(System::HammerOnly)}},
                      {"solved", union_solved(a, System::HammerOnly)},
                      {"rate", round1(union_rate(a, System::HammerOnly))}});
  }
  j["unions"] = unions;
  if (has(System::Thor)) {
    double r = theorems.empty() ? 0.0 : 100.0 * thor_only() / static_cast<double>(theorems.size());
    j["thor_only"] = {{"count", thor_only()}, {"rate", round1(r)}};
  }

  json metric = json::object();
  for (System s : systems)
    if (s != System::HammerOnly) metric[to_string(s)] = premise_metric(s).to_json();
  j["premise_step_metric"] = metric;
  j["histograms"] = histograms().to_json();

  json rows = json::array();
  for (size_t i = 0; i < theorems.size(); ++i) {
    json per = json::object();
    for (System s : systems) {
      const SystemOutcome& o = outcomes.at(s)[i];
      json r{{"status", o.status}, {"premises", o.premises}, {"proof", o.proof}};
      if (s == System::HammerOnly) {
        r["inferences"] = o.hammer_inferences;
      } else {
        r["queries"] = o.stats.queries;
        r["hammer_calls"] = o.stats.hammer_calls;
        r["cost"] = o.stats.cost;
      }
      per[to_string(s)] = r;
    }
    rows.push_back({{"theorem", theorems[i]},
                    {"family", families[i]},
                    {"ground_truth_premises", ground_truth_premises[i]},
                    {"outcomes", per}});
  }
  j["theorems"] = rows;
  return j;
}

std::string EvalReport::render_table() const {
  static const std::map<System, std::string> names{{System::PolicyOnly, "Language model"},
                                                   {System::HammerOnly, "Hammer"},
                                                   {System::Thor, "Thor"}};
  std::ostringstream os;
  auto row = [&](const std::string& name, int n, double r) {
    os << pad(name, 30) << std::right << std::setw(7) << std::fixed
       << std::setprecision(1) << r << "%" << std::setw(8) << n << "\n";
  };
  os << "Evaluation '" << label << "' on " << theorems.size() << " test theorems\n";
  os << std::left << std::setw(30) << "Approach" << std::right << std::setw(8) << "Success"
     << std::setw(8) << "Solved" << "\n";
  for (System s : {System::PolicyOnly, System::HammerOnly}) {
    if (has(s)) row(names.at(s), solved(s), rate(s));
  }
  if (has(System::PolicyOnly) && has(System::HammerOnly))
    row("Language model ∪ Hammer", union_solved(System::PolicyOnly, System::HammerOnly),
        union_rate(System::PolicyOnly, System::HammerOnly));
  if (has(System::Thor)) row("Thor", solved(System::Thor), rate(System::Thor));
  if (has(System::Thor) && has(System::HammerOnly))
    row("Thor ∪ Hammer", union_solved(System::Thor, System::HammerOnly),
        union_rate(System::Thor, System::HammerOnly));
  if (has(System::Thor)) {
    double r = theorems.empty() ? 0.0 : 100.0 * thor_only() / static_cast<double>(theorems.size());
    os << "Thor-only: " << thor_only() << " (" << percent(r) << ")\n";
  }
  for (System s : systems) {
    if (s == System::HammerOnly) continue;
    PremiseStepMetric m = premise_metric(s);
    os << "Step advance rate (" << to_string(s) << "): premise-bearing "
       << percent(m.premise_rate()) << " of " << m.premise_attempts << ", premise-free "
       << percent(m.plain_rate()) << " of " << m.plain_attempts << "\n";
  }
  return os.str();
}

// --- Evaluation ---------------------------------------------------------------

namespace {

json model_json(const RetrievalPolicyModel& m) {
  return {{"fingerprint", m.fingerprint()}, {"use_context", m.use_context()},
          {"context_free", !m.use_context()}};
}

void require_model(const RetrievalPolicyModel* m, const std::string& fingerprint, const char* role) {
  if (!m) throw Error(std::string("no policy model supplied for ") + role);
  if (!m->trained()) throw UntrainedModel(std::string("the ") + role + " model is untrained");
  if (m->trained_on() != fingerprint)
    throw MismatchedModelFingerprint(std::string("the ") + role + " model was trained on corpus " +
                                     m->trained_on() + ", not " + fingerprint);
}

// Forwards to a policy and reports every query.
class ObservedPolicy : public Policy {
 public:
  ObservedPolicy(const Policy& inner, std::function<void(const PolicyQuery&)> observe)
      : inner_(inner), observe_(std::move(observe)) {}
  std::vector<Candidate> suggest(const PolicyQuery& query, int n, double temperature,
                                 uint64_t seed) const override {
    observe_(query);
    return inner_.suggest(query, n, temperature, seed);
  }

 private:
  const Policy& inner_;
  std::function<void(const PolicyQuery&)> observe_;
};

template <class Fn>
void parallel_for(size_t n, int jobs, Fn fn) {
  std::atomic<size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mu;
  std::atomic<bool> failed{false};
  auto worker = [&] {
    for (size_t k = next++; k < n && !failed; k = next++) {
      try {
        fn(k);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mu);
        if (!error) error = std::current_exception();
        failed = true;
      }
    }
  };
  int threads = std::max(1, std::min<int>(jobs, static_cast<int>(n)));
  std::vector<std::thread> pool;
  for (int t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

EvalReport run_eval_observed(const Corpus& corpus, const EvalModels& models,
                             const EvalOptions& options,
                             const std::function<void(const PolicyQuery&)>& on_query) {
  options.config.validate();
  EvalReport report;
  report.label = options.label;
  report.corpus_fingerprint = corpus.fingerprint();
  report.seed = options.seed;

  std::set<System> wanted(options.systems.begin(), options.systems.end());
  report.systems.assign(wanted.begin(), wanted.end());
  const RetrievalPolicyModel* thor_model = models.thor;
  const RetrievalPolicyModel* policy_model = models.policy ? models.policy : models.thor;
  if (wanted.count(System::Thor)) {
    require_model(thor_model, report.corpus_fingerprint, "thor");
    report.models["thor"] = model_json(*thor_model);
  }
  if (wanted.count(System::PolicyOnly)) {
    require_model(policy_model, report.corpus_fingerprint, "policy_only");
    report.models["policy_only"] = model_json(*policy_model);
  }

  json cfg;
  cfg["queue_cap"] = options.config.queue_cap;
  cfg["max_queries"] = options.config.max_queries;
  cfg["samples_per_expansion"] = options.config.samples_per_expansion;
  cfg["temperature"] = options.config.temperature;
  cfg["step_budget"] = options.config.step_budget;
  cfg["total_budget"] = options.config.total_budget;
  cfg["in_search_inferences"] = options.config.in_search_hammer().max_inferences;
  cfg["standalone_inferences"] = options.standalone.max_inferences;
  cfg["step_wallclock"] = optional_json(options.config.step_wallclock);
  cfg["total_wallclock"] = optional_json(options.config.total_wallclock);
  cfg["thor_mode"] = options.thor_mode == SearchMode::LearningHow ? "learning_how" : "thor";
  report.config = cfg;

  std::vector<const Theorem*> tests = corpus.theorems_in(Split::Test);
  for (const Theorem* t : tests) {
    report.theorems.push_back(t->name);
    report.families.push_back(t->family);
    report.ground_truth_premises.push_back(count_premises(t->ground_truth_proof));
  }
  for (System s : report.systems) report.outcomes[s].resize(tests.size());

  std::mutex mu;
  std::optional<ObservedPolicy> thor_observed, policy_observed;
  auto observe = [&](const PolicyQuery& q) {
    std::lock_guard<std::mutex> lock(mu);
    on_query(q);
  };
  if (on_query) {
    if (thor_model) thor_observed.emplace(*thor_model, observe);
    if (policy_model) policy_observed.emplace(*policy_model, observe);
  }

  size_t n = tests.size();
  std::vector<std::pair<System, size_t>> tasks;
  for (System s : report.systems)
    for (size_t i = 0; i < n; ++i) tasks.push_back({s, i});

  parallel_for(tasks.size(), options.jobs, [&](size_t k) {
    auto [system, i] = tasks[k];
    const Theorem& theorem = *tests[i];
    uint64_t seed = derive_seed(options.seed, i);
    SystemOutcome& so = report.outcomes[system][i];
    std::vector<ProofStep> proof;

    if (system == System::HammerOnly) {
      HammerResult r = hammer(ProofState::initial(theorem.statement), corpus.library,
                              options.standalone);
      so.hammer_inferences = r.inferences_used;
      so.stats.hammer_calls = 1;
      so.stats.cost = r.inferences_used;
      so.status = to_string(r.status);
      if (r.status == HammerStatus::Proved) {
        so.stats.hammer_successes = 1;
        proof.push_back(ProofStep::by_certificate(r.certificate, r.used_premises));
        so.status = "proved";
      }
    } else {
      const RetrievalPolicyModel& model = system == System::Thor ? *thor_model : *policy_model;
      const Policy* policy = &model;
      if (on_query) policy = system == System::Thor ? &*thor_observed : &*policy_observed;
      SearchContext ctx{*policy, corpus.library, &corpus.certificates, {}, bool(options.trace),
                        nullptr};
      SearchMode mode = system == System::Thor ? options.thor_mode : SearchMode::PolicyOnly;
      SearchOutcome out = best_first_search(theorem, ctx, options.config, seed, mode);
      so.stats = out.stats;
      so.status = to_string(out.status);
      if (out.proof) proof = *out.proof;
      if (options.trace) {
        std::lock_guard<std::mutex> lock(mu);
        options.trace(system, theorem.name, out);
      }
    }

    so.proved = so.status == "proved";
    if (so.proved) {
      ProofCheck pc = check_proof(theorem, proof, corpus.library);
      if (!pc.ok)
        throw InvariantError(std::string(to_string(system)) + " proof of " + theorem.name +
                             " fails the kernel re-check at step " +
                             std::to_string(pc.failing_index) + ": " + pc.message);
      for (const auto& step : proof) so.proof.push_back(to_string(step));
      so.premises = count_premises(proof);
    }
  });
  return report;
}

}  // namespace

EvalReport run_eval(const Corpus& corpus, const EvalModels& models, const EvalOptions& options) {
  return run_eval_observed(corpus, models, options, {});
}

json AblationReport::to_json() const {
  json j;
  j["version"] = kReportVersion;
  auto entry = [](const EvalReport& r) {
    return json{{"label", r.label},
                {"solved", r.solved(System::Thor)},
                {"rate", round1(r.rate(System::Thor))},
                {"models", r.models},
                {"config", r.config}};
  };
  j["variants"] = {entry(base), entry(learning_how), entry(no_context), entry(temperature)};
  j["test_theorems"] = base.theorems.size();
  j["support_check"] = {{"queries", support_queries}, {"mismatches", support_mismatches}};
  return j;
}

std::string AblationReport::render_table() const {
  std::ostringstream os;
  auto row = [&](const std::string& name, const EvalReport& r) {
    os << pad(name, 36) << std::right << std::setw(7) << std::fixed
       << std::setprecision(1) << r.rate(System::Thor) << "%" << std::setw(8)
       << r.solved(System::Thor) << "\n";
  };
  os << "Ablations on " << base.theorems.size() << " test theorems\n";
  os << std::left << std::setw(36) << "Variant" << std::right << std::setw(8) << "Success"
     << std::setw(8) << "Solved" << "\n";
  row("Thor (base)", base);
  row("Learning how to select premises", learning_how);
  row("No proof context", no_context);
  row("Sampling temperature T = 1.0", temperature);
  os << "Candidate supports compared on " << support_queries << " queries: " << support_mismatches
     << " mismatches\n";
  return os.str();
}

AblationReport run_ablations(const Corpus& raw, const Corpus& preprocessed, const RunConfig& config,
                             uint64_t seed, int jobs) {
  RetrievalPolicyModel base_model = RetrievalPolicyModel::train(preprocessed, true, config.policy);
  RetrievalPolicyModel raw_model = RetrievalPolicyModel::train(raw, true, config.policy);
  RetrievalPolicyModel no_context_model =
      RetrievalPolicyModel::train(preprocessed, false, config.policy);

  EvalOptions o;
  o.config = config.search;
  o.standalone = config.standalone_hammer();
  o.systems = {System::Thor};
  o.seed = seed;
  o.jobs = jobs;

  AblationReport out;
  std::set<std::pair<std::string, std::string>> queries;
  o.label = "base";
  out.base = run_eval_observed(raw, {&base_model, nullptr}, o, [&](const PolicyQuery& q) {
    queries.insert({q.context, q.proof_state});
  });

  o.label = "learning_how";
  o.thor_mode = SearchMode::LearningHow;
  out.learning_how = run_eval(raw, {&raw_model, nullptr}, o);
  o.thor_mode = SearchMode::Thor;

  o.label = "no_context";
  out.no_context = run_eval(raw, {&no_context_model, nullptr}, o);

  o.label = "temperature_1.0";
  o.config.temperature = 1.0;
  out.temperature = run_eval(raw, {&base_model, nullptr}, o);

  // Every query of the base run: the set of steps with nonzero sampling mass
  // must not depend on the temperature.
  for (const auto& [context, state] : queries) {
    auto d = base_model.distribution({context, state});
    auto a = base_model.sampling_weights(d, config.search.temperature);
    auto b = base_model.sampling_weights(d, 1.0);
    ++out.support_queries;
    for (size_t i = 0; i < a.size(); ++i) {
      if ((a[i] > 0) != (b[i] > 0)) {
        ++out.support_mismatches;
        break;
      }
    }
  }
  return out;
}

// --- Manifest -----------------------------------------------------------------

json RunManifest::to_json() const {
  return {{"subcommand", subcommand},
          {"config", config},
          {"inputs", inputs},
          {"outputs", outputs},
          {"wallclock_seconds", wallclock_seconds},
          {"tool_version", tool_version}};
}

void RunManifest::write(const std::string& dir) const {
  std::filesystem::path p = std::filesystem::path(dir) / "manifests";
  std::filesystem::create_directories(p);
  write_file_atomic((p / (subcommand + ".json")).string(), to_json().dump(2) + "\n");
}

}  // namespace thor
