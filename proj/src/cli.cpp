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

#include <chrono>
#include <filesystem>
#include <iostream>

#include "CLI11.hpp"
#include "thor/harness.hpp"

namespace thor {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr uint64_t kDefaultSeed = 20240601;

// Input problems detected after argument parsing; reported like a parse error.
class UsageError : public Error {
 public:
  using Error::Error;
};

struct Globals {
  std::string config_path;
  uint64_t seed = kDefaultSeed;
  std::string out = "out";
  int jobs = 1;
  bool trace = false;
};

std::string under(const Globals& g, const std::string& name) { return (fs::path(g.out) / name).string(); }

std::string or_default(const std::string& v, const std::string& fallback) {
  return v.empty() ? fallback : v;
}

RunConfig load_config(const Globals& g) {
  if (g.config_path.empty()) return RunConfig{};
  if (!fs::is_regular_file(g.config_path))
    throw UsageError("config file '" + g.config_path + "' does not exist");
  return parse_config(read_file(g.config_path));
}

Corpus require_corpus(const std::string& dir) {
  if (!fs::is_directory(dir)) throw UsageError("corpus directory '" + dir + "' does not exist");
  return load_corpus(dir);
}

RetrievalPolicyModel require_model(const std::string& path) {
  if (!fs::is_regular_file(path)) throw UsageError("model file '" + path + "' does not exist");
  return RetrievalPolicyModel::load(path);
}

void write_trace(const std::string& path, const SearchOutcome& out) {
  std::string text;
  for (const auto& ev : out.trace) text += ev.to_json().dump() + "\n";
  fs::create_directories(fs::path(path).parent_path());
  write_file_atomic(path, text);
}

std::vector<System> parse_systems(const std::string& spec) {
  std::vector<System> out;
  for (const auto& part : split(spec, ",")) {
    try {
      out.push_back(system_from_string(trim(part)));
    } catch (const Error& e) {
      throw UsageError(e.what());
    }
  }
  if (out.empty()) throw UsageError("no systems selected");
  return out;
}

}  // namespace

int cli_main(int argc, const char* const* argv) {
  CLI::App app{"Hammer-integrated proof search over synthetic first-order theories", "thor"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--config", g.config_path, "key = value configuration file");
  app.add_option("--seed", g.seed, "master seed")->capture_default_str();
  app.add_option("--out", g.out, "output directory")->capture_default_str();
  app.add_option("--jobs", g.jobs, "parallel workers")->capture_default_str()->check(CLI::PositiveNumber);
  app.add_flag("--trace", g.trace, "write per-theorem search traces as JSONL");

  std::string corpus_dir, preprocessed_dir, model_path, policy_model_path, systems_spec, theorem_name,
      cert_path, goal_text, system_name = "thor", query_state, query_context;
  bool trace_shortcut = false, no_context = false;

  auto* gen = app.add_subcommand("gen-corpus", "generate, split and save the synthetic corpus");
  auto* pre = app.add_subcommand("preprocess", "replace hammer-solvable training steps by <hammer>");
  pre->add_option("--corpus", corpus_dir, "corpus directory (default <out>/corpus)");
  pre->add_flag("--trace-shortcut", trace_shortcut, "replace certificate steps only, without hammer calls");
  auto* train = app.add_subcommand("train", "train the retrieval policy");
  train->add_option("--corpus", corpus_dir, "corpus directory (default <out>/preprocessed)");
  train->add_option("--model", model_path, "output model file (default <out>/model.bin)");
  train->add_flag("--no-context", no_context, "ignore the previous-step context");
  auto* prove = app.add_subcommand("prove", "search for a proof of one theorem");
  prove->add_option("theorem", theorem_name, "theorem name")->required();
  prove->add_option("--corpus", corpus_dir, "corpus directory (default <out>/corpus)");
  prove->add_option("--model", model_path, "policy model (default <out>/model.bin)");
  prove->add_option("--system", system_name, "thor, policy_only or hammer_only")->capture_default_str();
  auto* eval = app.add_subcommand("eval", "evaluate systems on the test split");
  eval->add_option("--corpus", corpus_dir, "corpus directory (default <out>/corpus)");
  eval->add_option("--model", model_path, "Thor policy model (default <out>/model.bin)");
  eval->add_option("--policy-model", policy_model_path, "policy-only model (default: --model)");
  eval->add_option("--systems", systems_spec, "comma-separated systems (default all)");
  auto* ablate = app.add_subcommand("ablate", "run the ablation variants");
  ablate->add_option("--corpus", corpus_dir, "raw corpus directory (default <out>/corpus)");
  ablate->add_option("--preprocessed", preprocessed_dir,
                     "preprocessed corpus directory (default <out>/preprocessed)");
  auto* check = app.add_subcommand("check-cert", "check certificates");
  check->add_option("--corpus", corpus_dir, "corpus directory (default <out>/corpus)");
  check->add_option("--cert", cert_path, "single certificate JSON file");
  check->add_option("--goal", goal_text, "goal the certificate closes, e.g. 'h0: p(a) ⊢ q(a)'");
  auto* policy = app.add_subcommand("policy", "policy model tools");
  policy->require_subcommand(1);
  auto* inspect = policy->add_subcommand("inspect", "summarize a trained model");
  inspect->add_option("--model", model_path, "model file (default <out>/model.bin)");
  inspect->add_option("--state", query_state, "also show the distribution for this proof state");
  inspect->add_option("--context", query_context, "previous step for --state");

  auto usage = [&](const std::string& message) {
    std::cerr << "error: " << message << "\n\n" << app.help();
    return 1;
  };

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return usage(e.what());
  }

  auto started = std::chrono::steady_clock::now();
  RunManifest manifest;
  try {
    RunConfig cfg = load_config(g);
    manifest.config = cfg.to_json();
    manifest.config["seed"] = g.seed;
    manifest.config["jobs"] = g.jobs;
    if (!g.config_path.empty()) manifest.inputs["config"] = g.config_path;
    fs::create_directories(g.out);

    if (*gen) {
      manifest.subcommand = "gen-corpus";
      Corpus c = generate_corpus(g.seed, cfg.theories, cfg.theorems_per_theory, cfg.profile);
      split_corpus(c, cfg.split, g.seed);
      std::string dir = under(g, "corpus");
      save_corpus(c, dir);
      manifest.outputs["corpus"] = dir;
      std::cout << "generated " << c.theorems.size() << " theorems, " << c.datapoints.size()
                << " datapoints, " << c.library.facts().size() << " facts into " << dir << "\n"
                << "fingerprint " << c.fingerprint() << "\n";
    } else if (*pre) {
      manifest.subcommand = "preprocess";
      std::string in = or_default(corpus_dir, under(g, "corpus"));
      Corpus c = require_corpus(in);
      auto r = preprocess_corpus(c, cfg.search.in_search_hammer(),
                                 trace_shortcut || cfg.trace_shortcut, g.jobs);
      std::string dir = under(g, "preprocessed");
      save_corpus(r.corpus, dir);
      std::string report = under(g, "preprocess.json");
      write_file_atomic(report, r.report.to_json().dump(2) + "\n");
      manifest.inputs["corpus"] = in;
      manifest.outputs["corpus"] = dir;
      manifest.outputs["report"] = report;
      std::cout << r.report.to_json().dump() << "\n";
    } else if (*train) {
      manifest.subcommand = "train";
      std::string in = or_default(corpus_dir, under(g, "preprocessed"));
      Corpus c = require_corpus(in);
      auto m = RetrievalPolicyModel::train(c, !no_context, cfg.policy);
      std::string out = or_default(model_path, under(g, no_context ? "model-nocontext.bin" : "model.bin"));
      m.save(out);
      manifest.inputs["corpus"] = in;
      manifest.outputs["model"] = out;
      std::cout << "trained on " << m.size() << " datapoints; fingerprint " << m.fingerprint()
                << "; saved " << out << "\n";
    } else if (*prove) {
      manifest.subcommand = "prove";
      std::string in = or_default(corpus_dir, under(g, "corpus"));
      Corpus c = require_corpus(in);
      const Theorem* t = c.find_theorem(theorem_name);
      if (!t) throw UsageError("unknown theorem '" + theorem_name + "'");
      System system;
      try {
        system = system_from_string(system_name);
      } catch (const Error& e) {
        throw UsageError(e.what());
      }
      json result{{"theorem", t->name}, {"statement", to_string(t->statement)}, {"system", to_string(system)}};
      std::vector<ProofStep> proof;
      std::string status;
      if (system == System::HammerOnly) {
        HammerResult r = hammer(ProofState::initial(t->statement), c.library, cfg.standalone_hammer());
        status = r.status == HammerStatus::Proved ? "proved" : to_string(r.status);
        if (r.certificate) proof.push_back(ProofStep::by_certificate(r.certificate, r.used_premises));
        result["inferences"] = r.inferences_used;
      } else {
        std::string mp = or_default(model_path, under(g, "model.bin"));
        auto m = require_model(mp);
        manifest.inputs["model"] = mp;
        SearchContext ctx{m, c.library, &c.certificates, {}, g.trace, nullptr};
        auto out = best_first_search(*t, ctx, cfg.search, g.seed,
                                     system == System::Thor ? SearchMode::Thor : SearchMode::PolicyOnly);
        status = to_string(out.status);
        if (out.proof) proof = *out.proof;
        result["queries"] = out.stats.queries;
        result["hammer_calls"] = out.stats.hammer_calls;
        if (g.trace) {
          std::string tp = under(g, "traces/prove/" + t->name + ".jsonl");
          write_trace(tp, out);
          manifest.outputs["trace"] = tp;
        }
      }
      if (status == "proved" && !check_proof(*t, proof, c.library).ok)
        throw InvariantError("found proof of " + t->name + " fails the kernel re-check");
      result["status"] = status;
      json steps = json::array();
      for (const auto& s : proof) steps.push_back(to_string(s));
      result["proof"] = steps;
      std::string path = under(g, "prove/" + t->name + ".json");
      fs::create_directories(fs::path(path).parent_path());
      write_file_atomic(path, result.dump(2) + "\n");
      manifest.inputs["corpus"] = in;
      manifest.outputs["result"] = path;
      std::cout << t->name << ": " << status << "\n";
      for (const auto& s : steps) std::cout << "  " << s.get<std::string>() << "\n";
    } else if (*eval) {
      manifest.subcommand = "eval";
      std::string in = or_default(corpus_dir, under(g, "corpus"));
      Corpus c = require_corpus(in);
      EvalOptions o;
      o.config = cfg.search;
      o.standalone = cfg.standalone_hammer();
      o.seed = g.seed;
      o.jobs = g.jobs;
      if (!systems_spec.empty()) o.systems = parse_systems(systems_spec);
      std::optional<RetrievalPolicyModel> thor_model, policy_model;
      std::set<System> wanted(o.systems.begin(), o.systems.end());
      std::string mp = or_default(model_path, under(g, "model.bin"));
      if (wanted.count(System::Thor) || (wanted.count(System::PolicyOnly) && policy_model_path.empty())) {
        thor_model = require_model(mp);
        manifest.inputs["model"] = mp;
      }
      if (wanted.count(System::PolicyOnly) && !policy_model_path.empty()) {
        policy_model = require_model(policy_model_path);
        manifest.inputs["policy_model"] = policy_model_path;
      }
      EvalModels models{thor_model ? &*thor_model : nullptr, policy_model ? &*policy_model : nullptr};
      if (g.trace) {
        o.trace = [&](System s, const std::string& theorem, const SearchOutcome& out) {
          write_trace(under(g, std::string("traces/") + to_string(s) + "/" + theorem + ".jsonl"), out);
        };
        manifest.outputs["traces"] = under(g, "traces");
      }
      EvalReport r = run_eval(c, models, o);
      PremiseHistograms h = r.histograms();
      write_file_atomic(under(g, "report.json"), r.to_json().dump(2) + "\n");
      write_file_atomic(under(g, "report.txt"), r.render_table());
      write_file_atomic(under(g, "histograms.csv"), h.render_csv());
      write_file_atomic(under(g, "histograms.txt"), h.render_text());
      manifest.inputs["corpus"] = in;
      for (const char* f : {"report.json", "report.txt", "histograms.csv", "histograms.txt"})
        manifest.outputs[f] = under(g, f);
      std::cout << r.render_table() << "\n" << h.render_text();
    } else if (*ablate) {
      manifest.subcommand = "ablate";
      std::string in = or_default(corpus_dir, under(g, "corpus"));
      std::string pin = or_default(preprocessed_dir, under(g, "preprocessed"));
      Corpus raw = require_corpus(in);
      Corpus processed = require_corpus(pin);
      AblationReport r = run_ablations(raw, processed, cfg, g.seed, g.jobs);
      write_file_atomic(under(g, "ablation.json"), r.to_json().dump(2) + "\n");
      write_file_atomic(under(g, "ablation.txt"), r.render_table());
      for (const EvalReport* v : {&r.base, &r.learning_how, &r.no_context, &r.temperature}) {
        std::string p = under(g, "ablation-" + v->label + ".json");
        write_file_atomic(p, v->to_json().dump(2) + "\n");
        manifest.outputs[v->label] = p;
      }
      manifest.inputs["corpus"] = in;
      manifest.inputs["preprocessed"] = pin;
      manifest.outputs["table"] = under(g, "ablation.txt");
      std::cout << r.render_table();
    } else if (*check) {
      manifest.subcommand = "check-cert";
      std::string in = or_default(corpus_dir, under(g, "corpus"));
      Corpus c = require_corpus(in);
      manifest.inputs["corpus"] = in;
      if (!cert_path.empty() || !goal_text.empty()) {
        if (cert_path.empty() || goal_text.empty()) throw UsageError("--cert and --goal go together");
        if (!fs::is_regular_file(cert_path)) throw UsageError("certificate '" + cert_path + "' does not exist");
        Certificate cert = certificate_from_json(json::parse(read_file(cert_path)));
        std::vector<NamedFormula> premises;
        for (const auto& name : cert.premise_names()) {
          const auto* fact = c.library.find(name);
          if (!fact) throw UsageError("certificate premise '" + name + "' is not in the library");
          premises.push_back({ClauseOrigin::Kind::Premise, name, fact->formula});
        }
        CertificateCheck r = check_certificate(parse_goal(goal_text), premises, cert);
        manifest.inputs["certificate"] = cert_path;
        std::cout << (r.ok ? "accepted" : "rejected: " + r.message) << "\n";
        if (!r.ok) return 1;
      } else {
        // Every stored certificate is exercised by replaying the proofs that cite it.
        long steps = 0, failures = 0;
        for (const auto& t : c.theorems) {
          ProofCheck pc = check_proof(t, t.ground_truth_proof, c.library);
          for (const auto& s : t.ground_truth_proof) steps += s.kind == ProofStep::Kind::ByCertificate;
          if (!pc.ok) {
            ++failures;
            std::cerr << t.name << ": step " << pc.failing_index << ": " << pc.message << "\n";
          }
        }
        std::cout << "checked " << steps << " certificate steps in " << c.theorems.size() << " proofs ("
                  << c.certificates.size() << " certificates): " << failures << " failures\n";
        if (failures) return 1;
      }
    } else if (*inspect) {
      manifest.subcommand = "policy-inspect";
      std::string mp = or_default(model_path, under(g, "model.bin"));
      auto m = require_model(mp);
      manifest.inputs["model"] = mp;
      json j = m.inspect();
      if (!query_state.empty()) {
        auto d = m.distribution({query_context, query_state});
        std::vector<std::pair<double, std::string>> ranked;
        for (const auto& [step, p] : d.steps) ranked.push_back({-p, step});
        std::sort(ranked.begin(), ranked.end());
        json top = json::array();
        for (size_t i = 0; i < std::min<size_t>(10, ranked.size()); ++i)
          top.push_back({{"step", ranked[i].second}, {"p", -ranked[i].first}});
        j["query"] = {{"fallback", d.fallback}, {"top", top}};
      }
      std::cout << j.dump(2) << "\n";
    }
  } catch (const UsageError& e) {
    return usage(e.what());
  } catch (const ConfigError& e) {
    return usage(e.what());
  } catch (const InvariantError& e) {
    std::cerr << "internal invariant failure: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "internal failure: " << e.what() << "\n";
    return 2;
  }

  manifest.wallclock_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  try {
    manifest.write(g.out);
  } catch (const std::exception& e) {
    std::cerr << "error: cannot write the run manifest: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace thor
