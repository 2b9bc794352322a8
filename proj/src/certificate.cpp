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

#include "thor/certificate.hpp"

#include <set>

namespace thor {

using nlohmann::json;

std::vector<std::string> Certificate::premise_names() const {
  std::vector<std::string> out;
  std::set<std::string> seen;
  for (const auto& in : inputs)
    if (in.origin.kind == ClauseOrigin::Kind::Premise &&
        seen.insert(in.origin.name).second)
      out.push_back(in.origin.name);
  return out;
}

static json clause_json(const Clause& c) {
  json arr = json::array();
  for (const auto& l : c) arr.push_back(to_string(l));
  return arr;
}

static Clause clause_from_json(const json& j) {
  Clause c;
  for (const auto& l : j) c.push_back(parse_literal(l.get<std::string>()));
  return c;
}

json to_json(const Certificate& c) {
  json j;
  j["version"] = 1;
  j["prover"] = c.prover;
  json inputs = json::array();
  for (const auto& in : c.inputs) {
    inputs.push_back({{"id", in.id},
                      {"origin", to_string(in.origin.kind)},
                      {"name", in.origin.name},
                      {"index", in.origin.index},
                      {"clause", clause_json(in.clause)}});
  }
  j["inputs"] = std::move(inputs);
  json infs = json::array();
  for (const auto& inf : c.inferences) {
    json u = json::object();
    for (const auto& [var, term] : inf.unifier) u[var] = to_string(term);
    infs.push_back(
        {{"id", inf.id},
         {"rule", inf.rule == Certificate::Inference::Rule::Resolve ? "resolve"
                                                                    : "factor"},
         {"parents", inf.parents},
         {"literals", inf.literals},
         {"unifier", std::move(u)},
         {"clause", clause_json(inf.clause)}});
  }
  j["inferences"] = std::move(infs);
  j["conclusion"] = c.conclusion;
  return j;
}

Certificate certificate_from_json(const json& j) {
  try {
    Certificate c;
    if (j.at("version").get<int>() != 1)
      throw Error("unsupported certificate version");
    c.prover = j.value("prover", "resolution");
    for (const auto& in : j.at("inputs")) {
      Certificate::Input x;
      x.id = in.at("id").get<int>();
      x.origin.kind = origin_kind_from_string(in.at("origin").get<std::string>());
      x.origin.name = in.at("name").get<std::string>();
      x.origin.index = in.at("index").get<int>();
      x.clause = clause_from_json(in.at("clause"));
      c.inputs.push_back(std::move(x));
    }
    for (const auto& inf : j.at("inferences")) {
      Certificate::Inference x;
      x.id = inf.at("id").get<int>();
      std::string rule = inf.at("rule").get<std::string>();
      if (rule == "resolve")
        x.rule = Certificate::Inference::Rule::Resolve;
      else if (rule == "factor")
        x.rule = Certificate::Inference::Rule::Factor;
      else
        throw Error("unknown inference rule '" + rule + "'");
      x.parents = inf.at("parents").get<std::vector<int>>();
      x.literals = inf.at("literals").get<std::vector<int>>();
      for (const auto& [var, term] : inf.at("unifier").items()) {
        FormulaParser p(term.get<std::string>(),
                        FormulaParser::VarMode::UpperCase);
        x.unifier[var] = p.parse_term();
      }
      x.clause = clause_from_json(inf.at("clause"));
      c.inferences.push_back(std::move(x));
    }
    c.conclusion = j.at("conclusion").get<int>();
    return c;
  } catch (const json::exception& e) {
    throw Error(std::string("malformed certificate: ") + e.what());
  }
}

std::string certificate_id(const Certificate& c) {
  return "c" + to_hex(fnv1a(to_json(c).dump()), 12);
}

std::string CertificateStore::add(std::shared_ptr<const Certificate> cert) {
  std::string id = certificate_id(*cert);
  certs_.emplace(id, std::move(cert));
  return id;
}

std::shared_ptr<const Certificate> CertificateStore::find(
    const std::string& id) const {
  auto it = certs_.find(id);
  return it == certs_.end() ? nullptr : it->second;
}

}  // namespace thor
