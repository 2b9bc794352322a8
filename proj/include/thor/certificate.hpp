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

#ifndef THOR_CERTIFICATE_HPP_
#define THOR_CERTIFICATE_HPP_

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "json.hpp"
#include "thor/cnf.hpp"

namespace thor {

// A replayable refutation: input clauses referenced by origin, then
// resolution/factoring inferences in DAG order ending in the empty clause.
//
// Clause ids are dense: inputs first, then inferences. Every clause lists its
// literals in the prover's order; inference literal indices refer to that
// order. In a Resolve inference the variables X<i> of the second parent are
// renamed to Y<i> before the unifier is applied.
struct Certificate {
  struct Input {
    int id = 0;
    ClauseOrigin origin;
    Clause clause;
  };
  struct Inference {
    enum class Rule { Resolve, Factor };
    int id = 0;
    Rule rule = Rule::Resolve;
    std::vector<int> parents;   // Resolve: 2, Factor: 1
    std::vector<int> literals;  // Resolve: one per parent; Factor: >= 2
    Substitution unifier;
    Clause clause;
  };

  std::vector<Input> inputs;
  std::vector<Inference> inferences;
  int conclusion = -1;
  std::string prover = "resolution";

  // Names of Premise-origin inputs, in input order, deduplicated.
  std::vector<std::string> premise_names() const;
};

nlohmann::json to_json(const Certificate& c);
Certificate certificate_from_json(const nlohmann::json& j);

// "c" followed by 12 hex digits of a hash of the canonical JSON.
std::string certificate_id(const Certificate& c);

class CertificateStore {
 public:
  // Returns the certificate id.
  std::string add(std::shared_ptr<const Certificate> cert);
  std::shared_ptr<const Certificate> find(const std::string& id) const;
  const std::map<std::string, std::shared_ptr<const Certificate>>& all() const {
    return certs_;
  }
  size_t size() const { return certs_.size(); }

 private:
  std::map<std::string, std::shared_ptr<const Certificate>> certs_;
};

}  // namespace thor

#endif  // THOR_CERTIFICATE_HPP_
