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

// Proof-step policies: a retrieval model over the prompt format and a
// scripted test double.

#ifndef THOR_POLICY_HPP_
#define THOR_POLICY_HPP_

#include <map>
#include <string>
#include <vector>

#include "thor/corpus.hpp"

namespace thor {

struct PolicyQuery {
  std::string context;
  std::string proof_state;
};

struct Candidate {
  std::string step_text;
  double log_prob = 0.0;  // untempered

  bool operator==(const Candidate&) const = default;
};

class Policy {
 public:
  virtual ~Policy() = default;
  // Up to n distinct candidates, drawn without replacement.
  virtual std::vector<Candidate> suggest(const PolicyQuery& query, int n, double temperature,
                                         uint64_t seed) const = 0;
};

class UntrainedModel : public Error {
 public:
  using Error::Error;
};

class EmptyTrainSplit : public Error {
 public:
  using Error::Error;
};

// Whitespace and punctuation tokenizer over the canonical grammar. The fixed
// prompt markers carry no information and are not tokens.
std::vector<std::string> tokenize_prompt(std::string_view text);

struct PolicyParams {
  int neighbors = 32;
  double alpha = 0.05;
};

class RetrievalPolicyModel : public Policy {
 public:
  struct Distribution {
    // Base probabilities p(s), ordered by step text.
    std::vector<std::pair<std::string, double>> steps;
    bool fallback = false;  // no neighbour shared a token
  };

  RetrievalPolicyModel() = default;

  // Indexes the train split. Throws EmptyTrainSplit.
  static RetrievalPolicyModel train(const Corpus& corpus, bool use_context,
                                    PolicyParams params = {});

  // Throws UntrainedModel.
  Distribution distribution(const PolicyQuery& query) const;
  // q(s) proportional to p(s)^(1/T), aligned with distribution().steps.
  std::vector<double> sampling_weights(const Distribution& d, double temperature) const;
  std::vector<Candidate> suggest(const PolicyQuery& query, int n, double temperature,
                                 uint64_t seed) const override;
  // Neighbours as (train datapoint index, similarity), best first.
  std::vector<std::pair<size_t, double>> neighbours(const PolicyQuery& query) const;

  bool trained() const { return !steps_.empty(); }
  bool use_context() const { return use_context_; }
  const PolicyParams& params() const { return params_; }
  const std::string& trained_on() const { return trained_on_; }
  size_t size() const { return entries_.size(); }
  const std::string& step_of(size_t entry) const { return steps_[entries_[entry].step]; }
  std::string fingerprint() const;

  void save(const std::string& path) const;
  // Throws Error on a missing file, bad version tag or corrupt payload.
  static RetrievalPolicyModel load(const std::string& path);
  nlohmann::json inspect() const;

 private:
  struct Entry {
    std::vector<uint32_t> tokens;  // sorted, distinct
    uint32_t step = 0;
  };

  std::vector<uint32_t> query_tokens(const PolicyQuery& query) const;
  std::string serialize() const;
  void build_index();

  PolicyParams params_;
  bool use_context_ = true;
  std::string trained_on_;
  std::vector<std::string> vocabulary_;
  std::map<std::string, uint32_t> token_ids_;
  std::vector<std::string> steps_;
  std::vector<Entry> entries_;
  std::vector<std::vector<uint32_t>> postings_;
  std::vector<uint32_t> step_frequency_order_;  // fallback ranking
};

// Answers from a fixed table. A pattern ending in '*' matches any state with
// that prefix; exact patterns win, then the longest prefix.
class ScriptedPolicy : public Policy {
 public:
  explicit ScriptedPolicy(std::map<std::string, std::vector<std::string>> script)
      : script_(std::move(script)) {}
  std::vector<Candidate> suggest(const PolicyQuery& query, int n, double temperature,
                                 uint64_t seed) const override;

 private:
  std::map<std::string, std::vector<std::string>> script_;
};

}  // namespace thor

#endif  // THOR_POLICY_HPP_
