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

#include "thor/policy.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <set>

namespace thor {

using nlohmann::json;

namespace {

constexpr char kMagic[8] = {'T', 'H', 'O', 'R', 'P', 'O', 'L', '\n'};
constexpr uint32_t kFormatVersion = 1;

bool is_word_char(unsigned char c) { return std::isalnum(c) || c == '_' || c == '%'; }

bool is_marker(std::string_view t) {
  return t == "<SOS>" || t == "<CTXT>" || t == "<PRF_STT>" || t == "<PRF_STP>" || t == "<EOS>";
}

}  // namespace

std::vector<std::string> tokenize_prompt(std::string_view s) {
  std::vector<std::string> out;
  size_t i = 0;
  while (i < s.size()) {
    unsigned char c = static_cast<unsigned char>(s[i]);
    size_t len = 1;
    if (std::isspace(c)) {
      ++i;
      continue;
    }
    if (is_word_char(c)) {
      while (i + len < s.size() && is_word_char(static_cast<unsigned char>(s[i + len]))) ++len;
    } else if (c >= 0x80) {
      len = c >= 0xF0 ? 4 : c >= 0xE0 ? 3 : c >= 0xC0 ? 2 : 1;
      len = std::min(len, s.size() - i);
    } else if ((c == '-' && i + 1 < s.size() && s[i + 1] == '>') ||
               (c == '|' && i + 1 < s.size() && s[i + 1] == '|')) {
      len = 2;
    } else if (c == '<') {
      size_t j = i + 1;
      while (j < s.size() && is_word_char(static_cast<unsigned char>(s[j]))) ++j;
      if (j < s.size() && s[j] == '>' && j > i + 1) len = j - i + 1;
    }
    std::string_view tok = s.substr(i, len);
    if (!is_marker(tok)) out.emplace_back(tok);
    i += len;
  }
  return out;
}

// --- Training -----------------------------------------------------------------

RetrievalPolicyModel RetrievalPolicyModel::train(const Corpus& corpus, bool use_context,
                                                 PolicyParams params) {
  if (params.neighbors < 1 || !(params.alpha >= 0))
    throw Error("policy parameters need neighbors >= 1 and alpha >= 0");
  // Canonical order (step, tokens) makes the model independent of the order
  // in which datapoints arrive.
  std::vector<std::pair<std::string, std::vector<std::string>>> rows;
  for (const auto& dp : corpus.datapoints) {
    auto it = corpus.split.find(dp.theorem);
    if (it == corpus.split.end() || it->second != Split::Train) continue;
    Datapoint q = dp;
    if (!use_context) q.context.clear();
    auto toks = tokenize_prompt(prompt_of(q));
    std::sort(toks.begin(), toks.end());
    toks.erase(std::unique(toks.begin(), toks.end()), toks.end());
    rows.emplace_back(dp.step, std::move(toks));
  }
  if (rows.empty()) throw EmptyTrainSplit("the corpus has no train datapoints");
  std::sort(rows.begin(), rows.end());

  RetrievalPolicyModel m;
  m.params_ = params;
  m.use_context_ = use_context;
  m.trained_on_ = corpus.fingerprint();
  std::set<std::string> vocab, steps;
  for (const auto& [step, toks] : rows) {
    steps.insert(step);
    vocab.insert(toks.begin(), toks.end());
  }
  m.vocabulary_.assign(vocab.begin(), vocab.end());
  m.steps_.assign(steps.begin(), steps.end());
  for (const auto& [step, toks] : rows) {
    Entry e;
    e.step = static_cast<uint32_t>(std::lower_bound(m.steps_.begin(), m.steps_.end(), step) - m.steps_.begin());
    for (const auto& t : toks)
      e.tokens.push_back(static_cast<uint32_t>(
          std::lower_bound(m.vocabulary_.begin(), m.vocabulary_.end(), t) - m.vocabulary_.begin()));
    m.entries_.push_back(std::move(e));
  }
  m.build_index();
  return m;
}

void RetrievalPolicyModel::build_index() {
  token_ids_.clear();
  for (size_t i = 0; i < vocabulary_.size(); ++i) token_ids_[vocabulary_[i]] = static_cast<uint32_t>(i);
  postings_.assign(vocabulary_.size(), {});
  std::vector<uint32_t> freq(steps_.size(), 0);
  for (size_t i = 0; i < entries_.size(); ++i) {
    for (uint32_t t : entries_[i].tokens) postings_[t].push_back(static_cast<uint32_t>(i));
    ++freq[entries_[i].step];
  }
  step_frequency_order_.resize(steps_.size());
  for (uint32_t i = 0; i < steps_.size(); ++i) step_frequency_order_[i] = i;
  std::stable_sort(step_frequency_order_.begin(), step_frequency_order_.end(),
                   [&](uint32_t a, uint32_t b) { return freq[a] > freq[b]; });
}

// --- Retrieval ----------------------------------------------------------------

std::vector<uint32_t> RetrievalPolicyModel::query_tokens(const PolicyQuery& query) const {
  Datapoint dp{"", use_context_ ? query.context : "", query.proof_state, "", std::nullopt};
  auto toks = tokenize_prompt(prompt_of(dp));
  std::sort(toks.begin(), toks.end());
  toks.erase(std::unique(toks.begin(), toks.end()), toks.end());
  std::vector<uint32_t> ids;
  for (const auto& t : toks) {
    auto it = token_ids_.find(t);
    ids.push_back(it == token_ids_.end() ? std::numeric_limits<uint32_t>::max() : it->second);
  }
  return ids;
}

std::vector<std::pair<size_t, double>> RetrievalPolicyModel::neighbours(const PolicyQuery& query) const {
  if (!trained()) throw UntrainedModel("the policy model has not been trained");
  std::vector<uint32_t> q = query_tokens(query);
  thread_local std::vector<uint32_t> counts;
  counts.assign(entries_.size(), 0);
  std::vector<uint32_t> touched;
  for (uint32_t t : q) {
    if (t == std::numeric_limits<uint32_t>::max()) continue;
    for (uint32_t e : postings_[t])
      if (counts[e]++ == 0) touched.push_back(e);
  }
  std::vector<std::pair<size_t, double>> scored;
  scored.reserve(touched.size());
  for (uint32_t e : touched) {
    double inter = counts[e];
    double uni = static_cast<double>(q.size() + entries_[e].tokens.size()) - inter;
    scored.emplace_back(e, inter / uni);
  }
  auto better = [](const auto& a, const auto& b) { return a.second > b.second || (a.second == b.second && a.first < b.first); };
  size_t k = std::min(scored.size(), static_cast<size_t>(params_.neighbors));
  std::partial_sort(scored.begin(), scored.begin() + static_cast<long>(k), scored.end(), better);
  scored.resize(k);
  return scored;
}

RetrievalPolicyModel::Distribution RetrievalPolicyModel::distribution(const PolicyQuery& query) const {
  auto nb = neighbours(query);
  Distribution d;
  std::map<uint32_t, double> w;
  if (nb.empty()) {
    d.fallback = true;
    size_t k = std::min(step_frequency_order_.size(), static_cast<size_t>(params_.neighbors));
    for (size_t i = 0; i < k; ++i) w[step_frequency_order_[i]] = 0;
    for (const auto& e : entries_)
      if (w.count(e.step)) w[e.step] += 1;
  } else {
    for (const auto& [e, sim] : nb) w[entries_[e].step] += sim;
  }
  double total = 0;
  for (auto& [s, v] : w) total += v + params_.alpha;
  for (const auto& [s, v] : w) d.steps.emplace_back(steps_[s], (v + params_.alpha) / total);
  return d;
}

std::vector<double> RetrievalPolicyModel::sampling_weights(const Distribution& d, double temperature) const {
  if (!(temperature > 0)) throw Error("temperature must be positive");
  std::vector<double> logq;
  double top = -std::numeric_limits<double>::infinity();
  for (const auto& [s, p] : d.steps) {
    logq.push_back(std::log(p) / temperature);
    top = std::max(top, logq.back());
  }
  std::vector<double> q;
  double total = 0;
  for (double l : logq) {
    q.push_back(std::exp(l - top));
    total += q.back();
  }
  for (double& v : q) v /= total;
  return q;
}

std::vector<Candidate> RetrievalPolicyModel::suggest(const PolicyQuery& query, int n, double temperature,
                                                     uint64_t seed) const {
  if (n < 1) throw Error("suggest needs n >= 1");
  Distribution d = distribution(query);
  std::vector<double> q = sampling_weights(d, temperature);
  std::vector<char> taken(q.size(), 0);
  Rng rng(seed);
  std::vector<Candidate> out;
  while (static_cast<int>(out.size()) < n && out.size() < q.size()) {
    double total = 0;
    for (size_t i = 0; i < q.size(); ++i)
      if (!taken[i]) total += q[i];
    size_t pick = q.size();
    if (total > 0) {
      double u = rng.uniform() * total;
      for (size_t i = 0; i < q.size(); ++i) {
        if (taken[i] || q[i] <= 0) continue;
        pick = i;
        if (u < q[i]) break;
        u -= q[i];
      }
    }
    if (pick == q.size()) {
      // The remaining mass underflowed: take the most probable remaining step.
      for (size_t i = 0; i < q.size(); ++i)
        if (!taken[i] && (pick == q.size() || d.steps[i].second > d.steps[pick].second)) pick = i;
    }
    taken[pick] = 1;
    out.push_back({d.steps[pick].first, std::log(d.steps[pick].second)});
  }
  // The draw decides membership; candidates are listed most probable first.
  std::sort(out.begin(), out.end(), [](const Candidate& a, const Candidate& b) {
    return a.log_prob > b.log_prob || (a.log_prob == b.log_prob && a.step_text < b.step_text);
  });
  return out;
}

// --- Persistence --------------------------------------------------------------

namespace {

class Writer {
 public:
  void u32(uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>(v >> (8 * i) & 0xFF));
  }
  void f64(double v) {
    uint64_t bits;
    std::memcpy(&bits, &v, sizeof bits);
    u32(static_cast<uint32_t>(bits));
    u32(static_cast<uint32_t>(bits >> 32));
  }
  void str(const std::string& s) {
    u32(static_cast<uint32_t>(s.size()));
    out += s;
  }
  std::string out;
};

class Reader {
 public:
  explicit Reader(const std::string& data) : data_(data) {}
  uint32_t u32() {
    need(4);
    uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(static_cast<unsigned char>(data_[pos_ + static_cast<size_t>(i)])) << (8 * i);
    pos_ += 4;
    return v;
  }
  double f64() {
    uint64_t lo = u32(), hi = u32();
    uint64_t bits = lo | hi << 32;
    double v;
    std::memcpy(&v, &bits, sizeof v);
    return v;
  }
  std::string str() {
    uint32_t n = u32();
    need(n);
    std::string s = data_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  bool done() const { return pos_ == data_.size(); }

 private:
  void need(size_t n) const {
    if (data_.size() - pos_ < n) throw Error("corrupt policy model: truncated payload");
  }
  const std::string& data_;
  size_t pos_ = 0;
};

}  // namespace

std::string RetrievalPolicyModel::serialize() const {
  Writer w;
  w.out.append(kMagic, sizeof kMagic);
  w.u32(kFormatVersion);
  w.u32(static_cast<uint32_t>(params_.neighbors));
  w.f64(params_.alpha);
  w.u32(use_context_ ? 1 : 0);
  w.str(trained_on_);
  w.u32(static_cast<uint32_t>(vocabulary_.size()));
  for (const auto& t : vocabulary_) w.str(t);
  w.u32(static_cast<uint32_t>(steps_.size()));
  for (const auto& s : steps_) w.str(s);
  w.u32(static_cast<uint32_t>(entries_.size()));
  for (const auto& e : entries_) {
    w.u32(e.step);
    w.u32(static_cast<uint32_t>(e.tokens.size()));
    for (uint32_t t : e.tokens) w.u32(t);
  }
  return w.out;
}

std::string RetrievalPolicyModel::fingerprint() const {
  if (!trained()) throw UntrainedModel("the policy model has not been trained");
  return to_hex(fnv1a(serialize()), 16);
}

void RetrievalPolicyModel::save(const std::string& path) const {
  if (!trained()) throw UntrainedModel("the policy model has not been trained");
  write_file_atomic(path, serialize());
}

RetrievalPolicyModel RetrievalPolicyModel::load(const std::string& path) {
  std::string data = read_file(path);
  if (data.size() < sizeof kMagic || data.compare(0, sizeof kMagic, kMagic, sizeof kMagic) != 0)
    throw Error("'" + path + "' is not a policy model");
  std::string body = data.substr(sizeof kMagic);
  Reader r(body);
  uint32_t version = r.u32();
  if (version != kFormatVersion)
    throw Error("policy model format version " + std::to_string(version) + " is not supported");
  RetrievalPolicyModel m;
  m.params_.neighbors = static_cast<int>(r.u32());
  m.params_.alpha = r.f64();
  m.use_context_ = r.u32() != 0;
  m.trained_on_ = r.str();
  uint32_t nv = r.u32();
  for (uint32_t i = 0; i < nv; ++i) m.vocabulary_.push_back(r.str());
  uint32_t ns = r.u32();
  for (uint32_t i = 0; i < ns; ++i) m.steps_.push_back(r.str());
  uint32_t ne = r.u32();
  for (uint32_t i = 0; i < ne; ++i) {
    Entry e;
    e.step = r.u32();
    uint32_t nt = r.u32();
    for (uint32_t k = 0; k < nt; ++k) {
      e.tokens.push_back(r.u32());
      if (e.tokens.back() >= nv) throw Error("corrupt policy model: token id out of range");
    }
    if (e.step >= ns) throw Error("corrupt policy model: step id out of range");
    m.entries_.push_back(std::move(e));
  }
  if (!r.done()) throw Error("corrupt policy model: trailing bytes");
  if (m.entries_.empty()) throw Error("corrupt policy model: no datapoints");
  m.build_index();
  return m;
}

json RetrievalPolicyModel::inspect() const {
  if (!trained()) throw UntrainedModel("the policy model has not been trained");
  std::vector<size_t> step_count(steps_.size(), 0);
  size_t tokens = 0;
  for (const auto& e : entries_) {
    ++step_count[e.step];
    tokens += e.tokens.size();
  }
  json top_steps = json::array();
  for (size_t i = 0; i < std::min<size_t>(10, step_frequency_order_.size()); ++i) {
    uint32_t s = step_frequency_order_[i];
    top_steps.push_back({{"step", steps_[s]}, {"count", step_count[s]}});
  }
  std::vector<uint32_t> by_df(vocabulary_.size());
  for (uint32_t i = 0; i < by_df.size(); ++i) by_df[i] = i;
  std::stable_sort(by_df.begin(), by_df.end(),
                   [&](uint32_t a, uint32_t b) { return postings_[a].size() > postings_[b].size(); });
  json top_tokens = json::array();
  for (size_t i = 0; i < std::min<size_t>(10, by_df.size()); ++i)
    top_tokens.push_back({{"token", vocabulary_[by_df[i]]}, {"datapoints", postings_[by_df[i]].size()}});
  auto hammer = std::lower_bound(steps_.begin(), steps_.end(), std::string(kHammerToken));
  size_t hammer_count = hammer != steps_.end() && *hammer == kHammerToken
                            ? step_count[static_cast<size_t>(hammer - steps_.begin())]
                            : 0;
  return {{"format_version", kFormatVersion},
          {"fingerprint", fingerprint()},
          {"trained_on", trained_on_},
          {"use_context", use_context_},
          {"neighbors", params_.neighbors},
          {"alpha", params_.alpha},
          {"datapoints", entries_.size()},
          {"vocabulary", vocabulary_.size()},
          {"distinct_steps", steps_.size()},
          {"hammer_datapoints", hammer_count},
          {"mean_tokens_per_datapoint", static_cast<double>(tokens) / static_cast<double>(entries_.size())},
          {"top_steps", top_steps},
          {"top_tokens", top_tokens}};
}

// --- Scripted policy ----------------------------------------------------------

std::vector<Candidate> ScriptedPolicy::suggest(const PolicyQuery& query, int n, double, uint64_t) const {
  const std::vector<std::string>* steps = nullptr;
  auto exact = script_.find(query.proof_state);
  if (exact != script_.end()) {
    steps = &exact->second;
  } else {
    size_t best = 0;
    for (const auto& [pattern, s] : script_) {
      if (pattern.empty() || pattern.back() != '*') continue;
      std::string_view prefix(pattern.data(), pattern.size() - 1);
      if (query.proof_state.compare(0, prefix.size(), prefix) == 0 && (!steps || prefix.size() > best)) {
        steps = &s;
        best = prefix.size();
      }
    }
  }
  std::vector<Candidate> out;
  if (!steps || steps->empty()) return out;
  double lp = -std::log(static_cast<double>(steps->size()));
  for (const auto& s : *steps) {
    if (static_cast<int>(out.size()) >= n) break;
    out.push_back({s, lp});
  }
  return out;
}

}  // namespace thor
