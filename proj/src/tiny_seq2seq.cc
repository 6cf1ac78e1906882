// Copyright 2026 The EventX Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "eventx/tiny_seq2seq.h"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>

#include "eventx/common.h"
#include "json.hpp"

namespace evx {

namespace {

uint64_t Fnv1a(std::string_view s) {
  uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

}  // namespace

TinySeq2Seq::TinySeq2Seq(TinySeq2SeqConfig config) : config_(config) {
  const int d = config_.embed_dim, hdim = config_.hidden_dim;
  const int in_dim = InDim();
  params_.resize(static_cast<Eigen::Index>(in_dim) * hdim + hdim + d * hdim + d);
  std::mt19937_64 rng(config_.seed);
  std::normal_distribution<double> a_init(0.0, 1.0 / std::sqrt(in_dim));
  std::normal_distribution<double> o_init(0.0, 1.0 / std::sqrt(hdim));
  size_t k = 0;
  for (int i = 0; i < in_dim * hdim; ++i) params_[k++] = a_init(rng);
  for (int i = 0; i < hdim; ++i) params_[k++] = 0.0;
  for (int i = 0; i < d * hdim; ++i) params_[k++] = o_init(rng);
  for (int i = 0; i < d; ++i) params_[k++] = 0.0;
  SyncVocabulary();
}

size_t TinySeq2Seq::OffsetA() const {
  return static_cast<size_t>(num_rows_) * config_.embed_dim;
}
size_t TinySeq2Seq::OffsetB() const {
  return OffsetA() + static_cast<size_t>(InDim()) * config_.hidden_dim;
}
size_t TinySeq2Seq::OffsetO() const { return OffsetB() + config_.hidden_dim; }
size_t TinySeq2Seq::OffsetBo() const {
  return OffsetO() + static_cast<size_t>(config_.embed_dim) * config_.hidden_dim;
}

Eigen::VectorXd TinySeq2Seq::InitRow(TokenId id) const {
  std::mt19937_64 rng(Fnv1a(vocab_.Token(id)) ^ (0x9e3779b97f4a7c15ULL * (config_.seed + 1)));
  std::normal_distribution<double> dist(0.0, 0.3);
  Eigen::VectorXd row(config_.embed_dim);
  for (int i = 0; i < config_.embed_dim; ++i) row[i] = dist(rng);
  return row;
}

Eigen::VectorXd TinySeq2Seq::Embedding(TokenId id) const {
  const int d = config_.embed_dim;
  if (id < num_rows_) return params_.segment(static_cast<Eigen::Index>(id) * d, d);
  std::lock_guard<std::mutex> lock(cache_mu_);
  auto it = row_cache_.find(id);
  if (it == row_cache_.end()) it = row_cache_.emplace(id, InitRow(id)).first;
  return it->second;
}

void TinySeq2Seq::SyncVocabulary() {
  const int d = config_.embed_dim;
  const int new_rows = vocab_.size();
  if (new_rows == num_rows_) return;
  Eigen::VectorXd tail = params_.segment(OffsetA(), params_.size() - OffsetA());
  Eigen::VectorXd next(static_cast<Eigen::Index>(new_rows) * d + tail.size());
  next.head(static_cast<Eigen::Index>(num_rows_) * d) =
      params_.head(static_cast<Eigen::Index>(num_rows_) * d);
  for (TokenId id = num_rows_; id < new_rows; ++id) {
    next.segment(static_cast<Eigen::Index>(id) * d, d) = InitRow(id);
  }
  next.tail(tail.size()) = tail;
  params_ = std::move(next);
  num_rows_ = new_rows;
  std::lock_guard<std::mutex> lock(cache_mu_);
  row_cache_.clear();
}

void TinySeq2Seq::SetParameters(const Eigen::VectorXd &params) {
  if (params.size() != params_.size()) {
    throw ContractViolation("TinySeq2Seq::SetParameters: size mismatch");
  }
  params_ = params;
}

std::pair<size_t, size_t> TinySeq2Seq::TriggerWindow(std::span<const TokenId> input) const {
  size_t first = input.size(), last = 0;
  for (size_t i = 0; i < input.size(); ++i) {
    if (input[i] != Vocabulary::kTriggerId) continue;
    first = std::min(first, i);
    last = i;
  }
  if (first == input.size()) return {0, 0};
  const size_t w = static_cast<size_t>(std::max(config_.trigger_window, 0));
  return {first > w ? first - w : 0, std::min(input.size(), last + w + 1)};
}

EncodedInput TinySeq2Seq::Encode(std::span<const TokenId> input) const {
  const int d = config_.embed_dim;
  EncodedInput enc;
  enc.ids.assign(input.begin(), input.end());
  enc.summary = Eigen::VectorXd::Zero(2 * d);
  for (TokenId id : input) enc.summary.head(d) += Embedding(id);
  if (!input.empty()) enc.summary.head(d) /= static_cast<double>(input.size());
  const auto [lo, hi] = TriggerWindow(input);
  for (size_t i = lo; i < hi; ++i) enc.summary.tail(d) += Embedding(input[i]);
  if (hi > lo) enc.summary.tail(d) /= static_cast<double>(hi - lo);
  return enc;
}

TinySeq2Seq::Step TinySeq2Seq::Forward(const Eigen::VectorXd &summary,
                                       std::span<const TokenId> prefix) const {
  const int d = config_.embed_dim, hdim = config_.hidden_dim, ctx = config_.context;
  Step s;
  s.z.resize(InDim());
  for (int c = 0; c < ctx; ++c) {
    const long pos = static_cast<long>(prefix.size()) - 1 - c;
    TokenId id = pos >= 0 ? prefix[pos] : Vocabulary::kBoundaryId;
    s.context_ids.push_back(id);
    s.z.segment(c * d, d) = Embedding(id);
  }
  s.z.segment(ctx * d, 2 * d) = summary;
  Eigen::Map<const Eigen::MatrixXd> A(params_.data() + OffsetA(), hdim, InDim());
  Eigen::Map<const Eigen::VectorXd> b(params_.data() + OffsetB(), hdim);
  Eigen::Map<const Eigen::MatrixXd> O(params_.data() + OffsetO(), d, hdim);
  Eigen::Map<const Eigen::VectorXd> bo(params_.data() + OffsetBo(), d);
  s.u = (A * s.z + b).array().tanh();
  s.h = O * s.u + bo;
  return s;
}

Eigen::VectorXd TinySeq2Seq::NextTokenLogProbs(const EncodedInput &input,
                                               std::span<const TokenId> prefix) const {
  Step s = Forward(input.summary, prefix);
  const int v = vocab_size();
  Eigen::VectorXd logits(v);
  for (TokenId id = 0; id < v; ++id) logits[id] = s.h.dot(Embedding(id));
  return logits.array() - LogSumExp(logits);
}

double TinySeq2Seq::NllAndGradient(std::span<const TokenId> input,
                                   std::span<const TokenId> target,
                                   std::span<const TokenId> allowed,
                                   Eigen::VectorXd *grad) const {
  const int d = config_.embed_dim, hdim = config_.hidden_dim, ctx = config_.context;
  auto check = [&](TokenId id) {
    if (id < 0 || id >= num_rows_) {
      throw ContractViolation("TinySeq2Seq: token id " + std::to_string(id) +
                              " has no trainable row; call SyncVocabulary()");
    }
  };
  for (TokenId id : input) check(id);
  for (TokenId id : target) check(id);

  std::vector<TokenId> support;
  if (allowed.empty()) {
    for (TokenId id = 0; id < num_rows_; ++id) support.push_back(id);
  } else {
    for (TokenId id : allowed) {
      check(id);
      support.push_back(id);
    }
  }

  const EncodedInput enc = Encode(input);
  Eigen::Map<const Eigen::MatrixXd> A(params_.data() + OffsetA(), hdim, InDim());
  Eigen::Map<const Eigen::MatrixXd> O(params_.data() + OffsetO(), d, hdim);

  Eigen::VectorXd local;
  if (grad) local = Eigen::VectorXd::Zero(params_.size());
  auto e_grad = [&](TokenId id) { return local.segment(static_cast<Eigen::Index>(id) * d, d); };
  Eigen::Map<Eigen::MatrixXd> dA(grad ? local.data() + OffsetA() : nullptr, hdim, InDim());
  Eigen::Map<Eigen::VectorXd> db(grad ? local.data() + OffsetB() : nullptr, hdim);
  Eigen::Map<Eigen::MatrixXd> dO(grad ? local.data() + OffsetO() : nullptr, d, hdim);
  Eigen::Map<Eigen::VectorXd> dbo(grad ? local.data() + OffsetBo() : nullptr, d);
  Eigen::VectorXd d_summary = Eigen::VectorXd::Zero(2 * d);

  double nll = 0.0;
  for (size_t t = 0; t < target.size(); ++t) {
    Step s = Forward(enc.summary, target.first(t));
    Eigen::VectorXd logits(support.size());
    Eigen::Index gold = -1;
    for (size_t k = 0; k < support.size(); ++k) {
      logits[k] = s.h.dot(Embedding(support[k]));
      if (support[k] == target[t]) gold = static_cast<Eigen::Index>(k);
    }
    if (gold < 0) {
      throw ContractViolation("TinySeq2Seq: target token outside the allowed set");
    }
    const double lse = LogSumExp(logits);
    nll -= logits[gold] - lse;
    if (!grad) continue;

    Eigen::VectorXd g = (logits.array() - lse).exp();
    g[gold] -= 1.0;
    Eigen::VectorXd dh = Eigen::VectorXd::Zero(d);
    for (size_t k = 0; k < support.size(); ++k) {
      dh += g[k] * Embedding(support[k]);
      e_grad(support[k]) += g[k] * s.h;
    }
    dO += dh * s.u.transpose();
    dbo += dh;
    Eigen::VectorXd da = (O.transpose() * dh).array() * (1.0 - s.u.array().square());
    dA += da * s.z.transpose();
    db += da;
    Eigen::VectorXd dz = A.transpose() * da;
    for (int c = 0; c < ctx; ++c) e_grad(s.context_ids[c]) += dz.segment(c * d, d);
    d_summary += dz.segment(ctx * d, 2 * d);
  }
  if (grad) {
    if (!input.empty()) {
      const Eigen::VectorXd g_all = d_summary.head(d) / static_cast<double>(input.size());
      for (TokenId id : input) e_grad(id) += g_all;
    }
    const auto [lo, hi] = TriggerWindow(input);
    if (hi > lo) {
      const Eigen::VectorXd g_local = d_summary.tail(d) / static_cast<double>(hi - lo);
      for (size_t i = lo; i < hi; ++i) e_grad(input[i]) += g_local;
    }
    *grad += local;
  }
  return nll;
}

void TinySeq2Seq::Save(const std::string &dir) const {
  std::filesystem::create_directories(dir);
  nlohmann::json cfg{{"backend", "tiny_seq2seq"},
                     {"embed_dim", config_.embed_dim},
                     {"hidden_dim", config_.hidden_dim},
                     {"context", config_.context},
                     {"trigger_window", config_.trigger_window},
                     {"seed", config_.seed},
                     {"trainable_rows", num_rows_},
                     {"vocab", vocab_.tokens()}};
  std::ofstream(std::filesystem::path(dir) / "config.json") << cfg.dump(1) << "\n";
  std::ofstream w(std::filesystem::path(dir) / "weights.bin", std::ios::binary);
  const uint64_t n = static_cast<uint64_t>(params_.size());
  w.write(reinterpret_cast<const char *>(&n), sizeof(n));
  w.write(reinterpret_cast<const char *>(params_.data()),
          static_cast<std::streamsize>(n * sizeof(double)));
  if (!w) throw Error("cannot write checkpoint weights in '" + dir + "'");
}

std::unique_ptr<TinySeq2Seq> TinySeq2Seq::Load(const std::string &dir) {
  std::ifstream in(std::filesystem::path(dir) / "config.json");
  if (!in) throw Error("no checkpoint config in '" + dir + "'");
  nlohmann::json cfg;
  try {
    cfg = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception &e) {
    throw ParseError(dir + "/config.json: " + e.what());
  }
  TinySeq2SeqConfig c;
  c.embed_dim = cfg.at("embed_dim").get<int>();
  c.hidden_dim = cfg.at("hidden_dim").get<int>();
  c.context = cfg.at("context").get<int>();
  c.seed = cfg.at("seed").get<unsigned>();
  c.trigger_window = cfg.at("trigger_window").get<int>();
  auto model = std::make_unique<TinySeq2Seq>(c);
  const auto tokens = cfg.at("vocab").get<std::vector<std::string>>();
  const int rows = cfg.at("trainable_rows").get<int>();
  for (int i = 0; i < rows && i < static_cast<int>(tokens.size()); ++i) {
    model->vocab_.Intern(tokens[i]);
  }
  model->SyncVocabulary();
  for (size_t i = rows; i < tokens.size(); ++i) model->vocab_.Intern(tokens[i]);

  std::ifstream w(std::filesystem::path(dir) / "weights.bin", std::ios::binary);
  uint64_t n = 0;
  w.read(reinterpret_cast<char *>(&n), sizeof(n));
  if (!w || n != static_cast<uint64_t>(model->params_.size())) {
    throw Error("checkpoint weights in '" + dir + "' do not match its config");
  }
  w.read(reinterpret_cast<char *>(model->params_.data()),
         static_cast<std::streamsize>(n * sizeof(double)));
  if (!w) throw Error("truncated checkpoint weights in '" + dir + "'");
  return model;
}

}  // namespace evx
