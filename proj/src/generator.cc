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

#include "eventx/generator.h"

#include <cmath>
#include <limits>

#include "eventx/template_engine.h"

namespace evx {

Vocabulary::Vocabulary() {
  for (std::string_view tok :
       {kBoundary, kEndOfSequence, kPlaceholder, kTriggerMarker, kConjunction}) {
    Intern(tok);
  }
}

TokenId Vocabulary::Intern(std::string_view token) {
  auto it = index_.find(std::string(token));
  if (it != index_.end()) return it->second;
  TokenId id = static_cast<TokenId>(tokens_.size());
  tokens_.emplace_back(token);
  index_.emplace(tokens_.back(), id);
  return id;
}

TokenId Vocabulary::Find(std::string_view token) const {
  auto it = index_.find(std::string(token));
  return it == index_.end() ? -1 : it->second;
}

std::vector<TokenId> Vocabulary::Encode(const std::vector<std::string> &tokens) {
  std::vector<TokenId> ids;
  ids.reserve(tokens.size());
  for (const auto &t : tokens) ids.push_back(Intern(t));
  return ids;
}

std::vector<std::string> Vocabulary::Decode(std::span<const TokenId> ids) const {
  std::vector<std::string> out;
  out.reserve(ids.size());
  for (TokenId id : ids) out.push_back(Token(id));
  return out;
}

double GeneratorBackend::ScoreSequence(std::span<const TokenId> input,
                                       std::span<const TokenId> output) const {
  const EncodedInput enc = Encode(input);
  double total = 0.0;
  for (size_t i = 0; i < output.size(); ++i) {
    Eigen::VectorXd lp = NextTokenLogProbs(enc, output.first(i));
    total += lp[output[i]];
  }
  return total;
}

double LogSumExp(const Eigen::VectorXd &v) {
  if (v.size() == 0) return -std::numeric_limits<double>::infinity();
  const double mx = v.maxCoeff();
  if (!std::isfinite(mx)) return mx;
  return mx + std::log((v.array() - mx).exp().sum());
}

}  // namespace evx
