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

#ifndef EVENTX_GENERATOR_H_
#define EVENTX_GENERATOR_H_

#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

namespace evx {

using TokenId = int;

// String <-> id table. Reserved symbols occupy fixed ids and are never split
// by tokenization; other words are interned on first sight.
class Vocabulary {
 public:
  static constexpr TokenId kBoundaryId = 0;     // <s>
  static constexpr TokenId kEosId = 1;          // </s>
  static constexpr TokenId kPlaceholderId = 2;  // <arg>
  static constexpr TokenId kTriggerId = 3;      // <tgr>
  static constexpr TokenId kAndId = 4;          // and
  static constexpr int kNumReserved = 5;

  Vocabulary();

  TokenId Intern(std::string_view token);
  // -1 when unknown.
  TokenId Find(std::string_view token) const;
  const std::string &Token(TokenId id) const { return tokens_.at(id); }
  int size() const { return static_cast<int>(tokens_.size()); }
  const std::vector<std::string> &tokens() const { return tokens_; }

  std::vector<TokenId> Encode(const std::vector<std::string> &tokens);
  std::vector<std::string> Decode(std::span<const TokenId> ids) const;

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, TokenId> index_;
};

// Encoder output handed back to the decoder on every step.
struct EncodedInput {
  std::vector<TokenId> ids;
  Eigen::VectorXd summary;
};

// Encoder-decoder language model contract.
class GeneratorBackend {
 public:
  virtual ~GeneratorBackend() = default;

  Vocabulary &vocab() { return vocab_; }
  const Vocabulary &vocab() const { return vocab_; }
  int vocab_size() const { return vocab_.size(); }

  virtual EncodedInput Encode(std::span<const TokenId> input) const = 0;

  // log p(. | prefix, input) over the whole vocabulary; logsumexp == 0.
  virtual Eigen::VectorXd NextTokenLogProbs(const EncodedInput &input,
                                            std::span<const TokenId> prefix) const = 0;

  // Total unconstrained log-probability of `output` given `input`.
  virtual double ScoreSequence(std::span<const TokenId> input,
                               std::span<const TokenId> output) const;

 protected:
  Vocabulary vocab_;
};

// A backend whose parameters can be read and written as one flat vector.
class TrainableBackend : public GeneratorBackend {
 public:
  virtual int num_parameters() const = 0;
  virtual Eigen::VectorXd Parameters() const = 0;
  virtual void SetParameters(const Eigen::VectorXd &params) = 0;

  // Makes sure every interned token has trainable parameters.
  virtual void SyncVocabulary() = 0;

  // Summed negative log-likelihood of the target under a softmax restricted
  // to `allowed` (all tokens when empty). The gradient is added to `grad`.
  virtual double NllAndGradient(std::span<const TokenId> input,
                                std::span<const TokenId> target,
                                std::span<const TokenId> allowed,
                                Eigen::VectorXd *grad) const = 0;

  virtual void Save(const std::string &dir) const = 0;
};

double LogSumExp(const Eigen::VectorXd &v);

}  // namespace evx

#endif  // EVENTX_GENERATOR_H_
