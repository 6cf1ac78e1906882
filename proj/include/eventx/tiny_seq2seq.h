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

#ifndef EVENTX_TINY_SEQ2SEQ_H_
#define EVENTX_TINY_SEQ2SEQ_H_

#include <memory>
#include <mutex>
#include <string>
#include <unordered_map>

#include "eventx/generator.h"

namespace evx {

struct TinySeq2SeqConfig {
  int embed_dim = 32;
  int hidden_dim = 128;
  int context = 3;  // previous output tokens fed to the decoder
  unsigned seed = 7;
  int trigger_window = 3;  // tokens around the <tgr> markers in the local summary
};

// Small word-level encoder-decoder. The encoder summary is the mean of all
// input embeddings next to the mean over the trigger neighbourhood (from
// `trigger_window` tokens before the first <tgr> marker to as many after the
// last); the decoder state is an MLP over the last `context` output
// embeddings and that summary. Output scores are dot products between the
// decoder state and the (tied) token embeddings.
//
// Every token has an embedding derived from a hash of its string and the
// seed, so unseen words at inference time are handled deterministically.
// Only rows present at the last SyncVocabulary() are trainable.
class TinySeq2Seq : public TrainableBackend {
 public:
  explicit TinySeq2Seq(TinySeq2SeqConfig config = {});

  static std::unique_ptr<TinySeq2Seq> Load(const std::string &dir);
  void Save(const std::string &dir) const override;

  const TinySeq2SeqConfig &config() const { return config_; }

  EncodedInput Encode(std::span<const TokenId> input) const override;
  Eigen::VectorXd NextTokenLogProbs(const EncodedInput &input,
                                    std::span<const TokenId> prefix) const override;

  int num_parameters() const override { return static_cast<int>(params_.size()); }
  Eigen::VectorXd Parameters() const override { return params_; }
  void SetParameters(const Eigen::VectorXd &params) override;
  void SyncVocabulary() override;
  double NllAndGradient(std::span<const TokenId> input, std::span<const TokenId> target,
                        std::span<const TokenId> allowed,
                        Eigen::VectorXd *grad) const override;

 private:
  struct Step {
    Eigen::VectorXd z, u, h;
    std::vector<TokenId> context_ids;
  };

  int rows() const { return num_rows_; }
  int InDim() const { return (config_.context + 2) * config_.embed_dim; }
  // [start, end) of the trigger neighbourhood; empty without markers.
  std::pair<size_t, size_t> TriggerWindow(std::span<const TokenId> input) const;
  size_t OffsetA() const;
  size_t OffsetB() const;
  size_t OffsetO() const;
  size_t OffsetBo() const;

  Eigen::VectorXd Embedding(TokenId id) const;
  Eigen::VectorXd InitRow(TokenId id) const;
  Step Forward(const Eigen::VectorXd &summary, std::span<const TokenId> prefix) const;

  TinySeq2SeqConfig config_;
  int num_rows_ = 0;
  Eigen::VectorXd params_;

  mutable std::mutex cache_mu_;
  mutable std::unordered_map<TokenId, Eigen::VectorXd> row_cache_;
};

}  // namespace evx

#endif  // EVENTX_TINY_SEQ2SEQ_H_
