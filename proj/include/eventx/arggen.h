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

#ifndef EVENTX_ARGGEN_H_
#define EVENTX_ARGGEN_H_

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "eventx/corpus.h"
#include "eventx/generator.h"
#include "eventx/ontology.h"
#include "eventx/template_engine.h"

namespace evx {

struct DecodeConfig {
  int beam_width = 4;
  int max_output_len = 64;
  bool rerank = false;
  bool copy_restrict = true;
};

struct Candidate {
  std::vector<TokenId> tokens;  // ends with </s> unless truncated
  double gen_logprob = 0.0;
  std::optional<double> rerank_score;
  bool truncated = false;
};

// Sorted ids of every token in the input plus <arg>, "and", <s> and </s>.
std::vector<TokenId> CopyMask(std::span<const TokenId> input);

// Next-token log-probabilities renormalized over `allowed`; entries outside
// it are -inf. An empty `allowed` means no restriction.
Eigen::VectorXd ConstrainedStep(const GeneratorBackend &backend,
                                const EncodedInput &encoded,
                                std::span<const TokenId> prefix,
                                std::span<const TokenId> allowed);

// Length-unnormalized beam search; best-first. beam_width == 1 is greedy.
std::vector<Candidate> Decode(const GeneratorBackend &backend,
                              std::span<const TokenId> input,
                              const DecodeConfig &config);

struct Clarification {
  std::string role;
  std::string filler;
  std::string entity_type;
  std::vector<std::string> tokens;  // "<filler> is a <phrase> ."
};

// One statement per constrained allowed entity type of every filled role.
// Universal types impose no constraint and yield no statement.
std::vector<Clarification> Clarifications(const FilledTemplate &filled,
                                          const EventOntology &ontology,
                                          const std::string &event_type);

// Scores each candidate by gen_logprob plus, for every filled role, the best
// clarification log-probability given the filled template and the document.
// Returns the index of the winner; ties go to the higher gen_logprob, then
// to the earlier candidate. rerank_score is set on every candidate.
size_t Rerank(GeneratorBackend &backend, std::vector<Candidate> &candidates,
              const GenerationInstance &instance, const EventOntology &ontology);

struct Seq2SeqExample {
  std::vector<TokenId> input;
  std::vector<TokenId> target;
};

struct TrainConfig {
  int epochs = 10;
  int batch_size = 8;
  double learning_rate = 1e-2;
  unsigned seed = 13;
  bool copy_restrict = true;
  // Stop early once the mean per-token loss of an epoch drops below this.
  double target_loss = 0.0;
  double max_seconds = 0.0;  // 0 = unbounded
  std::string checkpoint_dir;  // empty = no checkpoints
};

struct TrainReport {
  std::vector<double> epoch_loss;  // mean per-token NLL
  int epochs_run = 0;
};

// Mean per-token NLL over a set of examples, with its gradient.
double MeanLoss(const TrainableBackend &backend, std::span<const Seq2SeqExample> batch,
                bool copy_restrict, Eigen::VectorXd *grad);

// Throws Error if a target token cannot be produced (unknown id, or absent
// from the input under copy restriction).
void CheckTrainingData(const TrainableBackend &backend,
                       std::span<const Seq2SeqExample> data, bool copy_restrict);

// Adam on the per-token NLL. Deterministic for a fixed seed. Checkpoints
// every epoch when checkpoint_dir is set.
TrainReport Train(TrainableBackend &backend, std::span<const Seq2SeqExample> data,
                  const TrainConfig &config);

// Training pair for one gold event.
Seq2SeqExample MakeTrainingExample(GeneratorBackend &backend, const Document &doc,
                                   const EventMention &event,
                                   const EventOntology &ontology, ArgumentView view,
                                   int max_doc_len, int max_input_len);

struct ExtractOptions {
  DecodeConfig decode;
  int max_doc_len = 512;
  int max_input_len = 0;
};

struct ExtractionResult {
  std::vector<GroundedArgument> arguments;
  std::vector<std::string> generated;
  bool unparseable = false;
};

// build input -> decode -> (rerank) -> parse -> ground, one generation per
// trigger.
ExtractionResult ExtractArguments(GeneratorBackend &backend, const Document &doc,
                                  const EventMention &trigger,
                                  const EventOntology &ontology,
                                  const ExtractOptions &options);

}  // namespace evx

#endif  // EVENTX_ARGGEN_H_
