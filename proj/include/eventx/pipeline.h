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

#ifndef EVENTX_PIPELINE_H_
#define EVENTX_PIPELINE_H_

#include <memory>
#include <string>
#include <vector>

#include "json.hpp"

#include "eventx/arggen.h"
#include "eventx/corpus.h"
#include "eventx/metrics.h"
#include "eventx/ontology.h"
#include "eventx/tapkey.h"
#include "eventx/tiny_seq2seq.h"

namespace evx {

// Every setting of a run. Serialized as JSON into the run directory.
struct RunConfig {
  std::string ontology;
  std::string train;
  std::string dev;
  std::string test;
  std::string output_dir = "run";
  std::string split_mode = "full";

  // "tiny-seq2seq" for a fresh model, otherwise a saved model directory
  // (looked up in $EVENTX_CACHE_DIR when not a path).
  std::string backend = "tiny-seq2seq";
  TinySeq2SeqConfig generator;
  int max_doc_len = 512;
  int max_input_len = 0;
  DecodeConfig decode;
  TrainConfig arg_train;

  std::string vectors;  // word vectors; empty = hashed vectors over the corpus
  int embed_dim = 64;
  double embed_mix = 0.25;

  std::string keywords;  // keyword file; empty = ontology keywords
  TapKeyConfig tapkey{0, 0, 0.5, 0.1, 17};  // max_event_types 0 = number of classes
  TapKeyTrainConfig tapkey_train;
  double tau_i = 0.55;
  double tau_o = 0.30;
  int top_k = 50;
  std::vector<std::string> trigger_types;  // empty = every type with keywords
  std::vector<std::string> unseen_types;   // added by keywords after training

  unsigned seed = 42;
  ArgumentView view = ArgumentView::kNearest;
  bool gold_triggers = false;

  nlohmann::json ToJson() const;
  // Missing keys keep their defaults; unknown keys are rejected.
  static RunConfig FromJson(const nlohmann::json &j);
};

RunConfig LoadRunConfig(const std::string &path);

// Applies "a.b=value" overrides; value is parsed as JSON, else taken as a
// string.
void ApplyOverride(nlohmann::json &config, const std::string &assignment);

// Resolves a model or vector name against the filesystem, then
// $EVENTX_CACHE_DIR. Returns "" when neither exists.
std::string ResolveCachePath(const std::string &name);

enum class SplitMode { kFull, kFreq, kOntology1Per };
SplitMode ParseSplitMode(std::string_view s);

// Event types kept by a mode (empty for full).
std::vector<std::string> SplitTypes(const std::vector<Document> &train, SplitMode mode);
// Drops event mentions of other types; documents are kept.
std::vector<Document> BuildSplit(const std::vector<Document> &train, SplitMode mode);

struct CorpusCounts {
  int documents = 0;
  int sentences = 0;
  int tokens = 0;
  int events = 0;
  int arguments = 0;
  int entity_mentions = 0;
  int coref_clusters = 0;
};
CorpusCounts CountCorpus(const std::vector<Document> &docs);

struct SentenceRef {
  size_t doc = 0;
  int sent_idx = 0;
  std::vector<std::string> tokens;
};
std::vector<SentenceRef> CorpusSentences(const std::vector<Document> &docs);

// Lexicon backend from the configured vectors, or hashed vectors over the
// vocabulary of `docs` when none are configured.
std::unique_ptr<LexiconEmbeddingBackend> MakeEmbeddingBackend(const RunConfig &config,
                                                              const std::vector<Document> &docs);

void WriteClassVectors(const std::vector<ClassVector> &classes, const std::string &path);
std::vector<ClassVector> ReadClassVectors(const std::string &path);

struct PseudoLabels {
  std::string doc_id;
  int sent_idx = 0;
  TagSequence tags;
};
void WritePseudoLabels(const std::vector<PseudoLabels> &labels, const std::string &path);
std::vector<PseudoLabels> ReadPseudoLabels(const std::string &path);

// Stage runner. Each stage reads its inputs from files and writes its
// output under output_dir, so any stage can be run on its own. A stage
// whose output already exists is skipped unless `force`.
class Pipeline {
 public:
  explicit Pipeline(RunConfig config, bool force = false);

  const RunConfig &config() const { return config_; }
  std::string Path(const std::string &name) const;

  void WriteConfig() const;
  void BuildClassVectors();
  void PseudoLabel();
  void TrainTrigger();
  void PredictTrigger();
  void TrainArgs();
  void ExtractArgs();
  std::vector<ScoreReport> Score();

  // Every stage in order; trigger stages are skipped with gold triggers.
  // A failing stage is reported by name; finished artifacts stay on disk.
  std::vector<ScoreReport> Run();

 private:
  bool Done(const std::string &name) const;
  const EventOntology &Ontology();
  const std::vector<Document> &TrainDocs();
  const std::vector<Document> &TestDocs();
  LexiconEmbeddingBackend &Embeddings();

  RunConfig config_;
  bool force_;
  std::unique_ptr<EventOntology> ontology_;
  std::unique_ptr<std::vector<Document>> train_, test_;
  std::unique_ptr<LexiconEmbeddingBackend> embeddings_;
};

// Writes via a temporary file and a rename.
void WriteFileAtomic(const std::string &path, const std::string &content);

}  // namespace evx

#endif  // EVENTX_PIPELINE_H_
