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

#ifndef EVENTX_TOY_H_
#define EVENTX_TOY_H_

#include <string>
#include <vector>

#include "eventx/corpus.h"
#include "eventx/ontology.h"

namespace evx {

// Small synthetic corpus with four event types (attack, payment, meeting,
// transport), coreferent pronouns and nominals, and word vectors in which
// trigger words of one type lie near a shared direction.
struct ToyOptions {
  int num_docs = 30;
  int num_types = 4;  // first n of the four types
  int vector_dim = 32;
  unsigned seed = 1;
};

struct ToyData {
  std::string ontology_jsonl;
  EventOntology ontology;
  std::vector<Document> train, dev, test;  // 60/20/20 by document
  std::string vectors;                     // "word v1 ... vd" lines
};

ToyData MakeToyData(const ToyOptions &options);

// Writes ontology.jsonl, train.jsonl, dev.jsonl, test.jsonl and vectors.txt.
void WriteToyData(const ToyData &data, const std::string &dir);

}  // namespace evx

#endif  // EVENTX_TOY_H_
