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

#ifndef EVENTX_TESTS_SUPPORT_MOCKS_H_
#define EVENTX_TESTS_SUPPORT_MOCKS_H_

#include <functional>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "eventx/arggen.h"
#include "eventx/corpus.h"
#include "eventx/generator.h"
#include "eventx/ontology.h"
#include "eventx/tapkey.h"

namespace evx::testing {

// Generator whose next-token logits come from a callback. Logits are
// log-softmaxed, so any finite callback output is a valid distribution.
class FunctionBackend : public GeneratorBackend {
 public:
  using LogitFn = std::function<Eigen::VectorXd(const std::vector<TokenId> &input,
                                                std::span<const TokenId> prefix, int vocab_size)>;
  using ScoreFn = std::function<std::optional<double>(const FunctionBackend &,
                                                      std::span<const TokenId> input,
                                                      std::span<const TokenId> output)>;

  explicit FunctionBackend(LogitFn logits) : logits_(std::move(logits)) {}

  // Optional override for ScoreSequence; returning nullopt falls back to the
  // default step-by-step sum.
  void set_score_fn(ScoreFn fn) { score_ = std::move(fn); }

  EncodedInput Encode(std::span<const TokenId> input) const override;
  Eigen::VectorXd NextTokenLogProbs(const EncodedInput &input,
                                    std::span<const TokenId> prefix) const override;
  double ScoreSequence(std::span<const TokenId> input,
                       std::span<const TokenId> output) const override;

 private:
  LogitFn logits_;
  ScoreFn score_;
};

// Backend that prefers the continuation of the first matching script: at
// prefix length i, the token scripts[s][i] gets bonus weights[s] for every
// script s whose first i tokens equal the prefix. All other tokens get 0.
std::unique_ptr<FunctionBackend> MakeScriptBackend(
    const std::vector<std::vector<std::string>> &scripts, const std::vector<double> &weights);

// Backend with random logits that are a deterministic function of
// (seed, input, prefix).
std::unique_ptr<FunctionBackend> MakeRandomBackend(unsigned seed, int vocab_size);

// Hand-built document with the given sentences (whitespace tokenized).
Document MakeDocument(const std::string &doc_id, const std::vector<std::string> &sentences);
// Adds a mention over tokens [start, end) and returns its id.
std::string AddMention(Document &doc, int start, int end, MentionLevel level,
                       const std::string &entity_type = "PER", int head = -1);

EventOntology OntologyFromText(const std::string &jsonl);

// "McVeigh bombed the federal building . He was executed later ." with an
// attack (Attacker, Target) and an execution (Defendant = "He", Time). "He"
// corefers with "McVeigh"; "the federal building" has head "building".
Document MakeBombingDocument();

// Reconstruction of the "reserved ... $280.32" document: an ExchangeBuySell
// event whose PaymentBarter is in the sentence after the trigger.
struct TruckRentalScenario {
  EventOntology ontology;
  Document doc;
  EventMention event;  // gold
};
TruckRentalScenario MakeTruckRentalScenario();

// The PublicStatement "tax plan" example: document, ontology, instance and a
// scripted backend whose greedy output puts "tax plan" in the Participant
// slot while the runner-up puts it in Topic. Clarification statements about
// "tax plan" being a person score low.
struct TaxPlanScenario {
  EventOntology ontology;
  Document doc;
  EventMention trigger;
  std::vector<std::string> original;  // greedy output
  std::vector<std::string> after;     // expected after reranking
};
TaxPlanScenario MakeTaxPlanScenario();
std::unique_ptr<FunctionBackend> MakeTaxPlanBackend(const TaxPlanScenario &s);

// The three-event excerpt with the IdentifyCategorize event E3 ("he saw
// bodies ... in the hospital").
struct ExcerptScenario {
  EventOntology ontology;
  Document doc;
  EventMention e3;
};
ExcerptScenario MakeExcerptScenario();

// Synthetic template fixtures: one event per document, fillers drawn from a
// vocabulary disjoint from the template words, every mention text unique in
// its document. Covers empty slots and multi-argument slots.
struct TemplateFixture {
  Document doc;
  EventMention event;
};
struct TemplateFixtureSet {
  EventOntology ontology;
  std::vector<TemplateFixture> fixtures;
};
TemplateFixtureSet MakeTemplateFixtures(int count, int num_types, unsigned seed);

// Finite-difference gradient of f at x (central differences).
Eigen::VectorXd NumericGradient(const std::function<double(const Eigen::VectorXd &)> &f,
                                Eigen::VectorXd x, double h = 1e-5);

// Max over entries of |a - b| / max(1, |a|, |b|) style relative error.
double RelativeError(const Eigen::VectorXd &analytic, const Eigen::VectorXd &numeric);

// Random TapKey model with a random (orthonormal) projection, for CRF tests.
TapKeyModel RandomTapKeyModel(int dim, int num_types, std::mt19937 &rng, double scale = 1.0);

// Every tag sequence of the given length over num_tags tags.
std::vector<TagSequence> AllTagSequences(int length, int num_tags);

}  // namespace evx::testing

#endif  // EVENTX_TESTS_SUPPORT_MOCKS_H_
