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

#include "eventx/arggen.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numeric>
#include <random>
#include <set>

#include "eventx/common.h"
#include "json.hpp"

namespace evx {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
}  // namespace

std::vector<TokenId> CopyMask(std::span<const TokenId> input) {
  std::set<TokenId> ids(input.begin(), input.end());
  ids.insert({Vocabulary::kPlaceholderId, Vocabulary::kAndId, Vocabulary::kBoundaryId,
              Vocabulary::kEosId});
  return {ids.begin(), ids.end()};
}

Eigen::VectorXd ConstrainedStep(const GeneratorBackend &backend,
                                const EncodedInput &encoded,
                                std::span<const TokenId> prefix,
                                std::span<const TokenId> allowed) {
  Eigen::VectorXd logp = backend.NextTokenLogProbs(encoded, prefix);
  if (allowed.empty()) return logp;
  Eigen::VectorXd out = Eigen::VectorXd::Constant(logp.size(), kNegInf);
  double mx = kNegInf;
  for (TokenId id : allowed) {
    if (id < logp.size()) mx = std::max(mx, logp[id]);
  }
  if (!std::isfinite(mx)) {
    throw ContractViolation("ConstrainedStep: every allowed token has zero probability");
  }
  double z = 0.0;
  for (TokenId id : allowed) {
    if (id < logp.size()) z += std::exp(logp[id] - mx);
  }
  const double log_z = mx + std::log(z);
  for (TokenId id : allowed) {
    if (id < logp.size()) out[id] = logp[id] - log_z;
  }
  return out;
}

std::vector<Candidate> Decode(const GeneratorBackend &backend,
                              std::span<const TokenId> input,
                              const DecodeConfig &config) {
  if (config.beam_width < 1) throw ContractViolation("Decode: beam_width must be >= 1");
  const EncodedInput encoded = backend.Encode(input);
  const std::vector<TokenId> allowed =
      config.copy_restrict ? CopyMask(input) : std::vector<TokenId>{};

  struct Hyp {
    std::vector<TokenId> tokens;
    double score = 0.0;
    bool done = false;
  };
  auto better = [](const Hyp &a, const Hyp &b) {
    if (a.score != b.score) return a.score > b.score;
    return a.tokens < b.tokens;
  };

  std::vector<Hyp> beam(1);
  for (int step = 0; step < config.max_output_len; ++step) {
    if (std::all_of(beam.begin(), beam.end(), [](const Hyp &h) { return h.done; })) break;
    std::vector<Hyp> next;
    for (const Hyp &hyp : beam) {
      if (hyp.done) {
        next.push_back(hyp);
        continue;
      }
      Eigen::VectorXd logp = ConstrainedStep(backend, encoded, hyp.tokens, allowed);
      for (TokenId id = 0; id < logp.size(); ++id) {
        if (!std::isfinite(logp[id])) continue;
        Hyp h{hyp.tokens, hyp.score + logp[id], id == Vocabulary::kEosId};
        h.tokens.push_back(id);
        next.push_back(std::move(h));
      }
    }
    const size_t keep = std::min<size_t>(config.beam_width, next.size());
    std::partial_sort(next.begin(), next.begin() + keep, next.end(), better);
    next.resize(keep);
    beam = std::move(next);
  }
  std::sort(beam.begin(), beam.end(), better);
  std::vector<Candidate> out;
  for (auto &h : beam) {
    Candidate c;
    c.tokens = std::move(h.tokens);
    c.gen_logprob = h.score;
    c.truncated = !h.done;
    out.push_back(std::move(c));
  }
  return out;
}

std::vector<Clarification> Clarifications(const FilledTemplate &filled,
                                          const EventOntology &ontology,
                                          const std::string &event_type) {
  std::vector<Clarification> out;
  const EventTypeDef &def = ontology.TemplateFor(event_type);
  for (const auto &role : def.roles) {
    auto it = filled.role_fills.find(role.name);
    if (it == filled.role_fills.end()) continue;
    for (const auto &filler : it->second) {
      if (SplitWhitespace(filler).empty()) continue;
      for (const auto &type_name : role.allowed_entity_types) {
        const EntityTypeDef &type = ontology.EntityType(type_name);
        if (type.universal()) continue;
        Clarification c{role.name, filler, type.name, SplitWhitespace(filler)};
        c.tokens.push_back("is");
        c.tokens.push_back("a");
        for (auto &w : SplitWhitespace(type.statement_phrase)) c.tokens.push_back(w);
        c.tokens.push_back(".");
        out.push_back(std::move(c));
      }
    }
  }
  return out;
}

size_t Rerank(GeneratorBackend &backend, std::vector<Candidate> &candidates,
              const GenerationInstance &instance, const EventOntology &ontology) {
  if (candidates.empty()) throw ContractViolation("Rerank: no candidates");
  const auto &doc = instance.marked_document.tokens;
  for (auto &cand : candidates) {
    double score = cand.gen_logprob;
    std::vector<std::string> generated = backend.vocab().Decode(cand.tokens);
    ParsedTemplate parsed = ParseFilled(instance, generated);
    if (parsed.parseable) {
      // Context for the statements: the filled template and the document.
      std::vector<std::string> context{std::string(kBoundary)};
      for (const auto &tok : generated) {
        if (tok == kEndOfSequence) break;
        context.push_back(tok);
      }
      context.emplace_back(kBoundary);
      context.emplace_back(kEndOfSequence);
      context.insert(context.end(), doc.begin(), doc.end());
      context.emplace_back(kEndOfSequence);
      std::vector<TokenId> context_ids = backend.vocab().Encode(context);

      std::map<std::pair<std::string, std::string>, double> best;  // (role, filler)
      for (const auto &c : Clarifications(parsed.fills, ontology, instance.event_type)) {
        std::vector<TokenId> statement = backend.vocab().Encode(c.tokens);
        double lp = backend.ScoreSequence(context_ids, statement);
        auto key = std::make_pair(c.role, c.filler);
        auto it = best.find(key);
        if (it == best.end() || lp > it->second) best[key] = lp;
      }
      for (const auto &[key, lp] : best) score += lp;
    }
    cand.rerank_score = score;
  }
  size_t winner = 0;
  for (size_t i = 1; i < candidates.size(); ++i) {
    const auto &a = candidates[i];
    const auto &b = candidates[winner];
    if (*a.rerank_score > *b.rerank_score ||
        (*a.rerank_score == *b.rerank_score && a.gen_logprob > b.gen_logprob)) {
      winner = i;
    }
  }
  return winner;
}

double MeanLoss(const TrainableBackend &backend, std::span<const Seq2SeqExample> batch,
                bool copy_restrict, Eigen::VectorXd *grad) {
  double total = 0.0;
  long tokens = 0;
  Eigen::VectorXd g = Eigen::VectorXd::Zero(backend.num_parameters());
  for (const auto &ex : batch) {
    std::vector<TokenId> allowed;
    if (copy_restrict) allowed = CopyMask(ex.input);
    total += backend.NllAndGradient(ex.input, ex.target, allowed, &g);
    tokens += static_cast<long>(ex.target.size());
  }
  if (tokens == 0) {
    if (grad) grad->setZero(backend.num_parameters());
    return 0.0;
  }
  if (grad) *grad = g / static_cast<double>(tokens);
  return total / static_cast<double>(tokens);
}

void CheckTrainingData(const TrainableBackend &backend,
                       std::span<const Seq2SeqExample> data, bool copy_restrict) {
  for (size_t i = 0; i < data.size(); ++i) {
    const auto &ex = data[i];
    auto bad_id = [&](TokenId id) { return id < 0 || id >= backend.vocab_size(); };
    for (TokenId id : ex.input) {
      if (bad_id(id)) throw Error("example " + std::to_string(i) + ": input id out of vocabulary");
    }
    std::vector<TokenId> allowed = copy_restrict ? CopyMask(ex.input) : std::vector<TokenId>{};
    for (TokenId id : ex.target) {
      if (bad_id(id)) {
        throw Error("example " + std::to_string(i) + ": target id " + std::to_string(id) +
                    " outside backend vocabulary");
      }
      if (copy_restrict && !std::binary_search(allowed.begin(), allowed.end(), id)) {
        throw Error("example " + std::to_string(i) + ": target token '" +
                    backend.vocab().Token(id) + "' does not occur in the input");
      }
    }
  }
}

TrainReport Train(TrainableBackend &backend, std::span<const Seq2SeqExample> data,
                  const TrainConfig &config) {
  backend.SyncVocabulary();
  CheckTrainingData(backend, data, config.copy_restrict);

  const int n = backend.num_parameters();
  Eigen::VectorXd params = backend.Parameters();
  Eigen::VectorXd m = Eigen::VectorXd::Zero(n), v = Eigen::VectorXd::Zero(n);
  constexpr double kBeta1 = 0.9, kBeta2 = 0.999, kEps = 1e-8;
  long step = 0;

  std::mt19937 rng(config.seed);
  std::vector<size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);
  const auto started = std::chrono::steady_clock::now();

  TrainReport report;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double epoch_nll = 0.0;
    long epoch_tokens = 0;
    for (size_t b = 0; b < order.size(); b += config.batch_size) {
      std::vector<Seq2SeqExample> batch;
      for (size_t k = b; k < std::min(order.size(), b + config.batch_size); ++k) {
        batch.push_back(data[order[k]]);
      }
      Eigen::VectorXd grad;
      double loss = MeanLoss(backend, batch, config.copy_restrict, &grad);
      if (!std::isfinite(loss) || !grad.allFinite()) {
        throw Error("training diverged at epoch " + std::to_string(epoch) + " (loss " +
                    std::to_string(loss) + ")");
      }
      long tokens = 0;
      for (const auto &ex : batch) tokens += static_cast<long>(ex.target.size());
      epoch_nll += loss * tokens;
      epoch_tokens += tokens;

      ++step;
      m = kBeta1 * m + (1 - kBeta1) * grad;
      v = kBeta2 * v + (1 - kBeta2) * grad.cwiseProduct(grad);
      const double c1 = 1 - std::pow(kBeta1, step), c2 = 1 - std::pow(kBeta2, step);
      params.array() -= config.learning_rate * (m.array() / c1) /
                        ((v.array() / c2).sqrt() + kEps);
      backend.SetParameters(params);
    }
    const double mean = epoch_tokens ? epoch_nll / epoch_tokens : 0.0;
    report.epoch_loss.push_back(mean);
    report.epochs_run = epoch + 1;
    if (!config.checkpoint_dir.empty()) {
      const auto dir = std::filesystem::path(config.checkpoint_dir) / "latest";
      backend.Save(dir.string());
      std::ofstream state(std::filesystem::path(config.checkpoint_dir) / "trainer_state.json");
      state << nlohmann::json{{"epoch", epoch + 1}, {"loss", mean}, {"seed", config.seed}}.dump()
            << "\n";
    }
    if (mean < config.target_loss) break;
    if (config.max_seconds > 0) {
      std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - started;
      if (elapsed.count() > config.max_seconds) break;
    }
  }
  return report;
}

Seq2SeqExample MakeTrainingExample(GeneratorBackend &backend, const Document &doc,
                                   const EventMention &event,
                                   const EventOntology &ontology, ArgumentView view,
                                   int max_doc_len, int max_input_len) {
  GenerationInstance inst = MakeInstance(doc, event, ontology, max_doc_len);
  Seq2SeqExample ex;
  ex.input = backend.vocab().Encode(BuildInput(inst, max_input_len));
  ex.target = backend.vocab().Encode(FillGold(inst, doc, event, view));
  return ex;
}

ExtractionResult ExtractArguments(GeneratorBackend &backend, const Document &doc,
                                  const EventMention &trigger,
                                  const EventOntology &ontology,
                                  const ExtractOptions &options) {
  ExtractionResult result;
  GenerationInstance inst = MakeInstance(doc, trigger, ontology, options.max_doc_len);
  std::vector<TokenId> input = backend.vocab().Encode(BuildInput(inst, options.max_input_len));
  std::vector<Candidate> candidates = Decode(backend, input, options.decode);
  size_t best = 0;
  if (options.decode.rerank && candidates.size() > 1) {
    best = Rerank(backend, candidates, inst, ontology);
  }
  result.generated = backend.vocab().Decode(candidates[best].tokens);
  ParsedTemplate parsed = ParseFilled(inst, result.generated);
  if (!parsed.parseable) {
    result.unparseable = true;
    Warn("document '" + doc.doc_id + "', event '" + trigger.event_id +
         "': generated text does not follow the template");
    return result;
  }
  for (const auto &role : inst.slot_order) {
    auto it = parsed.fills.role_fills.find(role);
    if (it == parsed.fills.role_fills.end()) continue;
    for (const auto &filler : it->second) {
      for (auto &g : Ground(doc, trigger.trigger_span, role, filler)) {
        result.arguments.push_back(std::move(g));
      }
    }
  }
  return result;
}

}  // namespace evx
