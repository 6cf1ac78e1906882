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

// Command-line entry point: data conversion, corpus statistics, split
// construction, and the trigger / argument pipeline stages.

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>

#include "CLI11.hpp"
#include "json.hpp"

#include "eventx/corpus.h"
#include "eventx/metrics.h"
#include "eventx/ontology.h"
#include "eventx/pipeline.h"

namespace {

struct StageOptions {
  std::string config_path;
  std::vector<std::string> overrides;
  std::string output_dir;
  bool gold_triggers = false;
  bool force = false;
};

void AddStageOptions(CLI::App *cmd, StageOptions &o) {
  cmd->add_option("-c,--config", o.config_path, "Run configuration (JSON)");
  cmd->add_option("--set", o.overrides, "Override a config value, e.g. tapkey.lambda=0.3")
      ->take_all();
  cmd->add_option("-o,--output-dir", o.output_dir, "Run directory");
  cmd->add_flag("--gold-triggers", o.gold_triggers, "Skip trigger stages, use gold triggers");
  cmd->add_flag("--force", o.force, "Recompute outputs that already exist");
}

evx::RunConfig ResolveConfig(const StageOptions &o) {
  nlohmann::json j = nlohmann::json::object();
  if (!o.config_path.empty()) {
    std::ifstream in(o.config_path);
    if (!in) throw evx::Error("cannot open config '" + o.config_path + "'");
    j = nlohmann::json::parse(in);
  }
  for (const auto &s : o.overrides) evx::ApplyOverride(j, s);
  if (!o.output_dir.empty()) j["output_dir"] = o.output_dir;
  if (o.gold_triggers) j["gold_triggers"] = true;
  return evx::RunConfig::FromJson(j);
}

void PrintStats(const std::vector<evx::Document> &docs, bool as_json) {
  const evx::CorpusCounts c = evx::CountCorpus(docs);
  nlohmann::json out{{"documents", c.documents},   {"sentences", c.sentences},
                     {"tokens", c.tokens},         {"events", c.events},
                     {"arguments", c.arguments},   {"entity_mentions", c.entity_mentions},
                     {"coref_clusters", c.coref_clusters}};
  for (auto view : {evx::ArgumentView::kNearest, evx::ArgumentView::kInformative}) {
    const evx::DistanceStats s = evx::ComputeDistanceStats(docs, view);
    out[std::string(evx::ArgumentViewName(view))] = {
        {"mean_distance", s.mean_distance},
        {"same_sentence_fraction", s.same_sentence_fraction},
        {"informative_given_in_sentence", s.informative_given_in_sentence},
        {"num_arguments", s.num_arguments}};
  }
  if (as_json) {
    std::cout << out.dump(2) << "\n";
    return;
  }
  std::cout << "documents        " << c.documents << "\n"
            << "sentences        " << c.sentences << "\n"
            << "tokens           " << c.tokens << "\n"
            << "events           " << c.events << "\n"
            << "arguments        " << c.arguments << "\n"
            << "entity mentions  " << c.entity_mentions << "\n"
            << "coref clusters   " << c.coref_clusters << "\n"
            << std::fixed << std::setprecision(2);
  for (const char *view : {"nearest", "informative"}) {
    const auto &s = out[view];
    std::cout << view << ": mean distance " << s["mean_distance"].get<double>()
              << " words, same sentence "
              << 100 * s["same_sentence_fraction"].get<double>() << "%\n";
  }
  std::cout << "informative mention in trigger sentence (given some mention there) "
            << 100 * out["informative"]["informative_given_in_sentence"].get<double>() << "%\n";
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"eventx: document-level event extraction"};
  app.require_subcommand(1);

  std::string format = "wikievents", input, coref, output, ontology_path;
  auto *convert = app.add_subcommand("convert", "Convert a dataset to the canonical JSONL format");
  convert->add_option("--format", format, "wikievents, rams or canonical")
      ->check(CLI::IsMember({"wikievents", "rams", "canonical"}));
  convert->add_option("-i,--input", input, "Input documents")->required();
  convert->add_option("--coref", coref, "WikiEvents coreference file");
  convert->add_option("--ontology", ontology_path, "Warn about roles missing from this ontology");
  convert->add_option("-o,--output", output, "Output JSONL")->required();

  std::string corpus;
  bool as_json = false;
  auto *stats = app.add_subcommand("stats", "Corpus counts and argument distance statistics");
  stats->add_option("corpus", corpus, "Canonical JSONL corpus")->required();
  stats->add_flag("--json", as_json, "Machine-readable output");

  std::string mode = "full";
  auto *splits = app.add_subcommand("build-splits", "Restrict training events to a type subset");
  splits->add_option("corpus", corpus, "Canonical JSONL training corpus")->required();
  splits->add_option("--mode", mode, "full, freq or ontology_1per")
      ->check(CLI::IsMember({"full", "freq", "ontology_1per"}));
  splits->add_option("-o,--output", output, "Output JSONL")->required();

  StageOptions so;
  struct Stage {
    const char *name;
    const char *help;
  };
  const std::vector<Stage> stages = {
      {"build-class-vectors", "Keyword class vectors from unlabeled training text"},
      {"pseudo-label", "Pseudo-label training sentences by class-vector similarity"},
      {"train-trigger", "Train the keyword-seeded trigger tagger"},
      {"predict-trigger", "Tag triggers in the test corpus"},
      {"train-args", "Train the argument generator"},
      {"extract-args", "Extract arguments for gold or predicted triggers"},
      {"pipeline", "Run every stage, resuming finished ones"},
  };
  std::map<std::string, CLI::App *> stage_cmds;
  for (const auto &s : stages) {
    auto *cmd = app.add_subcommand(s.name, s.help);
    AddStageOptions(cmd, so);
    stage_cmds[s.name] = cmd;
  }

  std::string gold, args_path, triggers_path;
  auto *score = app.add_subcommand("score", "Score predictions against a gold corpus");
  AddStageOptions(score, so);
  score->add_option("--gold", gold, "Gold corpus (standalone mode)");
  score->add_option("--args", args_path, "Argument predictions (standalone mode)");
  score->add_option("--triggers", triggers_path, "Trigger predictions (standalone mode)");
  score->add_flag("--json", as_json, "Machine-readable output");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*convert) {
      std::unique_ptr<evx::EventOntology> onto;
      if (!ontology_path.empty()) {
        onto = std::make_unique<evx::EventOntology>(evx::LoadOntology(ontology_path));
      }
      std::vector<evx::Document> docs;
      if (format == "wikievents") {
        docs = evx::LoadWikiEvents(input, coref, onto.get());
      } else if (format == "rams") {
        docs = evx::LoadRams(input, onto.get());
      } else {
        docs = evx::LoadCorpus(input);
      }
      evx::SaveCorpus(docs, output);
      std::cerr << "wrote " << docs.size() << " documents to " << output << "\n";
    } else if (*stats) {
      PrintStats(evx::LoadCorpus(corpus), as_json);
    } else if (*splits) {
      const auto docs = evx::LoadCorpus(corpus);
      const auto split = evx::BuildSplit(docs, evx::ParseSplitMode(mode));
      evx::SaveCorpus(split, output);
      std::cerr << "kept " << evx::CountCorpus(split).events << " of "
                << evx::CountCorpus(docs).events << " training events\n";
    } else if (*score && !gold.empty()) {
      const auto gold_docs = evx::LoadCorpus(gold);
      std::vector<evx::ScoreReport> reports;
      if (!triggers_path.empty()) {
        std::ifstream in(triggers_path);
        if (!in) throw evx::Error("cannot open '" + triggers_path + "'");
        auto [ti, tc] = evx::ScoreTriggers(evx::ReadTriggerPredictions(in, triggers_path), gold_docs);
        reports.push_back(ti);
        reports.push_back(tc);
      }
      if (!args_path.empty()) {
        std::ifstream in(args_path);
        if (!in) throw evx::Error("cannot open '" + args_path + "'");
        const auto args = evx::ReadArgPredictions(in, args_path);
        for (auto m : {evx::ArgMatch::kHead, evx::ArgMatch::kCoref, evx::ArgMatch::kInformative,
                       evx::ArgMatch::kInformativeHead, evx::ArgMatch::kSpan}) {
          reports.push_back(evx::ScoreArgs(args, gold_docs, m, false));
          reports.push_back(evx::ScoreArgs(args, gold_docs, m, true));
        }
      }
      std::cout << (as_json ? evx::ReportsToJson(reports) + "\n" : evx::FormatReports(reports));
    } else {
      evx::Pipeline p(ResolveConfig(so), so.force);
      std::filesystem::create_directories(p.config().output_dir);
      p.WriteConfig();
      if (*score) {
        auto reports = p.Score();
        std::cout << (as_json ? evx::ReportsToJson(reports) + "\n" : evx::FormatReports(reports));
      } else if (*stage_cmds["pipeline"]) {
        std::cout << evx::FormatReports(p.Run());
      } else if (*stage_cmds["build-class-vectors"]) {
        p.BuildClassVectors();
      } else if (*stage_cmds["pseudo-label"]) {
        p.PseudoLabel();
      } else if (*stage_cmds["train-trigger"]) {
        p.TrainTrigger();
      } else if (*stage_cmds["predict-trigger"]) {
        p.PredictTrigger();
      } else if (*stage_cmds["train-args"]) {
        p.TrainArgs();
      } else if (*stage_cmds["extract-args"]) {
        p.ExtractArgs();
      }
    }
  } catch (const std::exception &e) {
    std::cerr << "eventx: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
