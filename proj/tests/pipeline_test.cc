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

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"

#include "eventx/pipeline.h"
#include "eventx/toy.h"
#include "support/mocks.h"

using namespace evx;
namespace fs = std::filesystem;

namespace {

std::string Slurp(const fs::path &p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Fresh directory with a written toy corpus.
fs::path ToyDir(const std::string &name, int docs = 30, int types = 3) {
  fs::path dir = fs::temp_directory_path() / ("eventx_pipeline_" + name);
  fs::remove_all(dir);
  ToyOptions opt;
  opt.num_docs = docs;
  opt.num_types = types;
  WriteToyData(MakeToyData(opt), dir.string());
  return dir;
}

RunConfig ToyConfig(const fs::path &dir, const std::string &run = "run") {
  nlohmann::json j{{"ontology", (dir / "ontology.jsonl").string()},
                   {"train", (dir / "train.jsonl").string()},
                   {"dev", (dir / "dev.jsonl").string()},
                   {"test", (dir / "test.jsonl").string()},
                   {"vectors", (dir / "vectors.txt").string()},
                   {"output_dir", (dir / run).string()}};
  return RunConfig::FromJson(j);
}

std::vector<std::string> Labels(const std::vector<ScoreReport> &reports) {
  std::vector<std::string> out;
  for (const auto &r : reports) out.push_back(r.label);
  return out;
}

bool Contains(const std::vector<std::string> &v, const std::string &s) {
  return std::find(v.begin(), v.end(), s) != v.end();
}

Document TypedDoc(const std::string &id, const std::vector<std::string> &types) {
  Document d = testing::MakeDocument(id, {"a b c d e f g h i j k l m n"});
  for (size_t i = 0; i < types.size(); ++i) {
    d.event_mentions.push_back({"e" + std::to_string(i), types[i],
                                {static_cast<int>(i), static_cast<int>(i) + 1}, {}});
  }
  return d;
}

}  // namespace

TEST_CASE("toy pipeline end to end") {
  const fs::path dir = ToyDir("e2e");
  Pipeline p(ToyConfig(dir));
  const auto reports = p.Run();
  const auto labels = Labels(reports);
  for (const char *l : {"TI", "TC", "Arg-I head", "Arg-C head"}) CHECK(Contains(labels, l));
  for (const auto &r : reports) {
    CHECK(r.f1 >= 0);
    CHECK(r.f1 <= 1);
    CHECK(r.num_gold > 0);
  }
  for (const char *f : {"config.json", "class_vectors.json", "pseudo_labels.jsonl", "tapkey.json",
                        "triggers.jsonl", "args_model", "arguments.jsonl", "scores.json",
                        "scores.txt"}) {
    CHECK_MESSAGE(fs::exists(p.Path(f)), f);
  }
  // The tagger finds at least some toy triggers.
  CHECK(reports[0].num_correct > 0);
  // The saved config reproduces the run settings.
  CHECK(LoadRunConfig(p.Path("config.json")).ToJson() == p.config().ToJson());

  SUBCASE("finished stages are reused") {
    const std::string args = Slurp(p.Path("arguments.jsonl"));
    fs::remove(p.Path("arguments.jsonl"));
    fs::remove_all(p.Path("class_vectors.json"));
    Pipeline again(ToyConfig(dir));
    again.ExtractArgs();
    CHECK(Slurp(p.Path("arguments.jsonl")) == args);
    CHECK_FALSE(fs::exists(p.Path("class_vectors.json")));
  }
}

TEST_CASE("gold triggers bypass the trigger stages") {
  const fs::path dir = ToyDir("gold");
  RunConfig cfg = ToyConfig(dir);
  cfg.gold_triggers = true;
  Pipeline p(cfg);
  const auto labels = Labels(p.Run());
  CHECK_FALSE(Contains(labels, "TI"));
  CHECK(Contains(labels, "Arg-C head"));
  CHECK_FALSE(fs::exists(p.Path("triggers.jsonl")));
  CHECK_FALSE(fs::exists(p.Path("tapkey.json")));
  // Every prediction hangs off a gold trigger.
  std::ifstream in(p.Path("arguments.jsonl"));
  const auto test = LoadCorpus(cfg.test);
  for (const auto &a : ReadArgPredictions(in, "arguments.jsonl")) {
    bool found = false;
    for (const auto &d : test) {
      if (d.doc_id != a.doc_id) continue;
      for (const auto &e : d.event_mentions) {
        found |= e.trigger_span == a.trigger_span && e.event_type == a.event_type;
      }
    }
    CHECK(found);
  }
}

TEST_CASE("runs are deterministic") {
  const fs::path dir = ToyDir("det");
  Pipeline a(ToyConfig(dir, "run_a")), b(ToyConfig(dir, "run_b"));
  a.Run();
  b.Run();
  for (const char *f : {"class_vectors.json", "pseudo_labels.jsonl", "tapkey.json",
                        "triggers.jsonl", "arguments.jsonl", "scores.json"}) {
    CHECK_MESSAGE(Slurp(a.Path(f)) == Slurp(b.Path(f)), f);
  }
}

TEST_CASE("a failing stage is named") {
  const fs::path dir = ToyDir("fail");
  RunConfig cfg = ToyConfig(dir);
  cfg.test = (dir / "missing.jsonl").string();
  Pipeline p(cfg);
  try {
    p.Run();
    FAIL("expected a stage failure");
  } catch (const Error &e) {
    CHECK(std::string(e.what()).find("stage 'predict-trigger'") != std::string::npos);
  }
  // Earlier stages left their outputs.
  CHECK(fs::exists(p.Path("tapkey.json")));
}

TEST_CASE("split construction") {
  SUBCASE("frequency keeps the ten most common types") {
    std::vector<std::string> types;
    for (int t = 0; t < 12; ++t) {
      for (int n = 0; n <= t; ++n) types.push_back("T" + std::to_string(t));
    }
    std::vector<Document> train = {TypedDoc("a", {}), TypedDoc("b", {})};
    for (size_t i = 0; i < types.size(); ++i) {
      Document &d = train[i % 2];
      d.event_mentions.push_back({"e" + std::to_string(i), types[i], {0, 1}, {}});
    }
    auto kept = SplitTypes(train, SplitMode::kFreq);
    CHECK(kept.size() == 10);
    CHECK(kept.front() == "T11");
    CHECK_FALSE(Contains(kept, "T0"));
    CHECK_FALSE(Contains(kept, "T1"));
    auto split = BuildSplit(train, SplitMode::kFreq);
    CHECK(split.size() == 2);
    CHECK(CountCorpus(split).events == CountCorpus(train).events - 1 - 2);
  }
  SUBCASE("one type per ontology branch") {
    std::vector<Document> train = {TypedDoc("a", {"Life:Injure", "Life:Die", "Conflict:Demonstrate"}),
                                   TypedDoc("b", {"Conflict:Attack"})};
    auto split = BuildSplit(train, SplitMode::kOntology1Per);
    REQUIRE(split.size() == 2);
    CHECK(split[0].event_mentions.size() == 2);
    CHECK(split[0].event_mentions[0].event_type == "Life:Injure");
    CHECK(split[1].event_mentions.empty());
    CHECK(SplitTypes(train, SplitMode::kOntology1Per).size() == 8);
  }
  SUBCASE("full keeps everything") {
    std::vector<Document> train = {TypedDoc("a", {"X", "Y"})};
    CHECK(BuildSplit(train, SplitMode::kFull)[0].event_mentions.size() == 2);
  }
  CHECK_THROWS_AS(ParseSplitMode("half"), ValidationError);
}

TEST_CASE("run configuration") {
  RunConfig def;
  CHECK(RunConfig::FromJson(def.ToJson()).ToJson() == def.ToJson());
  CHECK(RunConfig::FromJson(nlohmann::json::object()).seed == 42);

  nlohmann::json j = nlohmann::json::object();
  ApplyOverride(j, "tapkey.lambda=0.3");
  ApplyOverride(j, "decode.beam_width=2");
  ApplyOverride(j, "view=informative");
  ApplyOverride(j, "seed=7");
  RunConfig c = RunConfig::FromJson(j);
  CHECK(c.tapkey.lambda == 0.3);
  CHECK(c.decode.beam_width == 2);
  CHECK(c.view == ArgumentView::kInformative);
  // Stage seeds derive from the run seed.
  CHECK(c.generator.seed == 7);
  CHECK(c.arg_train.seed != c.tapkey_train.seed);

  CHECK_THROWS_AS(ApplyOverride(j, "no_equals"), ValidationError);
  CHECK_THROWS_AS(RunConfig::FromJson({{"bogus", 1}}), ValidationError);
  CHECK_THROWS_AS(RunConfig::FromJson({{"tapkey", {{"bogus", 1}}}}), ValidationError);
  CHECK_THROWS_AS(RunConfig::FromJson({{"seed", "x"}}), ValidationError);
  CHECK_THROWS_AS(RunConfig::FromJson({{"tapkey", {{"tau_i", 0.2}, {"tau_o", 0.3}}}}),
                  ValidationError);
  CHECK_THROWS_AS(RunConfig::FromJson({{"split_mode", "half"}}), ValidationError);
}

TEST_CASE("cache path lookup") {
  const fs::path cache = fs::temp_directory_path() / "eventx_cache_test";
  fs::create_directories(cache);
  std::ofstream(cache / "vecs.txt") << "a 1\n";
  ::setenv("EVENTX_CACHE_DIR", cache.string().c_str(), 1);
  CHECK(ResolveCachePath("vecs.txt") == (cache / "vecs.txt").string());
  CHECK(ResolveCachePath("nothing.txt").empty());
  ::unsetenv("EVENTX_CACHE_DIR");
  CHECK(ResolveCachePath("vecs.txt").empty());
  fs::remove_all(cache);
}

TEST_CASE("command-line smoke test") {
  const char *cli = std::getenv("EVENTX_CLI");
  if (!cli) {
    MESSAGE("EVENTX_CLI not set; skipping");
    return;
  }
  const fs::path dir = ToyDir("cli");
  const std::string d = dir.string();
  auto run = [&](const std::string &args) {
    return std::system((std::string(cli) + " " + args + " > " + d + "/out.txt 2> " + d +
                        "/err.txt").c_str());
  };
  const std::string common = "-c " + d + "/cfg.json";
  std::ofstream(dir / "cfg.json") << ToyConfig(dir).ToJson().dump();

  CHECK(run("stats " + d + "/train.jsonl --json") == 0);
  auto stats = nlohmann::json::parse(Slurp(dir / "out.txt"));
  CHECK(stats["documents"].get<int>() == CountCorpus(LoadCorpus(d + "/train.jsonl")).documents);

  CHECK(run("pipeline " + common + " --set arg_train.epochs=2") == 0);
  CHECK(Slurp(dir / "out.txt").find("Arg-C head") != std::string::npos);
  CHECK(run("score " + common + " --json") == 0);
  CHECK(nlohmann::json::parse(Slurp(dir / "out.txt")).size() == 8);
  CHECK(run("score --gold " + d + "/test.jsonl --args " + d + "/run/arguments.jsonl") == 0);
  CHECK(Slurp(dir / "out.txt").find("Arg-C span") != std::string::npos);

  CHECK(run("build-splits " + d + "/train.jsonl --mode freq -o " + d + "/freq.jsonl") == 0);
  CHECK(fs::exists(dir / "freq.jsonl"));
  CHECK(run("convert --format canonical -i " + d + "/test.jsonl -o " + d + "/copy.jsonl") == 0);
  CHECK(LoadCorpus(d + "/copy.jsonl") == LoadCorpus(d + "/test.jsonl"));

  CHECK(run("stats " + d + "/nope.jsonl") != 0);
  CHECK(Slurp(dir / "err.txt").find("eventx:") != std::string::npos);
  CHECK(run("pipeline " + common + " --set bogus=1") != 0);
  CHECK(run("frobnicate") != 0);
}
