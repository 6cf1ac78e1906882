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

#include "eventx/pipeline.h"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace evx {

namespace fs = std::filesystem;

nlohmann::json RunConfig::ToJson() const {
  return {
      {"ontology", ontology},
      {"train", train},
      {"dev", dev},
      {"test", test},
      {"output_dir", output_dir},
      {"split_mode", split_mode},
      {"backend", backend},
      {"generator",
       {{"embed_dim", generator.embed_dim},
        {"hidden_dim", generator.hidden_dim},
        {"context", generator.context},
        {"trigger_window", generator.trigger_window}}},
      {"max_doc_len", max_doc_len},
      {"max_input_len", max_input_len},
      {"decode",
       {{"beam_width", decode.beam_width},
        {"max_output_len", decode.max_output_len},
        {"rerank", decode.rerank},
        {"copy_restrict", decode.copy_restrict}}},
      {"arg_train",
       {{"epochs", arg_train.epochs},
        {"batch_size", arg_train.batch_size},
        {"learning_rate", arg_train.learning_rate},
        {"target_loss", arg_train.target_loss},
        {"max_seconds", arg_train.max_seconds}}},
      {"vectors", vectors},
      {"embed_dim", embed_dim},
      {"embed_mix", embed_mix},
      {"tapkey",
       {{"proj_dim", tapkey.proj_dim},
        {"max_event_types", tapkey.max_event_types},
        {"lambda", tapkey.lambda},
        {"alpha", tapkey.alpha},
        {"tau_i", tau_i},
        {"tau_o", tau_o},
        {"top_k", top_k},
        {"keywords", keywords},
        {"epochs", tapkey_train.epochs},
        {"batch_size", tapkey_train.batch_size},
        {"learning_rate", tapkey_train.learning_rate},
        {"types", trigger_types},
        {"unseen_types", unseen_types}}},
      {"seed", seed},
      {"view", std::string(ArgumentViewName(view))},
      {"gold_triggers", gold_triggers},
  };
}

namespace {

void CheckKeys(const nlohmann::json &given, const nlohmann::json &known, const std::string &at) {
  if (!given.is_object()) throw ValidationError("config" + at + ": expected an object");
  for (auto it = given.begin(); it != given.end(); ++it) {
    const std::string where = at + "." + it.key();
    if (!known.contains(it.key())) throw ValidationError("config: unknown key '" + where.substr(1) + "'");
    if (known[it.key()].is_object()) CheckKeys(it.value(), known[it.key()], where);
  }
}

}  // namespace

RunConfig RunConfig::FromJson(const nlohmann::json &given) {
  nlohmann::json j = RunConfig().ToJson();
  CheckKeys(given, j, "");
  j.merge_patch(given);
  RunConfig c;
  try {
    c.ontology = j.at("ontology");
    c.train = j.at("train");
    c.dev = j.at("dev");
    c.test = j.at("test");
    c.output_dir = j.at("output_dir");
    c.split_mode = j.at("split_mode");
    c.backend = j.at("backend");
    const auto &g = j.at("generator");
    c.generator.embed_dim = g.at("embed_dim");
    c.generator.hidden_dim = g.at("hidden_dim");
    c.generator.context = g.at("context");
    c.generator.trigger_window = g.at("trigger_window");
    c.max_doc_len = j.at("max_doc_len");
    c.max_input_len = j.at("max_input_len");
    const auto &d = j.at("decode");
    c.decode.beam_width = d.at("beam_width");
    c.decode.max_output_len = d.at("max_output_len");
    c.decode.rerank = d.at("rerank");
    c.decode.copy_restrict = d.at("copy_restrict");
    const auto &a = j.at("arg_train");
    c.arg_train.epochs = a.at("epochs");
    c.arg_train.batch_size = a.at("batch_size");
    c.arg_train.learning_rate = a.at("learning_rate");
    c.arg_train.target_loss = a.at("target_loss");
    c.arg_train.max_seconds = a.at("max_seconds");
    c.vectors = j.at("vectors");
    c.embed_dim = j.at("embed_dim");
    c.embed_mix = j.at("embed_mix");
    const auto &t = j.at("tapkey");
    c.tapkey.proj_dim = t.at("proj_dim");
    c.tapkey.max_event_types = t.at("max_event_types");
    c.tapkey.lambda = t.at("lambda");
    c.tapkey.alpha = t.at("alpha");
    c.tau_i = t.at("tau_i");
    c.tau_o = t.at("tau_o");
    c.top_k = t.at("top_k");
    c.keywords = t.at("keywords");
    c.tapkey_train.epochs = t.at("epochs");
    c.tapkey_train.batch_size = t.at("batch_size");
    c.tapkey_train.learning_rate = t.at("learning_rate");
    c.trigger_types = t.at("types").get<std::vector<std::string>>();
    c.unseen_types = t.at("unseen_types").get<std::vector<std::string>>();
    c.seed = j.at("seed");
    c.view = ParseArgumentView(j.at("view").get<std::string>());
    c.gold_triggers = j.at("gold_triggers");
  } catch (const nlohmann::json::exception &e) {
    throw ValidationError(std::string("config: ") + e.what());
  }
  ParseSplitMode(c.split_mode);
  if (c.tau_o > c.tau_i) throw ValidationError("config: tapkey.tau_o must not exceed tau_i");
  if (c.decode.beam_width < 1) throw ValidationError("config: decode.beam_width must be >= 1");
  // Derived seeds keep the stages independent of each other's RNG use.
  c.generator.seed = c.seed;
  c.arg_train.seed = c.seed + 1;
  c.tapkey.seed = c.seed + 2;
  c.tapkey_train.seed = c.seed + 3;
  return c;
}

RunConfig LoadRunConfig(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open config '" + path + "'");
  try {
    return RunConfig::FromJson(nlohmann::json::parse(in));
  } catch (const nlohmann::json::parse_error &e) {
    throw ParseError(path + ": " + e.what());
  }
}

void ApplyOverride(nlohmann::json &config, const std::string &assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw ValidationError("override '" + assignment + "' is not key=value");
  }
  std::string key = assignment.substr(0, eq);
  const std::string raw = assignment.substr(eq + 1);
  std::replace(key.begin(), key.end(), '.', '/');
  nlohmann::json value;
  try {
    value = nlohmann::json::parse(raw);
  } catch (const nlohmann::json::parse_error &) {
    value = raw;
  }
  config[nlohmann::json::json_pointer("/" + key)] = value;
}

std::string ResolveCachePath(const std::string &name) {
  if (name.empty()) return "";
  if (fs::exists(name)) return name;
  if (const char *cache = std::getenv("EVENTX_CACHE_DIR")) {
    fs::path p = fs::path(cache) / name;
    if (fs::exists(p)) return p.string();
  }
  return "";
}

SplitMode ParseSplitMode(std::string_view s) {
  if (s == "full") return SplitMode::kFull;
  if (s == "freq") return SplitMode::kFreq;
  if (s == "ontology_1per") return SplitMode::kOntology1Per;
  throw ValidationError("unknown split mode '" + std::string(s) +
                        "' (expected full, freq or ontology_1per)");
}

std::vector<std::string> SplitTypes(const std::vector<Document> &train, SplitMode mode) {
  switch (mode) {
    case SplitMode::kFull:
      return {};
    case SplitMode::kOntology1Per:
      return {"Movement:Transport", "Personnel:Elect",       "Business:Start-Org",
              "Life:Injure",        "Transaction:Transfer-Money", "Justice:Arrest-Jail",
              "Contact:Phone-Write", "Conflict:Demonstrate"};
    case SplitMode::kFreq: {
      std::map<std::string, int> counts;
      for (const auto &d : train) {
        for (const auto &e : d.event_mentions) ++counts[e.event_type];
      }
      std::vector<std::pair<std::string, int>> ranked(counts.begin(), counts.end());
      std::stable_sort(ranked.begin(), ranked.end(),
                       [](const auto &a, const auto &b) { return a.second > b.second; });
      std::vector<std::string> out;
      for (size_t i = 0; i < ranked.size() && i < 10; ++i) out.push_back(ranked[i].first);
      return out;
    }
  }
  return {};
}

std::vector<Document> BuildSplit(const std::vector<Document> &train, SplitMode mode) {
  if (mode == SplitMode::kFull) return train;
  const auto kept = SplitTypes(train, mode);
  const std::set<std::string> keep(kept.begin(), kept.end());
  std::vector<Document> out = train;
  for (auto &d : out) {
    std::erase_if(d.event_mentions,
                  [&](const EventMention &e) { return !keep.count(e.event_type); });
  }
  return out;
}

CorpusCounts CountCorpus(const std::vector<Document> &docs) {
  CorpusCounts c;
  c.documents = static_cast<int>(docs.size());
  for (const auto &d : docs) {
    c.sentences += static_cast<int>(d.sentence_boundaries.size());
    c.tokens += static_cast<int>(d.tokens.size());
    c.events += static_cast<int>(d.event_mentions.size());
    for (const auto &e : d.event_mentions) c.arguments += static_cast<int>(e.arguments.size());
    c.entity_mentions += static_cast<int>(d.entity_mentions.size());
    c.coref_clusters += static_cast<int>(d.coref_clusters.size());
  }
  return c;
}

std::vector<SentenceRef> CorpusSentences(const std::vector<Document> &docs) {
  std::vector<SentenceRef> out;
  for (size_t i = 0; i < docs.size(); ++i) {
    const auto &d = docs[i];
    for (size_t s = 0; s < d.sentence_boundaries.size(); ++s) {
      const TokenSpan &b = d.sentence_boundaries[s];
      if (b.empty()) continue;
      out.push_back({i, static_cast<int>(s),
                     std::vector<std::string>(d.tokens.begin() + b.start, d.tokens.begin() + b.end)});
    }
  }
  return out;
}

std::unique_ptr<LexiconEmbeddingBackend> MakeEmbeddingBackend(const RunConfig &config,
                                                              const std::vector<Document> &docs) {
  if (!config.vectors.empty()) {
    std::string path = ResolveCachePath(config.vectors);
    if (path.empty()) throw NotFoundError("word vectors '" + config.vectors + "' not found");
    return LexiconEmbeddingBackend::LoadVectors(path, config.embed_mix);
  }
  auto backend = std::make_unique<LexiconEmbeddingBackend>(config.embed_dim, config.embed_mix);
  std::set<std::string> vocab;
  for (const auto &d : docs) {
    for (const auto &t : d.tokens) vocab.insert(ToLower(t));
  }
  for (const auto &w : vocab) backend->AddWord(w, backend->WordVector(w));
  return backend;
}

void WriteFileAtomic(const std::string &path, const std::string &content) {
  const fs::path target(path);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  const fs::path tmp = target.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw Error("cannot write '" + tmp.string() + "'");
    out << content;
    if (!out) throw Error("write failed for '" + tmp.string() + "'");
  }
  fs::rename(tmp, target);
}

void WriteClassVectors(const std::vector<ClassVector> &classes, const std::string &path) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto &c : classes) {
    arr.push_back({{"event_type", c.event_type},
                   {"support", c.support_count},
                   {"vec", std::vector<double>(c.vec.data(), c.vec.data() + c.vec.size())}});
  }
  WriteFileAtomic(path, arr.dump() + "\n");
}

std::vector<ClassVector> ReadClassVectors(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path + "'");
  std::vector<ClassVector> out;
  try {
    for (const auto &c : nlohmann::json::parse(in)) {
      auto v = c.at("vec").get<std::vector<double>>();
      out.push_back({c.at("event_type").get<std::string>(),
                     Eigen::Map<Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size())),
                     c.value("support", 0)});
    }
  } catch (const nlohmann::json::exception &e) {
    throw ParseError(path + ": " + e.what());
  }
  return out;
}

void WritePseudoLabels(const std::vector<PseudoLabels> &labels, const std::string &path) {
  std::ostringstream os;
  for (const auto &l : labels) {
    os << nlohmann::json{{"doc_id", l.doc_id}, {"sent_idx", l.sent_idx}, {"tags", l.tags}}.dump()
       << "\n";
  }
  WriteFileAtomic(path, os.str());
}

std::vector<PseudoLabels> ReadPseudoLabels(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path + "'");
  std::vector<PseudoLabels> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      auto j = nlohmann::json::parse(line);
      out.push_back({j.at("doc_id"), j.at("sent_idx"), j.at("tags").get<TagSequence>()});
    } catch (const nlohmann::json::exception &e) {
      throw ParseError(path + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

Pipeline::Pipeline(RunConfig config, bool force) : config_(std::move(config)), force_(force) {}

std::string Pipeline::Path(const std::string &name) const {
  return (fs::path(config_.output_dir) / name).string();
}

bool Pipeline::Done(const std::string &name) const { return !force_ && fs::exists(Path(name)); }

const EventOntology &Pipeline::Ontology() {
  if (!ontology_) {
    if (config_.ontology.empty()) throw ValidationError("config: ontology path is required");
    ontology_ = std::make_unique<EventOntology>(LoadOntology(config_.ontology));
  }
  return *ontology_;
}

const std::vector<Document> &Pipeline::TrainDocs() {
  if (!train_) {
    if (config_.train.empty()) throw ValidationError("config: train path is required");
    train_ = std::make_unique<std::vector<Document>>(
        BuildSplit(LoadCorpus(config_.train), ParseSplitMode(config_.split_mode)));
  }
  return *train_;
}

const std::vector<Document> &Pipeline::TestDocs() {
  if (!test_) {
    if (config_.test.empty()) throw ValidationError("config: test path is required");
    test_ = std::make_unique<std::vector<Document>>(LoadCorpus(config_.test));
  }
  return *test_;
}

LexiconEmbeddingBackend &Pipeline::Embeddings() {
  if (!embeddings_ && !config_.vectors.empty()) {
    embeddings_ = MakeEmbeddingBackend(config_, {});
  } else if (!embeddings_) {
    std::vector<Document> all = TrainDocs();
    const auto &test = TestDocs();
    all.insert(all.end(), test.begin(), test.end());
    embeddings_ = MakeEmbeddingBackend(config_, all);
  }
  return *embeddings_;
}

void Pipeline::WriteConfig() const {
  WriteFileAtomic(Path("config.json"), config_.ToJson().dump(2) + "\n");
}

void Pipeline::BuildClassVectors() {
  if (Done("class_vectors.json")) return;
  const EventOntology &onto = Ontology();
  std::map<std::string, std::vector<std::string>> keywords;
  if (!config_.keywords.empty()) {
    keywords = LoadKeywordFile(config_.keywords);
  } else {
    for (const auto &e : onto.event_types()) {
      if (!e.keywords.empty()) keywords[e.name] = e.keywords;
    }
  }
  std::vector<std::string> types = config_.trigger_types;
  if (types.empty()) {
    for (const auto &e : onto.event_types()) {
      if (keywords.count(e.name) && std::find(config_.unseen_types.begin(), config_.unseen_types.end(),
                                              e.name) == config_.unseen_types.end()) {
        types.push_back(e.name);
      }
    }
  }
  types.insert(types.end(), config_.unseen_types.begin(), config_.unseen_types.end());
  std::vector<std::vector<std::string>> sentences;
  for (auto &s : CorpusSentences(TrainDocs())) sentences.push_back(std::move(s.tokens));
  const EmbeddingBackend &backend = Embeddings();
  std::vector<ClassVector> classes;
  for (const auto &t : types) {
    onto.TemplateFor(t);  // unknown types fail here
    auto kw = keywords.find(t);
    if (kw == keywords.end() || kw->second.empty()) {
      Warn("event type '" + t + "' has no keywords; skipped");
      continue;
    }
    try {
      classes.push_back(BuildClassVector(backend, t, kw->second, sentences, config_.top_k));
    } catch (const Error &e) {
      Warn(std::string(e.what()) + "; skipped");
    }
  }
  if (classes.empty()) throw Error("no class vector could be built");
  WriteClassVectors(classes, Path("class_vectors.json"));
}

namespace {

bool IsUnseen(const RunConfig &c, const std::string &type) {
  return std::find(c.unseen_types.begin(), c.unseen_types.end(), type) != c.unseen_types.end();
}

}  // namespace

void Pipeline::PseudoLabel() {
  if (Done("pseudo_labels.jsonl")) return;
  std::vector<ClassVector> seen;
  for (auto &c : ReadClassVectors(Path("class_vectors.json"))) {
    if (!IsUnseen(config_, c.event_type)) seen.push_back(std::move(c));
  }
  const auto &docs = TrainDocs();
  auto refs = CorpusSentences(docs);
  std::vector<std::vector<std::string>> sentences;
  for (const auto &r : refs) sentences.push_back(r.tokens);
  auto tags = evx::PseudoLabel(seen, Embeddings(), sentences, config_.tau_i, config_.tau_o);
  std::vector<PseudoLabels> out;
  for (size_t i = 0; i < refs.size(); ++i) {
    out.push_back({docs[refs[i].doc].doc_id, refs[i].sent_idx, std::move(tags[i])});
  }
  WritePseudoLabels(out, Path("pseudo_labels.jsonl"));
}

void Pipeline::TrainTrigger() {
  if (Done("tapkey.json")) return;
  const auto classes = ReadClassVectors(Path("class_vectors.json"));
  TapKeyConfig cfg = config_.tapkey;
  if (cfg.max_event_types <= 0) cfg.max_event_types = static_cast<int>(classes.size());
  TapKeyModel model(Embeddings().dim(), cfg);
  for (const auto &c : classes) {
    if (!IsUnseen(config_, c.event_type)) model.AddClass(c);
  }
  model.RecomputeProjection();

  std::map<std::pair<std::string, int>, const TagSequence *> by_sentence;
  const auto labels = ReadPseudoLabels(Path("pseudo_labels.jsonl"));
  for (const auto &l : labels) by_sentence[{l.doc_id, l.sent_idx}] = &l.tags;
  const auto &docs = TrainDocs();
  std::vector<TaggedSentence> data;
  for (const auto &r : CorpusSentences(docs)) {
    auto it = by_sentence.find({docs[r.doc].doc_id, r.sent_idx});
    if (it == by_sentence.end()) continue;
    data.push_back({Embeddings().TokenEmbeddings(r.tokens), *it->second});
  }
  TrainTapKey(model, data, config_.tapkey_train);
  for (const auto &c : classes) {
    if (IsUnseen(config_, c.event_type)) model.AddClass(c, /*unseen=*/true);
  }
  model.RecomputeProjection();
  std::ostringstream os;
  model.Save(os);
  WriteFileAtomic(Path("tapkey.json"), os.str());
}

void Pipeline::PredictTrigger() {
  if (Done("triggers.jsonl")) return;
  TapKeyModel model = TapKeyModel::LoadFile(Path("tapkey.json"));
  std::vector<TriggerPrediction> preds;
  for (const auto &doc : TestDocs()) {
    for (auto &p : PredictTriggers(model, Embeddings(), doc)) preds.push_back(std::move(p));
  }
  std::ostringstream os;
  WriteTriggerPredictions(preds, os);
  WriteFileAtomic(Path("triggers.jsonl"), os.str());
}

void Pipeline::TrainArgs() {
  if (Done("args_model/config.json")) return;
  std::unique_ptr<TinySeq2Seq> model;
  if (config_.backend == "tiny-seq2seq") {
    model = std::make_unique<TinySeq2Seq>(config_.generator);
  } else {
    std::string dir = ResolveCachePath(config_.backend);
    if (dir.empty()) throw NotFoundError("backend '" + config_.backend + "' not found");
    model = TinySeq2Seq::Load(dir);
  }
  const EventOntology &onto = Ontology();
  std::vector<Seq2SeqExample> data;
  for (const auto &doc : TrainDocs()) {
    for (const auto &ev : doc.event_mentions) {
      if (!onto.Contains(ev.event_type)) {
        Warn("training: event type '" + ev.event_type + "' not in the ontology; skipped");
        continue;
      }
      data.push_back(MakeTrainingExample(*model, doc, ev, onto, config_.view,
                                         config_.max_doc_len, config_.max_input_len));
    }
  }
  if (data.empty()) throw Error("no training events");
  TrainConfig tc = config_.arg_train;
  tc.copy_restrict = config_.decode.copy_restrict;
  tc.checkpoint_dir = Path("args_checkpoints");
  Train(*model, data, tc);
  const fs::path tmp = Path("args_model.tmp");
  fs::remove_all(tmp);
  model->Save(tmp.string());
  fs::remove_all(Path("args_model"));
  fs::rename(tmp, Path("args_model"));
}

void Pipeline::ExtractArgs() {
  if (Done("arguments.jsonl")) return;
  auto model = TinySeq2Seq::Load(Path("args_model"));
  const EventOntology &onto = Ontology();
  const auto &docs = TestDocs();

  std::map<std::string, std::vector<EventMention>> triggers;
  if (config_.gold_triggers) {
    for (const auto &d : docs) {
      for (const auto &e : d.event_mentions) {
        EventMention t = e;
        t.arguments.clear();
        triggers[d.doc_id].push_back(std::move(t));
      }
    }
  } else {
    std::ifstream in(Path("triggers.jsonl"));
    if (!in) throw Error("cannot open '" + Path("triggers.jsonl") + "'");
    int n = 0;
    for (const auto &p : ReadTriggerPredictions(in, Path("triggers.jsonl"))) {
      triggers[p.doc_id].push_back({"T" + std::to_string(n++), p.event_type, p.span, {}});
    }
  }
  ExtractOptions opts;
  opts.decode = config_.decode;
  opts.max_doc_len = config_.max_doc_len;
  opts.max_input_len = config_.max_input_len;
  std::vector<ArgPrediction> out;
  for (const auto &doc : docs) {
    auto it = triggers.find(doc.doc_id);
    if (it == triggers.end()) continue;
    for (const auto &t : it->second) {
      if (!onto.Contains(t.event_type)) {
        Warn("extraction: event type '" + t.event_type + "' not in the ontology; skipped");
        continue;
      }
      ExtractionResult r = ExtractArguments(*model, doc, t, onto, opts);
      for (const auto &a : r.arguments) {
        out.push_back({doc.doc_id, t.event_id, t.event_type, t.trigger_span, a.role, a.span,
                       a.text});
      }
    }
  }
  std::ostringstream os;
  WriteArgPredictions(out, os);
  WriteFileAtomic(Path("arguments.jsonl"), os.str());
}

std::vector<ScoreReport> Pipeline::Score() {
  const auto &gold = TestDocs();
  std::vector<ScoreReport> reports;
  if (!config_.gold_triggers) {
    std::ifstream in(Path("triggers.jsonl"));
    if (!in) throw Error("cannot open '" + Path("triggers.jsonl") + "'");
    auto [ti, tc] = ScoreTriggers(ReadTriggerPredictions(in, Path("triggers.jsonl")), gold);
    reports.push_back(ti);
    reports.push_back(tc);
  }
  std::ifstream in(Path("arguments.jsonl"));
  if (!in) throw Error("cannot open '" + Path("arguments.jsonl") + "'");
  const auto args = ReadArgPredictions(in, Path("arguments.jsonl"));
  for (ArgMatch m : {ArgMatch::kHead, ArgMatch::kCoref, ArgMatch::kInformativeHead}) {
    reports.push_back(ScoreArgs(args, gold, m, false));
    reports.push_back(ScoreArgs(args, gold, m, true));
  }
  WriteFileAtomic(Path("scores.json"), ReportsToJson(reports) + "\n");
  WriteFileAtomic(Path("scores.txt"), FormatReports(reports));
  return reports;
}

std::vector<ScoreReport> Pipeline::Run() {
  fs::create_directories(config_.output_dir);
  WriteConfig();
  auto stage = [&](const char *name, auto &&fn) {
    try {
      fn();
    } catch (const std::exception &e) {
      throw Error(std::string("stage '") + name + "' failed: " + e.what());
    }
  };
  if (!config_.gold_triggers) {
    stage("build-class-vectors", [&] { BuildClassVectors(); });
    stage("pseudo-label", [&] { PseudoLabel(); });
    stage("train-trigger", [&] { TrainTrigger(); });
    stage("predict-trigger", [&] { PredictTrigger(); });
  }
  stage("train-args", [&] { TrainArgs(); });
  stage("extract-args", [&] { ExtractArgs(); });
  std::vector<ScoreReport> reports;
  stage("score", [&] { reports = Score(); });
  return reports;
}

}  // namespace evx
