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

#include "eventx/toy.h"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <variant>

namespace evx {

namespace {

constexpr const char *kOntology = R"({"entity_type": "PER", "phrase": "person"}
{"entity_type": "ORG", "phrase": "organization"}
{"entity_type": "LOC", "phrase": "place"}
{"entity_type": "WEA", "phrase": "weapon"}
{"entity_type": "MONEY", "phrase": "amount of money"}
{"event_type": "Conflict.Attack", "template": "<arg1> attacked <arg2> using <arg3> at <arg4> place", "roles": [{"name": "Attacker", "slot": 1, "entity_types": ["PER", "ORG"]}, {"name": "Target", "slot": 2, "entity_types": ["PER"]}, {"name": "Instrument", "slot": 3, "entity_types": ["WEA"]}, {"name": "Place", "slot": 4, "entity_types": ["LOC"]}], "keywords": ["attack", "bomb"]}
{"event_type": "Transaction.Pay", "template": "<arg1> paid <arg2> to <arg3>", "roles": [{"name": "Giver", "slot": 1, "entity_types": ["PER", "ORG"]}, {"name": "Money", "slot": 2, "entity_types": ["MONEY"]}, {"name": "Recipient", "slot": 3, "entity_types": ["PER", "ORG"]}], "keywords": ["pay", "fund"]}
{"event_type": "Contact.Meet", "template": "<arg1> met with <arg2> at <arg3> place", "roles": [{"name": "Participant", "slot": 1, "entity_types": ["PER"]}, {"name": "Partner", "slot": 2, "entity_types": ["PER", "ORG"]}, {"name": "Place", "slot": 3, "entity_types": ["LOC"]}], "keywords": ["meet", "visit"]}
{"event_type": "Movement.Transport", "template": "<arg1> transported <arg2> to <arg3> place", "roles": [{"name": "Transporter", "slot": 1, "entity_types": ["PER", "ORG"]}, {"name": "Passenger", "slot": 2, "entity_types": ["PER"]}, {"name": "Destination", "slot": 3, "entity_types": ["LOC"]}], "keywords": ["transport", "travel"]}
)";

const std::vector<std::string> kPeople = {"Smith", "Jones",  "Garcia", "Chen",   "Patel",
                                          "Kim",   "Novak",  "Silva",  "Okafor", "Ivanov",
                                          "Haddad", "Larsen"};
const std::vector<std::string> kOrgs = {"Acme", "Globex", "Initech", "Hooli"};
const std::vector<std::string> kPlaces = {"Paris", "Lagos", "Lima", "Oslo", "Cairo", "Delhi"};
const std::vector<std::string> kWeapons = {"knife", "rifle", "grenade", "pistol"};
const std::vector<std::string> kMoney = {"$100", "$250", "$900", "$4000"};
const std::vector<std::vector<std::string>> kTriggers = {
    {"attacked", "bombed"}, {"paid", "funded"}, {"met", "visited"}, {"transported", "traveled"}};
const std::vector<std::vector<std::string>> kFiller = {
    {"The", "weather", "was", "calm", "that", "day", "."},
    {"Officials", "said", "nothing", "more", "."},
    {"Reporters", "gathered", "outside", "the", "building", "."},
    {"The", "statement", "came", "late", "in", "the", "evening", "."}};

class DocBuilder {
 public:
  DocBuilder(std::string doc_id, std::mt19937 &rng) : rng_(rng) { doc_.doc_id = std::move(doc_id); }

  void Sentence(const std::vector<std::string> &tokens) {
    const int start = static_cast<int>(doc_.tokens.size());
    doc_.tokens.insert(doc_.tokens.end(), tokens.begin(), tokens.end());
    doc_.sentence_boundaries.push_back({start, static_cast<int>(doc_.tokens.size())});
  }

  // Adds a mention of `entity` covering [start, start+len) of the document.
  std::string Mention(const std::string &entity, const std::string &type, int start, int len,
                      MentionLevel level) {
    EntityMention m;
    m.mention_id = doc_.doc_id + "-m" + std::to_string(doc_.entity_mentions.size());
    m.span = {start, start + len};
    m.head_span = {start + len - 1, start + len};
    m.level = level;
    m.entity_type = type;
    m.text = doc_.SpanText(m.span);
    doc_.entity_mentions.push_back(m);
    by_entity_[entity].push_back(m.mention_id);
    return m.mention_id;
  }

  bool Seen(const std::string &entity) const { return by_entity_.count(entity) > 0; }

  Document Finish() {
    int c = 0;
    for (const auto &[entity, ids] : by_entity_) {
      if (ids.size() < 2) continue;
      doc_.coref_clusters.push_back({doc_.doc_id + "-c" + std::to_string(c++), ids, ""});
    }
    ResolveInformativeMentions(&doc_);
    doc_.Validate();
    return doc_;
  }

  Document &doc() { return doc_; }
  std::mt19937 &rng() { return rng_; }

 private:
  Document doc_;
  std::mt19937 &rng_;
  std::map<std::string, std::vector<std::string>> by_entity_;
};

template <typename T>
const T &Pick(const std::vector<T> &v, std::mt19937 &rng) {
  return v[std::uniform_int_distribution<size_t>(0, v.size() - 1)(rng)];
}

bool Coin(double p, std::mt19937 &rng) { return std::bernoulli_distribution(p)(rng); }

// A slot filler: the tokens placed in the sentence plus how to register it.
struct Filler {
  std::vector<std::string> tokens;
  std::string entity, type;
  MentionLevel level = MentionLevel::kName;
  std::string role;
};

Filler Person(DocBuilder &b, const std::string &role, bool subject) {
  const std::string &name = Pick(kPeople, b.rng());
  if (b.Seen(name) && Coin(0.5, b.rng())) {
    if (subject) return {{"He"}, name, "PER", MentionLevel::kPronoun, role};
    return {{"the", "official"}, name, "PER", MentionLevel::kNominal, role};
  }
  return {{name}, name, "PER", MentionLevel::kName, role};
}

Filler Agent(DocBuilder &b, const std::string &role, bool subject) {
  if (Coin(0.25, b.rng())) {
    const std::string &org = Pick(kOrgs, b.rng());
    return {{org}, org, "ORG", MentionLevel::kName, role};
  }
  return Person(b, role, subject);
}

Filler Simple(const std::vector<std::string> &pool, const std::string &type,
              const std::string &role, std::mt19937 &rng) {
  const std::string &w = Pick(pool, rng);
  return {{w}, type + ":" + w, type, MentionLevel::kName, role};
}

// Lays out a sentence from literal tokens and fillers and records the event.
void EmitEvent(DocBuilder &b, const std::string &type, int event_no,
               const std::vector<std::variant<std::string, Filler>> &parts, int trigger_part) {
  std::vector<std::string> tokens;
  std::vector<std::pair<int, const Filler *>> placed;
  int trigger_at = -1;
  for (size_t i = 0; i < parts.size(); ++i) {
    if (auto *s = std::get_if<std::string>(&parts[i])) {
      if (static_cast<int>(i) == trigger_part) trigger_at = static_cast<int>(tokens.size());
      tokens.push_back(*s);
    } else {
      const Filler &f = std::get<Filler>(parts[i]);
      placed.push_back({static_cast<int>(tokens.size()), &f});
      tokens.insert(tokens.end(), f.tokens.begin(), f.tokens.end());
    }
  }
  const int base = static_cast<int>(b.doc().tokens.size());
  b.Sentence(tokens);
  EventMention ev;
  ev.event_id = b.doc().doc_id + "-e" + std::to_string(event_no);
  ev.event_type = type;
  ev.trigger_span = {base + trigger_at, base + trigger_at + 1};
  for (const auto &[offset, f] : placed) {
    std::string id = b.Mention(f->entity, f->type, base + offset,
                               static_cast<int>(f->tokens.size()), f->level);
    ev.arguments.push_back({f->role, id});
  }
  b.doc().event_mentions.push_back(std::move(ev));
}

void AddEvent(DocBuilder &b, int type, int event_no) {
  auto &rng = b.rng();
  const std::string trig = Pick(kTriggers[type], rng);
  using Part = std::variant<std::string, Filler>;
  switch (type) {
    case 0: {
      std::vector<Part> p{Agent(b, "Attacker", true), trig, Person(b, "Target", false)};
      if (Coin(0.2, rng)) {
        p.push_back(std::string("and"));
        p.push_back(Filler{{Pick(kPeople, rng)}, "", "PER", MentionLevel::kName, "Target"});
        std::get<Filler>(p.back()).entity = std::get<Filler>(p.back()).tokens[0];
      }
      if (Coin(0.7, rng)) {
        p.push_back(std::string("with"));
        p.push_back(std::string("a"));
        p.push_back(Simple(kWeapons, "WEA", "Instrument", rng));
      }
      p.push_back(std::string("in"));
      p.push_back(Simple(kPlaces, "LOC", "Place", rng));
      p.push_back(std::string("."));
      EmitEvent(b, "Conflict.Attack", event_no, p, 1);
      break;
    }
    case 1: {
      std::vector<Part> p{Agent(b, "Giver", true), trig, Simple(kMoney, "MONEY", "Money", rng),
                          std::string("to"), Agent(b, "Recipient", false), std::string(".")};
      EmitEvent(b, "Transaction.Pay", event_no, p, 1);
      break;
    }
    case 2: {
      std::vector<Part> p{Person(b, "Participant", true), trig, Person(b, "Partner", false)};
      if (Coin(0.6, rng)) {
        p.push_back(std::string("in"));
        p.push_back(Simple(kPlaces, "LOC", "Place", rng));
      }
      p.push_back(std::string("."));
      EmitEvent(b, "Contact.Meet", event_no, p, 1);
      break;
    }
    default: {
      std::vector<Part> p{Agent(b, "Transporter", true), trig, Person(b, "Passenger", false),
                          std::string("to"), Simple(kPlaces, "LOC", "Destination", rng),
                          std::string(".")};
      EmitEvent(b, "Movement.Transport", event_no, p, 1);
      break;
    }
  }
}

Document MakeDoc(const std::string &id, int num_types, std::mt19937 &rng) {
  DocBuilder b(id, rng);
  const int events = std::uniform_int_distribution<int>(1, 3)(rng);
  for (int e = 0; e < events; ++e) {
    if (Coin(0.5, rng)) b.Sentence(Pick(kFiller, rng));
    if (Coin(0.4, rng)) {
      // Introduce a person so later pronouns and nominals have an antecedent.
      const std::string &name = Pick(kPeople, rng);
      const int start = static_cast<int>(b.doc().tokens.size());
      b.Sentence({name, "arrived", "early", "."});
      b.Mention(name, "PER", start, 1, MentionLevel::kName);
    }
    AddEvent(b, std::uniform_int_distribution<int>(0, num_types - 1)(rng), e);
  }
  return b.Finish();
}

}  // namespace

ToyData MakeToyData(const ToyOptions &options) {
  if (options.num_types < 1 || options.num_types > 4) {
    throw ContractViolation("MakeToyData: num_types must be in [1, 4]");
  }
  ToyData data;
  data.ontology_jsonl = kOntology;
  std::istringstream in(data.ontology_jsonl);
  data.ontology = ParseOntology(in, "toy-ontology");

  std::mt19937 rng(options.seed);
  const int n_train = options.num_docs * 6 / 10;
  const int n_dev = options.num_docs * 2 / 10;
  for (int i = 0; i < options.num_docs; ++i) {
    Document d = MakeDoc("toy" + std::to_string(i), options.num_types, rng);
    (i < n_train ? data.train : i < n_train + n_dev ? data.dev : data.test).push_back(std::move(d));
  }

  // Word vectors: trigger words cluster around one direction per type.
  const int d = options.vector_dim;
  std::normal_distribution<double> normal(0.0, 1.0);
  auto random_unit = [&] {
    std::vector<double> v(d);
    double norm = 0;
    for (auto &x : v) {
      x = normal(rng);
      norm += x * x;
    }
    for (auto &x : v) x /= std::sqrt(norm);
    return v;
  };
  std::map<std::string, int> trigger_type;
  for (size_t t = 0; t < kTriggers.size(); ++t) {
    for (const auto &w : kTriggers[t]) trigger_type[w] = static_cast<int>(t);
  }
  std::vector<std::vector<double>> prototypes;
  for (size_t t = 0; t < kTriggers.size(); ++t) prototypes.push_back(random_unit());
  std::set<std::string> vocab;
  for (const auto *split : {&data.train, &data.dev, &data.test}) {
    for (const auto &doc : *split) {
      for (const auto &tok : doc.tokens) vocab.insert(ToLower(tok));
    }
  }
  for (const auto &group : kTriggers) vocab.insert(group.begin(), group.end());
  std::ostringstream os;
  os << std::setprecision(6);
  for (const auto &w : vocab) {
    std::vector<double> v = random_unit();
    if (auto it = trigger_type.find(w); it != trigger_type.end()) {
      double norm = 0;
      for (int i = 0; i < d; ++i) {
        v[i] = prototypes[it->second][i] + 0.35 * v[i];
        norm += v[i] * v[i];
      }
      for (auto &x : v) x /= std::sqrt(norm);
    }
    os << w;
    for (double x : v) os << ' ' << x;
    os << '\n';
  }
  data.vectors = os.str();
  return data;
}

void WriteToyData(const ToyData &data, const std::string &dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  std::ofstream(fs::path(dir) / "ontology.jsonl") << data.ontology_jsonl;
  SaveCorpus(data.train, (fs::path(dir) / "train.jsonl").string());
  SaveCorpus(data.dev, (fs::path(dir) / "dev.jsonl").string());
  SaveCorpus(data.test, (fs::path(dir) / "test.jsonl").string());
  std::ofstream(fs::path(dir) / "vectors.txt") << data.vectors;
}

}  // namespace evx
