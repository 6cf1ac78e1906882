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

#include "eventx/corpus.h"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>
#include <tuple>

#include "eventx/ontology.h"
#include "json.hpp"

namespace evx {

using json = nlohmann::json;

std::string_view MentionLevelName(MentionLevel level) {
  switch (level) {
    case MentionLevel::kName: return "NAME";
    case MentionLevel::kNominal: return "NOMINAL";
    case MentionLevel::kPronoun: return "PRONOUN";
  }
  return "NOMINAL";
}

MentionLevel ParseMentionLevel(std::string_view s) {
  std::string u = ToLower(s);
  if (u == "name" || u == "nam") return MentionLevel::kName;
  if (u == "pronoun" || u == "pro") return MentionLevel::kPronoun;
  return MentionLevel::kNominal;
}

std::string_view ArgumentViewName(ArgumentView view) {
  return view == ArgumentView::kNearest ? "nearest" : "informative";
}

ArgumentView ParseArgumentView(std::string_view s) {
  if (s == "nearest") return ArgumentView::kNearest;
  if (s == "informative") return ArgumentView::kInformative;
  throw Error("unknown argument view '" + std::string(s) + "'");
}

const EntityMention *Document::FindMention(std::string_view mention_id) const {
  for (const auto &m : entity_mentions) {
    if (m.mention_id == mention_id) return &m;
  }
  return nullptr;
}

const EventMention *Document::FindEvent(std::string_view event_id) const {
  for (const auto &e : event_mentions) {
    if (e.event_id == event_id) return &e;
  }
  return nullptr;
}

const CorefCluster *Document::ClusterOf(std::string_view mention_id) const {
  for (const auto &c : coref_clusters) {
    if (std::find(c.mention_ids.begin(), c.mention_ids.end(), mention_id) !=
        c.mention_ids.end()) {
      return &c;
    }
  }
  return nullptr;
}

std::vector<const EntityMention *> Document::CorefMentions(
    std::string_view mention_id) const {
  std::vector<const EntityMention *> out;
  if (const CorefCluster *c = ClusterOf(mention_id)) {
    for (const auto &id : c->mention_ids) {
      if (const EntityMention *m = FindMention(id)) out.push_back(m);
    }
  } else if (const EntityMention *m = FindMention(mention_id)) {
    out.push_back(m);
  }
  return out;
}

int Document::SentenceOf(int token) const {
  for (size_t i = 0; i < sentence_boundaries.size(); ++i) {
    const auto &s = sentence_boundaries[i];
    if (s.start <= token && token < s.end) return static_cast<int>(i);
  }
  return -1;
}

std::string Document::SpanText(const TokenSpan &span) const {
  std::string out;
  for (int i = std::max(span.start, 0);
       i < std::min<int>(span.end, static_cast<int>(tokens.size())); ++i) {
    if (i > span.start) out += ' ';
    out += tokens[i];
  }
  return out;
}

void Document::Validate() const {
  auto fail = [&](const std::string &why) {
    throw ValidationError("document '" + doc_id + "': " + why);
  };
  const int n = static_cast<int>(tokens.size());
  int cursor = 0;
  for (const auto &s : sentence_boundaries) {
    if (s.start != cursor || s.end < s.start) fail("sentences do not partition tokens");
    cursor = s.end;
  }
  if (cursor != n) fail("sentences do not cover all tokens");

  auto in_range = [&](const TokenSpan &s) {
    return 0 <= s.start && s.start < s.end && s.end <= n;
  };
  std::set<std::string> ids;
  for (const auto &m : entity_mentions) {
    if (!in_range(m.span)) fail("mention '" + m.mention_id + "' offset out of range");
    if (!m.span.contains(m.head_span) || m.head_span.empty()) {
      fail("mention '" + m.mention_id + "' head outside span");
    }
    if (!ids.insert(m.mention_id).second) fail("duplicate mention id '" + m.mention_id + "'");
  }
  for (const auto &e : event_mentions) {
    if (!in_range(e.trigger_span)) fail("event '" + e.event_id + "' trigger out of range");
    if (SentenceOf(e.trigger_span.start) != SentenceOf(e.trigger_span.end - 1)) {
      fail("event '" + e.event_id + "' trigger crosses a sentence boundary");
    }
    for (const auto &a : e.arguments) {
      if (!ids.count(a.mention_id)) {
        fail("event '" + e.event_id + "' argument refers to unknown mention '" +
             a.mention_id + "'");
      }
    }
  }
  std::set<std::string> clustered;
  for (const auto &c : coref_clusters) {
    if (c.mention_ids.empty()) fail("cluster '" + c.cluster_id + "' is empty");
    for (const auto &id : c.mention_ids) {
      if (!ids.count(id)) fail("cluster '" + c.cluster_id + "' has unknown mention '" + id + "'");
      if (!clustered.insert(id).second) fail("mention '" + id + "' in two clusters");
    }
    if (std::find(c.mention_ids.begin(), c.mention_ids.end(),
                  c.informative_mention_id) == c.mention_ids.end()) {
      fail("cluster '" + c.cluster_id + "' informative mention not a member");
    }
  }
}

const EntityMention &InformativeMention(const CorefCluster &cluster,
                                        const std::vector<EntityMention> &mentions) {
  if (cluster.mention_ids.empty()) {
    throw ContractViolation("InformativeMention: empty cluster '" + cluster.cluster_id + "'");
  }
  const EntityMention *best = nullptr;
  auto key = [](const EntityMention &m) {
    // Smaller is better.
    return std::make_tuple(static_cast<int>(m.level), -m.span.length(), m.span.start,
                           m.span.end);
  };
  for (const auto &id : cluster.mention_ids) {
    auto it = std::find_if(mentions.begin(), mentions.end(),
                           [&](const EntityMention &m) { return m.mention_id == id; });
    if (it == mentions.end()) {
      throw ContractViolation("InformativeMention: unresolvable mention '" + id + "'");
    }
    if (!best || key(*it) < key(*best)) best = &*it;
  }
  return *best;
}

void ResolveInformativeMentions(Document *doc) {
  for (auto &c : doc->coref_clusters) {
    c.informative_mention_id = InformativeMention(c, doc->entity_mentions).mention_id;
  }
}

namespace {

const EntityMention *NearestMention(const Document &doc, const TokenSpan &trigger,
                                    std::string_view mention_id) {
  const EntityMention *best = nullptr;
  auto key = [&](const EntityMention *m) {
    return std::make_tuple(TokenGap(trigger, m->span), m->span.start, m->span.end);
  };
  for (const EntityMention *m : doc.CorefMentions(mention_id)) {
    if (!best || key(m) < key(best)) best = m;
  }
  return best;
}

const EntityMention *InformativeFor(const Document &doc, std::string_view mention_id) {
  if (const CorefCluster *c = doc.ClusterOf(mention_id)) {
    return &InformativeMention(*c, doc.entity_mentions);
  }
  return doc.FindMention(mention_id);
}

}  // namespace

EventMention NearestArgumentView(const Document &doc, const EventMention &event) {
  EventMention out = event;
  for (auto &arg : out.arguments) {
    if (const EntityMention *m = NearestMention(doc, event.trigger_span, arg.mention_id)) {
      arg.mention_id = m->mention_id;
    }
  }
  return out;
}

EventMention InformativeArgumentView(const Document &doc, const EventMention &event) {
  EventMention out = event;
  for (auto &arg : out.arguments) {
    if (const EntityMention *m = InformativeFor(doc, arg.mention_id)) {
      arg.mention_id = m->mention_id;
    }
  }
  return out;
}

EventMention ApplyArgumentView(const Document &doc, const EventMention &event,
                               ArgumentView view) {
  return view == ArgumentView::kNearest ? NearestArgumentView(doc, event)
                                        : InformativeArgumentView(doc, event);
}

DistanceStats ComputeDistanceStats(const std::vector<Document> &docs,
                                   ArgumentView view) {
  DistanceStats stats;
  long long total = 0;
  int same_sentence = 0;
  int with_mention_in_sentence = 0;
  int informative_in_sentence = 0;
  for (const auto &doc : docs) {
    for (const auto &event : doc.event_mentions) {
      const int trig_sent = doc.SentenceOf(event.trigger_span.start);
      EventMention viewed = ApplyArgumentView(doc, event, view);
      for (size_t i = 0; i < viewed.arguments.size(); ++i) {
        const EntityMention *m = doc.FindMention(viewed.arguments[i].mention_id);
        if (!m) continue;
        int d = TokenGap(event.trigger_span, m->span);
        ++stats.histogram[d];
        ++stats.num_arguments;
        total += d;
        if (doc.SentenceOf(m->span.start) == trig_sent) ++same_sentence;

        bool any_in_sentence = false;
        for (const EntityMention *c : doc.CorefMentions(event.arguments[i].mention_id)) {
          any_in_sentence |= doc.SentenceOf(c->span.start) == trig_sent;
        }
        if (any_in_sentence) {
          ++with_mention_in_sentence;
          const EntityMention *info = InformativeFor(doc, event.arguments[i].mention_id);
          if (info && doc.SentenceOf(info->span.start) == trig_sent) {
            ++informative_in_sentence;
          }
        }
      }
    }
  }
  if (stats.num_arguments > 0) {
    stats.mean_distance = static_cast<double>(total) / stats.num_arguments;
    stats.same_sentence_fraction =
        static_cast<double>(same_sentence) / stats.num_arguments;
  }
  if (with_mention_in_sentence > 0) {
    stats.informative_given_in_sentence =
        static_cast<double>(informative_in_sentence) / with_mention_in_sentence;
  }
  return stats;
}

namespace {

template <typename Fn>
void ForEachJsonLine(const std::string &path, Fn fn) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path + "'");
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json rec;
    try {
      rec = json::parse(line);
    } catch (const json::exception &e) {
      throw ParseError(path + ":" + std::to_string(lineno) + ": " + e.what());
    }
    try {
      fn(rec);
    } catch (const json::exception &e) {
      throw ParseError(path + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
}

void CheckRoles(const Document &doc, const EventOntology *ontology) {
  if (!ontology) return;
  for (const auto &e : doc.event_mentions) {
    if (!ontology->Contains(e.event_type)) {
      Warn("document '" + doc.doc_id + "': unknown event type '" + e.event_type + "'");
      continue;
    }
    const EventTypeDef &def = ontology->TemplateFor(e.event_type);
    for (const auto &a : e.arguments) {
      if (!def.FindRole(a.role)) {
        Warn("document '" + doc.doc_id + "': role '" + a.role +
             "' not defined for " + e.event_type + "; kept as raw string");
      }
    }
  }
}

// Bounds are checked here so the error names the document, not a later
// consumer.
void CheckSpan(const std::string &doc_id, const TokenSpan &s, size_t n,
               const std::string &what) {
  if (s.start < 0 || s.end > static_cast<int>(n) || s.start >= s.end) {
    throw ValidationError("document '" + doc_id + "': " + what + " offset [" +
                          std::to_string(s.start) + "," + std::to_string(s.end) +
                          ") out of range");
  }
}

}  // namespace

std::vector<Document> LoadWikiEvents(const std::string &docs_path,
                                     const std::string &coref_path,
                                     const EventOntology *ontology) {
  std::vector<Document> docs;
  std::map<std::string, size_t> by_id;
  ForEachJsonLine(docs_path, [&](const json &rec) {
    Document doc;
    doc.doc_id = rec.at("doc_id").get<std::string>();
    doc.tokens = rec.at("tokens").get<std::vector<std::string>>();
    int cursor = 0;
    for (const auto &sent : rec.value("sentences", json::array())) {
      // [[[token, char_start, char_end], ...], sentence_text]
      int len = static_cast<int>(sent.at(0).size());
      doc.sentence_boundaries.push_back({cursor, cursor + len});
      cursor += len;
    }
    if (doc.sentence_boundaries.empty() && !doc.tokens.empty()) {
      doc.sentence_boundaries.push_back({0, static_cast<int>(doc.tokens.size())});
    }
    for (const auto &m : rec.value("entity_mentions", json::array())) {
      EntityMention em;
      em.mention_id = m.at("id").get<std::string>();
      em.span = {m.at("start").get<int>(), m.at("end").get<int>()};
      CheckSpan(doc.doc_id, em.span, doc.tokens.size(), "mention '" + em.mention_id + "'");
      em.head_span = em.span;
      em.level = ParseMentionLevel(m.value("mention_type", std::string("NOMINAL")));
      em.entity_type = m.value("entity_type", std::string());
      em.text = doc.SpanText(em.span);
      doc.entity_mentions.push_back(std::move(em));
    }
    for (const auto &e : rec.value("event_mentions", json::array())) {
      EventMention ev;
      ev.event_id = e.at("id").get<std::string>();
      ev.event_type = e.at("event_type").get<std::string>();
      const auto &t = e.at("trigger");
      ev.trigger_span = {t.at("start").get<int>(), t.at("end").get<int>()};
      CheckSpan(doc.doc_id, ev.trigger_span, doc.tokens.size(),
                "trigger of '" + ev.event_id + "'");
      for (const auto &a : e.value("arguments", json::array())) {
        ev.arguments.push_back(
            {a.at("role").get<std::string>(), a.at("entity_id").get<std::string>()});
      }
      doc.event_mentions.push_back(std::move(ev));
    }
    by_id[doc.doc_id] = docs.size();
    docs.push_back(std::move(doc));
  });

  if (!coref_path.empty()) {
    ForEachJsonLine(coref_path, [&](const json &rec) {
      std::string key = rec.at("doc_key").get<std::string>();
      auto it = by_id.find(key);
      if (it == by_id.end()) {
        Warn("coreference record for unknown document '" + key + "'");
        return;
      }
      Document &doc = docs[it->second];
      int idx = 0;
      for (const auto &cl : rec.at("clusters")) {
        CorefCluster c;
        c.cluster_id = doc.doc_id + "-cluster-" + std::to_string(idx++);
        for (const auto &id : cl) {
          auto mid = id.get<std::string>();
          if (doc.FindMention(mid)) {
            c.mention_ids.push_back(mid);
          } else {
            Warn("document '" + doc.doc_id + "': cluster mention '" + mid + "' not found");
          }
        }
        if (!c.mention_ids.empty()) doc.coref_clusters.push_back(std::move(c));
      }
      ResolveInformativeMentions(&doc);
    });
  }
  for (const auto &doc : docs) {
    doc.Validate();
    CheckRoles(doc, ontology);
  }
  return docs;
}

namespace {

// RAMS roles look like "evt089arg01victim"; keep the trailing name.
std::string StripRamsRolePrefix(const std::string &role) {
  size_t pos = role.find("arg");
  if (role.starts_with("evt") && pos != std::string::npos) {
    size_t i = pos + 3;
    while (i < role.size() && std::isdigit(static_cast<unsigned char>(role[i]))) ++i;
    if (i < role.size()) return role.substr(i);
  }
  return role;
}

}  // namespace

std::vector<Document> LoadRams(const std::string &path, const EventOntology *ontology) {
  std::vector<Document> docs;
  ForEachJsonLine(path, [&](const json &rec) {
    Document doc;
    doc.doc_id = rec.at("doc_key").get<std::string>();
    for (const auto &sent : rec.at("sentences")) {
      int start = static_cast<int>(doc.tokens.size());
      for (const auto &tok : sent) doc.tokens.push_back(tok.get<std::string>());
      doc.sentence_boundaries.push_back({start, static_cast<int>(doc.tokens.size())});
    }
    const auto &triggers = rec.at("evt_triggers");
    if (triggers.empty()) throw Error("RAMS record '" + doc.doc_id + "' has no trigger");
    EventMention ev;
    ev.event_id = doc.doc_id + "-event";
    // RAMS offsets are inclusive.
    ev.trigger_span = {triggers[0].at(0).get<int>(), triggers[0].at(1).get<int>() + 1};
    ev.event_type = triggers[0].at(2).at(0).at(0).get<std::string>();
    CheckSpan(doc.doc_id, ev.trigger_span, doc.tokens.size(), "trigger");

    std::map<TokenSpan, std::string> mention_of;
    auto mention_for = [&](TokenSpan span) -> const std::string & {
      auto it = mention_of.find(span);
      if (it != mention_of.end()) return it->second;
      CheckSpan(doc.doc_id, span, doc.tokens.size(), "argument");
      EntityMention m;
      m.mention_id = doc.doc_id + "-m" + std::to_string(span.start) + "-" +
                     std::to_string(span.end);
      m.span = span;
      m.head_span = {span.end - 1, span.end};
      m.text = doc.SpanText(span);
      doc.entity_mentions.push_back(m);
      return mention_of.emplace(span, m.mention_id).first->second;
    };
    for (const auto &link : rec.value("gold_evt_links", json::array())) {
      TokenSpan arg{link.at(1).at(0).get<int>(), link.at(1).at(1).get<int>() + 1};
      ev.arguments.push_back(
          {StripRamsRolePrefix(link.at(2).get<std::string>()), mention_for(arg)});
    }
    doc.event_mentions.push_back(std::move(ev));
    docs.push_back(std::move(doc));
  });
  for (const auto &doc : docs) {
    doc.Validate();
    CheckRoles(doc, ontology);
  }
  return docs;
}

namespace {

json SpanJson(const TokenSpan &s) { return json::array({s.start, s.end}); }
TokenSpan SpanFrom(const json &j) { return {j.at(0).get<int>(), j.at(1).get<int>()}; }

json DocumentJson(const Document &doc) {
  json sentences = json::array();
  for (const auto &s : doc.sentence_boundaries) sentences.push_back(SpanJson(s));
  json mentions = json::array();
  for (const auto &m : doc.entity_mentions) {
    mentions.push_back({{"id", m.mention_id},
                        {"span", SpanJson(m.span)},
                        {"head", SpanJson(m.head_span)},
                        {"level", MentionLevelName(m.level)},
                        {"entity_type", m.entity_type},
                        {"text", m.text}});
  }
  json events = json::array();
  for (const auto &e : doc.event_mentions) {
    json args = json::array();
    for (const auto &a : e.arguments) {
      args.push_back({{"role", a.role}, {"mention_id", a.mention_id}});
    }
    events.push_back({{"id", e.event_id},
                      {"event_type", e.event_type},
                      {"trigger", SpanJson(e.trigger_span)},
                      {"arguments", args}});
  }
  json clusters = json::array();
  for (const auto &c : doc.coref_clusters) {
    clusters.push_back({{"id", c.cluster_id},
                        {"mentions", c.mention_ids},
                        {"informative", c.informative_mention_id}});
  }
  return {{"doc_id", doc.doc_id},         {"tokens", doc.tokens},
          {"sentences", sentences},       {"entity_mentions", mentions},
          {"event_mentions", events},     {"coref_clusters", clusters}};
}

Document DocumentFrom(const json &rec) {
  Document doc;
  doc.doc_id = rec.at("doc_id").get<std::string>();
  doc.tokens = rec.at("tokens").get<std::vector<std::string>>();
  for (const auto &s : rec.at("sentences")) doc.sentence_boundaries.push_back(SpanFrom(s));
  for (const auto &m : rec.value("entity_mentions", json::array())) {
    EntityMention em;
    em.mention_id = m.at("id").get<std::string>();
    em.span = SpanFrom(m.at("span"));
    CheckSpan(doc.doc_id, em.span, doc.tokens.size(), "mention '" + em.mention_id + "'");
    em.head_span = m.contains("head") ? SpanFrom(m.at("head")) : em.span;
    em.level = ParseMentionLevel(m.value("level", std::string("NOMINAL")));
    em.entity_type = m.value("entity_type", std::string());
    em.text = m.contains("text") ? m.at("text").get<std::string>() : doc.SpanText(em.span);
    doc.entity_mentions.push_back(std::move(em));
  }
  for (const auto &e : rec.value("event_mentions", json::array())) {
    EventMention ev;
    ev.event_id = e.at("id").get<std::string>();
    ev.event_type = e.at("event_type").get<std::string>();
    ev.trigger_span = SpanFrom(e.at("trigger"));
    CheckSpan(doc.doc_id, ev.trigger_span, doc.tokens.size(), "trigger of '" + ev.event_id + "'");
    for (const auto &a : e.value("arguments", json::array())) {
      ev.arguments.push_back(
          {a.at("role").get<std::string>(), a.at("mention_id").get<std::string>()});
    }
    doc.event_mentions.push_back(std::move(ev));
  }
  for (const auto &c : rec.value("coref_clusters", json::array())) {
    CorefCluster cl;
    cl.cluster_id = c.at("id").get<std::string>();
    cl.mention_ids = c.at("mentions").get<std::vector<std::string>>();
    cl.informative_mention_id = c.value("informative", std::string());
    doc.coref_clusters.push_back(std::move(cl));
  }
  for (auto &c : doc.coref_clusters) {
    if (c.informative_mention_id.empty()) {
      c.informative_mention_id = InformativeMention(c, doc.entity_mentions).mention_id;
    }
  }
  return doc;
}

}  // namespace

void WriteCorpus(const std::vector<Document> &docs, std::ostream &out) {
  for (const auto &doc : docs) out << DocumentJson(doc).dump() << "\n";
}

std::vector<Document> ReadCorpus(std::istream &in, const std::string &source_name) {
  std::vector<Document> docs;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      docs.push_back(DocumentFrom(json::parse(line)));
    } catch (const json::exception &e) {
      throw ParseError(source_name + ":" + std::to_string(lineno) + ": " + e.what());
    }
    docs.back().Validate();
  }
  return docs;
}

std::vector<Document> LoadCorpus(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open corpus '" + path + "'");
  return ReadCorpus(in, path);
}

void SaveCorpus(const std::vector<Document> &docs, const std::string &path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write corpus '" + path + "'");
  WriteCorpus(docs, out);
}

}  // namespace evx
