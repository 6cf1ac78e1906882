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

#include "eventx/metrics.h"

#include <algorithm>
#include <iomanip>
#include <map>
#include <numeric>
#include <sstream>
#include <tuple>

#include "json.hpp"

namespace evx {

ScoreReport ScoreReport::FromCounts(std::string label, int num_pred, int num_gold,
                                    int num_correct) {
  ScoreReport r;
  r.label = std::move(label);
  r.num_pred = num_pred;
  r.num_gold = num_gold;
  r.num_correct = num_correct;
  r.precision = num_pred > 0 ? static_cast<double>(num_correct) / num_pred : 0.0;
  r.recall = num_gold > 0 ? static_cast<double>(num_correct) / num_gold : 0.0;
  r.f1 = r.precision + r.recall > 0 ? 2 * r.precision * r.recall / (r.precision + r.recall) : 0.0;
  return r;
}

namespace {

std::map<std::string, const Document *> IndexDocs(const std::vector<Document> &gold) {
  std::map<std::string, const Document *> index;
  for (const auto &d : gold) index.emplace(d.doc_id, &d);
  return index;
}

const Document &DocFor(const std::map<std::string, const Document *> &index,
                       const std::string &doc_id) {
  auto it = index.find(doc_id);
  if (it == index.end()) {
    throw ValidationError("prediction for unknown document '" + doc_id + "'");
  }
  return *it->second;
}

const EntityMention &InformativeOf(const Document &doc, const EntityMention &m) {
  const CorefCluster *c = doc.ClusterOf(m.mention_id);
  if (!c) return m;
  if (!c->informative_mention_id.empty()) {
    if (const EntityMention *inf = doc.FindMention(c->informative_mention_id)) return *inf;
  }
  return InformativeMention(*c, doc.entity_mentions);
}

bool Credits(const Document &doc, const ArgPrediction &p, const EntityMention &g, ArgMatch match) {
  switch (match) {
    case ArgMatch::kHead:
      return PredictedHead(doc, p.span) == g.head_span;
    case ArgMatch::kSpan:
      return p.span == g.span;
    case ArgMatch::kCoref:
      for (const EntityMention *m : doc.CorefMentions(g.mention_id)) {
        if (m->span == p.span) return true;
      }
      return false;
    case ArgMatch::kInformative:
      return InformativeOf(doc, g).span == p.span;
    case ArgMatch::kInformativeHead:
      return InformativeOf(doc, g).head_span == PredictedHead(doc, p.span);
  }
  return false;
}

}  // namespace

std::string_view ArgMatchName(ArgMatch match) {
  switch (match) {
    case ArgMatch::kHead: return "head";
    case ArgMatch::kCoref: return "coref";
    case ArgMatch::kInformative: return "informative";
    case ArgMatch::kInformativeHead: return "informative-head";
    case ArgMatch::kSpan: return "span";
  }
  return "?";
}

TokenSpan PredictedHead(const Document &doc, const TokenSpan &span) {
  for (const auto &m : doc.entity_mentions) {
    if (m.span == span) return m.head_span;
  }
  if (span.empty()) return span;
  return {span.end - 1, span.end};
}

std::pair<ScoreReport, ScoreReport> ScoreTriggers(const std::vector<TriggerPrediction> &pred,
                                                  const std::vector<Document> &gold) {
  auto index = IndexDocs(gold);
  int num_gold = 0;
  for (const auto &d : gold) num_gold += static_cast<int>(d.event_mentions.size());

  std::vector<size_t> order(pred.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    return std::tie(pred[a].doc_id, pred[a].span, pred[a].event_type) <
           std::tie(pred[b].doc_id, pred[b].span, pred[b].event_type);
  });

  int ti = 0, tc = 0;
  std::map<std::string, std::vector<bool>> used_ti, used_tc;
  for (size_t idx : order) {
    const TriggerPrediction &p = pred[idx];
    const Document &doc = DocFor(index, p.doc_id);
    auto &uti = used_ti[p.doc_id];
    auto &utc = used_tc[p.doc_id];
    uti.resize(doc.event_mentions.size());
    utc.resize(doc.event_mentions.size());
    // Prefer a same-type gold for identification so TI never trails TC.
    int hit = -1, typed = -1;
    for (size_t g = 0; g < doc.event_mentions.size(); ++g) {
      const auto &e = doc.event_mentions[g];
      if (e.trigger_span != p.span) continue;
      if (!uti[g] && (hit < 0 || (e.event_type == p.event_type &&
                                  doc.event_mentions[hit].event_type != p.event_type))) {
        hit = static_cast<int>(g);
      }
      if (!utc[g] && typed < 0 && e.event_type == p.event_type) typed = static_cast<int>(g);
    }
    if (hit >= 0) {
      uti[hit] = true;
      ++ti;
    }
    if (typed >= 0) {
      utc[typed] = true;
      ++tc;
    }
  }
  const int n = static_cast<int>(pred.size());
  return {ScoreReport::FromCounts("TI", n, num_gold, ti),
          ScoreReport::FromCounts("TC", n, num_gold, tc)};
}

ScoreReport ScoreArgs(const std::vector<ArgPrediction> &pred, const std::vector<Document> &gold,
                      ArgMatch match, bool classification, std::vector<bool> *credited) {
  auto index = IndexDocs(gold);
  int num_gold = 0;
  for (const auto &d : gold) {
    for (const auto &e : d.event_mentions) num_gold += static_cast<int>(e.arguments.size());
  }
  std::vector<size_t> order(pred.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    const auto &x = pred[a], &y = pred[b];
    return std::tie(x.doc_id, x.trigger_span, x.event_type, x.span, x.role, x.text) <
           std::tie(y.doc_id, y.trigger_span, y.event_type, y.span, y.role, y.text);
  });

  // used[doc_id][event index][argument index]
  std::map<std::string, std::vector<std::vector<bool>>> used;
  std::vector<bool> flags(pred.size(), false);
  int correct = 0;
  for (size_t idx : order) {
    const ArgPrediction &p = pred[idx];
    const Document &doc = DocFor(index, p.doc_id);
    auto &u = used[p.doc_id];
    if (u.empty()) {
      u.resize(doc.event_mentions.size());
      for (size_t e = 0; e < u.size(); ++e) u[e].resize(doc.event_mentions[e].arguments.size());
    }
    bool found = false;
    for (size_t e = 0; e < doc.event_mentions.size() && !found; ++e) {
      const EventMention &ev = doc.event_mentions[e];
      if (ev.trigger_span != p.trigger_span || ev.event_type != p.event_type) continue;
      for (size_t a = 0; a < ev.arguments.size(); ++a) {
        if (u[e][a]) continue;
        const ArgumentRef &ref = ev.arguments[a];
        if (classification && ref.role != p.role) continue;
        const EntityMention *m = doc.FindMention(ref.mention_id);
        if (!m || !Credits(doc, p, *m, match)) continue;
        u[e][a] = true;
        found = true;
        break;
      }
    }
    if (found) {
      flags[idx] = true;
      ++correct;
    }
  }
  if (credited) *credited = std::move(flags);
  std::string label = std::string(classification ? "Arg-C " : "Arg-I ") +
                      std::string(ArgMatchName(match));
  return ScoreReport::FromCounts(label, static_cast<int>(pred.size()), num_gold, correct);
}

std::pair<ScoreReport, ScoreReport> ScoreRamsSpan(const std::vector<ArgPrediction> &pred,
                                                  const std::vector<Document> &gold) {
  ScoreReport span = ScoreArgs(pred, gold, ArgMatch::kSpan, true);
  ScoreReport head = ScoreArgs(pred, gold, ArgMatch::kHead, true);
  span.label = "Span";
  head.label = "Head";
  return {span, head};
}

namespace {

nlohmann::json SpanJson(const TokenSpan &s) { return {s.start, s.end}; }

TokenSpan SpanFrom(const nlohmann::json &j) {
  if (!j.is_array() || j.size() != 2) throw ParseError("span must be [start, end]");
  return {j[0].get<int>(), j[1].get<int>()};
}

template <typename T, typename F>
std::vector<T> ReadLines(std::istream &in, const std::string &source_name, F parse) {
  std::vector<T> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(parse(nlohmann::json::parse(line)));
    } catch (const nlohmann::json::exception &e) {
      throw ParseError(source_name + ":" + std::to_string(lineno) + ": " + e.what());
    } catch (const ParseError &e) {
      throw ParseError(source_name + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace

void WriteArgPredictions(const std::vector<ArgPrediction> &preds, std::ostream &out) {
  for (const auto &p : preds) {
    nlohmann::json j{{"doc_id", p.doc_id},         {"event_id", p.event_id},
                     {"event_type", p.event_type}, {"trigger", SpanJson(p.trigger_span)},
                     {"role", p.role},             {"span", SpanJson(p.span)},
                     {"text", p.text}};
    out << j.dump() << "\n";
  }
}

std::vector<ArgPrediction> ReadArgPredictions(std::istream &in, const std::string &source_name) {
  return ReadLines<ArgPrediction>(in, source_name, [](const nlohmann::json &j) {
    ArgPrediction p;
    p.doc_id = j.at("doc_id").get<std::string>();
    p.event_id = j.value("event_id", "");
    p.event_type = j.at("event_type").get<std::string>();
    p.trigger_span = SpanFrom(j.at("trigger"));
    p.role = j.at("role").get<std::string>();
    p.span = SpanFrom(j.at("span"));
    p.text = j.value("text", "");
    return p;
  });
}

void WriteTriggerPredictions(const std::vector<TriggerPrediction> &preds, std::ostream &out) {
  for (const auto &p : preds) {
    nlohmann::json j{{"doc_id", p.doc_id},         {"sent_idx", p.sent_idx},
                     {"span", SpanJson(p.span)},   {"event_type", p.event_type},
                     {"score", p.score}};
    out << j.dump() << "\n";
  }
}

std::vector<TriggerPrediction> ReadTriggerPredictions(std::istream &in,
                                                      const std::string &source_name) {
  return ReadLines<TriggerPrediction>(in, source_name, [](const nlohmann::json &j) {
    TriggerPrediction p;
    p.doc_id = j.at("doc_id").get<std::string>();
    p.sent_idx = j.value("sent_idx", 0);
    p.span = SpanFrom(j.at("span"));
    p.event_type = j.at("event_type").get<std::string>();
    p.score = j.value("score", 0.0);
    return p;
  });
}

std::string FormatReports(const std::vector<ScoreReport> &reports) {
  std::ostringstream os;
  os << std::left << std::setw(24) << "setting" << std::right << std::setw(8) << "P"
     << std::setw(8) << "R" << std::setw(8) << "F1" << std::setw(8) << "pred" << std::setw(8)
     << "gold" << std::setw(8) << "correct" << "\n";
  os << std::fixed << std::setprecision(2);
  for (const auto &r : reports) {
    os << std::left << std::setw(24) << r.label << std::right << std::setw(8)
       << 100 * r.precision << std::setw(8) << 100 * r.recall << std::setw(8) << 100 * r.f1
       << std::setw(8) << r.num_pred << std::setw(8) << r.num_gold << std::setw(8)
       << r.num_correct << "\n";
  }
  return os.str();
}

std::string ReportsToJson(const std::vector<ScoreReport> &reports) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto &r : reports) {
    arr.push_back({{"setting", r.label},
                   {"precision", r.precision},
                   {"recall", r.recall},
                   {"f1", r.f1},
                   {"num_pred", r.num_pred},
                   {"num_gold", r.num_gold},
                   {"num_correct", r.num_correct}});
  }
  return arr.dump(2);
}

}  // namespace evx
