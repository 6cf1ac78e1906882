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

#include "eventx/ontology.h"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "eventx/common.h"
#include "json.hpp"

namespace evx {

using json = nlohmann::json;

namespace {

constexpr std::string_view kPunct = ".,;:!?\"()";

bool IsPunct(char c) { return kPunct.find(c) != std::string_view::npos; }

void SplitPunctuation(std::string_view piece, std::vector<std::string> *out) {
  size_t b = 0, e = piece.size();
  std::vector<std::string> trailing;
  while (b < e && IsPunct(piece[b])) out->emplace_back(1, piece[b++]);
  while (e > b && IsPunct(piece[e - 1])) trailing.emplace_back(1, piece[--e]);
  if (e > b) out->emplace_back(piece.substr(b, e - b));
  out->insert(out->end(), trailing.rbegin(), trailing.rend());
}

// Levenshtein distance, used to suggest names on lookup failure.
size_t EditDistance(std::string_view a, std::string_view b) {
  std::vector<size_t> prev(b.size() + 1), cur(b.size() + 1);
  for (size_t j = 0; j <= b.size(); ++j) prev[j] = j;
  for (size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (size_t j = 1; j <= b.size(); ++j) {
      size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

void Validate(const EventTypeDef &def,
              const std::map<std::string, size_t, std::less<>> &entities) {
  auto fail = [&](const std::string &why) {
    throw ValidationError("event type '" + def.name + "': " + why);
  };
  if (def.name.empty()) throw ValidationError("event type with empty name");

  std::map<int, int> marker_count;
  for (const auto &tok : TokenizeTemplate(def.template_text)) {
    if (auto n = SlotMarkerIndex(tok)) ++marker_count[*n];
  }
  for (const auto &[slot, count] : marker_count) {
    if (count > 1) fail("slot marker <arg" + std::to_string(slot) + "> repeated");
  }
  int expected = 1;
  for (const auto &[slot, count] : marker_count) {
    if (slot != expected) {
      fail("slot markers not numbered contiguously from 1 (missing <arg" +
           std::to_string(expected) + ">)");
    }
    ++expected;
  }
  if (marker_count.size() != def.roles.size()) {
    fail("template has " + std::to_string(marker_count.size()) +
         " slots but " + std::to_string(def.roles.size()) + " roles");
  }

  std::set<std::string> role_names;
  std::set<int> slots;
  for (const auto &role : def.roles) {
    if (role.name.empty()) fail("role with empty name");
    if (!role_names.insert(role.name).second) {
      fail("duplicate role '" + role.name + "'");
    }
    if (!marker_count.count(role.slot_index)) {
      fail("role '" + role.name + "' refers to missing slot " +
           std::to_string(role.slot_index));
    }
    if (!slots.insert(role.slot_index).second) {
      fail("slot " + std::to_string(role.slot_index) + " bound to two roles");
    }
    if (role.allowed_entity_types.empty()) {
      fail("role '" + role.name + "' has no allowed entity types");
    }
    for (const auto &t : role.allowed_entity_types) {
      if (!entities.count(t)) {
        fail("role '" + role.name + "' uses undeclared entity type '" + t + "'");
      }
    }
  }
}

}  // namespace

const RoleDef *EventTypeDef::RoleForSlot(int slot) const {
  for (const auto &r : roles) {
    if (r.slot_index == slot) return &r;
  }
  return nullptr;
}

const RoleDef *EventTypeDef::FindRole(std::string_view role) const {
  for (const auto &r : roles) {
    if (r.name == role) return &r;
  }
  return nullptr;
}

std::optional<int> SlotMarkerIndex(std::string_view token) {
  constexpr std::string_view kPrefix = "<arg";
  if (token.size() < kPrefix.size() + 2 || !token.starts_with(kPrefix) ||
      token.back() != '>') {
    return std::nullopt;
  }
  std::string_view digits = token.substr(4, token.size() - 5);
  int n = 0;
  for (char c : digits) {
    if (c < '0' || c > '9') return std::nullopt;
    n = n * 10 + (c - '0');
  }
  if (n <= 0) return std::nullopt;
  return n;
}

std::vector<std::string> TokenizeTemplate(std::string_view text) {
  std::vector<std::string> out;
  for (const auto &chunk : SplitWhitespace(text)) {
    std::string_view rest = chunk;
    while (!rest.empty()) {
      size_t open = rest.find("<arg");
      size_t close = open == std::string_view::npos ? open : rest.find('>', open);
      if (close != std::string_view::npos &&
          SlotMarkerIndex(rest.substr(open, close - open + 1))) {
        if (open > 0) SplitPunctuation(rest.substr(0, open), &out);
        out.emplace_back(rest.substr(open, close - open + 1));
        rest.remove_prefix(close + 1);
      } else {
        SplitPunctuation(rest, &out);
        break;
      }
    }
  }
  return out;
}

EventOntology::EventOntology() {
  entities_.push_back({std::string(kUniversalEntityType), "entity"});
  entity_index_.emplace(std::string(kUniversalEntityType), 0);
}

EventOntology EventOntology::Build(std::vector<EntityTypeDef> entity_types,
                                   std::vector<EventTypeDef> event_types) {
  EventOntology ont;
  for (auto &e : entity_types) {
    if (e.universal()) continue;
    if (e.name.empty()) throw ValidationError("entity type with empty name");
    if (e.statement_phrase.empty()) {
      throw ValidationError("entity type '" + e.name + "' has empty phrase");
    }
    if (ont.entity_index_.count(e.name)) {
      throw ValidationError("duplicate entity type '" + e.name + "'");
    }
    ont.entity_index_.emplace(e.name, ont.entities_.size());
    ont.entities_.push_back(std::move(e));
  }
  for (auto &def : event_types) {
    Validate(def, ont.entity_index_);
    if (ont.event_index_.count(def.name)) {
      throw ValidationError("duplicate event type '" + def.name + "'");
    }
    ont.event_index_.emplace(def.name, ont.events_.size());
    ont.events_.push_back(std::move(def));
  }
  return ont;
}

bool EventOntology::Contains(std::string_view event_type) const {
  return event_index_.find(event_type) != event_index_.end();
}

const EventTypeDef &EventOntology::TemplateFor(std::string_view event_type) const {
  auto it = event_index_.find(event_type);
  if (it != event_index_.end()) return events_[it->second];

  std::vector<std::pair<size_t, std::string>> ranked;
  for (const auto &e : events_) {
    ranked.emplace_back(EditDistance(ToLower(event_type), ToLower(e.name)), e.name);
  }
  std::sort(ranked.begin(), ranked.end());
  std::string msg = "unknown event type '" + std::string(event_type) + "'";
  if (!ranked.empty()) {
    msg += "; nearest:";
    for (size_t i = 0; i < std::min<size_t>(3, ranked.size()); ++i) {
      msg += (i ? ", " : " ") + ranked[i].second;
    }
  }
  throw NotFoundError(msg);
}

const EntityTypeDef &EventOntology::EntityType(std::string_view name) const {
  auto it = entity_index_.find(name);
  if (it == entity_index_.end()) {
    throw NotFoundError("unknown entity type '" + std::string(name) + "'");
  }
  return entities_[it->second];
}

std::vector<EntityTypeDef> EventOntology::ValidEntityTypes(
    std::string_view event_type, std::string_view role) const {
  const EventTypeDef &def = TemplateFor(event_type);
  const RoleDef *r = def.FindRole(role);
  if (!r) {
    throw NotFoundError("event type '" + def.name + "' has no role '" +
                        std::string(role) + "'");
  }
  std::vector<EntityTypeDef> out;
  for (const auto &t : r->allowed_entity_types) out.push_back(EntityType(t));
  return out;
}

EventOntology ParseOntology(std::istream &in, const std::string &source_name) {
  std::vector<EntityTypeDef> entities;
  std::vector<EventTypeDef> events;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    auto where = [&] { return source_name + ":" + std::to_string(lineno); };
    try {
      json rec = json::parse(line);
      if (rec.contains("entity_type")) {
        entities.push_back({rec.at("entity_type").get<std::string>(),
                            rec.value("phrase", std::string())});
      } else if (rec.contains("event_type")) {
        EventTypeDef def;
        def.name = rec.at("event_type").get<std::string>();
        def.template_text = rec.at("template").get<std::string>();
        for (const auto &r : rec.value("roles", json::array())) {
          RoleDef role;
          role.name = r.at("name").get<std::string>();
          role.slot_index = r.at("slot").get<int>();
          if (r.contains("entity_types")) {
            role.allowed_entity_types =
                r.at("entity_types").get<std::vector<std::string>>();
          } else {
            role.allowed_entity_types = {std::string(kUniversalEntityType)};
          }
          def.roles.push_back(std::move(role));
        }
        def.keywords = rec.value("keywords", std::vector<std::string>{});
        events.push_back(std::move(def));
      } else {
        throw ParseError(where() + ": record has neither 'event_type' nor 'entity_type'");
      }
    } catch (const json::exception &e) {
      throw ParseError(where() + ": " + e.what() + "\n  " + line);
    }
  }
  return EventOntology::Build(std::move(entities), std::move(events));
}

EventOntology LoadOntology(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open ontology file '" + path + "'");
  return ParseOntology(in, path);
}

void WriteOntology(const EventOntology &ontology, std::ostream &out) {
  for (const auto &e : ontology.entity_types()) {
    if (e.universal()) continue;
    out << json{{"entity_type", e.name}, {"phrase", e.statement_phrase}}.dump()
        << "\n";
  }
  for (const auto &def : ontology.event_types()) {
    json roles = json::array();
    for (const auto &r : def.roles) {
      roles.push_back({{"name", r.name},
                       {"slot", r.slot_index},
                       {"entity_types", r.allowed_entity_types}});
    }
    out << json{{"event_type", def.name},
                {"template", def.template_text},
                {"roles", roles},
                {"keywords", def.keywords}}
               .dump()
        << "\n";
  }
}

}  // namespace evx
