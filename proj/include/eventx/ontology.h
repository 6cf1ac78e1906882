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

#ifndef EVENTX_ONTOLOGY_H_
#define EVENTX_ONTOLOGY_H_

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace evx {

// Reserved entity-type label accepted by every role. Roles carrying it impose
// no type constraint and produce no clarification statements.
inline constexpr std::string_view kUniversalEntityType = "*";

struct EntityTypeDef {
  std::string name;
  // Noun phrase used in clarification statements, e.g.
  // "person/organization/country".
  std::string statement_phrase;

  bool universal() const { return name == kUniversalEntityType; }
  friend bool operator==(const EntityTypeDef &, const EntityTypeDef &) = default;
};

struct RoleDef {
  std::string name;
  int slot_index = 0;  // 1-based, matches <argN> in the template
  std::vector<std::string> allowed_entity_types;

  friend bool operator==(const RoleDef &, const RoleDef &) = default;
};

struct EventTypeDef {
  std::string name;
  std::string template_text;
  std::vector<RoleDef> roles;
  std::vector<std::string> keywords;

  // Role bound to the given 1-based slot, or nullptr.
  const RoleDef *RoleForSlot(int slot) const;
  const RoleDef *FindRole(std::string_view role) const;

  friend bool operator==(const EventTypeDef &, const EventTypeDef &) = default;
};

// Splits template text into tokens. Slot markers (<arg1>, <arg2>, ...) and
// punctuation become separate tokens.
std::vector<std::string> TokenizeTemplate(std::string_view text);

// Returns N for a "<argN>" token, nullopt otherwise.
std::optional<int> SlotMarkerIndex(std::string_view token);

// Event ontology: entity types plus event types with their templates.
// Immutable once built; all lookups are const.
class EventOntology {
 public:
  EventOntology();

  // Validates every definition and returns the ontology. Throws
  // ValidationError naming the offending event type.
  static EventOntology Build(std::vector<EntityTypeDef> entity_types,
                             std::vector<EventTypeDef> event_types);

  const std::vector<EventTypeDef> &event_types() const { return events_; }
  const std::vector<EntityTypeDef> &entity_types() const { return entities_; }
  size_t size() const { return events_.size(); }
  bool Contains(std::string_view event_type) const;

  // Case-sensitive exact lookup. Throws NotFoundError listing near names.
  const EventTypeDef &TemplateFor(std::string_view event_type) const;

  // The allowed entity types of a role (never empty).
  std::vector<EntityTypeDef> ValidEntityTypes(std::string_view event_type,
                                              std::string_view role) const;

  const EntityTypeDef &EntityType(std::string_view name) const;

  friend bool operator==(const EventOntology &a, const EventOntology &b) {
    return a.entities_ == b.entities_ && a.events_ == b.events_;
  }

 private:
  std::vector<EntityTypeDef> entities_;
  std::vector<EventTypeDef> events_;
  std::map<std::string, size_t, std::less<>> event_index_;
  std::map<std::string, size_t, std::less<>> entity_index_;
};

// Ontology file: JSON lines, one record per entity type or event type.
// Blank lines and lines starting with '#' are ignored.
//
//   {"entity_type": "PER", "phrase": "person"}
//   {"event_type": "Contact.Meet", "template": "<arg1> met with <arg2>",
//    "roles": [{"name": "Participant", "slot": 1, "entity_types": ["PER"]},
//              ...],
//    "keywords": ["meet"]}
EventOntology LoadOntology(const std::string &path);
EventOntology ParseOntology(std::istream &in, const std::string &source_name);
void WriteOntology(const EventOntology &ontology, std::ostream &out);

}  // namespace evx

#endif  // EVENTX_ONTOLOGY_H_
