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

#ifndef EVENTX_TEMPLATE_ENGINE_H_
#define EVENTX_TEMPLATE_ENGINE_H_

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "eventx/common.h"
#include "eventx/corpus.h"
#include "eventx/ontology.h"

namespace evx {

// Reserved symbols. The tokenizer keeps them atomic.
inline constexpr std::string_view kPlaceholder = "<arg>";
inline constexpr std::string_view kTriggerMarker = "<tgr>";
inline constexpr std::string_view kBoundary = "<s>";
inline constexpr std::string_view kEndOfSequence = "</s>";
inline constexpr std::string_view kConjunction = "and";

bool IsReservedSymbol(std::string_view token);

struct BlankTemplate {
  std::vector<std::string> tokens;      // slot markers replaced by <arg>
  std::vector<std::string> slot_order;  // role name at each placeholder
};

BlankTemplate MakeBlankTemplate(const EventTypeDef &def);

struct MarkedDocument {
  std::vector<std::string> tokens;  // window with two <tgr> markers inserted
  int window_start = 0;             // document offset of tokens[0]
  int window_end = 0;               // exclusive document offset
};

// Surrounds the trigger with <tgr> markers. Documents longer than max_len
// tokens are cut to a max_len window centred on the trigger and clamped to
// the document edges. Throws ContractViolation if the trigger is outside
// the document.
MarkedDocument MarkTrigger(const Document &doc, const EventMention &event,
                           int max_len);

struct GenerationInstance {
  std::string doc_id;
  std::string event_id;
  std::string event_type;
  TokenSpan trigger_span;  // in document coordinates
  std::vector<std::string> blank_template;
  std::vector<std::string> slot_order;
  MarkedDocument marked_document;
};

GenerationInstance MakeInstance(const Document &doc, const EventMention &event,
                                const EventOntology &ontology, int max_doc_len);

// <s> template <s> </s> document </s>. When the sequence would exceed
// max_len, only the document side is shortened (around the trigger); the
// template is never cut. max_len <= 0 disables the limit.
std::vector<std::string> BuildInput(const GenerationInstance &instance,
                                    int max_len = 0);

// Role -> filler strings. An absent role or an empty list means unfilled.
struct FilledTemplate {
  std::map<std::string, std::vector<std::string>> role_fills;

  bool empty() const;
  friend bool operator==(const FilledTemplate &, const FilledTemplate &) = default;
};

// Gold fillers of an event under the given view, one string per argument,
// in argument order. Roles outside the template are ignored.
FilledTemplate GoldFills(const GenerationInstance &instance, const Document &doc,
                         const EventMention &event, ArgumentView view);

// Collapses multi-argument slots to the single "A and B" string that a
// generated template carries.
FilledTemplate JoinFills(const FilledTemplate &fills);

// Target sequence: the blank template with every filled slot replaced by its
// fillers joined by "and", followed by </s>.
std::vector<std::string> FillTemplate(const GenerationInstance &instance,
                                      const FilledTemplate &fills);
std::vector<std::string> FillGold(const GenerationInstance &instance,
                                  const Document &doc, const EventMention &event,
                                  ArgumentView view);

struct ParsedTemplate {
  FilledTemplate fills;
  bool parseable = true;
  double anchor_coverage = 1.0;
  // (template position, generated position) for every matched anchor token.
  std::vector<std::pair<int, int>> alignment;
};

// Fraction of template anchors that must align for a parse to be accepted.
inline constexpr double kMinAnchorCoverage = 0.6;

// Aligns a generated sequence to the blank template by a leftmost longest
// common subsequence over the fixed template tokens and reads the slot
// regions between aligned anchors. Each filled slot gets one string; "and"
// is not split here (see Ground).
ParsedTemplate ParseFilled(const GenerationInstance &instance,
                           const std::vector<std::string> &generated);

struct GroundedArgument {
  std::string role;
  TokenSpan span;
  std::string text;

  friend bool operator==(const GroundedArgument &, const GroundedArgument &) = default;
};

// Finds the filler in the document (case-insensitive token match), choosing
// the occurrence closest to the trigger. If the whole string is absent it is
// split on "and" and each part grounded separately; parts that still do not
// match are dropped with a warning.
std::vector<GroundedArgument> Ground(const Document &doc, const TokenSpan &trigger,
                                     std::string_view role, std::string_view filler);

}  // namespace evx

#endif  // EVENTX_TEMPLATE_ENGINE_H_
