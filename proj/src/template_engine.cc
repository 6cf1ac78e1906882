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

#include "eventx/template_engine.h"

#include <algorithm>
#include <optional>
#include <set>

namespace evx {

bool IsReservedSymbol(std::string_view token) {
  return token == kPlaceholder || token == kTriggerMarker || token == kBoundary ||
         token == kEndOfSequence;
}

BlankTemplate MakeBlankTemplate(const EventTypeDef &def) {
  BlankTemplate out;
  for (auto &tok : TokenizeTemplate(def.template_text)) {
    if (auto slot = SlotMarkerIndex(tok)) {
      const RoleDef *role = def.RoleForSlot(*slot);
      out.tokens.emplace_back(kPlaceholder);
      out.slot_order.push_back(role ? role->name : tok);
    } else {
      out.tokens.push_back(std::move(tok));
    }
  }
  return out;
}

namespace {

// Start of a length-`len` window over [0, n) centred on [b, e).
int CenteredWindowStart(int b, int e, int n, int len) {
  if (len >= n) return 0;
  int start = (b + e) / 2 - len / 2;
  start = std::min(start, b);
  start = std::max(start, e - len);
  return std::clamp(start, 0, n - len);
}

}  // namespace

MarkedDocument MarkTrigger(const Document &doc, const EventMention &event,
                           int max_len) {
  const int n = static_cast<int>(doc.tokens.size());
  const TokenSpan &t = event.trigger_span;
  if (t.start < 0 || t.end > n || t.start >= t.end) {
    throw ContractViolation("MarkTrigger: trigger of '" + event.event_id +
                            "' outside document '" + doc.doc_id + "'");
  }
  // The window never cuts the trigger itself.
  const int len = max_len > 0 ? std::max(std::min(max_len, n), t.length()) : n;
  MarkedDocument out;
  out.window_start = CenteredWindowStart(t.start, t.end, n, len);
  out.window_end = out.window_start + len;
  for (int i = out.window_start; i < out.window_end; ++i) {
    if (i == t.start) out.tokens.emplace_back(kTriggerMarker);
    out.tokens.push_back(doc.tokens[i]);
    if (i == t.end - 1) out.tokens.emplace_back(kTriggerMarker);
  }
  return out;
}

GenerationInstance MakeInstance(const Document &doc, const EventMention &event,
                                const EventOntology &ontology, int max_doc_len) {
  GenerationInstance inst;
  inst.doc_id = doc.doc_id;
  inst.event_id = event.event_id;
  inst.event_type = event.event_type;
  inst.trigger_span = event.trigger_span;
  BlankTemplate blank = MakeBlankTemplate(ontology.TemplateFor(event.event_type));
  inst.blank_template = std::move(blank.tokens);
  inst.slot_order = std::move(blank.slot_order);
  inst.marked_document = MarkTrigger(doc, event, max_doc_len);
  return inst;
}

std::vector<std::string> BuildInput(const GenerationInstance &instance, int max_len) {
  const auto &doc = instance.marked_document.tokens;
  const int fixed = static_cast<int>(instance.blank_template.size()) + 4;
  int n = static_cast<int>(doc.size());
  int begin = 0, end = n;
  if (max_len > 0 && fixed + n > max_len) {
    const int budget = std::max(0, max_len - fixed);
    auto first = std::find(doc.begin(), doc.end(), kTriggerMarker);
    auto last = std::find(first == doc.end() ? doc.end() : first + 1, doc.end(),
                          kTriggerMarker);
    int tb = first == doc.end() ? n / 2 : static_cast<int>(first - doc.begin());
    int te = last == doc.end() ? tb + 1 : static_cast<int>(last - doc.begin()) + 1;
    begin = CenteredWindowStart(tb, te, n, budget);
    end = begin + budget;
  }
  std::vector<std::string> out;
  out.reserve(fixed + (end - begin));
  out.emplace_back(kBoundary);
  out.insert(out.end(), instance.blank_template.begin(), instance.blank_template.end());
  out.emplace_back(kBoundary);
  out.emplace_back(kEndOfSequence);
  out.insert(out.end(), doc.begin() + begin, doc.begin() + end);
  out.emplace_back(kEndOfSequence);
  return out;
}

bool FilledTemplate::empty() const {
  for (const auto &[role, fills] : role_fills) {
    if (!fills.empty()) return false;
  }
  return true;
}

FilledTemplate GoldFills(const GenerationInstance &instance, const Document &doc,
                         const EventMention &event, ArgumentView view) {
  FilledTemplate out;
  std::set<std::string> roles(instance.slot_order.begin(), instance.slot_order.end());
  EventMention viewed = ApplyArgumentView(doc, event, view);
  std::set<std::pair<std::string, std::string>> seen;
  for (const auto &arg : viewed.arguments) {
    if (!roles.count(arg.role)) continue;
    if (!seen.emplace(arg.role, arg.mention_id).second) continue;
    const EntityMention *m = doc.FindMention(arg.mention_id);
    if (!m) continue;
    out.role_fills[arg.role].push_back(doc.SpanText(m->span));
  }
  return out;
}

FilledTemplate JoinFills(const FilledTemplate &fills) {
  FilledTemplate out;
  for (const auto &[role, list] : fills.role_fills) {
    if (list.empty()) continue;
    out.role_fills[role] = {Join(list, std::string(" ") + std::string(kConjunction) + " ")};
  }
  return out;
}

std::vector<std::string> FillTemplate(const GenerationInstance &instance,
                                      const FilledTemplate &fills) {
  std::vector<std::string> out;
  size_t slot = 0;
  for (const auto &tok : instance.blank_template) {
    if (tok != kPlaceholder) {
      out.push_back(tok);
      continue;
    }
    const std::string &role = instance.slot_order.at(slot++);
    auto it = fills.role_fills.find(role);
    if (it == fills.role_fills.end() || it->second.empty()) {
      out.push_back(tok);
      continue;
    }
    for (size_t i = 0; i < it->second.size(); ++i) {
      if (i > 0) out.emplace_back(kConjunction);
      for (auto &w : SplitWhitespace(it->second[i])) out.push_back(std::move(w));
    }
  }
  out.emplace_back(kEndOfSequence);
  return out;
}

std::vector<std::string> FillGold(const GenerationInstance &instance,
                                  const Document &doc, const EventMention &event,
                                  ArgumentView view) {
  return FillTemplate(instance, GoldFills(instance, doc, event, view));
}

ParsedTemplate ParseFilled(const GenerationInstance &instance,
                           const std::vector<std::string> &generated) {
  std::vector<std::string> gen;
  for (const auto &tok : generated) {
    if (tok == kBoundary || tok == kTriggerMarker) continue;
    if (tok == kEndOfSequence) break;
    gen.push_back(tok);
  }
  const auto &tmpl = instance.blank_template;
  std::vector<int> anchors;  // template positions of fixed tokens
  for (int i = 0; i < static_cast<int>(tmpl.size()); ++i) {
    if (tmpl[i] != kPlaceholder) anchors.push_back(i);
  }
  const int na = static_cast<int>(anchors.size());
  const int ng = static_cast<int>(gen.size());

  // Suffix LCS table, then a forward pass that matches each anchor as early
  // as possible among maximal alignments.
  std::vector<std::vector<int>> lcs(na + 1, std::vector<int>(ng + 1, 0));
  for (int i = na - 1; i >= 0; --i) {
    for (int j = ng - 1; j >= 0; --j) {
      lcs[i][j] = tmpl[anchors[i]] == gen[j] ? lcs[i + 1][j + 1] + 1
                                             : std::max(lcs[i + 1][j], lcs[i][j + 1]);
    }
  }
  ParsedTemplate out;
  std::vector<int> match_of(tmpl.size(), -1);
  for (int i = 0, j = 0; i < na && j < ng;) {
    if (tmpl[anchors[i]] == gen[j] && lcs[i][j] == lcs[i + 1][j + 1] + 1) {
      match_of[anchors[i]] = j;
      out.alignment.emplace_back(anchors[i], j);
      ++i, ++j;
    } else if (lcs[i][j + 1] == lcs[i][j]) {
      ++j;
    } else {
      ++i;
    }
  }
  out.anchor_coverage = na == 0 ? 1.0 : static_cast<double>(out.alignment.size()) / na;
  if (out.anchor_coverage < kMinAnchorCoverage) {
    out.parseable = false;
    return out;
  }

  size_t slot = 0;
  int prev_gen = -1;  // generated position of the last matched anchor
  int pos = 0;
  const int nt = static_cast<int>(tmpl.size());
  while (pos < nt) {
    if (match_of[pos] >= 0) {
      prev_gen = match_of[pos++];
      continue;
    }
    // Group of placeholders and unmatched anchors up to the next match.
    int group_end = pos;
    std::vector<std::string> roles;
    while (group_end < nt && match_of[group_end] < 0) {
      if (tmpl[group_end] == kPlaceholder) roles.push_back(instance.slot_order.at(slot++));
      ++group_end;
    }
    const int next_gen = group_end < nt ? match_of[group_end] : ng;
    pos = group_end;
    if (roles.empty()) continue;

    // Split the region into elements: runs of ordinary tokens and single
    // placeholders. Each element feeds one slot in order.
    std::vector<std::vector<std::string>> elements;
    bool in_run = false;
    for (int j = prev_gen + 1; j < next_gen; ++j) {
      if (gen[j] == kPlaceholder) {
        elements.push_back({});
        in_run = false;
      } else {
        if (!in_run) elements.push_back({});
        elements.back().push_back(gen[j]);
        in_run = true;
      }
    }
    for (size_t r = 0; r < roles.size(); ++r) {
      std::vector<std::string> words;
      if (r < elements.size()) {
        if (r + 1 == roles.size()) {
          for (size_t e = r; e < elements.size(); ++e) {
            words.insert(words.end(), elements[e].begin(), elements[e].end());
          }
        } else {
          words = elements[r];
        }
      }
      auto &fill = out.fills.role_fills[roles[r]];
      if (!words.empty()) fill.push_back(Join(words, " "));
    }
  }
  // Drop unfilled roles so the map only carries content.
  std::erase_if(out.fills.role_fills, [](const auto &kv) { return kv.second.empty(); });
  return out;
}

namespace {

std::optional<TokenSpan> ClosestMatch(const std::vector<std::string> &doc_lower,
                                      const std::vector<std::string> &needle,
                                      const TokenSpan &trigger) {
  const int n = static_cast<int>(doc_lower.size());
  const int m = static_cast<int>(needle.size());
  std::optional<TokenSpan> best;
  int best_gap = 0;
  for (int s = 0; s + m <= n; ++s) {
    if (!std::equal(needle.begin(), needle.end(), doc_lower.begin() + s)) continue;
    TokenSpan span{s, s + m};
    int gap = TokenGap(trigger, span);
    if (!best || gap < best_gap) {
      best = span;
      best_gap = gap;
    }
  }
  return best;
}

}  // namespace

std::vector<GroundedArgument> Ground(const Document &doc, const TokenSpan &trigger,
                                     std::string_view role, std::string_view filler) {
  std::vector<GroundedArgument> out;
  std::vector<std::string> words;
  for (const auto &w : SplitWhitespace(filler)) words.push_back(ToLower(w));
  if (words.empty()) return out;
  std::vector<std::string> doc_lower;
  doc_lower.reserve(doc.tokens.size());
  for (const auto &t : doc.tokens) doc_lower.push_back(ToLower(t));

  if (auto span = ClosestMatch(doc_lower, words, trigger)) {
    out.push_back({std::string(role), *span, doc.SpanText(*span)});
    return out;
  }
  std::vector<std::vector<std::string>> parts(1);
  for (auto &w : words) {
    if (w == kConjunction) {
      parts.emplace_back();
    } else {
      parts.back().push_back(std::move(w));
    }
  }
  for (const auto &part : parts) {
    if (part.empty()) continue;
    if (auto span = ClosestMatch(doc_lower, part, trigger)) {
      out.push_back({std::string(role), *span, doc.SpanText(*span)});
    } else {
      Warn("document '" + doc.doc_id + "': filler '" + Join(part, " ") +
           "' for role '" + std::string(role) + "' not found");
    }
  }
  return out;
}

}  // namespace evx
