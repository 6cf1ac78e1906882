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

#ifndef EVENTX_CORPUS_H_
#define EVENTX_CORPUS_H_

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "eventx/common.h"

namespace evx {

class EventOntology;

// Mention levels ordered by informativeness: NAME > NOMINAL > PRONOUN.
enum class MentionLevel { kName = 0, kNominal = 1, kPronoun = 2 };

std::string_view MentionLevelName(MentionLevel level);
// Accepts NAME/NAM, NOMINAL/NOM, PRONOUN/PRO; anything else maps to NOMINAL.
MentionLevel ParseMentionLevel(std::string_view s);

struct EntityMention {
  std::string mention_id;
  TokenSpan span;
  TokenSpan head_span;
  MentionLevel level = MentionLevel::kNominal;
  std::string entity_type;
  std::string text;

  friend bool operator==(const EntityMention &, const EntityMention &) = default;
};

struct ArgumentRef {
  std::string role;
  std::string mention_id;

  friend bool operator==(const ArgumentRef &, const ArgumentRef &) = default;
};

struct EventMention {
  std::string event_id;
  std::string event_type;
  TokenSpan trigger_span;
  std::vector<ArgumentRef> arguments;

  friend bool operator==(const EventMention &, const EventMention &) = default;
};

struct CorefCluster {
  std::string cluster_id;
  std::vector<std::string> mention_ids;
  std::string informative_mention_id;

  friend bool operator==(const CorefCluster &, const CorefCluster &) = default;
};

struct Document {
  std::string doc_id;
  std::vector<std::string> tokens;
  std::vector<TokenSpan> sentence_boundaries;
  std::vector<EntityMention> entity_mentions;
  std::vector<EventMention> event_mentions;
  std::vector<CorefCluster> coref_clusters;

  const EntityMention *FindMention(std::string_view mention_id) const;
  const EventMention *FindEvent(std::string_view event_id) const;
  // Cluster containing the mention, or nullptr for a singleton.
  const CorefCluster *ClusterOf(std::string_view mention_id) const;
  // Mentions coreferent with the given one, itself included.
  std::vector<const EntityMention *> CorefMentions(std::string_view mention_id) const;
  // Index of the sentence holding the token, or -1.
  int SentenceOf(int token) const;
  std::string SpanText(const TokenSpan &span) const;

  // Throws ValidationError (naming doc_id) on any broken invariant.
  void Validate() const;

  friend bool operator==(const Document &, const Document &) = default;
};

// Most informative mention of a cluster: NAME > NOMINAL > PRONOUN, then the
// longest span, then the earliest position. Throws ContractViolation on an
// empty cluster or an unresolvable id.
const EntityMention &InformativeMention(const CorefCluster &cluster,
                                        const std::vector<EntityMention> &mentions);

// Fills informative_mention_id on every cluster of the document.
void ResolveInformativeMentions(Document *doc);

enum class ArgumentView { kNearest, kInformative };
std::string_view ArgumentViewName(ArgumentView view);
ArgumentView ParseArgumentView(std::string_view s);

// Replaces each argument with the cluster mention closest to the trigger
// (token gap; ties go to the earlier mention). Idempotent.
EventMention NearestArgumentView(const Document &doc, const EventMention &event);
// Replaces each argument with its cluster's informative mention.
EventMention InformativeArgumentView(const Document &doc, const EventMention &event);
EventMention ApplyArgumentView(const Document &doc, const EventMention &event,
                               ArgumentView view);

struct DistanceStats {
  // histogram[d] = number of arguments at token distance d.
  std::map<int, int> histogram;
  int num_arguments = 0;
  double mean_distance = 0.0;
  // Share of arguments whose selected mention lies in the trigger sentence.
  double same_sentence_fraction = 0.0;
  // Among arguments with some mention in the trigger sentence, the share
  // whose informative mention is in that sentence.
  double informative_given_in_sentence = 0.0;
};

DistanceStats ComputeDistanceStats(const std::vector<Document> &docs,
                                   ArgumentView view);

// Loaders. Documents returned by all loaders pass Document::Validate().
// When an ontology is given, roles unknown to it are kept and warned about.
std::vector<Document> LoadWikiEvents(const std::string &docs_path,
                                     const std::string &coref_path = "",
                                     const EventOntology *ontology = nullptr);
std::vector<Document> LoadRams(const std::string &path,
                               const EventOntology *ontology = nullptr);

// Canonical JSON-lines dump, one document per line.
void WriteCorpus(const std::vector<Document> &docs, std::ostream &out);
std::vector<Document> ReadCorpus(std::istream &in, const std::string &source_name);
std::vector<Document> LoadCorpus(const std::string &path);
void SaveCorpus(const std::vector<Document> &docs, const std::string &path);

}  // namespace evx

#endif  // EVENTX_CORPUS_H_
