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

#ifndef EVENTX_METRICS_H_
#define EVENTX_METRICS_H_

#include <iosfwd>
#include <string>
#include <vector>

#include "eventx/common.h"
#include "eventx/corpus.h"
#include "eventx/tapkey.h"

namespace evx {

struct ScoreReport {
  std::string label;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  int num_pred = 0;
  int num_gold = 0;
  int num_correct = 0;

  static ScoreReport FromCounts(std::string label, int num_pred, int num_gold, int num_correct);
};

// One extracted argument. The event is identified by its trigger offsets and
// type; event_id is informational.
struct ArgPrediction {
  std::string doc_id;
  std::string event_id;
  std::string event_type;
  TokenSpan trigger_span;
  std::string role;
  TokenSpan span;
  std::string text;

  friend bool operator==(const ArgPrediction &, const ArgPrediction &) = default;
};

// Trigger identification / classification.
std::pair<ScoreReport, ScoreReport> ScoreTriggers(const std::vector<TriggerPrediction> &pred,
                                                  const std::vector<Document> &gold);

enum class ArgMatch {
  kHead,         // head offsets equal those of the gold mention
  kCoref,        // span equals any mention of the gold argument's cluster
  kInformative,  // span equals the cluster's informative mention
  kInformativeHead,  // head offsets equal those of the informative mention
  kSpan,         // exact span offsets
};

std::string_view ArgMatchName(ArgMatch match);

// Argument identification (classification = false) or classification.
// Gold arguments come from the documents' event mentions. Each gold argument
// is matched at most once; predictions are visited in document order, so the
// result does not depend on their input order. When `credited` is given it
// receives one flag per prediction, in input order.
ScoreReport ScoreArgs(const std::vector<ArgPrediction> &pred, const std::vector<Document> &gold,
                      ArgMatch match, bool classification,
                      std::vector<bool> *credited = nullptr);

inline ScoreReport ScoreArgsHead(const std::vector<ArgPrediction> &pred,
                                 const std::vector<Document> &gold, bool classification) {
  return ScoreArgs(pred, gold, ArgMatch::kHead, classification);
}
inline ScoreReport ScoreArgsCoref(const std::vector<ArgPrediction> &pred,
                                  const std::vector<Document> &gold, bool classification) {
  return ScoreArgs(pred, gold, ArgMatch::kCoref, classification);
}
inline ScoreReport ScoreArgsInformative(const std::vector<ArgPrediction> &pred,
                                        const std::vector<Document> &gold,
                                        bool classification, bool head = false) {
  return ScoreArgs(pred, gold, head ? ArgMatch::kInformativeHead : ArgMatch::kInformative,
                   classification);
}

// Span F1 and Head F1 with role required.
std::pair<ScoreReport, ScoreReport> ScoreRamsSpan(const std::vector<ArgPrediction> &pred,
                                                  const std::vector<Document> &gold);

// Head of a predicted span: the head of the document mention with the same
// span, else the span's last token.
TokenSpan PredictedHead(const Document &doc, const TokenSpan &span);

// JSON lines, one record per line.
void WriteArgPredictions(const std::vector<ArgPrediction> &preds, std::ostream &out);
std::vector<ArgPrediction> ReadArgPredictions(std::istream &in, const std::string &source_name);
void WriteTriggerPredictions(const std::vector<TriggerPrediction> &preds, std::ostream &out);
std::vector<TriggerPrediction> ReadTriggerPredictions(std::istream &in,
                                                      const std::string &source_name);

// Fixed-width table, one row per report.
std::string FormatReports(const std::vector<ScoreReport> &reports);
std::string ReportsToJson(const std::vector<ScoreReport> &reports);

}  // namespace evx

#endif  // EVENTX_METRICS_H_
