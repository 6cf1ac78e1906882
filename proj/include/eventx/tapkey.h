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

#ifndef EVENTX_TAPKEY_H_
#define EVENTX_TAPKEY_H_

#include <iosfwd>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <tuple>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

#include "eventx/common.h"
#include "eventx/corpus.h"

namespace evx {

// Contextual token encoder plus a masked-word predictor.
class EmbeddingBackend {
 public:
  virtual ~EmbeddingBackend() = default;

  virtual int dim() const = 0;
  // d x n matrix, one column per token.
  virtual Eigen::MatrixXd TokenEmbeddings(const std::vector<std::string> &sentence) const = 0;
  // Log-probabilities over PredictionVocabulary() for a masked position.
  virtual Eigen::VectorXd MaskedPrediction(const std::vector<std::string> &sentence,
                                           int position) const = 0;
  virtual const std::vector<std::string> &PredictionVocabulary() const = 0;

  // The k most likely words at a masked position, best first.
  std::vector<std::string> TopPredictions(const std::vector<std::string> &sentence,
                                          int position, int k) const;
};

// Embedding backend over a static word-vector table. A token's contextual
// vector is its own vector plus `mix` times the mean of its neighbours'.
// Masked prediction scores every table word against the mean vector of the
// surrounding window. Words missing from the table get a deterministic
// hashed vector.
class LexiconEmbeddingBackend : public EmbeddingBackend {
 public:
  LexiconEmbeddingBackend(int dim, double mix = 0.25, int window = 2, unsigned seed = 11);

  // Text format: optional "<count> <dim>" header, then "word v1 ... vd".
  static std::unique_ptr<LexiconEmbeddingBackend> LoadVectors(const std::string &path,
                                                              double mix = 0.25);

  void AddWord(const std::string &word, const Eigen::VectorXd &vec);

  int dim() const override { return dim_; }
  Eigen::MatrixXd TokenEmbeddings(const std::vector<std::string> &sentence) const override;
  Eigen::VectorXd MaskedPrediction(const std::vector<std::string> &sentence,
                                   int position) const override;
  const std::vector<std::string> &PredictionVocabulary() const override { return words_; }

  Eigen::VectorXd WordVector(const std::string &word) const;

 private:
  int dim_;
  double mix_;
  int window_;
  unsigned seed_;
  std::vector<std::string> words_;
  Eigen::MatrixXd table_;  // dim x words (column per word)
  std::unordered_map<std::string, int> index_;
};

// Keyword file: one "<event_type> kw1, kw2, ..." line per type; blank lines
// and '#' comments ignored.
std::map<std::string, std::vector<std::string>> LoadKeywordFile(const std::string &path);

// Inflected forms of a keyword lemma (regular rules plus a small table of
// irregular verbs). Always contains the lowercased lemma itself.
std::set<std::string> MorphologicalVariants(const std::string &keyword);

struct ClassVector {
  std::string event_type;
  Eigen::VectorXd vec;
  int support_count = 0;
};

// Masks each keyword occurrence in the sentences and keeps it when a form of
// the keyword is among the top `top_k` predictions; the class vector is the
// mean contextual embedding of kept occurrences. Falls back to all
// occurrences (with a warning) when none survive. Throws Error when no
// keyword occurs at all.
ClassVector BuildClassVector(const EmbeddingBackend &backend, const std::string &event_type,
                             const std::vector<std::string> &keywords,
                             const std::vector<std::vector<std::string>> &sentences,
                             int top_k = 50);

struct NullSpace {
  Eigen::MatrixXd basis;  // d x (d - rank), orthonormal columns
  int rank = 0;
};

// Orthonormal basis of the null space of D^T with
// D = [c_1 - lambda * phi_1/|phi_1|, ..., c_K - lambda * phi_K/|phi_K|],
// from a full (column-pivoted) QR decomposition of D. Rank deficiency is
// warned about and yields a larger basis.
NullSpace ComputeProjection(const Eigen::MatrixXd &class_vectors,
                            const Eigen::MatrixXd &references, double lambda);

// Tag ids: 0 = O, k = I-<types[k-1]>, kTagX = unknown (pseudo-labels only).
inline constexpr int kTagO = 0;
inline constexpr int kTagX = -1;

using TagSequence = std::vector<int>;

struct TapKeyConfig {
  int proj_dim = 0;  // columns of M; 0 = dim - max_event_types
  int max_event_types = 8;
  double lambda = 0.5;
  double alpha = 0.1;
  unsigned seed = 17;
};

// Keyword-seeded CRF tagger. Emissions are a softmax over tags of projected
// dot products between a token and each tag's reference vector; transitions
// are diagonal bilinear forms (W between equal event tags, W_o whenever O is
// involved, zero otherwise). M is recomputed from the class vectors and the
// references and never learned.
class TapKeyModel {
 public:
  TapKeyModel(int dim, TapKeyConfig config);

  int dim() const { return dim_; }
  int proj_dim() const { return proj_dim_; }
  int num_types() const { return static_cast<int>(types_.size()); }
  int num_tags() const { return num_types() + 1; }
  const TapKeyConfig &config() const { return config_; }
  const std::vector<std::string> &types() const { return types_; }
  int TagOf(const std::string &event_type) const;  // -1 when unknown
  std::string TagName(int tag) const;

  // Registers a class. The first `dim` seen classes get standard-basis
  // references (an initially orthonormal Phi); later ones, and every class
  // added with `unseen`, start from their normalized class vector.
  void AddClass(const ClassVector &cv, bool unseen = false);

  void RecomputeProjection();

  const Eigen::MatrixXd &class_vectors() const { return class_vectors_; }
  const Eigen::MatrixXd &phi() const { return phi_; }
  const Eigen::VectorXd &phi_o() const { return phi_o_; }
  const Eigen::VectorXd &w() const { return w_; }
  const Eigen::VectorXd &w_o() const { return w_o_; }
  const Eigen::MatrixXd &projection() const { return m_; }

  Eigen::MatrixXd &mutable_phi() { return phi_; }
  Eigen::VectorXd &mutable_phi_o() { return phi_o_; }
  Eigen::VectorXd &mutable_w() { return w_; }
  Eigen::VectorXd &mutable_w_o() { return w_o_; }
  // Tests pin M directly to probe the CRF with a hand-built projection.
  void set_projection(const Eigen::MatrixXd &m) { m_ = m; }

  // Reference of a tag (tag 0 is the learned O reference).
  Eigen::VectorXd Reference(int tag) const;

  // Log-softmax over all tags of M(h)^T M(phi_k).
  Eigen::VectorXd Emission(const Eigen::VectorXd &h) const;
  double Transition(int prev_tag, int tag, const Eigen::VectorXd &h) const;

  // alpha * ||Phi^T Phi - I||_F^2 over event references.
  double Regularizer() const;

  void Save(std::ostream &out) const;
  static TapKeyModel Load(std::istream &in);
  void SaveFile(const std::string &path) const;
  static TapKeyModel LoadFile(const std::string &path);

 private:
  int dim_;
  int proj_dim_;
  TapKeyConfig config_;
  std::vector<std::string> types_;
  Eigen::MatrixXd class_vectors_;  // d x K
  Eigen::MatrixXd phi_;            // d x K
  Eigen::VectorXd phi_o_;
  Eigen::VectorXd w_, w_o_;        // diagonals, proj_dim
  Eigen::MatrixXd m_;              // d x proj_dim
};

// Per-position emission and transition scores for one sentence.
struct CrfScores {
  Eigen::MatrixXd emission;                // n x T
  std::vector<Eigen::MatrixXd> transition; // n of T x T, [prev, cur]
};

CrfScores ScoreSentence(const TapKeyModel &model, const Eigen::MatrixXd &h);

// Unnormalized score of a tag path (virtual O before the first token).
double PathScore(const CrfScores &scores, const TagSequence &tags);
double LogPartition(const CrfScores &scores);
double SequenceLogProb(const TapKeyModel &model, const Eigen::MatrixXd &h,
                       const TagSequence &tags);
// Per-position tag marginals (n x T).
Eigen::MatrixXd TagMarginals(const CrfScores &scores);
// MAP path; ties go toward O, then to the lower class index.
TagSequence Viterbi(const TapKeyModel &model, const Eigen::MatrixXd &h);
TagSequence Viterbi(const CrfScores &scores);

// Per token: best cosine >= tau_i -> that I tag; <= tau_o -> O; else X.
std::vector<TagSequence> PseudoLabel(const std::vector<ClassVector> &classes,
                                     const EmbeddingBackend &backend,
                                     const std::vector<std::vector<std::string>> &sentences,
                                     double tau_i = 0.55, double tau_o = 0.30);

struct TaggedSentence {
  Eigen::MatrixXd h;  // d x n
  TagSequence tags;   // may contain kTagX
};

struct TapKeyGradient {
  Eigen::MatrixXd phi;
  Eigen::VectorXd phi_o, w, w_o;
};

// Mean loss with its gradient (M held fixed). Sentences without X tags
// contribute their CRF negative log-likelihood; sentences with X tags
// contribute the token-classification loss over their non-X tokens only.
// The orthonormality penalty is added once.
double TapKeyLoss(const TapKeyModel &model, const std::vector<TaggedSentence> &data,
                  TapKeyGradient *grad);

struct TapKeyTrainConfig {
  int epochs = 20;
  int batch_size = 16;
  double learning_rate = 0.05;
  unsigned seed = 5;
};

struct TapKeyTrainReport {
  std::vector<double> epoch_loss;
};

// Adam over {phi, phi_o, W, W_o}; M recomputed at the start of every epoch.
// Throws Error on a non-finite loss.
TapKeyTrainReport TrainTapKey(TapKeyModel &model, const std::vector<TaggedSentence> &data,
                              const TapKeyTrainConfig &config);

struct TriggerPrediction {
  std::string doc_id;
  int sent_idx = 0;
  TokenSpan span;  // document coordinates
  std::string event_type;
  double score = 0.0;  // mean tag marginal over the span
};

// Viterbi per sentence; maximal runs of one I tag become triggers.
std::vector<TriggerPrediction> PredictTriggers(const TapKeyModel &model,
                                               const EmbeddingBackend &backend,
                                               const Document &doc);

// Maximal runs of identical event tags as (start, end, tag).
std::vector<std::tuple<int, int, int>> TagRuns(const TagSequence &tags);

}  // namespace evx

#endif  // EVENTX_TAPKEY_H_
