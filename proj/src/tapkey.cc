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

#include "eventx/tapkey.h"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

#include "json.hpp"

namespace evx {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

uint64_t HashString(std::string_view s) {
  uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

double LogSumExpRow(const Eigen::VectorXd &v) {
  const double mx = v.maxCoeff();
  if (!std::isfinite(mx)) return mx;
  return mx + std::log((v.array() - mx).exp().sum());
}

}  // namespace

std::vector<std::string> EmbeddingBackend::TopPredictions(
    const std::vector<std::string> &sentence, int position, int k) const {
  Eigen::VectorXd lp = MaskedPrediction(sentence, position);
  std::vector<int> order(lp.size());
  std::iota(order.begin(), order.end(), 0);
  const size_t keep = std::min<size_t>(std::max(k, 0), order.size());
  std::partial_sort(order.begin(), order.begin() + keep, order.end(),
                    [&](int a, int b) { return lp[a] > lp[b] || (lp[a] == lp[b] && a < b); });
  std::vector<std::string> out;
  for (size_t i = 0; i < keep; ++i) out.push_back(PredictionVocabulary()[order[i]]);
  return out;
}

LexiconEmbeddingBackend::LexiconEmbeddingBackend(int dim, double mix, int window,
                                                 unsigned seed)
    : dim_(dim), mix_(mix), window_(window), seed_(seed), table_(dim, 0) {}

void LexiconEmbeddingBackend::AddWord(const std::string &word, const Eigen::VectorXd &vec) {
  if (vec.size() != dim_) throw ContractViolation("AddWord: dimension mismatch");
  std::string key = ToLower(word);
  auto it = index_.find(key);
  if (it != index_.end()) {
    table_.col(it->second) = vec;
    return;
  }
  index_.emplace(key, static_cast<int>(words_.size()));
  words_.push_back(key);
  table_.conservativeResize(Eigen::NoChange, table_.cols() + 1);
  table_.col(table_.cols() - 1) = vec;
}

std::unique_ptr<LexiconEmbeddingBackend> LexiconEmbeddingBackend::LoadVectors(
    const std::string &path, double mix) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open word vectors '" + path + "'");
  std::string line;
  std::unique_ptr<LexiconEmbeddingBackend> backend;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto parts = SplitWhitespace(line);
    if (parts.empty()) continue;
    if (lineno == 1 && parts.size() == 2) continue;  // "<count> <dim>" header
    const int d = static_cast<int>(parts.size()) - 1;
    if (!backend) backend = std::make_unique<LexiconEmbeddingBackend>(d, mix);
    if (d != backend->dim()) {
      throw ParseError(path + ":" + std::to_string(lineno) + ": expected " +
                       std::to_string(backend->dim()) + " values, got " + std::to_string(d));
    }
    Eigen::VectorXd v(d);
    try {
      for (int i = 0; i < d; ++i) v[i] = std::stod(parts[i + 1]);
    } catch (const std::exception &) {
      throw ParseError(path + ":" + std::to_string(lineno) + ": bad number");
    }
    backend->AddWord(parts[0], v);
  }
  if (!backend) throw ParseError(path + ": no vectors");
  return backend;
}

Eigen::VectorXd LexiconEmbeddingBackend::WordVector(const std::string &word) const {
  std::string key = ToLower(word);
  auto it = index_.find(key);
  if (it != index_.end()) return table_.col(it->second);
  std::mt19937_64 rng(HashString(key) ^ (0x9e3779b97f4a7c15ULL * (seed_ + 1)));
  std::normal_distribution<double> dist(0.0, 1.0 / std::sqrt(static_cast<double>(dim_)));
  Eigen::VectorXd v(dim_);
  for (int i = 0; i < dim_; ++i) v[i] = dist(rng);
  return v;
}

Eigen::MatrixXd LexiconEmbeddingBackend::TokenEmbeddings(
    const std::vector<std::string> &sentence) const {
  const int n = static_cast<int>(sentence.size());
  Eigen::MatrixXd base(dim_, n);
  for (int i = 0; i < n; ++i) base.col(i) = WordVector(sentence[i]);
  Eigen::MatrixXd out = base;
  for (int i = 0; i < n; ++i) {
    Eigen::VectorXd ctx = Eigen::VectorXd::Zero(dim_);
    int count = 0;
    if (i > 0) ctx += base.col(i - 1), ++count;
    if (i + 1 < n) ctx += base.col(i + 1), ++count;
    if (count) out.col(i) += mix_ * ctx / count;
  }
  return out;
}

Eigen::VectorXd LexiconEmbeddingBackend::MaskedPrediction(
    const std::vector<std::string> &sentence, int position) const {
  const int n = static_cast<int>(sentence.size());
  if (position < 0 || position >= n) {
    throw ContractViolation("MaskedPrediction: position out of range");
  }
  Eigen::VectorXd q = Eigen::VectorXd::Zero(dim_);
  int count = 0;
  for (int j = std::max(0, position - window_); j <= std::min(n - 1, position + window_); ++j) {
    if (j == position) continue;
    q += WordVector(sentence[j]);
    ++count;
  }
  if (count) q /= count;
  Eigen::VectorXd logits = table_.transpose() * q;
  if (logits.size() == 0) return logits;
  return logits.array() - LogSumExpRow(logits);
}

std::map<std::string, std::vector<std::string>> LoadKeywordFile(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open keyword file '" + path + "'");
  std::map<std::string, std::vector<std::string>> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    const auto sep = line.find_first_of(" \t", first);
    if (sep == std::string::npos) {
      throw ParseError(path + ":" + std::to_string(lineno) + ": no keywords after event type");
    }
    std::vector<std::string> words;
    std::stringstream rest(line.substr(sep));
    std::string item;
    while (std::getline(rest, item, ',')) {
      auto parts = SplitWhitespace(item);
      if (!parts.empty()) words.push_back(Join(parts, " "));
    }
    if (words.empty()) {
      throw ParseError(path + ":" + std::to_string(lineno) + ": no keywords after event type");
    }
    out[line.substr(first, sep - first)] = std::move(words);
  }
  return out;
}

std::set<std::string> MorphologicalVariants(const std::string &keyword) {
  static const std::map<std::string, std::vector<std::string>> kIrregular = {
      {"buy", {"bought"}},          {"sell", {"sold"}},
      {"pay", {"paid"}},            {"meet", {"met"}},
      {"go", {"went", "gone"}},     {"come", {"came"}},
      {"fight", {"fought"}},        {"shoot", {"shot"}},
      {"hit", {"hit"}},             {"die", {"died", "dying"}},
      {"give", {"gave", "given"}},  {"take", {"took", "taken"}},
      {"send", {"sent"}},           {"lend", {"lent"}},
      {"leave", {"left"}},          {"flee", {"fled"}},
      {"write", {"wrote", "written"}}, {"speak", {"spoke", "spoken"}},
      {"tell", {"told"}},           {"say", {"said"}},
      {"steal", {"stole", "stolen"}}, {"strike", {"struck"}},
      {"bring", {"brought"}},       {"begin", {"began", "begun"}},
      {"hold", {"held"}},           {"lose", {"lost"}},
      {"win", {"won"}},             {"sentence", {"sentenced"}},
      {"bear", {"bore", "born"}},   {"wed", {"wed", "wedded"}},
      {"blow", {"blew", "blown"}},  {"break", {"broke", "broken"}},
      {"hang", {"hanged", "hung"}}, {"catch", {"caught"}},
      {"seek", {"sought"}},         {"sue", {"sued", "suing"}},
  };
  std::string w = ToLower(keyword);
  std::set<std::string> out{w};
  if (w.empty()) return out;
  auto is_vowel = [](char c) { return std::string_view("aeiou").find(c) != std::string_view::npos; };
  const char last = w.back();
  // Plural / third person.
  if (last == 'y' && w.size() > 1 && !is_vowel(w[w.size() - 2])) {
    out.insert(w.substr(0, w.size() - 1) + "ies");
    out.insert(w.substr(0, w.size() - 1) + "ied");
  } else if (last == 's' || last == 'x' || last == 'z' || w.ends_with("ch") ||
             w.ends_with("sh")) {
    out.insert(w + "es");
  } else {
    out.insert(w + "s");
  }
  // Past tense and gerund.
  if (last == 'e') {
    out.insert(w + "d");
    out.insert(w.substr(0, w.size() - 1) + "ing");
  } else {
    out.insert(w + "ed");
    out.insert(w + "ing");
    // Consonant doubling for short CVC stems (stab -> stabbed).
    if (w.size() >= 3 && !is_vowel(last) && last != 'w' && last != 'x' && last != 'y' &&
        is_vowel(w[w.size() - 2]) && !is_vowel(w[w.size() - 3])) {
      out.insert(w + last + "ed");
      out.insert(w + last + "ing");
    }
  }
  if (w.ends_with("ion")) out.insert(w + "s");
  if (auto it = kIrregular.find(w); it != kIrregular.end()) {
    out.insert(it->second.begin(), it->second.end());
  }
  return out;
}

ClassVector BuildClassVector(const EmbeddingBackend &backend, const std::string &event_type,
                             const std::vector<std::string> &keywords,
                             const std::vector<std::vector<std::string>> &sentences,
                             int top_k) {
  if (keywords.empty()) {
    throw ContractViolation("BuildClassVector: no keywords for '" + event_type + "'");
  }
  std::vector<std::set<std::string>> forms;
  for (const auto &k : keywords) forms.push_back(MorphologicalVariants(k));

  Eigen::VectorXd kept = Eigen::VectorXd::Zero(backend.dim());
  Eigen::VectorXd all = Eigen::VectorXd::Zero(backend.dim());
  int n_kept = 0, n_all = 0;
  for (const auto &sent : sentences) {
    Eigen::MatrixXd h;  // computed lazily per sentence
    for (int i = 0; i < static_cast<int>(sent.size()); ++i) {
      const std::string tok = ToLower(sent[i]);
      const std::set<std::string> *matched = nullptr;
      for (const auto &f : forms) {
        if (f.count(tok)) {
          matched = &f;
          break;
        }
      }
      if (!matched) continue;
      if (h.size() == 0) h = backend.TokenEmbeddings(sent);
      all += h.col(i);
      ++n_all;
      bool retained = false;
      for (const auto &p : backend.TopPredictions(sent, i, top_k)) {
        if (matched->count(ToLower(p))) {
          retained = true;
          break;
        }
      }
      if (retained) {
        kept += h.col(i);
        ++n_kept;
      }
    }
  }
  if (n_all == 0) {
    throw Error("no occurrence of keywords [" + Join(keywords, ", ") + "] for '" +
                event_type + "' in the corpus");
  }
  ClassVector cv{event_type, {}, 0};
  if (n_kept == 0) {
    Warn("class '" + event_type + "': every keyword occurrence was filtered; using all " +
         std::to_string(n_all) + " occurrences");
    cv.vec = all / n_all;
    cv.support_count = n_all;
  } else {
    cv.vec = kept / n_kept;
    cv.support_count = n_kept;
  }
  return cv;
}

NullSpace ComputeProjection(const Eigen::MatrixXd &class_vectors,
                            const Eigen::MatrixXd &references, double lambda) {
  const Eigen::Index d = class_vectors.rows();
  const Eigen::Index k = class_vectors.cols();
  if (references.rows() != d || references.cols() != k) {
    throw ContractViolation("ComputeProjection: class/reference shape mismatch");
  }
  NullSpace out;
  if (k == 0) {
    out.basis = Eigen::MatrixXd::Identity(d, d);
    return out;
  }
  Eigen::MatrixXd D(d, k);
  for (Eigen::Index j = 0; j < k; ++j) {
    const double norm = references.col(j).norm();
    Eigen::VectorXd ref_hat =
        norm > 0 ? Eigen::VectorXd(references.col(j) / norm) : Eigen::VectorXd::Zero(d);
    D.col(j) = class_vectors.col(j) - lambda * ref_hat;
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(D);
  out.rank = static_cast<int>(qr.rank());
  if (out.rank < k) {
    Warn("projection: class matrix has rank " + std::to_string(out.rank) + " < " +
         std::to_string(k) + " classes");
  }
  Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(d, d);
  out.basis = q.rightCols(d - out.rank);
  return out;
}

TapKeyModel::TapKeyModel(int dim, TapKeyConfig config)
    : dim_(dim), config_(config), class_vectors_(dim, 0), phi_(dim, 0) {
  proj_dim_ = config.proj_dim > 0 ? config.proj_dim : dim - config.max_event_types;
  if (proj_dim_ <= 0 || proj_dim_ > dim) {
    throw ContractViolation("TapKeyModel: projection dimension must be in (0, dim]");
  }
  std::mt19937_64 rng(config.seed);
  std::normal_distribution<double> noise(0.0, 0.01);
  phi_o_.resize(dim);
  for (int i = 0; i < dim; ++i) phi_o_[i] = noise(rng);
  w_ = Eigen::VectorXd::Zero(proj_dim_);
  w_o_ = Eigen::VectorXd::Zero(proj_dim_);
  m_ = Eigen::MatrixXd::Identity(dim, dim).rightCols(proj_dim_);
}

int TapKeyModel::TagOf(const std::string &event_type) const {
  auto it = std::find(types_.begin(), types_.end(), event_type);
  return it == types_.end() ? -1 : static_cast<int>(it - types_.begin()) + 1;
}

std::string TapKeyModel::TagName(int tag) const {
  if (tag == kTagO) return "O";
  if (tag == kTagX) return "X";
  return "I-" + types_.at(tag - 1);
}

void TapKeyModel::AddClass(const ClassVector &cv, bool unseen) {
  if (cv.vec.size() != dim_) throw ContractViolation("AddClass: dimension mismatch");
  if (TagOf(cv.event_type) >= 0) {
    throw ContractViolation("AddClass: duplicate class '" + cv.event_type + "'");
  }
  if (dim_ - (num_types() + 1) < proj_dim_) {
    throw ContractViolation("AddClass: more classes than the projection allows");
  }
  const int k = num_types();
  types_.push_back(cv.event_type);
  class_vectors_.conservativeResize(Eigen::NoChange, k + 1);
  class_vectors_.col(k) = cv.vec;
  phi_.conservativeResize(Eigen::NoChange, k + 1);
  if (!unseen && k < dim_) {
    phi_.col(k) = Eigen::VectorXd::Unit(dim_, k);
  } else {
    const double norm = cv.vec.norm();
    phi_.col(k) = norm > 0 ? Eigen::VectorXd(cv.vec / norm) : Eigen::VectorXd::Unit(dim_, k % dim_);
  }
}

void TapKeyModel::RecomputeProjection() {
  NullSpace ns = ComputeProjection(class_vectors_, phi_, config_.lambda);
  if (ns.basis.cols() < proj_dim_) {
    throw Error("projection: null space too small for the configured dimension");
  }
  m_ = ns.basis.rightCols(proj_dim_);
}

Eigen::VectorXd TapKeyModel::Reference(int tag) const {
  return tag == kTagO ? phi_o_ : Eigen::VectorXd(phi_.col(tag - 1));
}

Eigen::VectorXd TapKeyModel::Emission(const Eigen::VectorXd &h) const {
  const Eigen::VectorXd p = m_.transpose() * h;
  Eigen::VectorXd scores(num_tags());
  for (int t = 0; t < num_tags(); ++t) scores[t] = (m_.transpose() * Reference(t)).dot(p);
  return scores.array() - LogSumExpRow(scores);
}

double TapKeyModel::Transition(int prev_tag, int tag, const Eigen::VectorXd &h) const {
  const Eigen::VectorXd *diag = nullptr;
  if (tag == kTagO || prev_tag == kTagO) {
    diag = &w_o_;
  } else if (tag == prev_tag) {
    diag = &w_;
  } else {
    return 0.0;
  }
  const Eigen::VectorXd q = m_.transpose() * Reference(tag);
  const Eigen::VectorXd p = m_.transpose() * h;
  return (q.array() * diag->array() * p.array()).sum();
}

double TapKeyModel::Regularizer() const {
  if (phi_.cols() == 0) return 0.0;
  Eigen::MatrixXd g = phi_.transpose() * phi_ - Eigen::MatrixXd::Identity(phi_.cols(), phi_.cols());
  return config_.alpha * g.squaredNorm();
}

namespace {

nlohmann::json MatrixJson(const Eigen::MatrixXd &m) {
  nlohmann::json cols = nlohmann::json::array();
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    cols.push_back(std::vector<double>(m.col(j).data(), m.col(j).data() + m.rows()));
  }
  return cols;
}

Eigen::MatrixXd MatrixFrom(const nlohmann::json &j, Eigen::Index rows) {
  Eigen::MatrixXd m(rows, static_cast<Eigen::Index>(j.size()));
  for (size_t c = 0; c < j.size(); ++c) {
    auto col = j[c].get<std::vector<double>>();
    if (static_cast<Eigen::Index>(col.size()) != rows) throw ParseError("matrix column size");
    m.col(static_cast<Eigen::Index>(c)) = Eigen::Map<Eigen::VectorXd>(col.data(), rows);
  }
  return m;
}

std::vector<double> VecJson(const Eigen::VectorXd &v) { return {v.data(), v.data() + v.size()}; }

Eigen::VectorXd VecFrom(const nlohmann::json &j) {
  auto v = j.get<std::vector<double>>();
  return Eigen::Map<Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace

void TapKeyModel::Save(std::ostream &out) const {
  nlohmann::json j{{"dim", dim_},
                   {"proj_dim", proj_dim_},
                   {"max_event_types", config_.max_event_types},
                   {"lambda", config_.lambda},
                   {"alpha", config_.alpha},
                   {"seed", config_.seed},
                   {"types", types_},
                   {"class_vectors", MatrixJson(class_vectors_)},
                   {"phi", MatrixJson(phi_)},
                   {"phi_o", VecJson(phi_o_)},
                   {"w", VecJson(w_)},
                   {"w_o", VecJson(w_o_)}};
  out << j.dump() << "\n";
}

TapKeyModel TapKeyModel::Load(std::istream &in) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
    TapKeyConfig cfg;
    cfg.proj_dim = j.at("proj_dim").get<int>();
    cfg.max_event_types = j.at("max_event_types").get<int>();
    cfg.lambda = j.at("lambda").get<double>();
    cfg.alpha = j.at("alpha").get<double>();
    cfg.seed = j.at("seed").get<unsigned>();
    const int dim = j.at("dim").get<int>();
    TapKeyModel model(dim, cfg);
    model.types_ = j.at("types").get<std::vector<std::string>>();
    model.class_vectors_ = MatrixFrom(j.at("class_vectors"), dim);
    model.phi_ = MatrixFrom(j.at("phi"), dim);
    model.phi_o_ = VecFrom(j.at("phi_o"));
    model.w_ = VecFrom(j.at("w"));
    model.w_o_ = VecFrom(j.at("w_o"));
    if (model.class_vectors_.cols() != model.num_types() ||
        model.phi_.cols() != model.num_types() || model.w_.size() != model.proj_dim_ ||
        model.w_o_.size() != model.proj_dim_ || model.phi_o_.size() != dim) {
      throw ParseError("tapkey checkpoint: inconsistent shapes");
    }
    model.RecomputeProjection();
    return model;
  } catch (const nlohmann::json::exception &e) {
    throw ParseError(std::string("tapkey checkpoint: ") + e.what());
  }
}

void TapKeyModel::SaveFile(const std::string &path) const {
  std::ofstream out(path);
  if (!out) throw Error("cannot write '" + path + "'");
  Save(out);
}

TapKeyModel TapKeyModel::LoadFile(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path + "'");
  return Load(in);
}

CrfScores ScoreSentence(const TapKeyModel &model, const Eigen::MatrixXd &h) {
  const int n = static_cast<int>(h.cols());
  const int tags = model.num_tags();
  const Eigen::MatrixXd &m = model.projection();
  Eigen::MatrixXd q(m.cols(), tags);  // projected references
  for (int t = 0; t < tags; ++t) q.col(t) = m.transpose() * model.Reference(t);

  CrfScores s;
  s.emission.resize(n, tags);
  s.transition.assign(n, Eigen::MatrixXd::Zero(tags, tags));
  for (int i = 0; i < n; ++i) {
    const Eigen::VectorXd p = m.transpose() * h.col(i);
    Eigen::VectorXd raw = q.transpose() * p;
    s.emission.row(i) = (raw.array() - LogSumExpRow(raw)).transpose();
    const Eigen::VectorXd wp = model.w().cwiseProduct(p);
    const Eigen::VectorXd wop = model.w_o().cwiseProduct(p);
    for (int k = 0; k < tags; ++k) {
      const double with_o = q.col(k).dot(wop);
      const double same = q.col(k).dot(wp);
      for (int l = 0; l < tags; ++l) {
        if (k == kTagO || l == kTagO) {
          s.transition[i](l, k) = with_o;
        } else if (k == l) {
          s.transition[i](l, k) = same;
        }
      }
    }
  }
  return s;
}

double PathScore(const CrfScores &scores, const TagSequence &tags) {
  double total = 0.0;
  int prev = kTagO;
  for (size_t i = 0; i < tags.size(); ++i) {
    total += scores.emission(static_cast<Eigen::Index>(i), tags[i]) +
             scores.transition[i](prev, tags[i]);
    prev = tags[i];
  }
  return total;
}

namespace {

// Forward log-messages: alpha(i, k).
Eigen::MatrixXd ForwardMessages(const CrfScores &s) {
  const Eigen::Index n = s.emission.rows(), t = s.emission.cols();
  Eigen::MatrixXd alpha(n, t);
  for (Eigen::Index k = 0; k < t; ++k) {
    alpha(0, k) = s.emission(0, k) + s.transition[0](kTagO, k);
  }
  Eigen::VectorXd tmp(t);
  for (Eigen::Index i = 1; i < n; ++i) {
    for (Eigen::Index k = 0; k < t; ++k) {
      for (Eigen::Index l = 0; l < t; ++l) tmp[l] = alpha(i - 1, l) + s.transition[i](l, k);
      alpha(i, k) = s.emission(i, k) + LogSumExpRow(tmp);
    }
  }
  return alpha;
}

Eigen::MatrixXd BackwardMessages(const CrfScores &s) {
  const Eigen::Index n = s.emission.rows(), t = s.emission.cols();
  Eigen::MatrixXd beta = Eigen::MatrixXd::Zero(n, t);
  Eigen::VectorXd tmp(t);
  for (Eigen::Index i = n - 2; i >= 0; --i) {
    for (Eigen::Index l = 0; l < t; ++l) {
      for (Eigen::Index k = 0; k < t; ++k) {
        tmp[k] = s.transition[i + 1](l, k) + s.emission(i + 1, k) + beta(i + 1, k);
      }
      beta(i, l) = LogSumExpRow(tmp);
    }
  }
  return beta;
}

}  // namespace

double LogPartition(const CrfScores &scores) {
  if (scores.emission.rows() == 0) return 0.0;
  Eigen::MatrixXd alpha = ForwardMessages(scores);
  return LogSumExpRow(alpha.row(alpha.rows() - 1).transpose());
}

double SequenceLogProb(const TapKeyModel &model, const Eigen::MatrixXd &h,
                       const TagSequence &tags) {
  if (static_cast<Eigen::Index>(tags.size()) != h.cols()) {
    throw ContractViolation("SequenceLogProb: tag/token length mismatch");
  }
  CrfScores s = ScoreSentence(model, h);
  return PathScore(s, tags) - LogPartition(s);
}

Eigen::MatrixXd TagMarginals(const CrfScores &scores) {
  const Eigen::Index n = scores.emission.rows();
  if (n == 0) return Eigen::MatrixXd(0, scores.emission.cols());
  Eigen::MatrixXd alpha = ForwardMessages(scores);
  Eigen::MatrixXd beta = BackwardMessages(scores);
  const double log_z = LogSumExpRow(alpha.row(n - 1).transpose());
  return (alpha + beta).array().unaryExpr([&](double x) { return std::exp(x - log_z); });
}

TagSequence Viterbi(const CrfScores &s) {
  const Eigen::Index n = s.emission.rows(), t = s.emission.cols();
  TagSequence path(n);
  if (n == 0) return path;
  Eigen::MatrixXd delta(n, t);
  Eigen::MatrixXi back = Eigen::MatrixXi::Zero(n, t);
  for (Eigen::Index k = 0; k < t; ++k) delta(0, k) = s.emission(0, k) + s.transition[0](kTagO, k);
  for (Eigen::Index i = 1; i < n; ++i) {
    for (Eigen::Index k = 0; k < t; ++k) {
      double best = kNegInf;
      int arg = 0;
      for (Eigen::Index l = 0; l < t; ++l) {
        const double v = delta(i - 1, l) + s.transition[i](l, k);
        if (v > best) {  // strict: lower index (O first) wins ties
          best = v;
          arg = static_cast<int>(l);
        }
      }
      delta(i, k) = s.emission(i, k) + best;
      back(i, k) = arg;
    }
  }
  int last = 0;
  for (Eigen::Index k = 1; k < t; ++k) {
    if (delta(n - 1, k) > delta(n - 1, last)) last = static_cast<int>(k);
  }
  path[n - 1] = last;
  for (Eigen::Index i = n - 1; i > 0; --i) path[i - 1] = back(i, path[i]);
  return path;
}

TagSequence Viterbi(const TapKeyModel &model, const Eigen::MatrixXd &h) {
  return Viterbi(ScoreSentence(model, h));
}

std::vector<TagSequence> PseudoLabel(const std::vector<ClassVector> &classes,
                                     const EmbeddingBackend &backend,
                                     const std::vector<std::vector<std::string>> &sentences,
                                     double tau_i, double tau_o) {
  std::vector<TagSequence> out;
  out.reserve(sentences.size());
  for (const auto &sent : sentences) {
    Eigen::MatrixXd h = backend.TokenEmbeddings(sent);
    TagSequence tags(sent.size(), kTagO);
    for (Eigen::Index i = 0; i < h.cols(); ++i) {
      const double hn = h.col(i).norm();
      double best = -2.0;
      int best_class = -1;
      for (size_t k = 0; k < classes.size(); ++k) {
        const double cn = classes[k].vec.norm();
        const double cos = hn > 0 && cn > 0 ? h.col(i).dot(classes[k].vec) / (hn * cn) : 0.0;
        if (cos > best) {
          best = cos;
          best_class = static_cast<int>(k);
        }
      }
      if (best_class >= 0 && best >= tau_i) {
        tags[i] = best_class + 1;
      } else if (best_class < 0 || best <= tau_o) {
        tags[i] = kTagO;
      } else {
        tags[i] = kTagX;
      }
    }
    out.push_back(std::move(tags));
  }
  return out;
}

namespace {

// Accumulates d(score)/d(params) for a transition entry with weight c.
void AddTransitionGrad(const TapKeyModel &model, const Eigen::MatrixXd &q, const Eigen::VectorXd &p,
                       int l, int k, double c, Eigen::MatrixXd *dq, TapKeyGradient *g) {
  if (c == 0.0) return;
  if (k == kTagO || l == kTagO) {
    dq->col(k) += c * model.w_o().cwiseProduct(p);
    g->w_o += c * q.col(k).cwiseProduct(p);
  } else if (k == l) {
    dq->col(k) += c * model.w().cwiseProduct(p);
    g->w += c * q.col(k).cwiseProduct(p);
  }
}

}  // namespace

double TapKeyLoss(const TapKeyModel &model, const std::vector<TaggedSentence> &data,
                  TapKeyGradient *grad) {
  const int tags = model.num_tags();
  const Eigen::MatrixXd &m = model.projection();
  const Eigen::Index r = m.cols();
  Eigen::MatrixXd q(r, tags);
  for (int t = 0; t < tags; ++t) q.col(t) = m.transpose() * model.Reference(t);

  // Gradients of the summed log-likelihood wrt projected references.
  Eigen::MatrixXd dq = Eigen::MatrixXd::Zero(r, tags);
  TapKeyGradient g{Eigen::MatrixXd::Zero(model.dim(), model.num_types()),
                   Eigen::VectorXd::Zero(model.dim()), Eigen::VectorXd::Zero(r),
                   Eigen::VectorXd::Zero(r)};
  double loglik = 0.0;
  int units = 0;  // sequences (CRF) plus labelled tokens (token mode)

  std::vector<const TaggedSentence *> crf, tokenwise;
  for (const auto &s : data) {
    if (static_cast<Eigen::Index>(s.tags.size()) != s.h.cols()) {
      throw ContractViolation("TapKeyLoss: tag/token length mismatch");
    }
    const bool has_x = std::find(s.tags.begin(), s.tags.end(), kTagX) != s.tags.end();
    (has_x ? tokenwise : crf).push_back(&s);
  }
  for (const TaggedSentence *s : crf) {
    if (s->tags.empty()) continue;
    CrfScores sc = ScoreSentence(model, s->h);
    Eigen::MatrixXd alpha = ForwardMessages(sc);
    Eigen::MatrixXd beta = BackwardMessages(sc);
    const Eigen::Index n = s->h.cols();
    const double log_z = LogSumExpRow(alpha.row(n - 1).transpose());
    loglik += PathScore(sc, s->tags) - log_z;
    ++units;
    if (!grad) continue;
    for (Eigen::Index i = 0; i < n; ++i) {
      const Eigen::VectorXd p = m.transpose() * s->h.col(i);
      // Emissions: observed minus expected; the softmax term cancels.
      for (int k = 0; k < tags; ++k) {
        const double mu = std::exp(alpha(i, k) + beta(i, k) - log_z);
        const double c = (s->tags[i] == k ? 1.0 : 0.0) - mu;
        dq.col(k) += c * p;
      }
      // Transitions.
      const int prev = i == 0 ? kTagO : s->tags[i - 1];
      AddTransitionGrad(model, q, p, prev, s->tags[i], 1.0, &dq, &g);
      for (int k = 0; k < tags; ++k) {
        if (i == 0) {
          const double mu = std::exp(alpha(0, k) + beta(0, k) - log_z);
          AddTransitionGrad(model, q, p, kTagO, k, -mu, &dq, &g);
          continue;
        }
        for (int l = 0; l < tags; ++l) {
          const double xi = std::exp(alpha(i - 1, l) + sc.transition[i](l, k) +
                                     sc.emission(i, k) + beta(i, k) - log_z);
          AddTransitionGrad(model, q, p, l, k, -xi, &dq, &g);
        }
      }
    }
  }
  for (const TaggedSentence *s : tokenwise) {
    for (Eigen::Index i = 0; i < s->h.cols(); ++i) {
      const int y = s->tags[i];
      if (y == kTagX) continue;
      const Eigen::VectorXd p = m.transpose() * s->h.col(i);
      Eigen::VectorXd raw = q.transpose() * p;
      const double lse = LogSumExpRow(raw);
      loglik += raw[y] - lse;
      ++units;
      if (!grad) continue;
      Eigen::VectorXd prob = (raw.array() - lse).exp();
      for (int k = 0; k < tags; ++k) dq.col(k) += ((y == k ? 1.0 : 0.0) - prob[k]) * p;
    }
  }

  const double scale = units > 0 ? 1.0 / units : 0.0;
  const double loss = -loglik * scale + model.Regularizer();
  if (grad) {
    // Chain through q_k = M^T phi_k and negate/scale for the loss.
    g.phi_o = -scale * (m * dq.col(kTagO));
    for (int k = 1; k < tags; ++k) g.phi.col(k - 1) = -scale * (m * dq.col(k));
    g.w *= -scale;
    g.w_o *= -scale;
    const Eigen::MatrixXd &phi = model.phi();
    if (phi.cols() > 0) {
      Eigen::MatrixXd gram = phi.transpose() * phi - Eigen::MatrixXd::Identity(phi.cols(), phi.cols());
      g.phi += 4.0 * model.config().alpha * phi * gram;
    }
    *grad = std::move(g);
  }
  return loss;
}

TapKeyTrainReport TrainTapKey(TapKeyModel &model, const std::vector<TaggedSentence> &data,
                              const TapKeyTrainConfig &config) {
  TapKeyTrainReport report;
  const int d = model.dim(), k = model.num_types(), r = model.proj_dim();
  // Flat layout: phi (d*k) | phi_o (d) | w (r) | w_o (r).
  const int n = d * k + d + 2 * r;
  auto pack = [&](const Eigen::MatrixXd &phi, const Eigen::VectorXd &phi_o,
                  const Eigen::VectorXd &w, const Eigen::VectorXd &w_o) {
    Eigen::VectorXd v(n);
    v << Eigen::Map<const Eigen::VectorXd>(phi.data(), d * k), phi_o, w, w_o;
    return v;
  };
  Eigen::VectorXd mom = Eigen::VectorXd::Zero(n), var = Eigen::VectorXd::Zero(n);
  constexpr double kBeta1 = 0.9, kBeta2 = 0.999, kEps = 1e-8;
  long step = 0;
  std::mt19937 rng(config.seed);
  std::vector<size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    model.RecomputeProjection();
    std::shuffle(order.begin(), order.end(), rng);
    double total = 0.0;
    int batches = 0;
    for (size_t b = 0; b < order.size(); b += config.batch_size) {
      std::vector<TaggedSentence> batch;
      for (size_t j = b; j < std::min(order.size(), b + config.batch_size); ++j) {
        batch.push_back(data[order[j]]);
      }
      TapKeyGradient g;
      const double loss = TapKeyLoss(model, batch, &g);
      if (!std::isfinite(loss)) {
        throw Error("tapkey training diverged at epoch " + std::to_string(epoch) +
                    " (loss " + std::to_string(loss) + ", |phi| " +
                    std::to_string(model.phi().norm()) + ")");
      }
      total += loss;
      ++batches;
      Eigen::VectorXd grad = pack(g.phi, g.phi_o, g.w, g.w_o);
      Eigen::VectorXd params = pack(model.phi(), model.phi_o(), model.w(), model.w_o());
      ++step;
      mom = kBeta1 * mom + (1 - kBeta1) * grad;
      var = kBeta2 * var + (1 - kBeta2) * grad.cwiseProduct(grad);
      const double c1 = 1 - std::pow(kBeta1, step), c2 = 1 - std::pow(kBeta2, step);
      params.array() -= config.learning_rate * (mom.array() / c1) / ((var.array() / c2).sqrt() + kEps);
      model.mutable_phi() = Eigen::Map<const Eigen::MatrixXd>(params.data(), d, k);
      model.mutable_phi_o() = params.segment(d * k, d);
      model.mutable_w() = params.segment(d * k + d, r);
      model.mutable_w_o() = params.segment(d * k + d + r, r);
    }
    report.epoch_loss.push_back(batches ? total / batches : 0.0);
  }
  model.RecomputeProjection();
  return report;
}

std::vector<std::tuple<int, int, int>> TagRuns(const TagSequence &tags) {
  std::vector<std::tuple<int, int, int>> runs;
  const int n = static_cast<int>(tags.size());
  for (int i = 0; i < n;) {
    if (tags[i] <= kTagO) {
      ++i;
      continue;
    }
    int j = i + 1;
    while (j < n && tags[j] == tags[i]) ++j;
    runs.emplace_back(i, j, tags[i]);
    i = j;
  }
  return runs;
}

std::vector<TriggerPrediction> PredictTriggers(const TapKeyModel &model,
                                               const EmbeddingBackend &backend,
                                               const Document &doc) {
  std::vector<TriggerPrediction> out;
  for (size_t s = 0; s < doc.sentence_boundaries.size(); ++s) {
    const TokenSpan &sent = doc.sentence_boundaries[s];
    if (sent.empty()) continue;
    std::vector<std::string> words(doc.tokens.begin() + sent.start, doc.tokens.begin() + sent.end);
    CrfScores sc = ScoreSentence(model, backend.TokenEmbeddings(words));
    TagSequence path = Viterbi(sc);
    Eigen::MatrixXd marg = TagMarginals(sc);
    for (const auto &[b, e, tag] : TagRuns(path)) {
      double score = 0.0;
      for (int i = b; i < e; ++i) score += marg(i, tag);
      out.push_back({doc.doc_id, static_cast<int>(s), {sent.start + b, sent.start + e},
                     model.types()[tag - 1], score / (e - b)});
    }
  }
  return out;
}

}  // namespace evx
