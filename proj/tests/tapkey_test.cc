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

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "doctest.h"

#include "eventx/tapkey.h"
#include "support/mocks.h"

using namespace evx;
using evx::testing::AllTagSequences;
using evx::testing::RandomTapKeyModel;

namespace {

// Embedding backend with a fixed vector per word and a fixed masked
// prediction per word.
class TableBackend : public EmbeddingBackend {
 public:
  explicit TableBackend(int dim) : dim_(dim) {}
  void Set(const std::string &w, Eigen::VectorXd v) { vecs_[w] = std::move(v); }
  // Masked prediction at any occurrence of `w` ranks `top` first.
  void Predict(const std::string &w, const std::string &top) { predict_[w] = top; }

  int dim() const override { return dim_; }
  Eigen::MatrixXd TokenEmbeddings(const std::vector<std::string> &s) const override {
    Eigen::MatrixXd h(dim_, s.size());
    for (size_t i = 0; i < s.size(); ++i) {
      auto it = vecs_.find(s[i]);
      h.col(i) = it == vecs_.end() ? Eigen::VectorXd::Zero(dim_) : it->second;
    }
    return h;
  }
  Eigen::VectorXd MaskedPrediction(const std::vector<std::string> &s, int pos) const override {
    Eigen::VectorXd lp = Eigen::VectorXd::Constant(vocab_.size(), -5.0);
    auto it = predict_.find(s[pos]);
    const std::string top = it == predict_.end() ? s[pos] : it->second;
    for (size_t i = 0; i < vocab_.size(); ++i) {
      if (vocab_[i] == top) lp[i] = -0.1;
    }
    return lp;
  }
  const std::vector<std::string> &PredictionVocabulary() const override { return vocab_; }
  std::vector<std::string> vocab_;

 private:
  int dim_;
  std::map<std::string, Eigen::VectorXd> vecs_;
  std::map<std::string, std::string> predict_;
};

Eigen::VectorXd Vec(std::initializer_list<double> v) {
  Eigen::VectorXd out(v.size());
  int i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

Eigen::MatrixXd RandomH(int d, int n, std::mt19937 &rng, double scale = 1.0) {
  std::normal_distribution<double> normal(0.0, scale);
  Eigen::MatrixXd h(d, n);
  for (int i = 0; i < d * n; ++i) h.data()[i] = normal(rng);
  return h;
}

// Path score straight from the model's per-position definitions.
double OraclePathScore(const TapKeyModel &m, const Eigen::MatrixXd &h, const TagSequence &y) {
  double s = 0;
  int prev = kTagO;
  for (size_t i = 0; i < y.size(); ++i) {
    s += m.Emission(h.col(i))[y[i]] + m.Transition(prev, y[i], h.col(i));
    prev = y[i];
  }
  return s;
}

double LogSumExpVec(const std::vector<double> &v) {
  double mx = *std::max_element(v.begin(), v.end());
  double s = 0;
  for (double x : v) s += std::exp(x - mx);
  return mx + std::log(s);
}

}  // namespace

TEST_CASE("lexicon embedding backend") {
  auto path = std::filesystem::temp_directory_path() / "eventx_vectors.txt";
  {
    std::ofstream f(path);
    f << "3 2\nattack 1 0\nBomb 0.5 0.5\nmeet 0 1\n";
  }
  auto b = LexiconEmbeddingBackend::LoadVectors(path.string(), 0.5);
  CHECK(b->dim() == 2);
  CHECK(b->PredictionVocabulary() == std::vector<std::string>{"attack", "bomb", "meet"});
  CHECK(b->WordVector("ATTACK") == Vec({1, 0}));
  // Unknown words get a stable hashed vector.
  CHECK(b->WordVector("zebra") == b->WordVector("Zebra"));
  CHECK(b->WordVector("zebra") != b->WordVector("yak"));

  Eigen::MatrixXd h = b->TokenEmbeddings({"attack", "bomb", "meet"});
  CHECK(h.col(0).isApprox(Vec({1, 0}) + 0.5 * Vec({0.5, 0.5})));
  CHECK(h.col(1).isApprox(Vec({0.5, 0.5}) + 0.5 * Vec({0.5, 0.5})));
  CHECK(h.col(2).isApprox(Vec({0, 1}) + 0.5 * Vec({0.5, 0.5})));

  Eigen::VectorXd lp = b->MaskedPrediction({"attack", "bomb", "meet"}, 1);
  CHECK(LogSumExp(lp) == doctest::Approx(0.0));
  // Context mean (0.5, 0.5) scores every word 0.5 -> uniform.
  CHECK(std::exp(lp[0]) == doctest::Approx(1.0 / 3));
  CHECK(b->TopPredictions({"attack", "bomb", "meet"}, 1, 2) ==
        std::vector<std::string>{"attack", "bomb"});
  CHECK_THROWS_AS(b->MaskedPrediction({"attack"}, 3), ContractViolation);

  {
    std::ofstream f(path);
    f << "a 1 2\nb 1\n";
  }
  CHECK_THROWS_AS(LexiconEmbeddingBackend::LoadVectors(path.string()), ParseError);
  std::filesystem::remove(path);
  CHECK_THROWS_AS(LexiconEmbeddingBackend::LoadVectors(path.string()), Error);
}

TEST_CASE("keyword files and variants") {
  auto path = std::filesystem::temp_directory_path() / "eventx_keywords.txt";
  {
    std::ofstream f(path);
    f << "# seeds\nPersonnel.StartPosition hire, employ, appoint\n\nConflict.Attack attack\n";
  }
  auto kw = LoadKeywordFile(path.string());
  CHECK(kw.at("Personnel.StartPosition") ==
        std::vector<std::string>{"hire", "employ", "appoint"});
  CHECK(kw.at("Conflict.Attack") == std::vector<std::string>{"attack"});
  {
    std::ofstream f(path);
    f << "Lonely.Type\n";
  }
  CHECK_THROWS_AS(LoadKeywordFile(path.string()), ParseError);
  std::filesystem::remove(path);

  auto kill = MorphologicalVariants("kill");
  CHECK(kill.count("killed"));
  CHECK(kill.count("kills"));
  CHECK(kill.count("killing"));
  CHECK(MorphologicalVariants("hire").count("hired"));
  CHECK(MorphologicalVariants("hire").count("hiring"));
  CHECK(MorphologicalVariants("employ").count("employed"));
  CHECK(MorphologicalVariants("bury").count("buried"));
  CHECK(MorphologicalVariants("stab").count("stabbed"));
  CHECK(MorphologicalVariants("pay").count("paid"));
  CHECK(MorphologicalVariants("Die").count("died"));
  CHECK(MorphologicalVariants("attack").count("attack"));
}

TEST_CASE("class vectors") {
  TableBackend b(3);
  b.vocab_ = {"hire", "employ", "appoint", "fire", "the"};
  b.Set("hired", Vec({1, 0, 0}));
  b.Set("employ", Vec({0, 1, 0}));
  b.Set("appointed", Vec({0, 0, 1}));
  b.Set("the", Vec({1, 1, 1}));

  SUBCASE("single retained occurrence") {
    auto cv = BuildClassVector(b, "Personnel.StartPosition", {"hire", "employ", "appoint"},
                               {{"the", "hired"}}, 50);
    CHECK(cv.vec == Vec({1, 0, 0}));
    CHECK(cv.support_count == 1);
  }
  SUBCASE("two retained occurrences average") {
    auto cv = BuildClassVector(b, "Personnel.StartPosition", {"hire", "employ", "appoint"},
                               {{"the", "hired"}, {"employ", "the"}}, 50);
    CHECK(cv.vec.isApprox(Vec({0.5, 0.5, 0})));
    CHECK(cv.support_count == 2);
  }
  SUBCASE("ambiguous occurrences are filtered") {
    b.Predict("appointed", "fire");
    auto cv = BuildClassVector(b, "Personnel.StartPosition", {"hire", "appoint"},
                               {{"hired"}, {"appointed"}}, 1);
    CHECK(cv.vec == Vec({1, 0, 0}));
    CHECK(cv.support_count == 1);
  }
  SUBCASE("falls back to all occurrences with a warning") {
    b.Predict("hired", "fire");
    ScopedWarningCapture capture;
    auto cv = BuildClassVector(b, "T", {"hire"}, {{"hired"}, {"the", "hired"}}, 1);
    CHECK(cv.vec == Vec({1, 0, 0}));
    CHECK(cv.support_count == 2);
    CHECK(capture.messages().size() == 1);
  }
  SUBCASE("no occurrence is an error naming the keywords") {
    try {
      BuildClassVector(b, "T", {"hire", "employ"}, {{"the"}}, 50);
      FAIL("expected Error");
    } catch (const Error &e) {
      CHECK(std::string(e.what()).find("hire, employ") != std::string::npos);
    }
  }
}

TEST_CASE("projection") {
  SUBCASE("axis aligned null space") {
    Eigen::MatrixXd c = Vec({1, 0, 0});
    Eigen::MatrixXd phi = Vec({0, 1, 0});
    NullSpace ns = ComputeProjection(c, phi, 0.0);
    REQUIRE(ns.basis.cols() == 2);
    CHECK((ns.basis.transpose() * Vec({1, 0, 0})).norm() < 1e-12);
    CHECK(ns.basis.col(0)[0] == doctest::Approx(0.0));
    CHECK(ns.basis.col(1)[0] == doctest::Approx(0.0));
    // With lambda, D = c - lambda * phi_hat.
    NullSpace ns2 = ComputeProjection(c, 2.0 * phi, 0.5);
    CHECK((ns2.basis.transpose() * Vec({1, -0.5, 0})).norm() < 1e-12);
  }
  SUBCASE("random instances") {
    std::mt19937 rng(8);
    for (int t = 0; t < 50; ++t) {
      Eigen::MatrixXd c = RandomH(8, 3, rng), phi = RandomH(8, 3, rng);
      NullSpace ns = ComputeProjection(c, phi, 0.5);
      CHECK(ns.rank == 3);
      CHECK(ns.basis.cols() == 5);
      for (int k = 0; k < 3; ++k) {
        Eigen::VectorXd dk = c.col(k) - 0.5 * phi.col(k).normalized();
        CHECK((ns.basis.transpose() * dk).norm() <= 1e-6);
      }
      CHECK((ns.basis.transpose() * ns.basis - Eigen::MatrixXd::Identity(5, 5)).norm() <= 1e-10);
      // lambda = 0: null space of the class vectors themselves.
      NullSpace plain = ComputeProjection(c, phi, 0.0);
      CHECK((plain.basis.transpose() * c).norm() <= 1e-10);
    }
  }
  SUBCASE("rank deficiency warns and widens the basis") {
    Eigen::MatrixXd c(4, 2);
    c << 1, 1, 0, 0, 0, 0, 0, 0;
    Eigen::MatrixXd phi = Eigen::MatrixXd::Zero(4, 2);
    ScopedWarningCapture capture;
    NullSpace ns = ComputeProjection(c, phi, 0.5);
    CHECK(ns.rank == 1);
    CHECK(ns.basis.cols() == 3);
    CHECK(capture.messages().size() == 1);
  }
}

TEST_CASE("model construction and zero-shot class addition") {
  TapKeyConfig cfg;
  cfg.max_event_types = 3;
  TapKeyModel m(6, cfg);
  CHECK(m.proj_dim() == 3);
  CHECK(m.w().isZero());
  CHECK(m.w_o().isZero());
  CHECK(m.phi_o().norm() > 0);
  CHECK(m.phi_o().norm() < 0.2);
  std::mt19937 rng(1);
  for (int k = 0; k < 2; ++k) m.AddClass({"Seen" + std::to_string(k), RandomH(6, 1, rng).col(0), 1});
  CHECK(m.phi() == Eigen::MatrixXd::Identity(6, 2));
  CHECK(m.Regularizer() == 0.0);
  CHECK(m.TagOf("Seen1") == 2);
  CHECK(m.TagOf("Nope") == -1);
  CHECK(m.TagName(0) == "O");
  CHECK(m.TagName(2) == "I-Seen1");
  m.RecomputeProjection();

  const Eigen::MatrixXd phi_before = m.phi();
  const Eigen::VectorXd phi_o = m.phi_o(), w = m.w(), w_o = m.w_o();
  const Eigen::VectorXd c = RandomH(6, 1, rng).col(0);
  m.AddClass({"Unseen", c, 1}, true);
  m.RecomputeProjection();
  CHECK(m.num_tags() == 4);
  CHECK(m.phi().leftCols(2) == phi_before);
  CHECK(m.phi().col(2).isApprox(c.normalized()));
  CHECK(m.phi_o() == phi_o);
  CHECK(m.w() == w);
  CHECK(m.w_o() == w_o);
  CHECK(m.projection().cols() == 3);
  CHECK_THROWS_AS(m.AddClass({"Unseen", c, 1}), ContractViolation);
  CHECK_THROWS_AS(m.AddClass({"Fourth", c, 1}), ContractViolation);
  CHECK_THROWS_AS(m.AddClass({"Bad", Vec({1, 2}), 1}), ContractViolation);
}

TEST_CASE("projection invariant holds after every recomputation") {
  std::mt19937 rng(4);
  for (int t = 0; t < 30; ++t) {
    TapKeyModel m = RandomTapKeyModel(10, 4, rng);
    for (int k = 0; k < 4; ++k) {
      Eigen::VectorXd dk = m.class_vectors().col(k) - m.config().lambda * m.phi().col(k).normalized();
      CHECK((m.projection().transpose() * dk).norm() <= 1e-5);
    }
    const Eigen::MatrixXd mtm = m.projection().transpose() * m.projection();
    CHECK((mtm - Eigen::MatrixXd::Identity(mtm.rows(), mtm.cols())).norm() <= 1e-5);
  }
}

TEST_CASE("emission and transition scores by hand") {
  TapKeyConfig cfg;
  cfg.max_event_types = 2;
  TapKeyModel m(4, cfg);
  m.AddClass({"Attack", Vec({1, 0, 0, 0}), 1});
  m.AddClass({"Die", Vec({0, 1, 0, 0}), 1});
  Eigen::MatrixXd proj(4, 2);
  proj << 1, 0, 0, 1, 0, 0, 0, 0;
  m.set_projection(proj);
  m.mutable_phi() << 1, 0, 0, 2, 5, 5, 5, 5;
  m.mutable_phi_o() = Vec({0.5, 0.5, 9, 9});
  const Eigen::VectorXd h = Vec({1, 2, 3, 4});
  // Projected: p = (1, 2); q_O = (0.5, 0.5), q_1 = (1, 0), q_2 = (0, 2).
  const double s0 = 1.5, s1 = 1.0, s2 = 4.0;
  const double lse = std::log(std::exp(s0) + std::exp(s1) + std::exp(s2));
  Eigen::VectorXd e = m.Emission(h);
  CHECK(e[0] == doctest::Approx(s0 - lse));
  CHECK(e[1] == doctest::Approx(s1 - lse));
  CHECK(e[2] == doctest::Approx(s2 - lse));

  m.mutable_w() = Vec({0.3, -0.2});
  m.mutable_w_o() = Vec({2.0, 0.5});
  CHECK(m.Transition(1, 2, h) == 0.0);
  CHECK(m.Transition(2, 2, h) == doctest::Approx(0.3 * 0 * 1 + -0.2 * 2 * 2));
  CHECK(m.Transition(0, 1, h) == doctest::Approx(2.0 * 1 * 1 + 0.5 * 0 * 2));
  CHECK(m.Transition(1, 0, h) == doctest::Approx(2.0 * 0.5 * 1 + 0.5 * 0.5 * 2));
  m.mutable_w().setZero();
  CHECK(m.Transition(1, 1, h) == 0.0);

  SUBCASE("identical projected references tie") {
    m.mutable_phi().col(1) = m.phi().col(0);
    Eigen::VectorXd tied = m.Emission(h);
    CHECK(tied[1] == doctest::Approx(tied[2]));
  }
  SUBCASE("aligned token picks its tag") {
    m.mutable_phi() << 1, 0, 0, 1, 0, 0, 0, 0;
    m.mutable_phi_o().setZero();
    Eigen::Index arg;
    m.Emission(Vec({3, 0, 0, 0})).maxCoeff(&arg);
    CHECK(arg == 1);
  }
}

TEST_CASE("emission argmax is invariant under positive rescaling") {
  std::mt19937 rng(6);
  for (int t = 0; t < 100; ++t) {
    TapKeyModel m = RandomTapKeyModel(8, 3, rng);
    Eigen::VectorXd h = RandomH(8, 1, rng).col(0);
    Eigen::Index a, b;
    m.Emission(h).maxCoeff(&a);
    m.Emission(h * (0.1 + 5.0 * (rng() % 100) / 100.0)).maxCoeff(&b);
    CHECK(a == b);
  }
}

TEST_CASE("regularizer") {
  std::mt19937 rng(2);
  TapKeyModel m = RandomTapKeyModel(6, 3, rng);
  CHECK(m.Regularizer() > 0);
  // Orthonormal but not identity columns also give zero.
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(RandomH(6, 3, rng));
  m.mutable_phi() = qr.householderQ() * Eigen::MatrixXd::Identity(6, 3);
  CHECK(m.Regularizer() == doctest::Approx(0.0).epsilon(1e-12));
  const Eigen::MatrixXd phi = m.phi();
  const double alpha = m.config().alpha;
  m.mutable_phi() = 2.0 * phi;
  // ||4I - I||^2 = 9 * 3.
  CHECK(m.Regularizer() == doctest::Approx(alpha * 27));
}

TEST_CASE("CRF against exhaustive enumeration") {
  std::mt19937 rng(12);
  for (int t = 0; t < 20; ++t) {
    const int k = 1 + t % 3;
    TapKeyModel m = RandomTapKeyModel(7, k, rng, 1.5);
    for (int n = 1; n <= 4; ++n) {
      Eigen::MatrixXd h = RandomH(7, n, rng, 1.5);
      CrfScores sc = ScoreSentence(m, h);
      std::vector<double> scores;
      TagSequence best;
      double best_score = -1e300;
      auto all = AllTagSequences(n, m.num_tags());
      for (const auto &y : all) {
        const double s = OraclePathScore(m, h, y);
        CHECK(PathScore(sc, y) == doctest::Approx(s).epsilon(1e-12));
        scores.push_back(s);
        if (s > best_score) best_score = s, best = y;
      }
      const double log_z = LogSumExpVec(scores);
      CHECK(std::abs(LogPartition(sc) - log_z) <= 1e-6);
      CHECK(Viterbi(sc) == best);
      double total = 0;
      Eigen::MatrixXd marg_oracle = Eigen::MatrixXd::Zero(n, m.num_tags());
      for (size_t i = 0; i < all.size(); ++i) {
        const double p = std::exp(SequenceLogProb(m, h, all[i]));
        CHECK(p == doctest::Approx(std::exp(scores[i] - log_z)).epsilon(1e-9));
        total += p;
        for (int j = 0; j < n; ++j) marg_oracle(j, all[i][j]) += p;
      }
      CHECK(std::abs(total - 1.0) <= 1e-6);
      CHECK((TagMarginals(sc) - marg_oracle).cwiseAbs().maxCoeff() <= 1e-9);
    }
  }
}

TEST_CASE("length one sequence is a log-softmax of combined scores") {
  std::mt19937 rng(13);
  TapKeyModel m = RandomTapKeyModel(5, 2, rng);
  Eigen::MatrixXd h = RandomH(5, 1, rng);
  Eigen::VectorXd combined(m.num_tags());
  for (int k = 0; k < m.num_tags(); ++k) {
    combined[k] = m.Emission(h.col(0))[k] + m.Transition(kTagO, k, h.col(0));
  }
  for (int k = 0; k < m.num_tags(); ++k) {
    CHECK(SequenceLogProb(m, h, {k}) == doctest::Approx(combined[k] - LogSumExp(combined)));
  }
}

TEST_CASE("viterbi with overwhelming O emissions") {
  TapKeyConfig cfg;
  cfg.max_event_types = 2;
  TapKeyModel m(4, cfg);
  m.AddClass({"A", Vec({1, 0, 0, 0}), 1});
  m.AddClass({"B", Vec({0, 1, 0, 0}), 1});
  Eigen::MatrixXd proj = Eigen::MatrixXd::Identity(4, 2);
  m.set_projection(proj);
  m.mutable_phi_o() = Vec({10, 10, 0, 0});
  Eigen::MatrixXd h = Eigen::MatrixXd::Constant(4, 5, 1.0);
  CHECK(Viterbi(m, h) == TagSequence(5, kTagO));

  SUBCASE("ties go to O") {
    m.mutable_phi_o().setZero();
    m.mutable_phi().setZero();
    CHECK(Viterbi(m, h) == TagSequence(5, kTagO));
  }
}

TEST_CASE("loss gradients match finite differences") {
  std::mt19937 rng(21);
  for (int trial = 0; trial < 5; ++trial) {
    TapKeyModel m = RandomTapKeyModel(6, 2, rng, 0.8);
    std::vector<TaggedSentence> data;
    for (int s = 0; s < 3; ++s) {
      TaggedSentence ts{RandomH(6, 3, rng), {}};
      for (int i = 0; i < 3; ++i) ts.tags.push_back(rng() % 3);
      data.push_back(ts);
    }
    // One pseudo-labelled sentence trains token classification only.
    data.push_back({RandomH(6, 3, rng), {1, kTagX, 0}});

    TapKeyGradient g;
    const double loss = TapKeyLoss(m, data, &g);
    CHECK(std::isfinite(loss));
    const int d = 6, k = 2, r = m.proj_dim();
    Eigen::VectorXd x(d * k + d + 2 * r), analytic(x.size());
    x << Eigen::Map<const Eigen::VectorXd>(m.phi().data(), d * k), m.phi_o(), m.w(), m.w_o();
    analytic << Eigen::Map<const Eigen::VectorXd>(g.phi.data(), d * k), g.phi_o, g.w, g.w_o;
    auto f = [&](const Eigen::VectorXd &v) {
      TapKeyModel c = m;
      c.mutable_phi() = Eigen::Map<const Eigen::MatrixXd>(v.data(), d, k);
      c.mutable_phi_o() = v.segment(d * k, d);
      c.mutable_w() = v.segment(d * k + d, r);
      c.mutable_w_o() = v.segment(d * k + d + r, r);
      return TapKeyLoss(c, data, nullptr);
    };
    Eigen::VectorXd numeric = evx::testing::NumericGradient(f, x);
    CHECK(evx::testing::RelativeError(analytic, numeric) <= 1e-4);
  }
}

TEST_CASE("loss without the penalty is the mean negative log-likelihood") {
  std::mt19937 rng(22);
  TapKeyConfig cfg;
  cfg.max_event_types = 2;
  cfg.alpha = 0.0;
  TapKeyModel m(5, cfg);
  m.AddClass({"A", RandomH(5, 1, rng).col(0), 1});
  m.AddClass({"B", RandomH(5, 1, rng).col(0), 1});
  m.mutable_w() = RandomH(m.proj_dim(), 1, rng).col(0);
  m.RecomputeProjection();
  std::vector<TaggedSentence> data = {{RandomH(5, 3, rng), {0, 1, 1}},
                                      {RandomH(5, 2, rng), {2, 0}}};
  const double nll = -(SequenceLogProb(m, data[0].h, data[0].tags) +
                       SequenceLogProb(m, data[1].h, data[1].tags)) / 2;
  CHECK(TapKeyLoss(m, data, nullptr) == doctest::Approx(nll));
  CHECK_THROWS_AS(TapKeyLoss(m, {{RandomH(5, 2, rng), {0}}}, nullptr), ContractViolation);
}

TEST_CASE("pseudo labels follow the threshold table") {
  TableBackend b(2);
  const double cos04 = 0.4, sin04 = std::sqrt(1 - 0.16);
  b.Set("trigger", Vec({3, 0}));
  b.Set("orthogonal", Vec({0, 1}));
  b.Set("middling", Vec({cos04, sin04}));
  b.Set("opposite", Vec({-1, 0}));
  std::vector<ClassVector> classes = {{"A", Vec({1, 0}), 1}};
  auto tags = PseudoLabel(classes, b, {{"trigger", "orthogonal", "middling", "opposite"}}, 0.55, 0.3);
  CHECK(tags[0] == TagSequence{1, kTagO, kTagX, kTagO});
  auto strict = PseudoLabel(classes, b, {{"trigger"}}, 1.0, 0.3);
  CHECK(strict[0] == TagSequence{1});
  // Two classes: the best cosine decides.
  classes.push_back({"B", Vec({0.5, 0.5}), 1});
  CHECK(PseudoLabel(classes, b, {{"orthogonal"}}, 0.55, 0.3)[0] == TagSequence{2});
}

TEST_CASE("tag runs") {
  CHECK(TagRuns({0, 1, 1, 0}) == std::vector<std::tuple<int, int, int>>{{1, 3, 1}});
  CHECK(TagRuns({0, 0, 0}).empty());
  CHECK(TagRuns({2, 1, 1, 2}) ==
        std::vector<std::tuple<int, int, int>>{{0, 1, 2}, {1, 3, 1}, {3, 4, 2}});
}

TEST_CASE("save and load") {
  std::mt19937 rng(3);
  TapKeyModel m = RandomTapKeyModel(6, 2, rng);
  std::stringstream buf;
  m.Save(buf);
  TapKeyModel back = TapKeyModel::Load(buf);
  CHECK(back.types() == m.types());
  CHECK(back.phi() == m.phi());
  CHECK(back.phi_o() == m.phi_o());
  CHECK(back.w() == m.w());
  CHECK(back.w_o() == m.w_o());
  CHECK(back.class_vectors() == m.class_vectors());
  CHECK(back.projection().isApprox(m.projection()));
  Eigen::MatrixXd h = RandomH(6, 4, rng);
  CHECK(Viterbi(back, h) == Viterbi(m, h));
}

TEST_CASE("training on a keyword-seeded corpus") {
  // Words near a shared direction act as triggers of one type.
  const int dim = 16;
  std::mt19937 rng(31);
  std::normal_distribution<double> normal(0.0, 1.0);
  auto random_vec = [&](double scale) {
    Eigen::VectorXd v(dim);
    for (int i = 0; i < dim; ++i) v[i] = scale * normal(rng);
    return v;
  };
  LexiconEmbeddingBackend lex(dim, 0.25);
  const Eigen::VectorXd proto_bomb = random_vec(1.0).normalized();
  const Eigen::VectorXd proto_die = random_vec(1.0).normalized();
  for (const std::string w : {"detonate", "detonated", "explode", "exploded", "bombed"}) {
    lex.AddWord(w, (proto_bomb + random_vec(0.1)).normalized());
  }
  for (const std::string w : {"die", "died", "killed", "kill"}) {
    lex.AddWord(w, (proto_die + random_vec(0.1)).normalized());
  }
  const std::vector<std::string> filler = {"the", "rebels", "a", "device", "in", "market",
                                           "soldiers", "town", "two", "people", "near", "."};
  for (const auto &w : filler) lex.AddWord(w, random_vec(1.0).normalized());
  const std::vector<std::string> bomb_words = {"detonated", "exploded", "bombed"};
  const std::vector<std::string> die_words = {"died", "killed"};
  std::vector<std::vector<std::string>> sentences;
  for (int s = 0; s < 50; ++s) {
    std::vector<std::string> sent;
    for (int i = 0; i < 6; ++i) sent.push_back(filler[rng() % filler.size()]);
    const auto &pool = s % 2 ? bomb_words : die_words;
    sent.insert(sent.begin() + 1 + rng() % 4, pool[rng() % pool.size()]);
    sentences.push_back(sent);
  }
  std::vector<ClassVector> classes = {
      BuildClassVector(lex, "Conflict.Attack.DetonateExplode", {"detonate", "explode"}, sentences),
      BuildClassVector(lex, "Life.Die", {"die", "kill"}, sentences)};
  auto labels = PseudoLabel(classes, lex, sentences, 0.55, 0.30);
  std::vector<TaggedSentence> data;
  for (size_t s = 0; s < sentences.size(); ++s) {
    data.push_back({lex.TokenEmbeddings(sentences[s]), labels[s]});
  }
  TapKeyConfig cfg;
  cfg.max_event_types = 2;
  TapKeyModel m(dim, cfg);
  for (const auto &c : classes) m.AddClass(c);
  m.RecomputeProjection();
  TapKeyTrainConfig tc;
  tc.epochs = 30;
  tc.batch_size = 10;
  auto report = TrainTapKey(m, data, tc);
  CHECK(report.epoch_loss.back() < report.epoch_loss.front());
  for (int k = 0; k < 2; ++k) {
    Eigen::VectorXd dk = m.class_vectors().col(k) - cfg.lambda * m.phi().col(k).normalized();
    CHECK((m.projection().transpose() * dk).norm() <= 1e-5);
  }

  Document doc = evx::testing::MakeDocument(
      "det", {"the rebels detonated a device in the market .", "two people near the town ."});
  auto preds = PredictTriggers(m, lex, doc);
  REQUIRE(!preds.empty());
  bool found = false;
  for (const auto &p : preds) {
    if (p.span == TokenSpan{2, 3}) {
      found = true;
      CHECK(p.event_type == "Conflict.Attack.DetonateExplode");
      CHECK(p.sent_idx == 0);
      CHECK(p.score > 0.5);
      CHECK(p.score <= 1.0);
    }
  }
  CHECK(found);

  SUBCASE("non-finite loss aborts") {
    TapKeyModel bad = m;
    bad.mutable_w()[0] = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(TrainTapKey(bad, data, tc), Error);
  }
  SUBCASE("training is deterministic") {
    TapKeyModel a(dim, cfg), b(dim, cfg);
    for (const auto &c : classes) a.AddClass(c), b.AddClass(c);
    tc.epochs = 3;
    TrainTapKey(a, data, tc);
    TrainTapKey(b, data, tc);
    CHECK(a.phi() == b.phi());
    CHECK(a.w_o() == b.w_o());
  }
}

TEST_CASE("all-O prediction yields no triggers") {
  TapKeyConfig cfg;
  cfg.max_event_types = 1;
  TapKeyModel m(4, cfg);
  m.AddClass({"A", Vec({1, 0, 0, 0}), 1});
  m.set_projection(Eigen::MatrixXd::Identity(4, 3));
  m.mutable_phi_o() = Vec({0, 0, 0, 0});
  m.mutable_phi() = Vec({-1, 0, 0, 0});
  LexiconEmbeddingBackend lex(4);
  lex.AddWord("x", Vec({1, 0, 0, 0}));
  Document doc = evx::testing::MakeDocument("d", {"x x x"});
  CHECK(PredictTriggers(m, lex, doc).empty());
}
