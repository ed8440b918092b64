#include "treesrl/scoring.h"

#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "test_util.h"
#include "treesrl/model.h"

namespace treesrl {
namespace {

using testing::TestLabels;

constexpr double kFdStep = 1e-4;
constexpr double kFdTolerance = 1e-5;
// Relative error is measured against max(|analytic|, |numeric|, kFdFloor).
constexpr double kFdFloor = 1e-3;

Sentence Words(std::vector<std::string> tokens) { return Sentence{std::move(tokens), {}}; }

Vocabulary SmallVocab() { return Vocabulary({"the", "dog", "chased", "a", "ball", "o", "x", "y"}); }

NeuralConfig SmallNeural(uint64_t seed = 3) {
  NeuralConfig c;
  c.embed_dim = 4;
  c.encoder_dim = 5;
  c.arc_dim = 4;
  c.label_dim = 3;
  c.sib_dim = 3;
  c.init_scale = 0.5;
  c.seed = seed;
  return c;
}

// Random loss weights over every finite table entry.
TableGradients RandomTableWeights(const ScoreTables& t, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  TableGradients g = TableGradients::ZerosLike(t);
  for (size_t k = 0; k < g.arc.data().size(); ++k) {
    if (t.arc.data()[k] != kNegInf) g.arc.data()[k] = u(rng);
  }
  for (size_t k = 0; k < g.sib.data().size(); ++k) {
    if (t.sib.data()[k] != kNegInf) g.sib.data()[k] = u(rng);
  }
  for (double& v : g.root_label.data()) v = u(rng);
  for (double& v : g.arg_label.data()) v = u(rng);
  return g;
}

double Contract(const ScoreTables& t, const TableGradients& g) {
  double total = 0.0;
  auto add = [&](const std::vector<double>& values, const std::vector<double>& weights) {
    for (size_t k = 0; k < weights.size(); ++k) {
      if (weights[k] != 0.0) total += weights[k] * values[k];
    }
  };
  add(t.arc.data(), g.arc.data());
  add(t.sib.data(), g.sib.data());
  add(t.root_label.data(), g.root_label.data());
  add(t.arg_label.data(), g.arg_label.data());
  return total;
}

// Checks `samples` random coordinates (or all touched ones, for sparse
// gradients) of Backward against central differences.
void CheckScorerGradient(Scorer& scorer, const Sentence& sentence, int order, uint64_t seed,
                         int samples, bool only_touched) {
  std::mt19937_64 rng(seed);
  auto session = scorer.Score(sentence, order);
  const TableGradients weights = RandomTableWeights(session->tables(), rng);
  Gradients grads = scorer.ZeroGradients();
  session->Backward(weights, grads);

  std::vector<std::pair<size_t, size_t>> coords;
  for (size_t b = 0; b < grads.size(); ++b) {
    for (size_t k = 0; k < grads[b].size(); ++k) {
      if (!only_touched || grads[b][k] != 0.0) coords.push_back({b, k});
    }
  }
  ASSERT_FALSE(coords.empty());
  std::shuffle(coords.begin(), coords.end(), rng);
  if (static_cast<int>(coords.size()) > samples) coords.resize(samples);
  for (auto [b, k] : coords) {
    double& v = scorer.params()[b].values[k];
    const double saved = v;
    v = saved + kFdStep;
    const double plus = Contract(scorer.Tables(sentence, order), weights);
    v = saved - kFdStep;
    const double minus = Contract(scorer.Tables(sentence, order), weights);
    v = saved;
    const double numeric = (plus - minus) / (2 * kFdStep);
    const double analytic = grads[b][k];
    const double scale = std::max({std::abs(numeric), std::abs(analytic), kFdFloor});
    ASSERT_LE(std::abs(numeric - analytic) / scale, kFdTolerance)
        << scorer.params()[b].name << "[" << k << "] numeric " << numeric << " analytic "
        << analytic;
  }
}

void ExpectMaskMatchesLegality(const ScoreTables& t) {
  const int n = t.length;
  for (int h = 0; h <= n; ++h) {
    for (int m = 0; m <= n; ++m) {
      EXPECT_EQ(t.arc(h, m) == kNegInf, !IsLegalArc(h, m)) << h << "->" << m;
      if (!t.has_siblings()) continue;
      for (int s = 0; s <= n; ++s) {
        if (!IsSiblingTriple(h, s, m)) EXPECT_EQ(t.sib(h, s, m), kNegInf);
        else EXPECT_TRUE(std::isfinite(t.sib(h, s, m)));
      }
    }
  }
}

void ExpectNormalizedLabels(const ScoreTables& t) {
  const int n = t.length;
  for (int j = 1; j <= n; ++j) {
    EXPECT_NEAR(std::exp(t.root_label(j, kRootPrd)) + std::exp(t.root_label(j, kRootNull)), 1.0,
                1e-12);
    for (int h = 1; h <= n; ++h) {
      double total = 0.0;
      for (int l = 0; l < t.labels->size(); ++l) total += std::exp(t.arg_label(h, j, l));
      EXPECT_NEAR(total, 1.0, 1e-12);
    }
  }
}

TEST(Vocabulary, ReservedIdsAndNormalization) {
  const Vocabulary vocab({"Dog", "dog", "cat"});
  EXPECT_EQ(vocab.size(), Vocabulary::kNumReserved + 2);
  EXPECT_EQ(vocab.Id("DOG"), Vocabulary::kNumReserved);
  EXPECT_EQ(vocab.Id("cat"), Vocabulary::kNumReserved + 1);
  EXPECT_EQ(vocab.Id("unseen"), Vocabulary::kUnk);
}

TEST(NeuralScorer, OneTokenSentenceShapes) {
  NeuralScorer scorer(TestLabels(), SmallVocab(), SmallNeural());
  const ScoreTables t = scorer.Tables(Words({"dog"}), 2);
  EXPECT_EQ(t.length, 1);
  EXPECT_EQ(t.arc.rows(), 2);
  EXPECT_TRUE(std::isfinite(t.arc(0, 1)));
  EXPECT_EQ(t.sib.dim0(), 2);
}

TEST(NeuralScorer, IdenticalWindowsGiveIdenticalScores) {
  NeuralScorer scorer(TestLabels(), SmallVocab(), SmallNeural());
  const ScoreTables t = scorer.Tables(Words({"o", "o", "o", "o", "o"}), 1);
  // Positions 2, 3 and 4 all see the window (o, o, o).
  EXPECT_EQ(t.arc(0, 2), t.arc(0, 3));
  EXPECT_EQ(t.arc(0, 3), t.arc(0, 4));
  EXPECT_EQ(t.root_label(2, kRootPrd), t.root_label(3, kRootPrd));
  EXPECT_EQ(t.arc(2, 1), t.arc(3, 1));
}

TEST(NeuralScorer, UnseenTokenEqualsUnknownSubstitution) {
  NeuralScorer scorer(TestLabels(), SmallVocab(), SmallNeural());
  const ScoreTables a = scorer.Tables(Words({"the", "zebra", "chased", "a", "ball"}), 2);
  const ScoreTables b = scorer.Tables(Words({"the", "qwerty", "chased", "a", "ball"}), 2);
  EXPECT_EQ(a.arc.data(), b.arc.data());
  EXPECT_EQ(a.sib.data(), b.sib.data());
  EXPECT_EQ(a.arg_label.data(), b.arg_label.data());
}

TEST(NeuralScorer, SwappingTokensPermutesUnaffectedEntries) {
  NeuralScorer scorer(TestLabels(), SmallVocab(), SmallNeural());
  const ScoreTables a = scorer.Tables(Words({"o", "x", "o", "o", "y", "o", "o"}), 1);
  const ScoreTables b = scorer.Tables(Words({"o", "y", "o", "o", "x", "o", "o"}), 1);
  // Windows of 0, 7 and the swapped positions 2 <-> 5 are unaffected.
  auto perm = [](int i) { return i == 2 ? 5 : i == 5 ? 2 : i; };
  const std::vector<int> stable = {0, 2, 5, 7};
  for (int h : stable) {
    for (int m : stable) {
      if (!IsLegalArc(h, m)) continue;
      EXPECT_NEAR(a.arc(h, m), b.arc(perm(h), perm(m)), 1e-15) << h << "->" << m;
    }
  }
}

TEST(NeuralScorer, ZeroWeightsGiveZeroScores) {
  NeuralScorer scorer(TestLabels(), SmallVocab(), SmallNeural());
  for (auto& block : scorer.params()) std::fill(block.values.begin(), block.values.end(), 0.0);
  const ScoreTables t = scorer.Tables(Words({"the", "dog", "chased", "a", "ball"}), 2);
  ExpectMaskMatchesLegality(t);
  for (double v : t.arc.data()) EXPECT_TRUE(v == 0.0 || v == kNegInf);
  for (double v : t.sib.data()) EXPECT_TRUE(v == 0.0 || v == kNegInf);
}

TEST(NeuralScorer, MaskingAndNormalization) {
  NeuralScorer scorer(TestLabels(), SmallVocab(), SmallNeural());
  const ScoreTables t = scorer.Tables(Words({"the", "dog", "chased", "a", "ball", "x"}), 2);
  ExpectMaskMatchesLegality(t);
  ExpectNormalizedLabels(t);
}

TEST(NeuralScorer, SingleLabelInventoryHasZeroLogProb) {
  NeuralScorer scorer(LabelSet(), SmallVocab(), SmallNeural());
  const ScoreTables t = scorer.Tables(Words({"the", "dog", "chased"}), 1);
  for (double v : t.arg_label.data()) EXPECT_EQ(v, 0.0);
}

TEST(NeuralScorer, GradientsMatchFiniteDifferences) {
  for (int order : {1, 2}) {
    NeuralScorer scorer(TestLabels(), SmallVocab(), SmallNeural(11 + order));
    CheckScorerGradient(scorer, Words({"the", "dog", "chased", "a", "zebra"}), order,
                        100 + order, 400, false);
  }
}

TEST(NeuralScorer, DefaultSizesProduceFiniteScores) {
  NeuralScorer scorer(TestLabels(), SmallVocab(), NeuralConfig{});
  const ScoreTables t = scorer.Tables(Words({"the", "dog", "chased", "a", "ball"}), 2);
  ExpectMaskMatchesLegality(t);
  ExpectNormalizedLabels(t);
}

TEST(LogLinearScorer, ZeroWeightsGiveZeroScores) {
  LogLinearScorer scorer(TestLabels(), LogLinearConfig{});
  const ScoreTables t = scorer.Tables(Words({"the", "dog", "chased", "a", "ball"}), 2);
  ExpectMaskMatchesLegality(t);
  for (double v : t.arc.data()) EXPECT_TRUE(v == 0.0 || v == kNegInf);
  for (double v : t.sib.data()) EXPECT_TRUE(v == 0.0 || v == kNegInf);
  for (double v : t.arg_label.data()) EXPECT_NEAR(v, -std::log(TestLabels().size()), 1e-15);
}

TEST(LogLinearScorer, DoublingWeightsDoublesScores) {
  LogLinearScorer scorer(TestLabels(), LogLinearConfig{12});
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1, 1);
  for (double& v : scorer.params()[0].values) v = u(rng);
  const Sentence s = Words({"the", "dog", "chased", "a", "ball", "o"});
  const ScoreTables a = scorer.Tables(s, 2);
  for (double& v : scorer.params()[0].values) v *= 2;
  const ScoreTables b = scorer.Tables(s, 2);
  for (size_t k = 0; k < a.arc.data().size(); ++k) {
    if (a.arc.data()[k] != kNegInf) EXPECT_NEAR(b.arc.data()[k], 2 * a.arc.data()[k], 1e-12);
  }
  for (size_t k = 0; k < a.sib.data().size(); ++k) {
    if (a.sib.data()[k] != kNegInf) EXPECT_NEAR(b.sib.data()[k], 2 * a.sib.data()[k], 1e-12);
  }
}

TEST(LogLinearScorer, MaskingNormalizationAndGradients) {
  LogLinearScorer scorer(TestLabels(), LogLinearConfig{10});
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  for (double& v : scorer.params()[0].values) v = u(rng);
  const Sentence s = Words({"the", "dog", "chased", "a", "red", "ball"});
  for (int order : {1, 2}) {
    const ScoreTables t = scorer.Tables(s, order);
    ExpectMaskMatchesLegality(t);
    ExpectNormalizedLabels(t);
    CheckScorerGradient(scorer, s, order, 200 + order, 300, true);
  }
}

TEST(Model, RoundTripIsByteIdenticalAndPreservesScores) {
  const Sentence s = Words({"the", "dog", "chased", "a", "ball"});
  NeuralScorer neural(TestLabels(), SmallVocab(), SmallNeural());
  LogLinearScorer linear(TestLabels(), LogLinearConfig{8});
  linear.params()[0].values[7] = 0.25;
  ModelMetadata meta;
  meta.order = 2;
  meta.epoch = 4;
  meta.dev_f1 = 97.125;
  meta.options["lr"] = "0.01";
  for (const Scorer* scorer : {static_cast<const Scorer*>(&neural), static_cast<const Scorer*>(&linear)}) {
    const std::string bytes = SerializeModel(*scorer, meta);
    const Model loaded = DeserializeModel(bytes);
    EXPECT_EQ(SerializeModel(*loaded.scorer, loaded.metadata), bytes);
    EXPECT_EQ(loaded.metadata.dev_f1, 97.125);
    EXPECT_EQ(loaded.metadata.options.at("lr"), "0.01");
    EXPECT_EQ(loaded.scorer->Tables(s, 2).arc.data(), scorer->Tables(s, 2).arc.data());
    EXPECT_EQ(loaded.scorer->labels().Roles(), TestLabels().Roles());
  }
}

TEST(Model, CorruptInputRejected) {
  LogLinearScorer linear(TestLabels(), LogLinearConfig{6});
  std::string bytes = SerializeModel(linear, {});
  EXPECT_THROW(DeserializeModel(bytes.substr(0, bytes.size() - 3)), Error);
  bytes[0] = 'X';
  EXPECT_THROW(DeserializeModel(bytes), Error);
}

}  // namespace
}  // namespace treesrl
