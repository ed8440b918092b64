#include "treesrl/autodiff.h"

#include <cmath>
#include <functional>
#include <random>

#include <gtest/gtest.h>

namespace treesrl::ad {
namespace {

struct Leaf {
  std::vector<int> shape;
  std::vector<double> values;
};

using Graph = std::function<Var(const std::vector<Var>&)>;

// Projects the output onto fixed random weights so every output entry
// contributes to the scalar under test.
double Project(const Var& out, const std::vector<double>& weights) {
  double total = 0.0;
  for (size_t k = 0; k < out.size(); ++k) total += weights[k] * out.at(k);
  return total;
}

void CheckGradients(std::vector<Leaf> leaves, const Graph& graph, uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<Var> vars;
  for (const Leaf& leaf : leaves) vars.push_back(View(leaf.shape, leaf.values));
  Var out = graph(vars);
  std::vector<double> weights(out.size());
  for (double& w : weights) w = u(rng);
  Backward({{out, weights}});

  constexpr double kStep = 1e-4;
  for (size_t i = 0; i < leaves.size(); ++i) {
    const std::vector<double> analytic = vars[i].grad();
    ASSERT_EQ(analytic.size(), leaves[i].values.size());
    for (size_t k = 0; k < leaves[i].values.size(); ++k) {
      const double saved = leaves[i].values[k];
      auto eval = [&] {
        std::vector<Var> fresh;
        for (const Leaf& leaf : leaves) fresh.push_back(View(leaf.shape, leaf.values));
        return Project(graph(fresh), weights);
      };
      leaves[i].values[k] = saved + kStep;
      const double plus = eval();
      leaves[i].values[k] = saved - kStep;
      const double minus = eval();
      leaves[i].values[k] = saved;
      const double numeric = (plus - minus) / (2 * kStep);
      const double scale = std::max({1e-3, std::abs(numeric), std::abs(analytic[k])});
      ASSERT_LE(std::abs(numeric - analytic[k]) / scale, 1e-5)
          << "leaf " << i << " entry " << k << " numeric " << numeric << " analytic " << analytic[k];
    }
  }
}

Leaf RandomLeaf(std::mt19937_64& rng, std::vector<int> shape) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Leaf leaf{std::move(shape), {}};
  leaf.values.resize(NumElements(leaf.shape));
  for (double& v : leaf.values) v = u(rng);
  return leaf;
}

class AutodiffFd : public ::testing::TestWithParam<int> {};

TEST_P(AutodiffFd, ElementwiseOps) {
  std::mt19937_64 rng(GetParam());
  CheckGradients({RandomLeaf(rng, {3, 4}), RandomLeaf(rng, {3, 4})},
                 [](const std::vector<Var>& v) { return Tanh(Add(v[0], Scale(v[1], -1.7))); },
                 GetParam());
  CheckGradients({RandomLeaf(rng, {5})}, [](const std::vector<Var>& v) { return Sum(v[0]); },
                 GetParam());
}

TEST_P(AutodiffFd, GatherConcatRows) {
  std::mt19937_64 rng(GetParam());
  CheckGradients({RandomLeaf(rng, {4, 3}), RandomLeaf(rng, {5, 2})},
                 [](const std::vector<Var>& v) {
                   Var g = Gather(v[0], {2, 0, 2, 3, 1});
                   return Rows(ConcatCols({g, v[1]}), 1, 3);
                 },
                 GetParam());
}

TEST_P(AutodiffFd, MatMulAddRow) {
  std::mt19937_64 rng(GetParam());
  CheckGradients({RandomLeaf(rng, {3, 4}), RandomLeaf(rng, {4, 2}), RandomLeaf(rng, {2})},
                 [](const std::vector<Var>& v) { return AddRow(MatMul(v[0], v[1]), v[2]); },
                 GetParam());
}

TEST_P(AutodiffFd, Biaffine) {
  std::mt19937_64 rng(GetParam());
  CheckGradients({RandomLeaf(rng, {3, 2}), RandomLeaf(rng, {3, 4}), RandomLeaf(rng, {4, 3})},
                 [](const std::vector<Var>& v) { return Biaffine(v[0], v[1], v[2]); },
                 GetParam());
}

TEST_P(AutodiffFd, BiaffineLabels) {
  std::mt19937_64 rng(GetParam());
  CheckGradients({RandomLeaf(rng, {3, 2}), RandomLeaf(rng, {3, 3, 3}), RandomLeaf(rng, {4, 2})},
                 [](const std::vector<Var>& v) { return BiaffineLabels(v[0], v[1], v[2]); },
                 GetParam());
}

TEST_P(AutodiffFd, Triaffine) {
  std::mt19937_64 rng(GetParam());
  CheckGradients({RandomLeaf(rng, {4, 2}), RandomLeaf(rng, {4, 2}), RandomLeaf(rng, {4, 2}),
                  RandomLeaf(rng, {3, 3, 3})},
                 [](const std::vector<Var>& v) { return Triaffine(v[0], v[1], v[2], v[3]); },
                 GetParam());
}

TEST_P(AutodiffFd, LogSoftmax) {
  std::mt19937_64 rng(GetParam());
  CheckGradients({RandomLeaf(rng, {2, 3, 4})},
                 [](const std::vector<Var>& v) { return LogSoftmax(Scale(v[0], 3.0)); },
                 GetParam());
}

TEST_P(AutodiffFd, SharedSubexpression) {
  std::mt19937_64 rng(GetParam());
  CheckGradients({RandomLeaf(rng, {2, 3})},
                 [](const std::vector<Var>& v) {
                   Var t = Tanh(v[0]);
                   return Add(t, MatMul(t, Constant({3, 3}, {1, 0, 2, 0, 1, 0, -1, 0, 1})));
                 },
                 GetParam());
}

INSTANTIATE_TEST_SUITE_P(Seeds, AutodiffFd, ::testing::Range(1, 6));

TEST(Autodiff, BiaffineMatchesExplicitSum) {
  const std::vector<double> x = {1, 2}, y = {3, -1}, w = {1, 2, 3, 4};
  // x [1,1], y [1,1], w [2,2]: [x;1]^T w [y;1] = x*y*1 + x*2 + 3*y + 4.
  Var out = Biaffine(View({2, 1}, x), View({2, 2}, w), View({2, 1}, y));
  EXPECT_DOUBLE_EQ(out.at(0), 1 * 3 + 2 * 1 + 3 * 3 + 4);
  EXPECT_DOUBLE_EQ(out.at(1), 1 * -1 + 2 * 1 + 3 * -1 + 4);
  EXPECT_DOUBLE_EQ(out.at(2), 2 * 3 + 2 * 2 + 3 * 3 + 4);
  EXPECT_DOUBLE_EQ(out.at(3), 2 * -1 + 2 * 2 + 3 * -1 + 4);
}

TEST(Autodiff, TriaffineMatchesExplicitSum) {
  std::mt19937_64 rng(9);
  const Leaf h = RandomLeaf(rng, {3, 2}), s = RandomLeaf(rng, {3, 2}), m = RandomLeaf(rng, {3, 2});
  const Leaf w = RandomLeaf(rng, {3, 3, 3});
  Var out = Triaffine(View(h.shape, h.values), View(s.shape, s.values), View(m.shape, m.values),
                      View(w.shape, w.values));
  auto aug = [](const Leaf& leaf, int r, int a) { return a == 2 ? 1.0 : leaf.values[r * 2 + a]; };
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      for (int k = 0; k < 3; ++k) {
        double expected = 0.0;
        for (int a = 0; a < 3; ++a)
          for (int b = 0; b < 3; ++b)
            for (int c = 0; c < 3; ++c)
              expected += aug(h, i, a) * aug(s, j, b) * aug(m, k, c) * w.values[(a * 3 + b) * 3 + c];
        EXPECT_NEAR(out.at((i * 3 + j) * 3 + k), expected, 1e-12);
      }
    }
  }
}

TEST(Autodiff, LogSoftmaxRowsNormalized) {
  std::mt19937_64 rng(4);
  Leaf a = RandomLeaf(rng, {6, 7});
  for (double& v : a.values) v *= 40.0;
  Var out = LogSoftmax(View(a.shape, a.values));
  for (int r = 0; r < 6; ++r) {
    double total = 0.0;
    for (int c = 0; c < 7; ++c) total += std::exp(out.at(r * 7 + c));
    EXPECT_NEAR(total, 1.0, 1e-12);
  }
}

TEST(Autodiff, GradientsAccumulateAcrossSeeds) {
  const std::vector<double> x = {2.0};
  Var v = View({1}, x);
  Var a = Scale(v, 3.0);
  Var b = Scale(v, 5.0);
  Backward({{a, {1.0}}, {b, {1.0}}});
  EXPECT_DOUBLE_EQ(v.grad()[0], 8.0);
}

TEST(Autodiff, ShapeMismatchThrows) {
  EXPECT_THROW(Constant({2, 2}, {1, 2, 3}), std::invalid_argument);
  EXPECT_THROW(MatMul(Constant({1, 2}, {1, 2}), Constant({3, 1}, {1, 2, 3})),
               std::invalid_argument);
}

}  // namespace
}  // namespace treesrl::ad
