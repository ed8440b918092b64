#include "treesrl/convert.h"

#include <random>
#include <set>

#include <gtest/gtest.h>

#include "test_util.h"
#include "treesrl/oracle.h"

namespace treesrl {
namespace {

using testing::FigureFrame;
using testing::FigureHeads;

ForestConstraints FigureConstraints(Variant variant = Variant::kLatent) {
  return MakeConstraints(6, FigureFrame(), variant);
}

PredicateFrame Mirror(const PredicateFrame& frame, int n) {
  PredicateFrame mirrored{n + 1 - frame.predicate, {}};
  for (const auto& arg : frame.arguments) {
    mirrored.arguments.push_back({{n + 1 - arg.span.end, n + 1 - arg.span.start}, arg.role});
  }
  return mirrored;
}

PredicateFrame SortedArgs(PredicateFrame frame) {
  std::sort(frame.arguments.begin(), frame.arguments.end(),
            [](const Argument& a, const Argument& b) { return a.span.start < b.span.start; });
  return frame;
}

// Closed-form count of single-root projective trees over n tokens,
// (1/n) * C(3n-2, n-1), independent of the enumerator.
long long ProjectiveTreeCount(int n) {
  long double c = 1;
  for (int k = 1; k <= n - 1; ++k) c = c * (3 * n - 2 - (n - 1) + k) / k;
  return std::llround(c / n);
}

TEST(IsValidTree, FigureTree) {
  EXPECT_TRUE(IsValidTree(FigureHeads(), FigureConstraints()));
}

TEST(IsValidTree, SecondRootInsideArgument) {
  auto heads = FigureHeads();
  heads[3] = 2;  // "to" now hangs off "want" as well as "do"
  EXPECT_FALSE(IsValidTree(heads, FigureConstraints()));
}

TEST(IsValidTree, ArcCrossingSegmentBoundary) {
  auto heads = FigureHeads();
  heads[5] = 6;  // "more" <- "."
  ASSERT_TRUE(IsProjectiveTree(heads));
  EXPECT_FALSE(IsValidTree(heads, FigureConstraints()));
}

TEST(IsValidTree, PredicateMustBeTheOnlyRootChild) {
  EXPECT_FALSE(IsValidTree({-1, 0, 1, 4, 2, 4, 2}, FigureConstraints()));
}

TEST(EnumerateForest, FigureForestHasSevenTrees) {
  const auto forest = EnumerateForest(FigureConstraints());
  EXPECT_EQ(forest.size(), 7u);
  EXPECT_NE(std::find(forest.begin(), forest.end(), DepTree(FigureHeads())), forest.end());
}

TEST(EnumerateForest, SmallCases) {
  EXPECT_EQ(EnumerateForest(MakeConstraints(1, {1, {}})).size(), 1u);
  EXPECT_EQ(EnumerateForest(MakeConstraints(3, {2, {{{1, 1}, "A0"}, {{3, 3}, "A1"}}})).size(), 1u);
}

TEST(EnumerateForest, TooLarge) {
  EXPECT_THROW(EnumerateForest(MakeConstraints(11, {1, {}})), Error);
}

TEST(EnumerateForest, MatchesFilteredBruteForce) {
  // Filter every head assignment (acyclicity and projectivity checked
  // directly) through IsValidTree.
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 30; ++trial) {
    const int n = 1 + static_cast<int>(rng() % 6);
    const ForestConstraints c = MakeConstraints(n, testing::RandomFrame(rng, n));
    std::vector<int> heads(n + 1, 0);
    heads[0] = -1;
    size_t expected = 0;
    long long total = 1;
    for (int k = 0; k < n; ++k) total *= n + 1;
    for (long long code = 0; code < total; ++code) {
      long long x = code;
      for (int m = 1; m <= n; ++m) {
        heads[m] = static_cast<int>(x % (n + 1));
        x /= n + 1;
      }
      if (IsValidTree(heads, c)) ++expected;
    }
    ASSERT_EQ(EnumerateForest(c).size(), expected);
  }
}

TEST(ForEachProjectiveTree, CountsMatchClosedForm) {
  for (int n = 1; n <= 8; ++n) {
    long long count = 0;
    ForEachProjectiveTree(n, 0, [&](const std::vector<int>&) { ++count; });
    EXPECT_EQ(count, ProjectiveTreeCount(n)) << "n=" << n;
  }
  EXPECT_EQ(ProjectiveTreeCount(3), 7);
}

TEST(ForEachProjectiveTree, VisitsEachTreeOnce) {
  std::set<std::vector<int>> seen;
  ForEachProjectiveTree(5, 0, [&](const std::vector<int>& heads) {
    EXPECT_TRUE(seen.insert(heads).second);
    EXPECT_TRUE(IsProjectiveTree(heads));
    EXPECT_EQ(RootChildCount(heads), 1);
  });
}

TEST(RecoverFrame, FigureTree) {
  DepTree tree = LabelTree(FigureHeads(), FigureConstraints());
  EXPECT_EQ(*tree.labels[6], "NULL");
  EXPECT_EQ(RecoverFrame(tree, 2), FigureFrame());
}

TEST(RecoverFrame, NullOnlyChild) {
  DepTree tree(std::vector<int>{-1, 2, 0});
  tree.labels[2] = "PRD";
  tree.labels[1] = "NULL";
  EXPECT_TRUE(RecoverFrame(tree, 2).arguments.empty());
}

TEST(RecoverFrame, MalformedTree) {
  DepTree tree(std::vector<int>{-1, 0, 1});
  tree.labels[2] = "A0";
  EXPECT_THROW(RecoverFrame(tree, 2), Error);
  DepTree crossing(std::vector<int>{-1, 3, 0, 2, 1});
  EXPECT_THROW(RecoverFrame(crossing, 2), Error);
}

TEST(HeadwordDependencies, FigureTree) {
  const auto deps = HeadwordDependencies(LabelTree(FigureHeads(), FigureConstraints()), 2);
  const std::vector<HeadwordDependency> expected = {{2, 1, "A0"}, {2, 4, "A1"}};
  EXPECT_EQ(deps, expected);
}

TEST(HeadwordDependencies, FirstVariantUsesFirstToken) {
  const auto c = FigureConstraints(Variant::kFirst);
  for (const DepTree& tree : EnumerateForest(c)) {
    const auto deps = HeadwordDependencies(LabelTree(tree.heads, c), 2);
    ASSERT_EQ(deps.size(), 2u);
    EXPECT_EQ(deps[1], (HeadwordDependency{2, 3, "A1"}));
  }
}

TEST(HeadwordDependencies, NoArguments) {
  const auto c = MakeConstraints(3, {2, {}});
  EXPECT_TRUE(HeadwordDependencies(CanonicalTree(c), 2).empty());
}

TEST(CanonicalTree, IsFlatMember) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 300; ++trial) {
    const int n = 1 + static_cast<int>(rng() % 12);
    const PredicateFrame frame = testing::RandomFrame(rng, n);
    for (Variant v : {Variant::kLatent, Variant::kFirst, Variant::kFlat}) {
      ASSERT_TRUE(IsValidTree(CanonicalTree(MakeConstraints(n, frame, v)), MakeConstraints(n, frame, v)));
    }
    ASSERT_EQ(RecoverFrame(CanonicalTree(MakeConstraints(n, frame)), frame.predicate),
              SortedArgs(frame));
  }
}

TEST(RoundTripProperty, EveryForestTreeRecoversItsFrame) {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 300; ++trial) {
    const int n = 1 + static_cast<int>(rng() % 8);
    const PredicateFrame frame = testing::RandomFrame(rng, n);
    const ForestConstraints c = MakeConstraints(n, frame);
    const auto forest = EnumerateForest(c);
    ASSERT_FALSE(forest.empty());
    for (const DepTree& tree : forest) {
      ASSERT_EQ(RecoverFrame(LabelTree(tree.heads, c), frame.predicate), SortedArgs(frame));
    }
  }
}

TEST(VariantProperty, ForestsNest) {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 1 + static_cast<int>(rng() % 7);
    const PredicateFrame frame = testing::RandomFrame(rng, n);
    const auto latent = MakeConstraints(n, frame, Variant::kLatent);
    const auto first = MakeConstraints(n, frame, Variant::kFirst);
    const auto last = MakeConstraints(n, frame, Variant::kLast);
    const auto flat = MakeConstraints(n, frame, Variant::kFlat);
    for (const DepTree& t : EnumerateForest(flat)) ASSERT_TRUE(IsValidTree(t, first));
    for (const DepTree& t : EnumerateForest(first)) ASSERT_TRUE(IsValidTree(t, latent));
    for (const DepTree& t : EnumerateForest(last)) ASSERT_TRUE(IsValidTree(t, latent));
    // Mirroring swaps the roles of FIRST and LAST.
    const PredicateFrame mirrored = Mirror(frame, n);
    ASSERT_EQ(EnumerateForest(first).size(),
              EnumerateForest(MakeConstraints(n, mirrored, Variant::kLast)).size());
  }
}

TEST(VariantProperty, SymmetricPartitionFirstEqualsLast) {
  // n=7, p=4, A0:[1,3], A1:[5,7] is its own mirror image.
  const PredicateFrame frame{4, {{{1, 3}, "A0"}, {{5, 7}, "A0"}}};
  EXPECT_EQ(EnumerateForest(MakeConstraints(7, frame, Variant::kFirst)).size(),
            EnumerateForest(MakeConstraints(7, frame, Variant::kLast)).size());
}

}  // namespace
}  // namespace treesrl
