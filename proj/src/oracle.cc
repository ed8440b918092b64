#include "treesrl/oracle.h"

#include <cmath>

namespace treesrl::oracle {

std::vector<DepTree> EnumerateTrees(int n, int root) {
  std::vector<DepTree> trees;
  ForEachProjectiveTree(
      n, root, [&](const std::vector<int>& heads) { trees.emplace_back(heads); }, kMaxLength);
  return trees;
}

double LiteralScore(const ScoreTables& scores, const std::vector<int>& heads, int order,
                    const ForestConstraints* constraints) {
  const int n = static_cast<int>(heads.size()) - 1;
  double total = 0.0;
  for (int m = 1; m <= n; ++m) total += scores.arc(heads[m], m);
  if (order == 2 && scores.has_siblings()) {
    // s and m are adjacent siblings of h when both hang off h on the same
    // side, s is nearer to h, and no other child of h sits between them.
    for (int m = 1; m <= n; ++m) {
      for (int s = 1; s <= n; ++s) {
        const int h = heads[m];
        if (s == m || heads[s] != h || !IsSiblingTriple(h, s, m)) continue;
        bool adjacent = true;
        for (int k = std::min(s, m) + 1; k < std::max(s, m); ++k) {
          if (heads[k] == h) adjacent = false;
        }
        if (adjacent) total += scores.sib(h, s, m);
      }
    }
  }
  if (constraints != nullptr && scores.has_labels() && scores.labels != nullptr) {
    const int p = constraints->predicate();
    total += scores.root_label(p, kRootPrd);
    for (int m = 1; m <= n; ++m) {
      if (heads[m] != p) continue;
      const Segment& seg = constraints->partition.SegmentAt(m);
      const int label =
          seg.kind == SegmentKind::kArgument ? scores.labels->Index(seg.role) : LabelSet::kNull;
      total += scores.arg_label(p, m, label);
    }
  }
  return total;
}

namespace {

std::vector<DepTree> Space(const ScoreTables& scores, const ForestConstraints* constraints,
                           int root) {
  if (constraints != nullptr) return EnumerateForest(*constraints, kMaxLength);
  return EnumerateTrees(scores.length, root);
}

}  // namespace

double BruteLogZ(const ScoreTables& scores, int order, const ForestConstraints* constraints,
                 int root) {
  LogSum sum;
  for (const DepTree& tree : Space(scores, constraints, root)) {
    sum.Add(LiteralScore(scores, tree.heads, order, constraints));
  }
  return sum.Result();
}

DecodeResult BruteBest(const ScoreTables& scores, int order, const ForestConstraints* constraints,
                       int root) {
  DecodeResult best;
  // Trees arrive in lexicographic order, so keeping the first maximum applies
  // the smallest-head tie rule.
  for (const DepTree& tree : Space(scores, constraints, root)) {
    const double score = LiteralScore(scores, tree.heads, order, constraints);
    if (score > best.score) {
      best.score = score;
      best.tree = tree;
    }
  }
  return best;
}

ChartResult BruteMarginals(const ScoreTables& scores, int order,
                           const ForestConstraints* constraints, int root) {
  const int n = scores.length;
  const auto trees = Space(scores, constraints, root);
  ChartResult result;
  result.log_z = BruteLogZ(scores, order, constraints, root);
  result.arc_marginals = Table2(n + 1, n + 1, 0.0);
  if (order == 2) result.sib_marginals = Table3(n + 1, n + 1, n + 1, 0.0);
  if (result.log_z == kNegInf) return result;
  for (const DepTree& tree : trees) {
    const double weight =
        std::exp(LiteralScore(scores, tree.heads, order, constraints) - result.log_z);
    for (int m = 1; m <= n; ++m) result.arc_marginals(tree.heads[m], m) += weight;
    if (order != 2) continue;
    for (int m = 1; m <= n; ++m) {
      for (int s = 1; s <= n; ++s) {
        const int h = tree.heads[m];
        if (s == m || tree.heads[s] != h || !IsSiblingTriple(h, s, m)) continue;
        bool adjacent = true;
        for (int k = std::min(s, m) + 1; k < std::max(s, m); ++k) {
          if (tree.heads[k] == h) adjacent = false;
        }
        if (adjacent) result.sib_marginals(h, s, m) += weight;
      }
    }
  }
  return result;
}

}  // namespace treesrl::oracle
