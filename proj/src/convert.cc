#include "treesrl/convert.h"

#include <algorithm>

namespace treesrl {

const char* VariantName(Variant variant) {
  switch (variant) {
    case Variant::kLatent: return "latent";
    case Variant::kFirst: return "first";
    case Variant::kLast: return "last";
    case Variant::kFlat: return "flat";
  }
  return "?";
}

Variant ParseVariant(const std::string& name) {
  if (name == "latent") return Variant::kLatent;
  if (name == "first") return Variant::kFirst;
  if (name == "last") return Variant::kLast;
  if (name == "flat") return Variant::kFlat;
  throw Error(ErrorCode::kInvalidConfig, "unknown variant '" + name + "'");
}

ForestConstraints MakeConstraints(int length, const PredicateFrame& frame, Variant variant) {
  return ForestConstraints{Partition(length, frame), variant};
}

bool IsValidTree(const std::vector<int>& heads, const ForestConstraints& constraints) {
  const SpanPartition& part = constraints.partition;
  const int n = part.length();
  const int p = part.predicate();
  if (static_cast<int>(heads.size()) != n + 1 || !IsProjectiveTree(heads)) return false;
  if (heads[p] != 0 || RootChildCount(heads) != 1) return false;

  for (int m = 1; m <= n; ++m) {
    const int h = heads[m];
    if (h == 0 || h == p) continue;
    if (part.SegmentIndex(h) != part.SegmentIndex(m)) return false;
  }

  for (const Segment& seg : part.segments()) {
    if (seg.kind != SegmentKind::kArgument) continue;
    int root = -1;
    for (int k = seg.span.start; k <= seg.span.end; ++k) {
      if (heads[k] == p) {
        if (root >= 0) return false;
        root = k;
      }
    }
    if (root < 0 || SubtreeSpan(heads, root) != seg.span) return false;

    switch (constraints.variant) {
      case Variant::kLatent:
        break;
      case Variant::kFirst:
        if (root != seg.span.start) return false;
        break;
      case Variant::kLast:
        if (root != seg.span.end) return false;
        break;
      case Variant::kFlat:
        if (root != seg.span.start) return false;
        for (int k = seg.span.start + 1; k <= seg.span.end; ++k) {
          if (heads[k] != root) return false;
        }
        break;
    }
  }
  return true;
}

bool IsValidTree(const DepTree& tree, const ForestConstraints& constraints) {
  return IsValidTree(tree.heads, constraints);
}

namespace {

bool Crosses(int h1, int m1, int h2, int m2) {
  const int a = std::min(h1, m1), b = std::max(h1, m1);
  const int c = std::min(h2, m2), d = std::max(h2, m2);
  return (a < c && c < b && b < d) || (c < a && a < d && d < b);
}

struct TreeSearch {
  int n;
  int root;
  const std::function<void(const std::vector<int>&)>& visit;
  std::vector<int> heads;
  int root_children = 0;

  void Extend(int m) {
    if (m > n) {
      if (root_children == 1 && IsProjectiveTree(heads)) visit(heads);
      return;
    }
    for (int h = 0; h <= n; ++h) {
      if (h == m) continue;
      if (h == 0) {
        if (root_children == 1) continue;
        if (root > 0 && m != root) continue;
      } else if (root > 0 && m == root) {
        continue;
      }
      bool ok = true;
      for (int k = 1; k < m && ok; ++k) ok = !Crosses(heads[k], k, h, m);
      // Reject cycles closed among already-assigned tokens.
      for (int node = h, steps = 0; ok && node != 0 && node < m && steps <= n; ++steps) {
        node = heads[node];
        if (node == m) ok = false;
      }
      if (!ok) continue;
      heads[m] = h;
      if (h == 0) ++root_children;
      Extend(m + 1);
      if (h == 0) --root_children;
    }
  }
};

}  // namespace

void ForEachProjectiveTree(int n, int root,
                           const std::function<void(const std::vector<int>&)>& visit,
                           int bound) {
  if (n > bound) {
    throw Error(ErrorCode::kTooLarge, "enumeration limited to n <= " + std::to_string(bound) +
                                          ", got " + std::to_string(n));
  }
  if (n < 1) return;
  TreeSearch search{n, root, visit, std::vector<int>(n + 1, -1)};
  search.Extend(1);
}

std::vector<DepTree> EnumerateForest(const ForestConstraints& constraints, int bound) {
  std::vector<DepTree> forest;
  ForEachProjectiveTree(
      constraints.length(), constraints.predicate(),
      [&](const std::vector<int>& heads) {
        if (IsValidTree(heads, constraints)) forest.emplace_back(heads);
      },
      bound);
  return forest;
}

DepTree CanonicalTree(const ForestConstraints& constraints) {
  const SpanPartition& part = constraints.partition;
  const int p = part.predicate();
  DepTree tree(std::vector<int>(part.length() + 1, p));
  tree.heads[p] = 0;
  tree.labels[p] = std::string(kPredicateLabel);
  for (const Segment& seg : part.segments()) {
    if (seg.kind == SegmentKind::kArgument) {
      tree.labels[seg.span.start] = seg.role;
      for (int k = seg.span.start + 1; k <= seg.span.end; ++k) tree.heads[k] = seg.span.start;
    } else if (seg.kind == SegmentKind::kNonArgument) {
      for (int k = seg.span.start; k <= seg.span.end; ++k) {
        tree.labels[k] = std::string(kNullLabel);
      }
    }
  }
  return tree;
}

DepTree LabelTree(const std::vector<int>& heads, const ForestConstraints& constraints) {
  const int p = constraints.predicate();
  DepTree tree(heads);
  for (int m = 1; m <= tree.size(); ++m) {
    if (tree.heads[m] == 0) {
      tree.labels[m] = std::string(m == p ? kPredicateLabel : kNullLabel);
    } else if (tree.heads[m] == p) {
      const Segment& seg = constraints.partition.SegmentAt(m);
      tree.labels[m] = seg.kind == SegmentKind::kArgument ? seg.role : std::string(kNullLabel);
    }
  }
  return tree;
}

namespace {

void CheckPredicateTree(const DepTree& tree, int predicate) {
  const int n = tree.size();
  if (predicate < 1 || predicate > n) {
    throw Error(ErrorCode::kMalformedTree, "predicate " + std::to_string(predicate) +
                                               " outside the tree");
  }
  if (!IsProjectiveTree(tree.heads)) {
    throw Error(ErrorCode::kMalformedTree, "not a projective tree");
  }
  if (tree.heads[predicate] != 0 || RootChildCount(tree.heads) != 1) {
    throw Error(ErrorCode::kMalformedTree,
                "tree is not single-rooted at predicate " + std::to_string(predicate));
  }
  if (tree.labels.size() != tree.heads.size()) {
    throw Error(ErrorCode::kMalformedTree, "label vector length differs from head vector");
  }
}

}  // namespace

std::vector<HeadwordDependency> HeadwordDependencies(const DepTree& tree, int predicate) {
  CheckPredicateTree(tree, predicate);
  std::vector<HeadwordDependency> deps;
  for (int m = 1; m <= tree.size(); ++m) {
    if (tree.heads[m] != predicate) continue;
    const auto& label = tree.labels[m];
    if (!label) {
      throw Error(ErrorCode::kMalformedTree,
                  "arc " + std::to_string(predicate) + "->" + std::to_string(m) + " is unlabeled");
    }
    if (*label == kNullLabel) continue;
    deps.push_back({predicate, m, *label});
  }
  return deps;
}

PredicateFrame RecoverFrame(const DepTree& tree, int predicate) {
  PredicateFrame frame{predicate, {}};
  for (const auto& dep : HeadwordDependencies(tree, predicate)) {
    frame.arguments.push_back({SubtreeSpan(tree.heads, dep.headword), dep.role});
  }
  // Children are visited left to right and their spans are disjoint, so
  // arguments already come out ordered by start.
  return frame;
}

}  // namespace treesrl
