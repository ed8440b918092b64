#ifndef TREESRL_CHART_H_
#define TREESRL_CHART_H_

#include <optional>
#include <vector>

#include "treesrl/convert.h"
#include "treesrl/core.h"
#include "treesrl/tables.h"

namespace treesrl {

// Log-space scores for one sentence of n tokens. Index 0 is the dummy root.
//
//   arc(h, m)          score of h -> m; -inf on the diagonal and into 0.
//   sib(h, s, m)       adjacent-sibling score, s strictly between h and m;
//                      empty for first-order models.
//   root_label(j, l)   log P(l | 0 -> j), l in {kRootPrd, kRootNull}.
//   arg_label(h, m, l) log P(l | h -> m) over `labels` (NULL at index 0).
//
// Label tables may be left empty, in which case every label term is 0.
struct ScoreTables {
  int length = 0;
  Table2 arc;
  Table3 sib;
  Table2 root_label;
  Table3 arg_label;
  const LabelSet* labels = nullptr;

  bool has_siblings() const { return !sib.empty(); }
  bool has_labels() const { return !root_label.empty(); }

  // All legal entries 0, masked entries -inf. Label tables are allocated when
  // `label_set` is given.
  static ScoreTables Zeros(int n, bool second_order, const LabelSet* label_set = nullptr);
};

inline bool IsLegalArc(int head, int mod) { return mod != 0 && head != mod; }

// s strictly between h and m on the same side, and no position is the root
// except possibly h.
inline bool IsSiblingTriple(int h, int s, int m) {
  if (s == 0 || m == 0) return false;
  return (h < s && s < m) || (m < s && s < h);
}

// Sets every illegal arc and sibling entry to -inf.
void ApplyStructuralMask(ScoreTables& scores);

// Tree score under arc-factored (order 1) or adjacent-sibling (order 2)
// scoring, summed directly from the head vector.
double ScoreTree(const ScoreTables& scores, const std::vector<int>& heads, int order);

// ScoreTree plus the label log-probabilities used by the constrained
// numerator: PRD on 0->p, the segment role (or NULL) on p->h, 0 elsewhere.
double LabeledTreeScore(const ScoreTables& scores, const std::vector<int>& heads,
                        const ForestConstraints& constraints, int order);

struct ChartResult {
  double log_z = kNegInf;
  // d log_z / d arc(h, m); for constrained charts the derivative is taken
  // with respect to the label-augmented arc score.
  Table2 arc_marginals;
  // d log_z / d sib(h, s, m); empty for order 1.
  Table3 sib_marginals;
};

// log sum over projective trees in which 0 has exactly one child, optionally
// fixed to `root` (0 = unrestricted). Throws kAllMasked when the space is empty.
double Inside1(const ScoreTables& scores, int root = 0);
double Inside2(const ScoreTables& scores, int root = 0);

struct ConstrainedChartOptions {
  // Disabling this drops the predicate endpoint restriction; only used to
  // build negative controls for the oracle audit.
  bool restrict_predicate_endpoints = true;
};

// log sum over the latent forest of `constraints` with label log-probs folded
// into arcs out of 0 and p. Throws kEmptyForest when nothing survives.
double Inside1Constrained(const ScoreTables& scores, const ForestConstraints& constraints,
                          const ConstrainedChartOptions& options = {});
double Inside2Constrained(const ScoreTables& scores, const ForestConstraints& constraints,
                          const ConstrainedChartOptions& options = {});

// Inside value and its gradient, via reverse-mode sweep of the Inside
// recursion. `constraints` selects the numerator chart.
ChartResult Marginals(const ScoreTables& scores, int order,
                      const ForestConstraints* constraints = nullptr, int root = 0);

struct DecodeResult {
  DepTree tree;
  double score = kNegInf;
};

// Highest-scoring single-root projective tree (root fixed when root > 0).
// Ties resolve to the lexicographically smallest head vector. The returned
// score is recomputed from the tree.
DecodeResult Eisner(const ScoreTables& scores, int order, int root = 0);

}  // namespace treesrl

#endif  // TREESRL_CHART_H_
