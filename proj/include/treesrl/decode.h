#ifndef TREESRL_DECODE_H_
#define TREESRL_DECODE_H_

#include <vector>

#include "treesrl/chart.h"
#include "treesrl/core.h"

namespace treesrl {

enum class PredicateMode { kPredict, kGold };

struct DecodeConfig {
  int order = 1;
  PredicateMode mode = PredicateMode::kPredict;
  // Used when mode == kGold; positions in [1, n], distinct.
  std::vector<int> gold_predicates;
};

// Positions j whose root arc prefers PRD strictly over NULL.
std::vector<int> PredictPredicates(const Table2& root_label);

// Best tree with 0 -> predicate. Throws kInfeasible if that arc is masked.
DecodeResult EisnerDecode(const ScoreTables& scores, int predicate, int order);

// PRD on 0 -> p and the arg-max label (first index on ties) on every p -> h.
// Other arcs stay unlabeled.
DepTree AssignLabels(DepTree tree, int predicate, const ScoreTables& scores);

struct ParsedFrame {
  PredicateFrame frame;
  DepTree tree;  // labeled
  double score = 0.0;
};

// Predicate identification followed by one decode + recovery per predicate.
std::vector<ParsedFrame> ParseFrames(const ScoreTables& scores, const DecodeConfig& config);

SrlAnnotation Parse(const Sentence& sentence, const ScoreTables& scores,
                    const DecodeConfig& config);

}  // namespace treesrl

#endif  // TREESRL_DECODE_H_
