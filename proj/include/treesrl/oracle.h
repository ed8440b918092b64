#ifndef TREESRL_ORACLE_H_
#define TREESRL_ORACLE_H_

// Exhaustive reference computations for small sentences. Every value here is
// obtained by listing trees and scoring each one directly, so it shares no
// code path with the charts it is used to audit.

#include <vector>

#include "treesrl/chart.h"
#include "treesrl/convert.h"
#include "treesrl/core.h"

namespace treesrl::oracle {

inline constexpr int kMaxLength = 10;

// Single-root projective trees over n tokens, optionally with a fixed root
// child. Throws kTooLarge above kMaxLength.
std::vector<DepTree> EnumerateTrees(int n, int root = 0);

// Score of one tree computed literally from the factor definitions. With
// constraints, label log-probabilities of the numerator are included.
double LiteralScore(const ScoreTables& scores, const std::vector<int>& heads, int order,
                    const ForestConstraints* constraints = nullptr);

// When `constraints` is set the sum/argmax/expectation runs over the latent
// forest (labels folded); otherwise over all trees (root fixed if root > 0).
double BruteLogZ(const ScoreTables& scores, int order,
                 const ForestConstraints* constraints = nullptr, int root = 0);
DecodeResult BruteBest(const ScoreTables& scores, int order,
                       const ForestConstraints* constraints = nullptr, int root = 0);
ChartResult BruteMarginals(const ScoreTables& scores, int order,
                           const ForestConstraints* constraints = nullptr, int root = 0);

}  // namespace treesrl::oracle

#endif  // TREESRL_ORACLE_H_
