#ifndef TREESRL_TESTS_TEST_UTIL_H_
#define TREESRL_TESTS_TEST_UTIL_H_

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "treesrl/chart.h"
#include "treesrl/core.h"

namespace treesrl::testing {

inline const std::vector<std::string>& TestRoles() {
  static const std::vector<std::string> roles = {"A0", "A1", "A2", "AM-LOC", "AM-TMP"};
  return roles;
}

inline const LabelSet& TestLabels() {
  static const LabelSet labels(TestRoles());
  return labels;
}

// "They want to do more ." with predicate "want".
inline Sentence FigureSentence() {
  return Sentence{{"They", "want", "to", "do", "more", "."}, {}};
}

inline PredicateFrame FigureFrame() {
  return PredicateFrame{2, {{{1, 1}, "A0"}, {{3, 5}, "A1"}}};
}

// want <- root, They <- want, do <- want, to <- do, more <- do, . <- want.
inline std::vector<int> FigureHeads() { return {-1, 2, 0, 4, 2, 4, 2}; }

// Random valid frame over n tokens.
inline PredicateFrame RandomFrame(std::mt19937_64& rng, int n) {
  PredicateFrame frame;
  frame.predicate = std::uniform_int_distribution<int>(1, n)(rng);
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  std::uniform_int_distribution<int> role(0, static_cast<int>(TestRoles().size()) - 1);
  int k = 1;
  while (k <= n) {
    if (k == frame.predicate || coin(rng) < 0.35) {
      ++k;
      continue;
    }
    int limit = k;
    while (limit + 1 <= n && limit + 1 != frame.predicate) ++limit;
    const int end = std::uniform_int_distribution<int>(k, std::min(limit, k + 3))(rng);
    frame.arguments.push_back({{k, end}, TestRoles()[role(rng)]});
    k = end + 1;
  }
  return frame;
}

// Random arc/sibling/label scores with structural masks applied. Label
// tables are log-softmax normalized.
inline ScoreTables RandomScores(std::mt19937_64& rng, int n, bool second_order,
                                double scale = 1.0, const LabelSet* labels = &TestLabels()) {
  ScoreTables scores = ScoreTables::Zeros(n, second_order, labels);
  std::uniform_real_distribution<double> u(-scale, scale);
  for (auto& v : scores.arc.data()) {
    if (v != kNegInf) v = u(rng);
  }
  for (auto& v : scores.sib.data()) {
    if (v != kNegInf) v = u(rng);
  }
  if (labels != nullptr) {
    for (int j = 0; j <= n; ++j) {
      const double a = u(rng), b = u(rng);
      const double z = std::log(std::exp(a) + std::exp(b));
      scores.root_label(j, kRootPrd) = a - z;
      scores.root_label(j, kRootNull) = b - z;
    }
    const int num = labels->size();
    for (int h = 0; h <= n; ++h) {
      for (int m = 0; m <= n; ++m) {
        std::vector<double> row(num);
        double z = kNegInf;
        for (auto& x : row) {
          x = u(rng);
          z = LogAdd(z, x);
        }
        for (int l = 0; l < num; ++l) scores.arg_label(h, m, l) = row[l] - z;
      }
    }
  }
  return scores;
}

}  // namespace treesrl::testing

#endif  // TREESRL_TESTS_TEST_UTIL_H_
