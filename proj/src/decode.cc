#include "treesrl/decode.h"

#include <algorithm>
#include <set>

#include "treesrl/convert.h"

namespace treesrl {

std::vector<int> PredictPredicates(const Table2& root_label) {
  std::vector<int> predicates;
  for (int j = 1; j < root_label.rows(); ++j) {
    if (root_label(j, kRootPrd) > root_label(j, kRootNull)) predicates.push_back(j);
  }
  return predicates;
}

DecodeResult EisnerDecode(const ScoreTables& scores, int predicate, int order) {
  if (predicate < 1 || predicate > scores.length) {
    throw Error(ErrorCode::kOutOfBounds, "predicate " + std::to_string(predicate));
  }
  if (scores.arc(0, predicate) == kNegInf) {
    throw Error(ErrorCode::kInfeasible,
                "root arc to " + std::to_string(predicate) + " is masked");
  }
  return Eisner(scores, order, predicate);
}

DepTree AssignLabels(DepTree tree, int predicate, const ScoreTables& scores) {
  if (scores.labels == nullptr || scores.arg_label.empty()) {
    throw Error(ErrorCode::kInvalidConfig, "label scores are required for labeling");
  }
  tree.labels.assign(tree.heads.size(), std::nullopt);
  tree.labels[predicate] = std::string(kPredicateLabel);
  const int num_labels = scores.labels->size();
  for (int m = 1; m <= tree.size(); ++m) {
    if (tree.heads[m] != predicate) continue;
    int best = 0;
    for (int l = 1; l < num_labels; ++l) {
      if (scores.arg_label(predicate, m, l) > scores.arg_label(predicate, m, best)) best = l;
    }
    tree.labels[m] = scores.labels->Name(best);
  }
  return tree;
}

std::vector<ParsedFrame> ParseFrames(const ScoreTables& scores, const DecodeConfig& config) {
  const int n = scores.length;
  std::vector<int> predicates;
  const ScoreTables* source = &scores;
  ScoreTables masked;
  if (config.mode == PredicateMode::kGold) {
    std::set<int> seen;
    for (int p : config.gold_predicates) {
      if (p < 1 || p > n || !seen.insert(p).second) {
        throw Error(ErrorCode::kOutOfBounds,
                    "gold predicate " + std::to_string(p) + " invalid or repeated");
      }
    }
    predicates.assign(seen.begin(), seen.end());
    // Root arcs to non-predicates are removed outright.
    masked = scores;
    for (int j = 1; j <= n; ++j) {
      if (!seen.count(j)) masked.arc(0, j) = kNegInf;
    }
    source = &masked;
  } else {
    predicates = PredictPredicates(scores.root_label);
  }

  std::vector<ParsedFrame> parsed;
  for (int p : predicates) {
    DecodeResult best = EisnerDecode(*source, p, config.order);
    ParsedFrame out;
    out.tree = AssignLabels(std::move(best.tree), p, *source);
    out.frame = RecoverFrame(out.tree, p);
    out.score = best.score;
    parsed.push_back(std::move(out));
  }
  return parsed;
}

SrlAnnotation Parse(const Sentence& sentence, const ScoreTables& scores,
                    const DecodeConfig& config) {
  if (sentence.size() != scores.length) {
    throw Error(ErrorCode::kAlignmentError, "scores do not match the sentence length");
  }
  SrlAnnotation annotation{sentence, {}};
  for (ParsedFrame& parsed : ParseFrames(scores, config)) {
    annotation.frames.push_back(std::move(parsed.frame));
  }
  return annotation;
}

}  // namespace treesrl
