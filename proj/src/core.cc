#include "treesrl/core.h"

#include <algorithm>
#include <set>
#include <sstream>

namespace treesrl {

const char* ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kOverlappingArguments: return "OverlappingArguments";
    case ErrorCode::kPredicateInsideArgument: return "PredicateInsideArgument";
    case ErrorCode::kOutOfBounds: return "OutOfBounds";
    case ErrorCode::kDuplicatePredicate: return "DuplicatePredicate";
    case ErrorCode::kInvalidRole: return "InvalidRole";
    case ErrorCode::kTooLarge: return "TooLarge";
    case ErrorCode::kMalformedTree: return "MalformedTree";
    case ErrorCode::kEmptyForest: return "EmptyForest";
    case ErrorCode::kInfeasible: return "Infeasible";
    case ErrorCode::kAllMasked: return "AllMasked";
    case ErrorCode::kSchemaError: return "SchemaError";
    case ErrorCode::kUnbalancedBrackets: return "UnbalancedBrackets";
    case ErrorCode::kColumnCountMismatch: return "ColumnCountMismatch";
    case ErrorCode::kAlignmentError: return "AlignmentError";
    case ErrorCode::kNonFiniteLoss: return "NonFiniteLoss";
    case ErrorCode::kIoError: return "IoError";
    case ErrorCode::kInvalidConfig: return "InvalidConfig";
  }
  return "Unknown";
}

const char* SegmentKindName(SegmentKind kind) {
  switch (kind) {
    case SegmentKind::kArgument: return "ARG";
    case SegmentKind::kNonArgument: return "NONARG";
    case SegmentKind::kPredicate: return "PRED";
  }
  return "?";
}

LabelSet::LabelSet(const std::vector<std::string>& roles) : LabelSet() {
  for (const auto& role : roles) {
    if (Find(role) >= 0) {
      throw Error(ErrorCode::kInvalidRole, "duplicate or reserved role '" + role + "'");
    }
    Add(role);
  }
}

int LabelSet::Add(const std::string& role) {
  if (role == kPredicateLabel) {
    throw Error(ErrorCode::kInvalidRole, "PRD is reserved for root arcs");
  }
  const int found = Find(role);
  if (found >= 0) return found;
  names_.push_back(role);
  const int index = static_cast<int>(names_.size()) - 1;
  index_.emplace(role, index);
  return index;
}

int LabelSet::Find(std::string_view role) const {
  if (role == kNullLabel) return kNull;
  auto it = index_.find(std::string(role));
  return it == index_.end() ? -1 : it->second;
}

int LabelSet::Index(std::string_view role) const {
  const int index = Find(role);
  if (index < 0) {
    throw Error(ErrorCode::kInvalidRole, "unknown role '" + std::string(role) + "'");
  }
  return index;
}

SpanPartition::SpanPartition(int length, int predicate, std::vector<Segment> segments)
    : length_(length), predicate_(predicate), segments_(std::move(segments)),
      segment_of_(length + 1, -1) {
  for (int s = 0; s < static_cast<int>(segments_.size()); ++s) {
    for (int k = segments_[s].span.start; k <= segments_[s].span.end; ++k) {
      segment_of_[k] = s;
    }
  }
}

bool IsProjectiveTree(const std::vector<int>& heads) {
  const int n = static_cast<int>(heads.size()) - 1;
  if (n < 1) return false;
  for (int m = 1; m <= n; ++m) {
    if (heads[m] < 0 || heads[m] > n || heads[m] == m) return false;
  }
  // Acyclic iff every node reaches 0 within n steps.
  for (int m = 1; m <= n; ++m) {
    int node = m;
    int steps = 0;
    while (node != 0 && steps <= n) {
      node = heads[node];
      ++steps;
    }
    if (node != 0) return false;
  }
  auto descends_from = [&](int node, int ancestor) {
    while (node != 0 && node != ancestor) node = heads[node];
    return node == ancestor;
  };
  for (int m = 1; m <= n; ++m) {
    const int h = heads[m];
    const int lo = std::min(h, m);
    const int hi = std::max(h, m);
    for (int k = lo + 1; k < hi; ++k) {
      if (!descends_from(k, h)) return false;
    }
  }
  return true;
}

int RootChildCount(const std::vector<int>& heads) {
  return static_cast<int>(std::count(heads.begin() + 1, heads.end(), 0));
}

std::vector<std::vector<int>> Children(const std::vector<int>& heads) {
  std::vector<std::vector<int>> children(heads.size());
  for (int m = 1; m < static_cast<int>(heads.size()); ++m) {
    children[heads[m]].push_back(m);
  }
  return children;
}

Span SubtreeSpan(const std::vector<int>& heads, int node) {
  Span span{node, node};
  const int n = static_cast<int>(heads.size()) - 1;
  for (int m = 1; m <= n; ++m) {
    int k = m;
    while (k != 0 && k != node) k = heads[k];
    if (k == node) {
      span.start = std::min(span.start, m);
      span.end = std::max(span.end, m);
    }
  }
  return span;
}

namespace {

std::string SpanText(const Span& span) {
  std::ostringstream out;
  out << "[" << span.start << "," << span.end << "]";
  return out.str();
}

const PredicateFrame& ValidateFrameLength(int length, const PredicateFrame& frame) {
  if (frame.predicate < 1 || frame.predicate > length) {
    throw Error(ErrorCode::kOutOfBounds, "predicate " + std::to_string(frame.predicate) +
                                             " outside [1," + std::to_string(length) + "]");
  }
  for (const auto& arg : frame.arguments) {
    if (arg.span.start < 1 || arg.span.end > length || arg.span.start > arg.span.end) {
      throw Error(ErrorCode::kOutOfBounds, "argument span " + SpanText(arg.span) +
                                               " outside [1," + std::to_string(length) + "]");
    }
    if (arg.role.empty() || arg.role == kPredicateLabel || arg.role == kNullLabel) {
      throw Error(ErrorCode::kInvalidRole, "argument " + SpanText(arg.span) +
                                               " has reserved or empty role '" + arg.role + "'");
    }
  }
  for (const auto& arg : frame.arguments) {
    if (arg.span.contains(frame.predicate)) {
      throw Error(ErrorCode::kPredicateInsideArgument,
                  "argument " + SpanText(arg.span) + " contains predicate " +
                      std::to_string(frame.predicate));
    }
  }
  for (size_t a = 0; a < frame.arguments.size(); ++a) {
    for (size_t b = a + 1; b < frame.arguments.size(); ++b) {
      if (frame.arguments[a].span.overlaps(frame.arguments[b].span)) {
        throw Error(ErrorCode::kOverlappingArguments,
                    SpanText(frame.arguments[a].span) + " overlaps " +
                        SpanText(frame.arguments[b].span));
      }
    }
  }
  return frame;
}

}  // namespace

const PredicateFrame& ValidateFrame(const Sentence& sentence, const PredicateFrame& frame) {
  if (sentence.size() < 1) {
    throw Error(ErrorCode::kOutOfBounds, "empty sentence");
  }
  return ValidateFrameLength(sentence.size(), frame);
}

void ValidateAnnotation(const SrlAnnotation& annotation) {
  std::set<int> predicates;
  for (const auto& frame : annotation.frames) {
    ValidateFrame(annotation.sentence, frame);
    if (!predicates.insert(frame.predicate).second) {
      throw Error(ErrorCode::kDuplicatePredicate,
                  "predicate " + std::to_string(frame.predicate) + " appears twice");
    }
  }
  if (!annotation.sentence.lemmas.empty() &&
      annotation.sentence.lemmas.size() != annotation.sentence.tokens.size()) {
    throw Error(ErrorCode::kSchemaError, "lemma count differs from token count");
  }
}

SpanPartition Partition(int length, const PredicateFrame& frame) {
  ValidateFrameLength(length, frame);
  std::vector<const Argument*> args;
  for (const auto& arg : frame.arguments) args.push_back(&arg);
  std::sort(args.begin(), args.end(),
            [](const Argument* a, const Argument* b) { return a->span.start < b->span.start; });

  std::vector<Segment> segments;
  auto add_gap = [&](int from, int to) {
    // Leftover interval [from, to] minus the predicate.
    if (from > to) return;
    if (frame.predicate >= from && frame.predicate <= to) {
      if (from < frame.predicate) {
        segments.push_back({{from, frame.predicate - 1}, SegmentKind::kNonArgument, {}});
      }
      segments.push_back({{frame.predicate, frame.predicate}, SegmentKind::kPredicate, {}});
      if (frame.predicate < to) {
        segments.push_back({{frame.predicate + 1, to}, SegmentKind::kNonArgument, {}});
      }
    } else {
      segments.push_back({{from, to}, SegmentKind::kNonArgument, {}});
    }
  };
  int cursor = 1;
  for (const Argument* arg : args) {
    add_gap(cursor, arg->span.start - 1);
    segments.push_back({arg->span, SegmentKind::kArgument, arg->role});
    cursor = arg->span.end + 1;
  }
  add_gap(cursor, length);
  return SpanPartition(length, frame.predicate, std::move(segments));
}

SpanPartition Partition(const Sentence& sentence, const PredicateFrame& frame) {
  ValidateFrame(sentence, frame);
  return Partition(sentence.size(), frame);
}

}  // namespace treesrl
