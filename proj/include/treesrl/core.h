#ifndef TREESRL_CORE_H_
#define TREESRL_CORE_H_

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace treesrl {

enum class ErrorCode {
  kOverlappingArguments,
  kPredicateInsideArgument,
  kOutOfBounds,
  kDuplicatePredicate,
  kInvalidRole,
  kTooLarge,
  kMalformedTree,
  kEmptyForest,
  kInfeasible,
  kAllMasked,
  kSchemaError,
  kUnbalancedBrackets,
  kColumnCountMismatch,
  kAlignmentError,
  kNonFiniteLoss,
  kIoError,
  kInvalidConfig,
};

const char* ErrorCodeName(ErrorCode code);

// Every library failure is reported through this exception type; `code()`
// identifies the failure class so callers can map it to exit statuses.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(ErrorCodeName(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

// Reserved labels. Neither may appear in a role inventory.
inline constexpr std::string_view kPredicateLabel = "PRD";
inline constexpr std::string_view kNullLabel = "NULL";

// Tokens are addressed 1..n; position 0 is the dummy root.
struct Sentence {
  std::vector<std::string> tokens;
  // Either empty or one entry per token ("-" where unknown).
  std::vector<std::string> lemmas;

  int size() const { return static_cast<int>(tokens.size()); }
  const std::string& token(int position) const { return tokens[position - 1]; }

  bool operator==(const Sentence&) const = default;
};

// Inclusive token interval [start, end].
struct Span {
  int start = 0;
  int end = 0;

  int length() const { return end - start + 1; }
  bool contains(int position) const { return start <= position && position <= end; }
  bool overlaps(const Span& other) const {
    return start <= other.end && other.start <= end;
  }

  auto operator<=>(const Span&) const = default;
};

struct Argument {
  Span span;
  std::string role;

  auto operator<=>(const Argument&) const = default;
};

struct PredicateFrame {
  int predicate = 0;
  std::vector<Argument> arguments;

  bool operator==(const PredicateFrame&) const = default;
};

struct SrlAnnotation {
  Sentence sentence;
  std::vector<PredicateFrame> frames;

  bool operator==(const SrlAnnotation&) const = default;
};

// Role inventory with NULL pinned at index 0. PRD lives in the separate
// root-label space {PRD, NULL} and is never part of this set.
class LabelSet {
 public:
  static constexpr int kNull = 0;

  LabelSet() : names_{std::string(kNullLabel)} {}
  explicit LabelSet(const std::vector<std::string>& roles);

  // Adds a role if absent and returns its index.
  int Add(const std::string& role);
  // Index of `role`, or -1. "NULL" maps to kNull.
  int Find(std::string_view role) const;
  int Index(std::string_view role) const;

  const std::string& Name(int index) const { return names_[index]; }
  // Number of labels including NULL.
  int size() const { return static_cast<int>(names_.size()); }
  // Roles without NULL, in index order.
  std::vector<std::string> Roles() const {
    return {names_.begin() + 1, names_.end()};
  }

 private:
  std::vector<std::string> names_;
  std::unordered_map<std::string, int> index_;
};

// Root-arc label space.
enum RootLabel : int { kRootPrd = 0, kRootNull = 1, kNumRootLabels = 2 };

enum class SegmentKind { kArgument, kNonArgument, kPredicate };

const char* SegmentKindName(SegmentKind kind);

struct Segment {
  Span span;
  SegmentKind kind = SegmentKind::kNonArgument;
  std::string role;  // set for kArgument only

  bool operator==(const Segment&) const = default;
};

// Tiling of [1, n] relative to one predicate.
class SpanPartition {
 public:
  SpanPartition() = default;
  SpanPartition(int length, int predicate, std::vector<Segment> segments);

  int length() const { return length_; }
  int predicate() const { return predicate_; }
  const std::vector<Segment>& segments() const { return segments_; }
  // Index into segments() of the segment holding `position` (1..n).
  int SegmentIndex(int position) const { return segment_of_[position]; }
  const Segment& SegmentAt(int position) const {
    return segments_[segment_of_[position]];
  }

  bool operator==(const SpanPartition& other) const {
    return length_ == other.length_ && predicate_ == other.predicate_ &&
           segments_ == other.segments_;
  }

 private:
  int length_ = 0;
  int predicate_ = 0;
  std::vector<Segment> segments_;
  std::vector<int> segment_of_;
};

// heads[m] for m in 1..n; heads[0] is -1. labels are parallel to heads and
// optional per arc.
struct DepTree {
  std::vector<int> heads;
  std::vector<std::optional<std::string>> labels;

  DepTree() = default;
  explicit DepTree(std::vector<int> head_vector)
      : heads(std::move(head_vector)), labels(heads.size()) {
    if (!heads.empty()) heads[0] = -1;
  }

  int size() const { return static_cast<int>(heads.size()) - 1; }

  bool operator==(const DepTree&) const = default;
};

// True iff `heads` (length n+1, heads[0] ignored) is a connected, acyclic,
// projective tree rooted at 0. Multiple root children are allowed here.
bool IsProjectiveTree(const std::vector<int>& heads);

// Number of children of position 0.
int RootChildCount(const std::vector<int>& heads);

std::vector<std::vector<int>> Children(const std::vector<int>& heads);

// Minimal interval covering `node` and its descendants. Assumes a tree.
Span SubtreeSpan(const std::vector<int>& heads, int node);

const PredicateFrame& ValidateFrame(const Sentence& sentence,
                                    const PredicateFrame& frame);

// Validates all frames and that predicate positions are distinct.
void ValidateAnnotation(const SrlAnnotation& annotation);

SpanPartition Partition(const Sentence& sentence, const PredicateFrame& frame);
SpanPartition Partition(int length, const PredicateFrame& frame);

}  // namespace treesrl

#endif  // TREESRL_CORE_H_
