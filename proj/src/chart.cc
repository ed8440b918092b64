#include "treesrl/chart.h"

#include <algorithm>
#include <array>
#include <cassert>

namespace treesrl {

ScoreTables ScoreTables::Zeros(int n, bool second_order, const LabelSet* label_set) {
  ScoreTables scores;
  scores.length = n;
  scores.arc = Table2(n + 1, n + 1, 0.0);
  if (second_order) scores.sib = Table3(n + 1, n + 1, n + 1, 0.0);
  if (label_set != nullptr) {
    scores.labels = label_set;
    scores.root_label = Table2(n + 1, kNumRootLabels, 0.0);
    scores.arg_label = Table3(n + 1, n + 1, label_set->size(), 0.0);
  }
  ApplyStructuralMask(scores);
  return scores;
}

void ApplyStructuralMask(ScoreTables& scores) {
  const int n = scores.length;
  for (int h = 0; h <= n; ++h) {
    for (int m = 0; m <= n; ++m) {
      if (!IsLegalArc(h, m)) scores.arc(h, m) = kNegInf;
    }
  }
  if (scores.has_siblings()) {
    for (int h = 0; h <= n; ++h) {
      for (int s = 0; s <= n; ++s) {
        for (int m = 0; m <= n; ++m) {
          if (!IsSiblingTriple(h, s, m)) scores.sib(h, s, m) = kNegInf;
        }
      }
    }
  }
}

namespace {

// Calls visit(h, s, m) for each adjacent same-side sibling pair in `heads`.
template <class Visit>
void ForEachSiblingPair(const std::vector<int>& heads, Visit&& visit) {
  const auto children = Children(heads);
  for (int h = 0; h < static_cast<int>(children.size()); ++h) {
    const auto& kids = children[h];  // ascending
    for (size_t k = 0; k + 1 < kids.size(); ++k) {
      if (kids[k] > h && kids[k + 1] > h) visit(h, kids[k], kids[k + 1]);
    }
    for (size_t k = kids.size(); k-- > 1;) {
      if (kids[k] < h && kids[k - 1] < h) visit(h, kids[k], kids[k - 1]);
    }
  }
}

int SegmentLabel(const ScoreTables& scores, const Segment& segment) {
  if (segment.kind != SegmentKind::kArgument) return LabelSet::kNull;
  return scores.labels->Index(segment.role);
}

}  // namespace

double ScoreTree(const ScoreTables& scores, const std::vector<int>& heads, int order) {
  double total = 0.0;
  for (int m = 1; m < static_cast<int>(heads.size()); ++m) total += scores.arc(heads[m], m);
  if (order == 2 && scores.has_siblings()) {
    ForEachSiblingPair(heads, [&](int h, int s, int m) { total += scores.sib(h, s, m); });
  }
  return total;
}

double LabeledTreeScore(const ScoreTables& scores, const std::vector<int>& heads,
                        const ForestConstraints& constraints, int order) {
  double total = ScoreTree(scores, heads, order);
  if (!scores.has_labels() || scores.labels == nullptr) return total;
  const int p = constraints.predicate();
  total += scores.root_label(p, kRootPrd);
  for (int m = 1; m < static_cast<int>(heads.size()); ++m) {
    if (heads[m] != p) continue;
    total += scores.arg_label(p, m, SegmentLabel(scores, constraints.partition.SegmentAt(m)));
  }
  return total;
}

namespace {

enum class Kind : unsigned char { kNone, kC, kI, kS, kSib };

struct Slot {
  Kind kind = Kind::kNone;
  int a = 0;
  int b = 0;
  int c = 0;
};

using Parts = std::array<Slot, 3>;

// Problem definition shared by the sum and max charts. `arc` and `sib` are
// effective scores: masks and folded labels already applied.
struct Problem {
  int n = 0;
  int order = 1;
  Table2 arc;
  Table3 sib;
  int predicate = 0;
  // end_ok[e]: complete items of the predicate may stop at e.
  std::vector<char> end_ok;
};

class Chart {
 public:
  explicit Chart(const Problem& problem)
      : pr_(problem), width_(problem.n + 1),
        c_(Size(), kNegInf), i_(Size(), kNegInf), s_(Size(), kNegInf) {
    for (int k = 0; k <= pr_.n; ++k) c_[Idx(k, k)] = 0.0;
  }

  // Log-semiring pass; returns C[0][n].
  double Inside() {
    Sweep([this](Kind kind, int a, int b) {
      LogSum sum;
      const double arc = ArcOf(kind, a, b);
      if (arc == kNegInf && (kind == Kind::kI)) return kNegInf;
      Terms(kind, a, b, [&](double value, const Parts&) { sum.Add(value); });
      const double total = sum.Result();
      return total == kNegInf ? kNegInf : total + arc;
    });
    return c_[Idx(0, pr_.n)];
  }

  // Adjoint pass of Inside(); must follow it. Fills d/d arc and d/d sib.
  void Backward(Table2& d_arc, Table3* d_sib) {
    std::vector<double> dc(Size(), 0.0), di(Size(), 0.0), ds(Size(), 0.0);
    dc[Idx(0, pr_.n)] = 1.0;
    auto adj = [&](Kind kind, int a, int b) -> double& {
      switch (kind) {
        case Kind::kC: return dc[Idx(a, b)];
        case Kind::kI: return di[Idx(a, b)];
        default: return ds[Idx(a, b)];
      }
    };
    ReverseSweep([&](Kind kind, int a, int b) {
      const double g = adj(kind, a, b);
      const double value = Value(kind, a, b);
      if (g == 0.0 || value == kNegInf) return;
      const double arc = ArcOf(kind, a, b);
      if (kind == Kind::kI) d_arc(a, b) += g;
      Terms(kind, a, b, [&](double term, const Parts& parts) {
        const double weight = g * std::exp(term + arc - value);
        for (const Slot& part : parts) {
          switch (part.kind) {
            case Kind::kNone: break;
            case Kind::kSib:
              if (d_sib != nullptr) (*d_sib)(part.a, part.b, part.c) += weight;
              break;
            default:
              adj(part.kind, part.a, part.b) += weight;
          }
        }
      });
    });
  }

  // Max-semiring pass with backpointers; returns the best head vector or an
  // empty vector when infeasible.
  std::vector<int> Viterbi() {
    back_.assign(static_cast<size_t>(3) * Size(), Parts{});
    Sweep([this](Kind kind, int a, int b) {
      const double arc = ArcOf(kind, a, b);
      if (arc == kNegInf && kind == Kind::kI) return kNegInf;
      double best = kNegInf;
      Parts best_parts{};
      Terms(kind, a, b, [&](double value, const Parts& parts) {
        if (value == kNegInf) return;
        if (value > best) {
          best = value;
          best_parts = parts;
        } else if (value == best && PrefersCandidate(kind, a, b, parts, best_parts)) {
          best_parts = parts;
        }
      });
      Back(kind, a, b) = best_parts;
      return best == kNegInf ? kNegInf : best + arc;
    });
    if (c_[Idx(0, pr_.n)] == kNegInf) return {};
    std::vector<int> heads(pr_.n + 1, -1);
    Fill({Kind::kC, 0, pr_.n, 0}, heads);
    return heads;
  }

 private:
  size_t Size() const { return static_cast<size_t>(width_) * width_; }
  size_t Idx(int a, int b) const { return static_cast<size_t>(a) * width_ + b; }

  double Value(Kind kind, int a, int b) const {
    switch (kind) {
      case Kind::kC: return c_[Idx(a, b)];
      case Kind::kI: return i_[Idx(a, b)];
      default: return s_[Idx(a, b)];
    }
  }
  double& Mutable(Kind kind, int a, int b) {
    switch (kind) {
      case Kind::kC: return c_[Idx(a, b)];
      case Kind::kI: return i_[Idx(a, b)];
      default: return s_[Idx(a, b)];
    }
  }
  double PartValue(const Slot& slot) const {
    switch (slot.kind) {
      case Kind::kNone: return 0.0;
      case Kind::kSib: return pr_.sib(slot.a, slot.b, slot.c);
      default: return Value(slot.kind, slot.a, slot.b);
    }
  }
  double ArcOf(Kind kind, int a, int b) const {
    return kind == Kind::kI ? pr_.arc(a, b) : 0.0;
  }
  Parts& Back(Kind kind, int a, int b) {
    const size_t offset = kind == Kind::kC ? 0 : (kind == Kind::kI ? 1 : 2);
    return back_[offset * Size() + Idx(a, b)];
  }

  // Enumerates the decompositions of item (kind, a, b). For C and I items
  // `a` is the head and `b` the far end; S items have a < b. The visited
  // value excludes the arc score of I items.
  template <class Visit>
  void Terms(Kind kind, int a, int b, Visit&& visit) const {
    auto emit = [&](Slot x, Slot y, Slot z = {}) {
      const double value = PartValue(x) + PartValue(y) + PartValue(z);
      visit(value, Parts{x, y, z});
    };
    const int n = pr_.n;
    if (kind == Kind::kI) {
      const int h = a, m = b;
      if (h == 0) {
        emit({Kind::kC, 0, 0}, {Kind::kC, m, 1});
        return;
      }
      const int lo = std::min(h, m), hi = std::max(h, m);
      if (pr_.order == 1) {
        for (int r = lo; r < hi; ++r) emit({Kind::kC, lo, r}, {Kind::kC, hi, r + 1});
        return;
      }
      if (h < m) {
        emit({Kind::kC, h, h}, {Kind::kC, m, h + 1});
        for (int r = h + 1; r < m; ++r) {
          emit({Kind::kI, h, r}, {Kind::kS, r, m}, {Kind::kSib, h, r, m});
        }
      } else {
        emit({Kind::kC, h, h}, {Kind::kC, m, h - 1});
        for (int r = m + 1; r < h; ++r) {
          emit({Kind::kI, h, r}, {Kind::kS, m, r}, {Kind::kSib, h, r, m});
        }
      }
      return;
    }
    if (kind == Kind::kS) {
      for (int r = a; r < b; ++r) emit({Kind::kC, a, r}, {Kind::kC, b, r + 1});
      return;
    }
    // Complete items.
    const int h = a, e = b;
    if (h == 0 && e != n) return;
    if (pr_.predicate != 0 && h == pr_.predicate && !pr_.end_ok[e]) return;
    if (h < e) {
      for (int r = h + 1; r <= e; ++r) emit({Kind::kI, h, r}, {Kind::kC, r, e});
    } else {
      for (int r = e; r < h; ++r) emit({Kind::kI, h, r}, {Kind::kC, r, e});
    }
  }

  // Forward order: by width, then left end; within a cell I, S, C.
  template <class Compute>
  void Sweep(Compute&& compute) {
    const int n = pr_.n;
    for (int w = 1; w <= n; ++w) {
      for (int i = 0; i + w <= n; ++i) {
        const int j = i + w;
        Mutable(Kind::kI, i, j) = compute(Kind::kI, i, j);
        if (i > 0) Mutable(Kind::kI, j, i) = compute(Kind::kI, j, i);
        if (pr_.order == 2 && i > 0) Mutable(Kind::kS, i, j) = compute(Kind::kS, i, j);
        Mutable(Kind::kC, i, j) = compute(Kind::kC, i, j);
        if (i > 0) Mutable(Kind::kC, j, i) = compute(Kind::kC, j, i);
      }
    }
  }

  template <class Visit>
  void ReverseSweep(Visit&& visit) {
    const int n = pr_.n;
    for (int w = n; w >= 1; --w) {
      for (int i = n - w; i >= 0; --i) {
        const int j = i + w;
        if (i > 0) visit(Kind::kC, j, i);
        visit(Kind::kC, i, j);
        if (pr_.order == 2 && i > 0) visit(Kind::kS, i, j);
        if (i > 0) visit(Kind::kI, j, i);
        visit(Kind::kI, i, j);
      }
    }
  }

  void Fill(const Slot& slot, std::vector<int>& heads) {
    switch (slot.kind) {
      case Kind::kNone:
      case Kind::kSib:
        return;
      case Kind::kC:
        if (slot.a == slot.b) return;
        break;
      case Kind::kI:
        heads[slot.b] = slot.a;
        break;
      case Kind::kS:
        break;
    }
    for (const Slot& part : Back(slot.kind, slot.a, slot.b)) Fill(part, heads);
  }

  // True when `candidate` yields a lexicographically smaller head vector over
  // the item's span than `incumbent`.
  bool PrefersCandidate(Kind, int a, int b, const Parts& candidate,
                        const Parts& incumbent) {
    std::vector<int> x(pr_.n + 1, -1), y(pr_.n + 1, -1);
    for (const Slot& part : candidate) Fill(part, x);
    for (const Slot& part : incumbent) Fill(part, y);
    const int lo = std::min(a, b), hi = std::max(a, b);
    for (int k = lo; k <= hi; ++k) {
      if (x[k] != y[k]) return x[k] < y[k];
    }
    return false;
  }

  const Problem& pr_;
  int width_;
  std::vector<double> c_, i_, s_;
  std::vector<Parts> back_;
};

Problem Unconstrained(const ScoreTables& scores, int order, int root) {
  Problem pr;
  pr.n = scores.length;
  pr.order = order;
  pr.arc = scores.arc;
  for (int m = 1; m <= pr.n; ++m) {
    if (root > 0 && m != root) pr.arc(0, m) = kNegInf;
  }
  for (int h = 0; h <= pr.n; ++h) {
    for (int m = 0; m <= pr.n; ++m) {
      if (!IsLegalArc(h, m)) pr.arc(h, m) = kNegInf;
    }
  }
  if (order == 2) {
    if (!scores.has_siblings()) {
      pr.sib = Table3(pr.n + 1, pr.n + 1, pr.n + 1, 0.0);
    } else {
      pr.sib = scores.sib;
    }
  }
  return pr;
}

Problem Constrained(const ScoreTables& scores, int order, const ForestConstraints& constraints,
                    const ConstrainedChartOptions& options) {
  const SpanPartition& part = constraints.partition;
  const int n = scores.length;
  if (part.length() != n) {
    throw Error(ErrorCode::kOutOfBounds, "constraints cover " + std::to_string(part.length()) +
                                             " tokens, scores cover " + std::to_string(n));
  }
  const int p = part.predicate();
  const bool labeled = scores.has_labels() && scores.labels != nullptr;
  Problem pr = Unconstrained(scores, order, p);
  pr.predicate = p;
  pr.end_ok.assign(n + 1, 1);

  for (int m = 1; m <= n; ++m) {
    const Segment& mseg = part.SegmentAt(m);
    const bool in_arg = mseg.kind == SegmentKind::kArgument;
    for (int h = 0; h <= n; ++h) {
      double& arc = pr.arc(h, m);
      if (arc == kNegInf) continue;
      if (h == 0) {
        if (labeled) arc += scores.root_label(p, kRootPrd);
      } else if (h == p) {
        if (in_arg) {
          const Variant v = constraints.variant;
          if ((v == Variant::kFirst || v == Variant::kFlat) && m != mseg.span.start) arc = kNegInf;
          if (v == Variant::kLast && m != mseg.span.end) arc = kNegInf;
        }
        if (arc != kNegInf && labeled) arc += scores.arg_label(p, m, SegmentLabel(scores, mseg));
      } else if (part.SegmentIndex(h) != part.SegmentIndex(m)) {
        arc = kNegInf;
      } else if (in_arg && constraints.variant == Variant::kFlat && h != mseg.span.start) {
        arc = kNegInf;
      }
    }
  }

  if (options.restrict_predicate_endpoints) {
    for (const Segment& seg : part.segments()) {
      if (seg.kind != SegmentKind::kArgument) continue;
      // Right of p a child subtree must end at the segment end; left of p it
      // must start at the segment start.
      for (int k = seg.span.start; k <= seg.span.end; ++k) {
        const bool edge = seg.span.start > p ? k == seg.span.end : k == seg.span.start;
        if (!edge) pr.end_ok[k] = 0;
      }
    }
  }

  if (order == 2) {
    for (int s = 1; s <= n; ++s) {
      for (int m = 1; m <= n; ++m) {
        if (!IsSiblingTriple(p, s, m)) continue;
        const Segment& seg = part.SegmentAt(m);
        if (seg.kind == SegmentKind::kArgument && part.SegmentIndex(s) == part.SegmentIndex(m)) {
          pr.sib(p, s, m) = kNegInf;
        }
      }
    }
  }
  return pr;
}

void CheckOrder(int order, const ScoreTables& scores) {
  if (order != 1 && order != 2) {
    throw Error(ErrorCode::kInvalidConfig, "order must be 1 or 2");
  }
  if (scores.length < 1) throw Error(ErrorCode::kOutOfBounds, "empty sentence");
}

double RunInside(const Problem& pr, ErrorCode empty_code) {
  Chart chart(pr);
  const double log_z = chart.Inside();
  if (log_z == kNegInf) throw Error(empty_code, "no tree survives the masks");
  return log_z;
}

}  // namespace

double Inside1(const ScoreTables& scores, int root) {
  CheckOrder(1, scores);
  return RunInside(Unconstrained(scores, 1, root), ErrorCode::kAllMasked);
}

double Inside2(const ScoreTables& scores, int root) {
  CheckOrder(2, scores);
  return RunInside(Unconstrained(scores, 2, root), ErrorCode::kAllMasked);
}

double Inside1Constrained(const ScoreTables& scores, const ForestConstraints& constraints,
                          const ConstrainedChartOptions& options) {
  CheckOrder(1, scores);
  return RunInside(Constrained(scores, 1, constraints, options), ErrorCode::kEmptyForest);
}

double Inside2Constrained(const ScoreTables& scores, const ForestConstraints& constraints,
                          const ConstrainedChartOptions& options) {
  CheckOrder(2, scores);
  return RunInside(Constrained(scores, 2, constraints, options), ErrorCode::kEmptyForest);
}

ChartResult Marginals(const ScoreTables& scores, int order, const ForestConstraints* constraints,
                      int root) {
  CheckOrder(order, scores);
  const Problem pr = constraints != nullptr ? Constrained(scores, order, *constraints, {})
                                            : Unconstrained(scores, order, root);
  Chart chart(pr);
  ChartResult result;
  result.log_z = chart.Inside();
  if (result.log_z == kNegInf) {
    throw Error(constraints != nullptr ? ErrorCode::kEmptyForest : ErrorCode::kAllMasked,
                "no tree survives the masks");
  }
  const int n = scores.length;
  result.arc_marginals = Table2(n + 1, n + 1, 0.0);
  if (order == 2) result.sib_marginals = Table3(n + 1, n + 1, n + 1, 0.0);
  chart.Backward(result.arc_marginals, order == 2 ? &result.sib_marginals : nullptr);
  return result;
}

DecodeResult Eisner(const ScoreTables& scores, int order, int root) {
  CheckOrder(order, scores);
  const Problem pr = Unconstrained(scores, order, root);
  Chart chart(pr);
  std::vector<int> heads = chart.Viterbi();
  if (heads.empty()) throw Error(ErrorCode::kInfeasible, "no tree survives the masks");
  DecodeResult result;
  result.score = ScoreTree(scores, heads, order);
  result.tree = DepTree(std::move(heads));
  return result;
}

}  // namespace treesrl
