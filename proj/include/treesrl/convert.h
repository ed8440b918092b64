#ifndef TREESRL_CONVERT_H_
#define TREESRL_CONVERT_H_

#include <functional>
#include <string>
#include <tuple>
#include <vector>

#include "treesrl/core.h"

namespace treesrl {

// How argument subtrees are shaped. kLatent leaves the headword and the
// internal structure free; kFirst/kLast pin the headword to a span edge;
// kFlat additionally attaches every other span token to that headword.
enum class Variant { kLatent, kFirst, kLast, kFlat };

const char* VariantName(Variant variant);
Variant ParseVariant(const std::string& name);

struct ForestConstraints {
  SpanPartition partition;
  Variant variant = Variant::kLatent;

  int length() const { return partition.length(); }
  int predicate() const { return partition.predicate(); }
};

ForestConstraints MakeConstraints(int length, const PredicateFrame& frame,
                                  Variant variant = Variant::kLatent);

// Membership test for the latent forest T_p described by `constraints`.
bool IsValidTree(const DepTree& tree, const ForestConstraints& constraints);
bool IsValidTree(const std::vector<int>& heads, const ForestConstraints& constraints);

inline constexpr int kDefaultEnumerationBound = 10;

// Calls `visit(heads)` once per projective tree over n tokens in which
// position 0 has exactly one child (`root` when root > 0). Trees are visited
// in lexicographic order of their head vectors.
void ForEachProjectiveTree(int n, int root,
                           const std::function<void(const std::vector<int>&)>& visit,
                           int bound = kDefaultEnumerationBound);

// All trees accepted by IsValidTree, in lexicographic head order.
std::vector<DepTree> EnumerateForest(const ForestConstraints& constraints,
                                     int bound = kDefaultEnumerationBound);

// The FLAT member of T_p with labels: PRD on 0->p, roles on headword arcs,
// NULL on non-argument tokens (all attached to p).
DepTree CanonicalTree(const ForestConstraints& constraints);

// Attaches gold labels to a member of T_p: PRD on 0->p, the segment role
// or NULL on p->h, nothing elsewhere.
DepTree LabelTree(const std::vector<int>& heads, const ForestConstraints& constraints);

// Collapses subtrees headed by children of p into argument spans, ordered by
// span start. Children labeled NULL are dropped.
PredicateFrame RecoverFrame(const DepTree& tree, int predicate);

struct HeadwordDependency {
  int predicate = 0;
  int headword = 0;
  std::string role;

  auto operator<=>(const HeadwordDependency&) const = default;
};

std::vector<HeadwordDependency> HeadwordDependencies(const DepTree& tree, int predicate);

}  // namespace treesrl

#endif  // TREESRL_CONVERT_H_
