#ifndef TREESRL_SYNTHETIC_H_
#define TREESRL_SYNTHETIC_H_

#include <cstdint>

#include "treesrl/data.h"

namespace treesrl {

// Toy corpus with lexically determined frames: one verb per sentence, and
// each argument phrase ([preposition] determiner adjective* noun) takes its
// role from the noun's class. Phrase order around the verb is shuffled, so
// the role is not recoverable from the first token of the span. Filler
// tokens ("o", ",", "then") are non-arguments.
struct SyntheticConfig {
  int sentences = 500;
  int min_length = 3;
  int max_length = 12;
  uint64_t seed = 1;
};

Corpus GenerateSynthetic(const SyntheticConfig& config);

}  // namespace treesrl

#endif  // TREESRL_SYNTHETIC_H_
