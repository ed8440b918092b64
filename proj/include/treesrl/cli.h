#ifndef TREESRL_CLI_H_
#define TREESRL_CLI_H_

#include <iosfwd>
#include <string>
#include <vector>

#include "treesrl/core.h"
#include "treesrl/data.h"

namespace treesrl::cli {

enum ExitCode : int { kSuccess = 0, kInputError = 1, kVerificationFailure = 2 };

// Runs one subcommand. `args` excludes the program name. "-" paths stream
// through `in` and `out`; progress and metrics go to `err`.
//
//   convert   srl <-> tree records
//   train     fit a model and write a checkpoint
//   parse     frames from a checkpoint
//   evaluate  P/R/F1/CM of predictions against gold
//   induce    1-best full trees, optionally scored against reference trees
//   check     audit charts and decoders against exhaustive enumeration
//   synth     write a synthetic corpus
//
// Every subcommand accepts --config FILE with key=value lines naming long
// flags; explicit flags win over the file, the file wins over defaults.
int Run(const std::vector<std::string>& args, std::istream& in, std::ostream& out,
        std::ostream& err);

// One tree record per predicate. `heads` and `labels` cover tokens 1..n.
struct TreeRecord {
  int predicate = 0;
  DepTree tree;
  // Set by srl->trees conversion; informational on input.
  std::vector<Segment> segments;
  std::string variant;
};

struct TreeSentence {
  Sentence sentence;
  std::vector<TreeRecord> trees;
};

// {"tokens":[...],"lemmas":[...]?,"trees":[{"predicate":p,"heads":[...],
//  "labels":[...],"constraints":{"variant":v,"segments":[...]}?}]}
std::string ToTreeJsonLine(const TreeSentence& record);
// Validates that every tree is a projective single-root tree whose root
// child is its predicate. Errors carry the line number.
TreeSentence ParseTreeJsonLine(const std::string& line, int line_number);

// Percentage of tokens whose head matches the reference tree of the same
// sentence and predicate; predicates absent from the reference are skipped.
struct Agreement {
  long matched = 0;
  long total = 0;
  double percent() const { return total == 0 ? 0.0 : 100.0 * matched / total; }
};
Agreement AttachmentAgreement(const std::vector<TreeSentence>& output,
                              const std::vector<TreeSentence>& reference);

}  // namespace treesrl::cli

#endif  // TREESRL_CLI_H_
