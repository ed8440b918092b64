#ifndef TREESRL_DATA_H_
#define TREESRL_DATA_H_

#include <iosfwd>
#include <string>
#include <vector>

#include "treesrl/core.h"

namespace treesrl {

using Corpus = std::vector<SrlAnnotation>;

// One JSON object per line:
//   {"tokens":[...],"lemmas":[...],"frames":[{"predicate":p,"args":[{"start":s,"end":e,"role":r}]}]}
// "lemmas" is optional. Positions are 1-based and inclusive. Blank lines are
// skipped. Errors carry the 1-based line number in their message.
SrlAnnotation ParseJsonLine(const std::string& line, int line_number = 1);
std::string ToJsonLine(const SrlAnnotation& annotation);
Corpus ReadJsonl(std::istream& in);
void WriteJsonl(std::ostream& out, const Corpus& corpus);

// CoNLL-2005 style props blocks, separated by one blank line. Columns: token,
// predicate lemma or "-", then one bracket column per frame in which "(V*)"
// marks the predicate. Column 2 is stored as the sentence lemmas. Output
// columns are left-aligned, two spaces apart, without trailing blanks.
Corpus ReadProps(std::istream& in);
void WriteProps(std::ostream& out, const Corpus& corpus);

enum class Format { kJsonl, kProps };

Format ParseFormat(const std::string& name);
// "-" means stdin/stdout; props requires a real path.
Corpus ReadCorpus(const std::string& path, Format format);
void WriteCorpus(const std::string& path, Format format, const Corpus& corpus);

struct EvalReport {
  double precision = 0.0;  // percent
  double recall = 0.0;
  double f1 = 0.0;
  double cm = 0.0;  // percent of gold predicates with exactly the gold arguments
  long matched = 0;
  long predicted = 0;
  long gold = 0;
  long gold_predicates = 0;
  long complete_predicates = 0;
};

// Micro P/R/F1 over exact (sentence, predicate, span, role) tuples; 0/0 is 0.
// Throws kAlignmentError when sentence counts or lengths differ.
EvalReport Evaluate(const Corpus& gold, const Corpus& predicted);

// Fixed two-decimal rendering, one "key value" pair per line.
std::string FormatReport(const EvalReport& report);

}  // namespace treesrl

#endif  // TREESRL_DATA_H_
