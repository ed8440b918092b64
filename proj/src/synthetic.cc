#include "treesrl/synthetic.h"

#include <algorithm>
#include <optional>
#include <random>

namespace treesrl {

namespace {

struct RoleLexicon {
  const char* role;
  std::vector<std::string> prepositions;  // empty: bare noun phrase
  std::vector<std::string> nouns;
};

const std::vector<RoleLexicon>& Lexicon() {
  static const std::vector<RoleLexicon> lexicon = {
      {"A0", {}, {"dog", "man", "teacher", "girl"}},
      {"A1", {}, {"ball", "book", "letter", "bread"}},
      {"A2", {"to", "for"}, {"friend", "child", "sister", "doctor"}},
      {"AM-LOC", {"in", "at", "near"}, {"park", "house", "city", "garden"}},
      {"AM-TMP", {"on", "during", "after"}, {"monday", "night", "morning", "winter"}},
  };
  return lexicon;
}

const std::vector<std::string> kDeterminers = {"the", "a", "this", "every", "that"};
const std::vector<std::string> kAdjectives = {"big", "small", "red", "old", "happy", "green",
                                              "quiet", "tall"};
const std::vector<std::string> kVerbs = {"chased", "gave", "saw", "found", "sent", "liked",
                                         "took", "read", "brought", "kept"};
const std::vector<std::string> kFillers = {"o", ",", "then"};

template <class T>
const T& Pick(std::mt19937_64& rng, const std::vector<T>& items) {
  return items[std::uniform_int_distribution<size_t>(0, items.size() - 1)(rng)];
}

struct Phrase {
  std::vector<std::string> tokens;
  std::string role;  // empty for the verb and fillers
  bool verb = false;
};

Phrase ArgumentPhrase(std::mt19937_64& rng, const RoleLexicon& entry) {
  Phrase phrase;
  phrase.role = entry.role;
  if (!entry.prepositions.empty()) phrase.tokens.push_back(Pick(rng, entry.prepositions));
  phrase.tokens.push_back(Pick(rng, kDeterminers));
  const int adjectives = std::uniform_int_distribution<int>(0, 2)(rng);
  for (int k = 0; k < adjectives; ++k) phrase.tokens.push_back(Pick(rng, kAdjectives));
  phrase.tokens.push_back(Pick(rng, entry.nouns));
  return phrase;
}

std::optional<SrlAnnotation> TrySentence(std::mt19937_64& rng, const SyntheticConfig& config) {
  std::vector<int> roles(Lexicon().size());
  for (size_t r = 0; r < roles.size(); ++r) roles[r] = static_cast<int>(r);
  std::shuffle(roles.begin(), roles.end(), rng);
  const int count = std::uniform_int_distribution<int>(1, static_cast<int>(roles.size()))(rng);

  std::vector<Phrase> phrases;
  for (int k = 0; k < count; ++k) phrases.push_back(ArgumentPhrase(rng, Lexicon()[roles[k]]));
  std::shuffle(phrases.begin(), phrases.end(), rng);
  const int verb_at = std::uniform_int_distribution<int>(0, count)(rng);
  phrases.insert(phrases.begin() + verb_at, Phrase{{Pick(rng, kVerbs)}, "", true});

  std::bernoulli_distribution filler(0.3);
  std::vector<Phrase> sequence;
  for (auto& phrase : phrases) {
    if (filler(rng)) sequence.push_back(Phrase{{Pick(rng, kFillers)}, "", false});
    sequence.push_back(std::move(phrase));
  }
  if (std::bernoulli_distribution(0.7)(rng)) sequence.push_back(Phrase{{"."}, "", false});

  SrlAnnotation annotation;
  PredicateFrame frame;
  for (const auto& phrase : sequence) {
    const int start = annotation.sentence.size() + 1;
    for (const auto& token : phrase.tokens) annotation.sentence.tokens.push_back(token);
    if (phrase.verb) frame.predicate = start;
    if (!phrase.role.empty()) {
      frame.arguments.push_back({{start, annotation.sentence.size()}, phrase.role});
    }
  }
  const int n = annotation.sentence.size();
  if (n < config.min_length || n > config.max_length) return std::nullopt;
  annotation.frames.push_back(std::move(frame));
  return annotation;
}

}  // namespace

Corpus GenerateSynthetic(const SyntheticConfig& config) {
  if (config.sentences < 0 || config.min_length < 2 || config.max_length < config.min_length) {
    throw Error(ErrorCode::kInvalidConfig, "bad synthetic corpus configuration");
  }
  std::mt19937_64 rng(config.seed);
  Corpus corpus;
  long attempts = 0;
  while (static_cast<int>(corpus.size()) < config.sentences) {
    if (++attempts > 1000L * (config.sentences + 1)) {
      throw Error(ErrorCode::kInvalidConfig, "length range too narrow for the generator");
    }
    if (auto annotation = TrySentence(rng, config)) corpus.push_back(std::move(*annotation));
  }
  return corpus;
}

}  // namespace treesrl
