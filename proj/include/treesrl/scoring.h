#ifndef TREESRL_SCORING_H_
#define TREESRL_SCORING_H_

#include <cstdint>
#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

#include "treesrl/chart.h"
#include "treesrl/core.h"

namespace treesrl {

struct ParameterBlock {
  std::string name;
  std::vector<int> shape;
  std::vector<double> values;
};

// One gradient vector per parameter block, same order and sizes.
using Gradients = std::vector<std::vector<double>>;

// d(loss)/d(table entry). Entries that are masked in the forward tables must
// stay 0.
struct TableGradients {
  Table2 arc;
  Table3 sib;
  Table2 root_label;
  Table3 arg_label;

  static TableGradients ZerosLike(const ScoreTables& scores);
};

// Scores of one sentence plus whatever is needed to back-propagate into the
// parameters that produced them. Sessions only read parameters, so several
// may run concurrently against one scorer.
class ScoreSession {
 public:
  virtual ~ScoreSession() = default;
  const ScoreTables& tables() const { return tables_; }
  // Adds d(loss)/d(parameters) into `grads`.
  virtual void Backward(const TableGradients& grad, Gradients& grads) const = 0;

 protected:
  ScoreTables tables_;
};

enum class ScorerKind { kLogLinear, kNeural };

const char* ScorerKindName(ScorerKind kind);
ScorerKind ParseScorerKind(const std::string& name);

class Scorer {
 public:
  explicit Scorer(LabelSet labels) : labels_(std::move(labels)) {}
  virtual ~Scorer() = default;
  Scorer(const Scorer&) = delete;
  Scorer& operator=(const Scorer&) = delete;

  virtual ScorerKind kind() const = 0;
  // Tables reference labels(); the scorer must outlive them. Sibling scores
  // are produced only for order 2.
  virtual std::unique_ptr<ScoreSession> Score(const Sentence& sentence, int order) const = 0;

  ScoreTables Tables(const Sentence& sentence, int order) const {
    return Score(sentence, order)->tables();
  }

  const LabelSet& labels() const { return labels_; }
  std::vector<ParameterBlock>& params() { return params_; }
  const std::vector<ParameterBlock>& params() const { return params_; }
  Gradients ZeroGradients() const;
  size_t NumParameters() const;

 protected:
  LabelSet labels_;
  std::vector<ParameterBlock> params_;
};

// Lower-cased ASCII form used by both scorers.
std::string NormalizeToken(const std::string& token);

// Word inventory with reserved ids for padding, unknown words and the root.
class Vocabulary {
 public:
  static constexpr int kPad = 0;
  static constexpr int kUnk = 1;
  static constexpr int kRoot = 2;
  static constexpr int kNumReserved = 3;

  Vocabulary() = default;
  // Words are normalized; duplicates are ignored; order is preserved.
  explicit Vocabulary(const std::vector<std::string>& words);

  int Id(const std::string& token) const;
  // Non-reserved words in id order.
  const std::vector<std::string>& words() const { return words_; }
  int size() const { return kNumReserved + static_cast<int>(words_.size()); }

 private:
  std::vector<std::string> words_;
  std::unordered_map<std::string, int> ids_;
};

// Sorted distinct normalized tokens of a corpus.
Vocabulary BuildVocabulary(const std::vector<SrlAnnotation>& corpus);

struct NeuralConfig {
  int embed_dim = 32;
  int encoder_dim = 64;
  int arc_dim = 64;
  int label_dim = 64;
  int sib_dim = 32;
  double init_scale = 0.1;
  uint64_t seed = 1;
};

// Window-3 feed-forward encoder, biaffine arc and label heads, triaffine
// sibling head; label scores are log-softmax normalized.
class NeuralScorer : public Scorer {
 public:
  NeuralScorer(LabelSet labels, Vocabulary vocab, const NeuralConfig& config);

  ScorerKind kind() const override { return ScorerKind::kNeural; }
  std::unique_ptr<ScoreSession> Score(const Sentence& sentence, int order) const override;

  const NeuralConfig& config() const { return config_; }
  const Vocabulary& vocab() const { return vocab_; }

 private:
  Vocabulary vocab_;
  NeuralConfig config_;
};

struct LogLinearConfig {
  int hash_bits = 18;
};

// Sparse hashed-feature scorer: arc and sibling scores are weight sums over
// active features; label scores are log-softmax over per-label feature sums.
// Weights start at zero.
class LogLinearScorer : public Scorer {
 public:
  LogLinearScorer(LabelSet labels, const LogLinearConfig& config);

  ScorerKind kind() const override { return ScorerKind::kLogLinear; }
  std::unique_ptr<ScoreSession> Score(const Sentence& sentence, int order) const override;

  const LogLinearConfig& config() const { return config_; }

 private:
  LogLinearConfig config_;
};

}  // namespace treesrl

#endif  // TREESRL_SCORING_H_
