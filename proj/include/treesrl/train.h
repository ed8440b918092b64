#ifndef TREESRL_TRAIN_H_
#define TREESRL_TRAIN_H_

#include <functional>
#include <memory>
#include <vector>

#include "treesrl/convert.h"
#include "treesrl/data.h"
#include "treesrl/decode.h"
#include "treesrl/scoring.h"

namespace treesrl {

struct LossOptions {
  int order = 1;
  Variant variant = Variant::kLatent;
  // Weight of the root-label cross-entropy over all positions; 0 disables it.
  double aux_weight = 1.0;
};

// log Z - log sum_{t in T_p} exp(s(t) + label log-probs), with Z over all
// single-root trees. When `grad` is given, adds d(loss)/d(tables) to it.
// `denominator` may carry a precomputed unconstrained chart.
double FrameLoss(const ScoreTables& scores, const PredicateFrame& frame, const LossOptions& options,
                 TableGradients* grad = nullptr, const ChartResult* denominator = nullptr);

// -weight * sum_j log P(target_j | 0 -> j): PRD for frame predicates, NULL
// elsewhere.
double AuxiliaryLoss(const ScoreTables& scores, const SrlAnnotation& annotation, double weight,
                     TableGradients* grad = nullptr);

// Sum of frame losses plus the auxiliary term; one shared Z.
double SentenceLoss(const ScoreTables& scores, const SrlAnnotation& annotation,
                    const LossOptions& options, TableGradients* grad = nullptr);

// Loss of one annotation under `scorer`, with the parameter gradient added
// into `grads` when given.
double SentenceLossAndGradient(const Scorer& scorer, const SrlAnnotation& annotation,
                               const LossOptions& options, Gradients* grads);

// Adaptive moment estimation with bias correction.
class Adam {
 public:
  Adam(const std::vector<ParameterBlock>& params, double learning_rate, double beta1,
       double beta2, double epsilon);
  void Step(std::vector<ParameterBlock>& params, const Gradients& grads);
  long steps() const { return steps_; }

 private:
  double learning_rate_, beta1_, beta2_, epsilon_;
  long steps_ = 0;
  Gradients first_, second_;
};

struct TrainConfig {
  LossOptions loss;
  ScorerKind scorer = ScorerKind::kLogLinear;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.9;
  double epsilon = 1e-12;
  int epochs = 20;
  // Training stops once this many epochs in a row fail to improve dev F1.
  int patience = 3;
  int batch_tokens = 1000;
  int threads = 1;
  uint64_t seed = 1;
  NeuralConfig neural;
  LogLinearConfig loglinear;

  // Throws kInvalidConfig.
  void Validate() const;
};

struct EpochMetrics {
  int epoch = 0;
  double train_loss = 0.0;  // mean per sentence
  double dev_f1 = 0.0;
  double dev_cm = 0.0;
  double seconds = 0.0;
  bool improved = false;
};

struct TrainResult {
  std::unique_ptr<Scorer> scorer;  // parameters of the best epoch
  std::vector<EpochMetrics> history;
  int best_epoch = 0;
  double best_f1 = 0.0;
  double best_cm = 0.0;
};

// Fresh scorer whose labels (and vocabulary) come from `train`.
std::unique_ptr<Scorer> MakeScorer(const Corpus& train, const TrainConfig& config);

// Decodes every sentence; output order equals input order. In gold mode the
// predicates are taken from each input annotation.
Corpus Predict(const Scorer& scorer, const Corpus& input, int order, PredicateMode mode,
               int threads);

// Mini-batch training with early stopping on dev F1 (end-to-end predicates).
// Throws kNonFiniteLoss on a NaN or infinite loss.
TrainResult Train(const Corpus& train, const Corpus& dev, const TrainConfig& config,
                  const std::function<void(const EpochMetrics&)>& on_epoch = {});

}  // namespace treesrl

#endif  // TREESRL_TRAIN_H_
