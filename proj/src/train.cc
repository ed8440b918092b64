#include "treesrl/train.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <random>
#include <set>

#include "treesrl/parallel.h"

namespace treesrl {

namespace {

void AddInto(std::vector<double>& target, const std::vector<double>& source, double scale) {
  for (size_t k = 0; k < target.size(); ++k) target[k] += scale * source[k];
}

// Overflowed parameters show up as NaN or +inf scores; -inf is a mask.
bool ScoresAreUsable(const ScoreTables& scores) {
  auto usable = [](const std::vector<double>& values) {
    return std::none_of(values.begin(), values.end(),
                        [](double v) { return std::isnan(v) || v == -kNegInf; });
  };
  return usable(scores.arc.data()) && usable(scores.sib.data()) &&
         usable(scores.root_label.data()) && usable(scores.arg_label.data());
}

}  // namespace

double FrameLoss(const ScoreTables& scores, const PredicateFrame& frame, const LossOptions& options,
                 TableGradients* grad, const ChartResult* denominator) {
  const ForestConstraints constraints = MakeConstraints(scores.length, frame, options.variant);
  ChartResult local;
  if (denominator == nullptr) {
    local = Marginals(scores, options.order);
    denominator = &local;
  }
  const ChartResult numerator = Marginals(scores, options.order, &constraints);
  const double loss = denominator->log_z - numerator.log_z;
  if (grad == nullptr) return loss;

  AddInto(grad->arc.data(), denominator->arc_marginals.data(), 1.0);
  AddInto(grad->arc.data(), numerator.arc_marginals.data(), -1.0);
  if (options.order == 2) {
    AddInto(grad->sib.data(), denominator->sib_marginals.data(), 1.0);
    AddInto(grad->sib.data(), numerator.sib_marginals.data(), -1.0);
  }
  if (scores.has_labels()) {
    // Label log-probs enter the numerator additively on 0 -> p and p -> m.
    const int p = frame.predicate;
    grad->root_label(p, kRootPrd) -= numerator.arc_marginals(0, p);
    for (int m = 1; m <= scores.length; ++m) {
      const double mu = numerator.arc_marginals(p, m);
      if (m == p || mu == 0.0) continue;
      const Segment& seg = constraints.partition.SegmentAt(m);
      const int label =
          seg.kind == SegmentKind::kArgument ? scores.labels->Index(seg.role) : LabelSet::kNull;
      grad->arg_label(p, m, label) -= mu;
    }
  }
  return loss;
}

double AuxiliaryLoss(const ScoreTables& scores, const SrlAnnotation& annotation, double weight,
                     TableGradients* grad) {
  if (weight == 0.0 || !scores.has_labels()) return 0.0;
  std::set<int> predicates;
  for (const auto& frame : annotation.frames) predicates.insert(frame.predicate);
  double loss = 0.0;
  for (int j = 1; j <= scores.length; ++j) {
    const int target = predicates.count(j) ? kRootPrd : kRootNull;
    loss -= weight * scores.root_label(j, target);
    if (grad != nullptr) grad->root_label(j, target) -= weight;
  }
  return loss;
}

double SentenceLoss(const ScoreTables& scores, const SrlAnnotation& annotation,
                    const LossOptions& options, TableGradients* grad) {
  double loss = AuxiliaryLoss(scores, annotation, options.aux_weight, grad);
  if (annotation.frames.empty()) return loss;
  const ChartResult denominator = Marginals(scores, options.order);
  for (const auto& frame : annotation.frames) {
    loss += FrameLoss(scores, frame, options, grad, &denominator);
  }
  return loss;
}

double SentenceLossAndGradient(const Scorer& scorer, const SrlAnnotation& annotation,
                               const LossOptions& options, Gradients* grads) {
  const auto session = scorer.Score(annotation.sentence, options.order);
  if (!ScoresAreUsable(session->tables())) return std::numeric_limits<double>::quiet_NaN();
  if (grads == nullptr) return SentenceLoss(session->tables(), annotation, options);
  TableGradients table_grad = TableGradients::ZerosLike(session->tables());
  const double loss = SentenceLoss(session->tables(), annotation, options, &table_grad);
  if (std::isfinite(loss)) session->Backward(table_grad, *grads);
  return loss;
}

Adam::Adam(const std::vector<ParameterBlock>& params, double learning_rate, double beta1,
           double beta2, double epsilon)
    : learning_rate_(learning_rate), beta1_(beta1), beta2_(beta2), epsilon_(epsilon) {
  for (const auto& block : params) {
    first_.emplace_back(block.values.size(), 0.0);
    second_.emplace_back(block.values.size(), 0.0);
  }
}

void Adam::Step(std::vector<ParameterBlock>& params, const Gradients& grads) {
  ++steps_;
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(steps_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(steps_));
  for (size_t b = 0; b < params.size(); ++b) {
    auto& values = params[b].values;
    auto& m = first_[b];
    auto& v = second_[b];
    const auto& g = grads[b];
    for (size_t k = 0; k < values.size(); ++k) {
      if (g[k] == 0.0 && m[k] == 0.0 && v[k] == 0.0) continue;  // never touched: update is 0
      m[k] = beta1_ * m[k] + (1.0 - beta1_) * g[k];
      v[k] = beta2_ * v[k] + (1.0 - beta2_) * g[k] * g[k];
      values[k] -= learning_rate_ * (m[k] / c1) / (std::sqrt(v[k] / c2) + epsilon_);
    }
  }
}

void TrainConfig::Validate() const {
  auto fail = [](const std::string& what) { throw Error(ErrorCode::kInvalidConfig, what); };
  if (loss.order != 1 && loss.order != 2) fail("order must be 1 or 2");
  if (!(learning_rate > 0.0)) fail("learning rate must be positive");
  if (epochs <= 0) fail("epochs must be positive");
  if (patience < 0) fail("patience must be non-negative");
  if (batch_tokens <= 0) fail("batch_tokens must be positive");
  if (threads <= 0) fail("threads must be positive");
  if (loss.aux_weight < 0.0) fail("aux weight must be non-negative");
  if (!(beta1 >= 0.0 && beta1 < 1.0 && beta2 >= 0.0 && beta2 < 1.0)) fail("betas must lie in [0, 1)");
  if (!(epsilon > 0.0)) fail("epsilon must be positive");
}

std::unique_ptr<Scorer> MakeScorer(const Corpus& train, const TrainConfig& config) {
  std::set<std::string> roles;
  for (const auto& annotation : train) {
    for (const auto& frame : annotation.frames) {
      for (const auto& arg : frame.arguments) roles.insert(arg.role);
    }
  }
  LabelSet labels(std::vector<std::string>(roles.begin(), roles.end()));
  if (config.scorer == ScorerKind::kNeural) {
    NeuralConfig neural = config.neural;
    neural.seed = config.seed;
    return std::make_unique<NeuralScorer>(std::move(labels), BuildVocabulary(train), neural);
  }
  return std::make_unique<LogLinearScorer>(std::move(labels), config.loglinear);
}

Corpus Predict(const Scorer& scorer, const Corpus& input, int order, PredicateMode mode,
               int threads) {
  Corpus output(input.size());
  ParallelFor(static_cast<int>(input.size()), threads, [&](int i, int) {
    const SrlAnnotation& source = input[i];
    DecodeConfig config;
    config.order = order;
    config.mode = mode;
    for (const auto& frame : source.frames) config.gold_predicates.push_back(frame.predicate);
    output[i] = Parse(source.sentence, scorer.Tables(source.sentence, order), config);
  });
  return output;
}

TrainResult Train(const Corpus& train, const Corpus& dev, const TrainConfig& config,
                  const std::function<void(const EpochMetrics&)>& on_epoch) {
  config.Validate();
  if (train.empty()) throw Error(ErrorCode::kInvalidConfig, "training corpus is empty");
  if (dev.empty()) throw Error(ErrorCode::kInvalidConfig, "dev corpus is empty");

  TrainResult result;
  result.scorer = MakeScorer(train, config);
  Scorer& scorer = *result.scorer;
  Adam adam(scorer.params(), config.learning_rate, config.beta1, config.beta2, config.epsilon);
  std::mt19937_64 rng(config.seed);
  std::vector<int> order(train.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);

  std::vector<ParameterBlock> best = scorer.params();
  double best_f1 = -1.0;
  int since_best = 0;
  const int workers = config.threads;
  std::vector<Gradients> worker_grads(workers, scorer.ZeroGradients());
  std::vector<double> worker_loss(workers);

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    const auto start = std::chrono::steady_clock::now();
    std::shuffle(order.begin(), order.end(), rng);
    double epoch_loss = 0.0;
    size_t cursor = 0;
    while (cursor < order.size()) {
      std::vector<int> batch;
      int tokens = 0;
      while (cursor < order.size() && (batch.empty() || tokens < config.batch_tokens)) {
        batch.push_back(order[cursor++]);
        tokens += train[batch.back()].sentence.size();
      }
      // Static contiguous chunks keep the summation order fixed.
      const int chunks = std::min<int>(workers, static_cast<int>(batch.size()));
      ParallelFor(chunks, chunks, [&](int w, int) {
        for (auto& g : worker_grads[w]) std::fill(g.begin(), g.end(), 0.0);
        worker_loss[w] = 0.0;
        const size_t lo = batch.size() * w / chunks, hi = batch.size() * (w + 1) / chunks;
        for (size_t k = lo; k < hi; ++k) {
          const double loss =
              SentenceLossAndGradient(scorer, train[batch[k]], config.loss, &worker_grads[w]);
          if (!std::isfinite(loss)) {
            throw Error(ErrorCode::kNonFiniteLoss,
                        "epoch " + std::to_string(epoch) + ", sentence " +
                            std::to_string(batch[k] + 1) + ": loss " + std::to_string(loss));
          }
          worker_loss[w] += loss;
        }
      });
      Gradients& total = worker_grads[0];
      for (int w = 1; w < chunks; ++w) {
        for (size_t b = 0; b < total.size(); ++b) AddInto(total[b], worker_grads[w][b], 1.0);
      }
      const double scale = 1.0 / static_cast<double>(batch.size());
      for (auto& g : total) {
        for (double& x : g) x *= scale;
      }
      for (int w = 0; w < chunks; ++w) epoch_loss += worker_loss[w];
      adam.Step(scorer.params(), total);
    }

    const Corpus predicted = Predict(scorer, dev, config.loss.order, PredicateMode::kPredict,
                                     config.threads);
    const EvalReport report = Evaluate(dev, predicted);
    EpochMetrics metrics;
    metrics.epoch = epoch;
    metrics.train_loss = epoch_loss / static_cast<double>(train.size());
    metrics.dev_f1 = report.f1;
    metrics.dev_cm = report.cm;
    metrics.improved = report.f1 > best_f1;
    metrics.seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    result.history.push_back(metrics);
    if (on_epoch) on_epoch(metrics);

    if (metrics.improved) {
      best_f1 = report.f1;
      best = scorer.params();
      result.best_epoch = epoch;
      result.best_f1 = report.f1;
      result.best_cm = report.cm;
      since_best = 0;
    } else {
      ++since_best;
    }
    if (since_best >= config.patience) break;
  }
  scorer.params() = std::move(best);
  return result;
}

}  // namespace treesrl
