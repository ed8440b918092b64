#include "treesrl/scoring.h"

#include <algorithm>
#include <cctype>
#include <random>
#include <set>

#include "treesrl/autodiff.h"

namespace treesrl {

TableGradients TableGradients::ZerosLike(const ScoreTables& scores) {
  const int n = scores.length;
  TableGradients g;
  g.arc = Table2(n + 1, n + 1, 0.0);
  if (scores.has_siblings()) g.sib = Table3(n + 1, n + 1, n + 1, 0.0);
  if (scores.has_labels()) {
    g.root_label = Table2(n + 1, kNumRootLabels, 0.0);
    g.arg_label = Table3(n + 1, n + 1, scores.labels->size(), 0.0);
  }
  return g;
}

const char* ScorerKindName(ScorerKind kind) {
  return kind == ScorerKind::kNeural ? "neural" : "loglinear";
}

ScorerKind ParseScorerKind(const std::string& name) {
  if (name == "loglinear") return ScorerKind::kLogLinear;
  if (name == "neural") return ScorerKind::kNeural;
  throw Error(ErrorCode::kInvalidConfig, "unknown scorer '" + name + "'");
}

Gradients Scorer::ZeroGradients() const {
  Gradients grads;
  grads.reserve(params_.size());
  for (const auto& block : params_) grads.emplace_back(block.values.size(), 0.0);
  return grads;
}

size_t Scorer::NumParameters() const {
  size_t total = 0;
  for (const auto& block : params_) total += block.values.size();
  return total;
}

std::string NormalizeToken(const std::string& token) {
  std::string out = token;
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

Vocabulary::Vocabulary(const std::vector<std::string>& words) {
  for (const auto& word : words) {
    const std::string key = NormalizeToken(word);
    if (ids_.emplace(key, size()).second) words_.push_back(key);
  }
}

int Vocabulary::Id(const std::string& token) const {
  auto it = ids_.find(NormalizeToken(token));
  return it == ids_.end() ? kUnk : it->second;
}

Vocabulary BuildVocabulary(const std::vector<SrlAnnotation>& corpus) {
  std::set<std::string> words;
  for (const auto& annotation : corpus) {
    for (const auto& token : annotation.sentence.tokens) words.insert(NormalizeToken(token));
  }
  return Vocabulary(std::vector<std::string>(words.begin(), words.end()));
}

namespace {

// Parameter layout of the neural scorer; indices into params().
enum NeuralBlock {
  kEmbed,
  kEncW, kEncB,
  kArcHeadW, kArcHeadB, kArcModW, kArcModB,
  kLabHeadW, kLabHeadB, kLabModW, kLabModB,
  kSibHeadW, kSibHeadB, kSibSibW, kSibSibB, kSibModW, kSibModB,
  kArcBiaffine, kLabelBiaffine, kRootBiaffine, kSibTriaffine,
  kNumNeuralBlocks
};

class NeuralSession : public ScoreSession {
 public:
  NeuralSession(const NeuralScorer& scorer, const Sentence& sentence, int order);
  void Backward(const TableGradients& grad, Gradients& grads) const override;

 private:
  std::vector<ad::Var> views_;
  ad::Var arc_, sib_, label_, root_;
};

NeuralSession::NeuralSession(const NeuralScorer& scorer, const Sentence& sentence, int order) {
  const auto& params = scorer.params();
  for (const auto& block : params) views_.push_back(ad::View(block.shape, block.values));
  const int n = sentence.size();

  std::vector<int> padded = {Vocabulary::kPad, Vocabulary::kRoot};
  for (const auto& token : sentence.tokens) padded.push_back(scorer.vocab().Id(token));
  padded.push_back(Vocabulary::kPad);
  auto window = [&](int offset) {
    return std::vector<int>(padded.begin() + offset, padded.begin() + offset + n + 1);
  };
  const ad::Var& embed = views_[kEmbed];
  ad::Var input = ad::ConcatCols(
      {ad::Gather(embed, window(0)), ad::Gather(embed, window(1)), ad::Gather(embed, window(2))});
  auto layer = [&](const ad::Var& x, int w, int b) {
    return ad::Tanh(ad::AddRow(ad::MatMul(x, views_[w]), views_[b]));
  };
  ad::Var hidden = layer(input, kEncW, kEncB);

  ad::Var arc_head = layer(hidden, kArcHeadW, kArcHeadB);
  ad::Var arc_mod = layer(hidden, kArcModW, kArcModB);
  arc_ = ad::Biaffine(arc_head, views_[kArcBiaffine], arc_mod);
  ad::Var lab_head = layer(hidden, kLabHeadW, kLabHeadB);
  ad::Var lab_mod = layer(hidden, kLabModW, kLabModB);
  label_ = ad::LogSoftmax(ad::BiaffineLabels(lab_head, views_[kLabelBiaffine], lab_mod));
  root_ = ad::LogSoftmax(
      ad::BiaffineLabels(ad::Rows(lab_head, 0, 1), views_[kRootBiaffine], lab_mod));

  tables_.length = n;
  tables_.labels = &scorer.labels();
  tables_.arc = Table2(n + 1, n + 1);
  std::copy(arc_.value().begin(), arc_.value().end(), tables_.arc.data().begin());
  const int num_labels = scorer.labels().size();
  tables_.arg_label = Table3(n + 1, n + 1, num_labels);
  std::copy(label_.value().begin(), label_.value().end(), tables_.arg_label.data().begin());
  tables_.root_label = Table2(n + 1, kNumRootLabels);
  std::copy(root_.value().begin(), root_.value().end(), tables_.root_label.data().begin());

  if (order == 2) {
    sib_ = ad::Triaffine(layer(hidden, kSibHeadW, kSibHeadB), layer(hidden, kSibSibW, kSibSibB),
                         layer(hidden, kSibModW, kSibModB), views_[kSibTriaffine]);
    tables_.sib = Table3(n + 1, n + 1, n + 1);
    std::copy(sib_.value().begin(), sib_.value().end(), tables_.sib.data().begin());
  }
  ApplyStructuralMask(tables_);
}

void NeuralSession::Backward(const TableGradients& grad, Gradients& grads) const {
  auto masked = [](const std::vector<double>& g, const std::vector<double>& value) {
    std::vector<double> out(g);
    for (size_t k = 0; k < out.size(); ++k) {
      if (value[k] == kNegInf) out[k] = 0.0;
    }
    return out;
  };
  std::vector<std::pair<ad::Var, std::vector<double>>> seeds;
  seeds.push_back({arc_, masked(grad.arc.data(), tables_.arc.data())});
  if (!grad.sib.empty() && tables_.has_siblings()) {
    seeds.push_back({sib_, masked(grad.sib.data(), tables_.sib.data())});
  }
  if (!grad.arg_label.empty()) seeds.push_back({label_, grad.arg_label.data()});
  if (!grad.root_label.empty()) seeds.push_back({root_, grad.root_label.data()});
  ad::Backward(seeds);
  for (size_t b = 0; b < views_.size(); ++b) {
    const auto& g = views_[b].grad();
    if (g.empty()) continue;
    for (size_t k = 0; k < g.size(); ++k) grads[b][k] += g[k];
  }
}

}  // namespace

NeuralScorer::NeuralScorer(LabelSet labels, Vocabulary vocab, const NeuralConfig& config)
    : Scorer(std::move(labels)), vocab_(std::move(vocab)), config_(config) {
  const int de = config.embed_dim, h = config.encoder_dim;
  const int a = config.arc_dim, l = config.label_dim, s = config.sib_dim;
  if (de <= 0 || h <= 0 || a <= 0 || l <= 0 || s <= 0) {
    throw Error(ErrorCode::kInvalidConfig, "neural dimensions must be positive");
  }
  params_.resize(kNumNeuralBlocks);
  auto set = [&](int index, std::string name, std::vector<int> shape) {
    params_[index] = ParameterBlock{std::move(name), shape, {}};
  };
  set(kEmbed, "embed", {vocab_.size(), de});
  set(kEncW, "encoder.w", {3 * de, h});
  set(kEncB, "encoder.b", {h});
  set(kArcHeadW, "arc_head.w", {h, a});
  set(kArcHeadB, "arc_head.b", {a});
  set(kArcModW, "arc_mod.w", {h, a});
  set(kArcModB, "arc_mod.b", {a});
  set(kLabHeadW, "label_head.w", {h, l});
  set(kLabHeadB, "label_head.b", {l});
  set(kLabModW, "label_mod.w", {h, l});
  set(kLabModB, "label_mod.b", {l});
  set(kSibHeadW, "sib_head.w", {h, s});
  set(kSibHeadB, "sib_head.b", {s});
  set(kSibSibW, "sib_sib.w", {h, s});
  set(kSibSibB, "sib_sib.b", {s});
  set(kSibModW, "sib_mod.w", {h, s});
  set(kSibModB, "sib_mod.b", {s});
  set(kArcBiaffine, "arc.biaffine", {a + 1, a + 1});
  set(kLabelBiaffine, "label.biaffine", {labels_.size(), l + 1, l + 1});
  set(kRootBiaffine, "root.biaffine", {kNumRootLabels, l + 1, l + 1});
  set(kSibTriaffine, "sib.triaffine", {s + 1, s + 1, s + 1});

  std::mt19937_64 rng(config.seed);
  std::uniform_real_distribution<double> init(-config.init_scale, config.init_scale);
  for (auto& block : params_) {
    block.values.resize(ad::NumElements(block.shape));
    for (double& v : block.values) v = init(rng);
  }
}

std::unique_ptr<ScoreSession> NeuralScorer::Score(const Sentence& sentence, int order) const {
  return std::make_unique<NeuralSession>(*this, sentence, order);
}

}  // namespace treesrl
