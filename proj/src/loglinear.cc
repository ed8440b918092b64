#include <algorithm>
#include <cmath>
#include <cstdint>

#include "treesrl/scoring.h"

namespace treesrl {

namespace {

uint64_t Fnv1a(const std::string& text) {
  uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

uint64_t Finalize(uint64_t x) {
  x ^= x >> 30;
  x *= 0xbf58476d1ce4e5b9ULL;
  x ^= x >> 27;
  x *= 0x94d049bb133111ebULL;
  x ^= x >> 31;
  return x;
}

uint64_t Combine(uint64_t seed, uint64_t value) {
  return seed ^ (value + 0x9e3779b97f4a7c15ULL + (seed << 6) + (seed >> 2));
}

template <class... Parts>
uint64_t Key(uint64_t template_id, Parts... parts) {
  uint64_t h = Finalize(template_id + 1);
  ((h = Combine(h, static_cast<uint64_t>(parts))), ...);
  return Finalize(h);
}

int DistanceBucket(int h, int m) {
  const int d = std::abs(h - m);
  if (d <= 4) return d;
  return d <= 7 ? 5 : 6;
}

// Hashed token attributes; 0 is the root, and positions beyond either end read
// as the boundary markers.
struct TokenKeys {
  std::vector<uint64_t> word, prefix, suffix;

  explicit TokenKeys(const Sentence& sentence) {
    const int n = sentence.size();
    auto push = [&](const std::string& w) {
      word.push_back(Fnv1a(w));
      prefix.push_back(Fnv1a("p:" + w.substr(0, 3)));
      suffix.push_back(Fnv1a("s:" + (w.size() > 3 ? w.substr(w.size() - 3) : w)));
    };
    push("<s>");
    push("<root>");
    for (int i = 1; i <= n; ++i) push(NormalizeToken(sentence.token(i)));
    push("</s>");
  }
  uint64_t w(int i) const { return word[Clamp(i)]; }
  uint64_t p3(int i) const { return prefix[Clamp(i)]; }
  uint64_t s3(int i) const { return suffix[Clamp(i)]; }
  size_t Clamp(int i) const {
    return static_cast<size_t>(std::clamp(i + 1, 0, static_cast<int>(word.size()) - 1));
  }
};

enum Template : uint64_t {
  kArcPair = 1, kArcPairDist, kArcHeadDist, kArcModDist, kArcHead, kArcMod, kArcSuffix,
  kArcPrefix, kArcDist, kArcModLeft, kArcModRight, kArcModContext, kArcHeadRight,
  kArcBetween, kArcBetweenMod, kArcBetweenHead,
  kSibTriple = 32, kSibPair, kSibOuter, kSibSuffix, kSibDist,
  kLabPair = 64, kLabMod, kLabHead, kLabSuffix, kLabDist, kLabBias,
  kRootWord = 96, kRootSuffix, kRootPrefix, kRootBias, kRootLeft, kRootRight,
};

// Fixed arc templates; in-between templates add 3 more per token strictly
// between head and modifier.
constexpr int kArcFeatures = 13;
constexpr int kBetweenFeatures = 3;
constexpr int kSibFeatures = 5;
constexpr int kLabelFeatures = 6;
constexpr int kRootFeatures = 6;

void ArcKeys(const TokenKeys& t, int h, int m, uint64_t* out) {
  const uint64_t dir = h < m ? 1 : 2;
  const uint64_t dist = DistanceBucket(h, m);
  out[0] = Key(kArcPair, t.w(h), t.w(m));
  out[1] = Key(kArcPairDist, t.w(h), t.w(m), dir, dist);
  out[2] = Key(kArcHeadDist, t.w(h), dir, dist);
  out[3] = Key(kArcModDist, t.w(m), dir, dist);
  out[4] = Key(kArcHead, t.w(h));
  out[5] = Key(kArcMod, t.w(m));
  out[6] = Key(kArcSuffix, t.s3(h), t.s3(m), dir);
  out[7] = Key(kArcPrefix, t.p3(h), t.p3(m), dir);
  out[8] = Key(kArcDist, dir, dist);
  out[9] = Key(kArcModLeft, t.w(h), t.w(m), t.w(m - 1));
  out[10] = Key(kArcModRight, t.w(h), t.w(m), t.w(m + 1));
  out[11] = Key(kArcModContext, t.w(m - 1), t.w(m), t.w(m + 1), dir);
  out[12] = Key(kArcHeadRight, t.w(h), t.w(h + 1), t.w(m), dir);
}

void BetweenKeys(const TokenKeys& t, int h, int b, int m, uint64_t* out) {
  const uint64_t dir = h < m ? 1 : 2;
  out[0] = Key(kArcBetween, t.w(h), t.w(b), t.w(m));
  out[1] = Key(kArcBetweenMod, t.w(b), t.w(m), dir);
  out[2] = Key(kArcBetweenHead, t.w(h), t.w(b), dir);
}

void SibKeys(const TokenKeys& t, int h, int s, int m, uint64_t* out) {
  const uint64_t dir = h < m ? 1 : 2;
  out[0] = Key(kSibTriple, t.w(h), t.w(s), t.w(m));
  out[1] = Key(kSibPair, t.w(s), t.w(m), dir);
  out[2] = Key(kSibOuter, t.w(h), t.w(m), dir);
  out[3] = Key(kSibSuffix, t.w(h), t.s3(s), t.s3(m));
  out[4] = Key(kSibDist, dir, DistanceBucket(s, m));
}

void LabelKeys(const TokenKeys& t, int h, int m, uint64_t* out) {
  const uint64_t dir = h < m ? 1 : 2;
  out[0] = Key(kLabPair, t.w(h), t.w(m));
  out[1] = Key(kLabMod, t.w(m));
  out[2] = Key(kLabHead, t.w(h));
  out[3] = Key(kLabSuffix, t.s3(m));
  out[4] = Key(kLabDist, dir, DistanceBucket(h, m));
  out[5] = Key(kLabBias);
}

void RootKeys(const TokenKeys& t, int j, uint64_t* out) {
  out[0] = Key(kRootWord, t.w(j));
  out[1] = Key(kRootSuffix, t.s3(j));
  out[2] = Key(kRootPrefix, t.p3(j));
  out[3] = Key(kRootBias);
  out[4] = Key(kRootLeft, t.w(j - 1));
  out[5] = Key(kRootRight, t.w(j + 1));
}

class LogLinearSession : public ScoreSession {
 public:
  LogLinearSession(const LogLinearScorer& scorer, const Sentence& sentence, int order);
  void Backward(const TableGradients& grad, Gradients& grads) const override;

 private:
  uint32_t Index(uint64_t key) const { return static_cast<uint32_t>(key & mask_); }
  uint32_t LabelIndex(uint64_t key, int label) const {
    return Index(Finalize(key + static_cast<uint64_t>(label) * 0x632be59bd9b4e019ULL));
  }

  uint64_t mask_;
  // Feature indices in table order. Arc cell c owns
  // arc_features_[arc_offsets_[c] .. arc_offsets_[c + 1]).
  std::vector<uint32_t> arc_offsets_;
  std::vector<uint32_t> arc_features_;
  std::vector<uint32_t> sib_features_;
  std::vector<uint32_t> label_features_;  // kLabelFeatures per (h, m, l)
  std::vector<uint32_t> root_features_;   // kRootFeatures per (j, l)
};

LogLinearSession::LogLinearSession(const LogLinearScorer& scorer, const Sentence& sentence,
                                   int order)
    : mask_((uint64_t{1} << scorer.config().hash_bits) - 1) {
  const std::vector<double>& w = scorer.params()[0].values;
  const int n = sentence.size();
  const int num_labels = scorer.labels().size();
  const TokenKeys keys(sentence);
  uint64_t buffer[16];

  tables_.length = n;
  tables_.labels = &scorer.labels();
  tables_.arc = Table2(n + 1, n + 1, kNegInf);
  arc_offsets_.assign(1, 0);
  for (int h = 0; h <= n; ++h) {
    for (int m = 0; m <= n; ++m) {
      if (IsLegalArc(h, m)) {
        double score = 0.0;
        auto add = [&](int count) {
          for (int k = 0; k < count; ++k) {
            arc_features_.push_back(Index(buffer[k]));
            score += w[arc_features_.back()];
          }
        };
        ArcKeys(keys, h, m, buffer);
        add(kArcFeatures);
        for (int b = std::min(h, m) + 1; b < std::max(h, m); ++b) {
          BetweenKeys(keys, h, b, m, buffer);
          add(kBetweenFeatures);
        }
        tables_.arc(h, m) = score;
      }
      arc_offsets_.push_back(static_cast<uint32_t>(arc_features_.size()));
    }
  }

  if (order == 2) {
    tables_.sib = Table3(n + 1, n + 1, n + 1, kNegInf);
    sib_features_.assign(tables_.sib.data().size() * kSibFeatures, 0);
    for (int h = 0; h <= n; ++h) {
      for (int s = 1; s <= n; ++s) {
        for (int m = 1; m <= n; ++m) {
          if (!IsSiblingTriple(h, s, m)) continue;
          SibKeys(keys, h, s, m, buffer);
          uint32_t* f =
              &sib_features_[((static_cast<size_t>(h) * (n + 1) + s) * (n + 1) + m) * kSibFeatures];
          double score = 0.0;
          for (int k = 0; k < kSibFeatures; ++k) {
            f[k] = Index(buffer[k]);
            score += w[f[k]];
          }
          tables_.sib(h, s, m) = score;
        }
      }
    }
  }

  tables_.arg_label = Table3(n + 1, n + 1, num_labels, -std::log(num_labels));
  label_features_.assign(tables_.arg_label.data().size() * kLabelFeatures, 0);
  std::vector<double> logits(num_labels);
  for (int h = 1; h <= n; ++h) {
    for (int m = 1; m <= n; ++m) {
      if (h == m) continue;
      LabelKeys(keys, h, m, buffer);
      double top = kNegInf;
      for (int l = 0; l < num_labels; ++l) {
        uint32_t* f =
            &label_features_[((static_cast<size_t>(h) * (n + 1) + m) * num_labels + l) *
                             kLabelFeatures];
        double z = 0.0;
        for (int k = 0; k < kLabelFeatures; ++k) {
          f[k] = LabelIndex(buffer[k], l);
          z += w[f[k]];
        }
        logits[l] = z;
        top = std::max(top, z);
      }
      double total = 0.0;
      for (double z : logits) total += std::exp(z - top);
      const double lse = top + std::log(total);
      for (int l = 0; l < num_labels; ++l) tables_.arg_label(h, m, l) = logits[l] - lse;
    }
  }

  tables_.root_label = Table2(n + 1, kNumRootLabels, -std::log(2.0));
  root_features_.assign(static_cast<size_t>(n + 1) * kNumRootLabels * kRootFeatures, 0);
  for (int j = 1; j <= n; ++j) {
    RootKeys(keys, j, buffer);
    double z[kNumRootLabels];
    for (int l = 0; l < kNumRootLabels; ++l) {
      uint32_t* f = &root_features_[(static_cast<size_t>(j) * kNumRootLabels + l) * kRootFeatures];
      z[l] = 0.0;
      for (int k = 0; k < kRootFeatures; ++k) {
        f[k] = LabelIndex(buffer[k], l);
        z[l] += w[f[k]];
      }
    }
    const double top = std::max(z[0], z[1]);
    const double lse = top + std::log(std::exp(z[0] - top) + std::exp(z[1] - top));
    for (int l = 0; l < kNumRootLabels; ++l) tables_.root_label(j, l) = z[l] - lse;
  }
}

void LogLinearSession::Backward(const TableGradients& grad, Gradients& grads) const {
  std::vector<double>& g = grads[0];
  const int n = tables_.length;

  const auto& arc = grad.arc.data();
  for (size_t cell = 0; cell < arc.size(); ++cell) {
    if (arc[cell] == 0.0 || tables_.arc.data()[cell] == kNegInf) continue;
    for (uint32_t k = arc_offsets_[cell]; k < arc_offsets_[cell + 1]; ++k) {
      g[arc_features_[k]] += arc[cell];
    }
  }
  if (!grad.sib.empty() && !sib_features_.empty()) {
    const auto& sib = grad.sib.data();
    for (size_t cell = 0; cell < sib.size(); ++cell) {
      if (sib[cell] == 0.0 || tables_.sib.data()[cell] == kNegInf) continue;
      for (int k = 0; k < kSibFeatures; ++k) g[sib_features_[cell * kSibFeatures + k]] += sib[cell];
    }
  }

  // Through log-softmax: dz_l = dlogp_l - p_l * sum_l' dlogp_l'.
  if (!grad.arg_label.empty()) {
    const int num_labels = tables_.labels->size();
    for (int h = 1; h <= n; ++h) {
      for (int m = 1; m <= n; ++m) {
        if (h == m) continue;
        double total = 0.0;
        for (int l = 0; l < num_labels; ++l) total += grad.arg_label(h, m, l);
        if (total == 0.0) {
          bool any = false;
          for (int l = 0; l < num_labels && !any; ++l) any = grad.arg_label(h, m, l) != 0.0;
          if (!any) continue;
        }
        for (int l = 0; l < num_labels; ++l) {
          const double dz =
              grad.arg_label(h, m, l) - std::exp(tables_.arg_label(h, m, l)) * total;
          const uint32_t* f =
              &label_features_[((static_cast<size_t>(h) * (n + 1) + m) * num_labels + l) *
                               kLabelFeatures];
          for (int k = 0; k < kLabelFeatures; ++k) g[f[k]] += dz;
        }
      }
    }
  }
  if (!grad.root_label.empty()) {
    for (int j = 1; j <= n; ++j) {
      const double total = grad.root_label(j, 0) + grad.root_label(j, 1);
      for (int l = 0; l < kNumRootLabels; ++l) {
        const double dz = grad.root_label(j, l) - std::exp(tables_.root_label(j, l)) * total;
        if (dz == 0.0) continue;
        const uint32_t* f =
            &root_features_[(static_cast<size_t>(j) * kNumRootLabels + l) * kRootFeatures];
        for (int k = 0; k < kRootFeatures; ++k) g[f[k]] += dz;
      }
    }
  }
}

}  // namespace

LogLinearScorer::LogLinearScorer(LabelSet labels, const LogLinearConfig& config)
    : Scorer(std::move(labels)), config_(config) {
  if (config.hash_bits < 4 || config.hash_bits > 28) {
    throw Error(ErrorCode::kInvalidConfig, "hash_bits must lie in [4, 28]");
  }
  const int dim = 1 << config.hash_bits;
  params_.push_back(ParameterBlock{"weights", {dim}, std::vector<double>(dim, 0.0)});
}

std::unique_ptr<ScoreSession> LogLinearScorer::Score(const Sentence& sentence, int order) const {
  return std::make_unique<LogLinearSession>(*this, sentence, order);
}

}  // namespace treesrl
