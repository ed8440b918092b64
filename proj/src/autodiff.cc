#include "treesrl/autodiff.h"

#include <cassert>
#include <cmath>
#include <stdexcept>
#include <unordered_set>

namespace treesrl::ad {

size_t NumElements(const std::vector<int>& shape) {
  size_t count = 1;
  for (int d : shape) count *= static_cast<size_t>(d);
  return count;
}

namespace {

void Require(bool condition, const char* what) {
  if (!condition) throw std::invalid_argument(std::string("autodiff: ") + what);
}

std::vector<double>& GradOf(Node& node) {
  if (node.grad.size() != node.size()) node.grad.assign(node.size(), 0.0);
  return node.grad;
}

Var MakeNode(std::vector<int> shape, std::vector<double> values,
             std::vector<std::shared_ptr<Node>> inputs, std::function<void(Node&)> backward) {
  auto node = std::make_shared<Node>();
  node->shape = std::move(shape);
  node->own = std::move(values);
  node->inputs = std::move(inputs);
  node->backward = std::move(backward);
  return Var(std::move(node));
}

}  // namespace

Var Constant(std::vector<int> shape, std::vector<double> values) {
  Require(NumElements(shape) == values.size(), "shape/value size mismatch");
  return MakeNode(std::move(shape), std::move(values), {}, nullptr);
}

Var View(std::vector<int> shape, const std::vector<double>& values) {
  Require(NumElements(shape) == values.size(), "shape/value size mismatch");
  auto node = std::make_shared<Node>();
  node->shape = std::move(shape);
  node->external = &values;
  return Var(std::move(node));
}

void Backward(const std::vector<std::pair<Var, std::vector<double>>>& seeds) {
  std::vector<Node*> order;
  std::unordered_set<Node*> visited;
  // Iterative post-order DFS.
  std::vector<std::pair<Node*, size_t>> stack;
  for (const auto& seed : seeds) {
    Node* root = seed.first.node();
    if (visited.count(root)) continue;
    visited.insert(root);
    stack.push_back({root, 0});
    while (!stack.empty()) {
      auto& [node, next] = stack.back();
      if (next < node->inputs.size()) {
        Node* child = node->inputs[next++].get();
        if (visited.insert(child).second) stack.push_back({child, 0});
      } else {
        order.push_back(node);
        stack.pop_back();
      }
    }
  }
  for (Node* node : order) node->grad.assign(node->size(), 0.0);
  for (const auto& [var, grad] : seeds) {
    Require(grad.size() == var.size(), "seed gradient size mismatch");
    auto& g = var.node()->grad;
    for (size_t k = 0; k < g.size(); ++k) g[k] += grad[k];
  }
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    if ((*it)->backward) (*it)->backward(**it);
  }
}

Var Add(const Var& a, const Var& b) {
  Require(a.shape() == b.shape(), "Add shape mismatch");
  std::vector<double> out(a.size());
  for (size_t k = 0; k < out.size(); ++k) out[k] = a.at(k) + b.at(k);
  return MakeNode(a.shape(), std::move(out), {a.shared(), b.shared()}, [](Node& self) {
    for (int side = 0; side < 2; ++side) {
      auto& g = GradOf(*self.inputs[side]);
      for (size_t k = 0; k < g.size(); ++k) g[k] += self.grad[k];
    }
  });
}

Var Scale(const Var& a, double factor) {
  std::vector<double> out(a.size());
  for (size_t k = 0; k < out.size(); ++k) out[k] = a.at(k) * factor;
  return MakeNode(a.shape(), std::move(out), {a.shared()}, [factor](Node& self) {
    auto& g = GradOf(*self.inputs[0]);
    for (size_t k = 0; k < g.size(); ++k) g[k] += factor * self.grad[k];
  });
}

Var Sum(const Var& a) {
  double total = 0.0;
  for (double v : a.value()) total += v;
  return MakeNode({1}, {total}, {a.shared()}, [](Node& self) {
    auto& g = GradOf(*self.inputs[0]);
    for (double& x : g) x += self.grad[0];
  });
}

Var Gather(const Var& table, std::vector<int> ids) {
  Require(table.shape().size() == 2, "Gather expects a matrix");
  const int rows = table.dim(0), d = table.dim(1);
  std::vector<double> out(ids.size() * d);
  for (size_t r = 0; r < ids.size(); ++r) {
    Require(ids[r] >= 0 && ids[r] < rows, "Gather id out of range");
    for (int c = 0; c < d; ++c) out[r * d + c] = table.at(static_cast<size_t>(ids[r]) * d + c);
  }
  const int count = static_cast<int>(ids.size());
  return MakeNode({count, d}, std::move(out), {table.shared()},
                  [ids = std::move(ids), d](Node& self) {
                    auto& g = GradOf(*self.inputs[0]);
                    for (size_t r = 0; r < ids.size(); ++r) {
                      for (int c = 0; c < d; ++c) {
                        g[static_cast<size_t>(ids[r]) * d + c] += self.grad[r * d + c];
                      }
                    }
                  });
}

Var ConcatCols(const std::vector<Var>& parts) {
  Require(!parts.empty(), "ConcatCols needs inputs");
  const int rows = parts[0].dim(0);
  std::vector<int> widths;
  int total = 0;
  std::vector<std::shared_ptr<Node>> inputs;
  for (const Var& p : parts) {
    Require(p.shape().size() == 2 && p.dim(0) == rows, "ConcatCols row mismatch");
    widths.push_back(p.dim(1));
    total += p.dim(1);
    inputs.push_back(p.shared());
  }
  std::vector<double> out(static_cast<size_t>(rows) * total);
  for (int r = 0; r < rows; ++r) {
    int offset = 0;
    for (size_t k = 0; k < parts.size(); ++k) {
      for (int c = 0; c < widths[k]; ++c) {
        out[static_cast<size_t>(r) * total + offset + c] =
            parts[k].at(static_cast<size_t>(r) * widths[k] + c);
      }
      offset += widths[k];
    }
  }
  return MakeNode({rows, total}, std::move(out), std::move(inputs),
                  [widths, rows, total](Node& self) {
                    int offset = 0;
                    for (size_t k = 0; k < widths.size(); ++k) {
                      auto& g = GradOf(*self.inputs[k]);
                      for (int r = 0; r < rows; ++r) {
                        for (int c = 0; c < widths[k]; ++c) {
                          g[static_cast<size_t>(r) * widths[k] + c] +=
                              self.grad[static_cast<size_t>(r) * total + offset + c];
                        }
                      }
                      offset += widths[k];
                    }
                  });
}

Var Rows(const Var& a, int start, int count) {
  Require(a.shape().size() == 2 && start >= 0 && start + count <= a.dim(0), "Rows out of range");
  const int d = a.dim(1);
  std::vector<double> out(a.value().begin() + static_cast<size_t>(start) * d,
                          a.value().begin() + static_cast<size_t>(start + count) * d);
  return MakeNode({count, d}, std::move(out), {a.shared()}, [start, d](Node& self) {
    auto& g = GradOf(*self.inputs[0]);
    for (size_t k = 0; k < self.grad.size(); ++k) g[static_cast<size_t>(start) * d + k] += self.grad[k];
  });
}

Var MatMul(const Var& a, const Var& b) {
  Require(a.shape().size() == 2 && b.shape().size() == 2 && a.dim(1) == b.dim(0),
          "MatMul shape mismatch");
  const int m = a.dim(0), k = a.dim(1), n = b.dim(1);
  std::vector<double> out(static_cast<size_t>(m) * n, 0.0);
  const auto av = a.value();
  const auto bv = b.value();
  for (int i = 0; i < m; ++i) {
    for (int t = 0; t < k; ++t) {
      const double x = av[static_cast<size_t>(i) * k + t];
      if (x == 0.0) continue;
      for (int j = 0; j < n; ++j) out[static_cast<size_t>(i) * n + j] += x * bv[static_cast<size_t>(t) * n + j];
    }
  }
  return MakeNode({m, n}, std::move(out), {a.shared(), b.shared()}, [m, k, n](Node& self) {
    const auto av = self.inputs[0]->value();
    const auto bv = self.inputs[1]->value();
    auto& ga = GradOf(*self.inputs[0]);
    auto& gb = GradOf(*self.inputs[1]);
    for (int i = 0; i < m; ++i) {
      for (int j = 0; j < n; ++j) {
        const double g = self.grad[static_cast<size_t>(i) * n + j];
        if (g == 0.0) continue;
        for (int t = 0; t < k; ++t) {
          ga[static_cast<size_t>(i) * k + t] += g * bv[static_cast<size_t>(t) * n + j];
          gb[static_cast<size_t>(t) * n + j] += g * av[static_cast<size_t>(i) * k + t];
        }
      }
    }
  });
}

Var AddRow(const Var& a, const Var& b) {
  Require(a.shape().size() == 2 && static_cast<int>(b.size()) == a.dim(1), "AddRow mismatch");
  const int m = a.dim(0), n = a.dim(1);
  std::vector<double> out(a.value().begin(), a.value().end());
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < n; ++j) out[static_cast<size_t>(i) * n + j] += b.at(j);
  }
  return MakeNode(a.shape(), std::move(out), {a.shared(), b.shared()}, [m, n](Node& self) {
    auto& ga = GradOf(*self.inputs[0]);
    auto& gb = GradOf(*self.inputs[1]);
    for (int i = 0; i < m; ++i) {
      for (int j = 0; j < n; ++j) {
        const double g = self.grad[static_cast<size_t>(i) * n + j];
        ga[static_cast<size_t>(i) * n + j] += g;
        gb[j] += g;
      }
    }
  });
}

Var Tanh(const Var& a) {
  std::vector<double> out(a.size());
  for (size_t k = 0; k < out.size(); ++k) out[k] = std::tanh(a.at(k));
  return MakeNode(a.shape(), std::move(out), {a.shared()}, [](Node& self) {
    auto& g = GradOf(*self.inputs[0]);
    for (size_t k = 0; k < g.size(); ++k) {
      const double y = self.own[k];
      g[k] += self.grad[k] * (1.0 - y * y);
    }
  });
}

namespace {

// [x; 1] as a dense (rows x (d + 1)) buffer.
std::vector<double> Augment(std::span<const double> x, int rows, int d) {
  std::vector<double> out(static_cast<size_t>(rows) * (d + 1));
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < d; ++c) out[static_cast<size_t>(r) * (d + 1) + c] = x[static_cast<size_t>(r) * d + c];
    out[static_cast<size_t>(r) * (d + 1) + d] = 1.0;
  }
  return out;
}

// Shared forward/backward for one biaffine slice.
//   xa [m, p], w [p, q], ya [n, q]; out[i, j] = xa_i^T w ya_j.
void BiaffineSlice(const std::vector<double>& xa, const double* w, const std::vector<double>& ya,
                   int m, int p, int n, int q, double* out, size_t out_stride, size_t out_step) {
  std::vector<double> t(static_cast<size_t>(m) * q, 0.0);
  for (int i = 0; i < m; ++i) {
    for (int a = 0; a < p; ++a) {
      const double x = xa[static_cast<size_t>(i) * p + a];
      if (x == 0.0) continue;
      for (int b = 0; b < q; ++b) t[static_cast<size_t>(i) * q + b] += x * w[static_cast<size_t>(a) * q + b];
    }
  }
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < n; ++j) {
      double s = 0.0;
      for (int b = 0; b < q; ++b) s += t[static_cast<size_t>(i) * q + b] * ya[static_cast<size_t>(j) * q + b];
      out[i * out_stride + j * out_step] = s;
    }
  }
}

void BiaffineSliceBackward(const std::vector<double>& xa, const double* w,
                           const std::vector<double>& ya, int m, int p, int n, int q,
                           const double* g, size_t g_stride, size_t g_step, std::vector<double>& gxa,
                           double* gw, std::vector<double>& gya) {
  // t = xa w ; dt = g ya ; dya = g^T t ; dxa = dt w^T ; dw = xa^T dt.
  std::vector<double> t(static_cast<size_t>(m) * q, 0.0), dt(static_cast<size_t>(m) * q, 0.0);
  for (int i = 0; i < m; ++i) {
    for (int a = 0; a < p; ++a) {
      const double x = xa[static_cast<size_t>(i) * p + a];
      if (x == 0.0) continue;
      for (int b = 0; b < q; ++b) t[static_cast<size_t>(i) * q + b] += x * w[static_cast<size_t>(a) * q + b];
    }
  }
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < n; ++j) {
      const double gij = g[i * g_stride + j * g_step];
      if (gij == 0.0) continue;
      for (int b = 0; b < q; ++b) {
        dt[static_cast<size_t>(i) * q + b] += gij * ya[static_cast<size_t>(j) * q + b];
        gya[static_cast<size_t>(j) * q + b] += gij * t[static_cast<size_t>(i) * q + b];
      }
    }
  }
  for (int i = 0; i < m; ++i) {
    for (int a = 0; a < p; ++a) {
      const double x = xa[static_cast<size_t>(i) * p + a];
      double s = 0.0;
      for (int b = 0; b < q; ++b) {
        const double d = dt[static_cast<size_t>(i) * q + b];
        s += d * w[static_cast<size_t>(a) * q + b];
        gw[static_cast<size_t>(a) * q + b] += x * d;
      }
      gxa[static_cast<size_t>(i) * p + a] += s;
    }
  }
}

void ScatterAugmented(const std::vector<double>& ga, int rows, int d, std::vector<double>& g) {
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < d; ++c) g[static_cast<size_t>(r) * d + c] += ga[static_cast<size_t>(r) * (d + 1) + c];
  }
}

}  // namespace

Var Biaffine(const Var& x, const Var& w, const Var& y) {
  const int m = x.dim(0), d1 = x.dim(1), n = y.dim(0), d2 = y.dim(1);
  Require(w.shape() == std::vector<int>({d1 + 1, d2 + 1}), "Biaffine weight shape");
  const auto xa = Augment(x.value(), m, d1);
  const auto ya = Augment(y.value(), n, d2);
  std::vector<double> out(static_cast<size_t>(m) * n);
  BiaffineSlice(xa, w.value().data(), ya, m, d1 + 1, n, d2 + 1, out.data(), n, 1);
  return MakeNode({m, n}, std::move(out), {x.shared(), w.shared(), y.shared()},
                  [m, d1, n, d2](Node& self) {
                    const auto xa = Augment(self.inputs[0]->value(), m, d1);
                    const auto ya = Augment(self.inputs[2]->value(), n, d2);
                    std::vector<double> gxa(xa.size(), 0.0), gya(ya.size(), 0.0);
                    auto& gw = GradOf(*self.inputs[1]);
                    BiaffineSliceBackward(xa, self.inputs[1]->value().data(), ya, m, d1 + 1, n,
                                          d2 + 1, self.grad.data(), n, 1, gxa, gw.data(), gya);
                    ScatterAugmented(gxa, m, d1, GradOf(*self.inputs[0]));
                    ScatterAugmented(gya, n, d2, GradOf(*self.inputs[2]));
                  });
}

Var BiaffineLabels(const Var& x, const Var& w, const Var& y) {
  const int m = x.dim(0), d1 = x.dim(1), n = y.dim(0), d2 = y.dim(1);
  Require(w.shape().size() == 3 && w.dim(1) == d1 + 1 && w.dim(2) == d2 + 1,
          "BiaffineLabels weight shape");
  const int labels = w.dim(0);
  const size_t slice = static_cast<size_t>(d1 + 1) * (d2 + 1);
  const auto xa = Augment(x.value(), m, d1);
  const auto ya = Augment(y.value(), n, d2);
  std::vector<double> out(static_cast<size_t>(m) * n * labels);
  for (int l = 0; l < labels; ++l) {
    BiaffineSlice(xa, w.value().data() + l * slice, ya, m, d1 + 1, n, d2 + 1, out.data() + l,
                  static_cast<size_t>(n) * labels, labels);
  }
  return MakeNode({m, n, labels}, std::move(out), {x.shared(), w.shared(), y.shared()},
                  [m, d1, n, d2, labels, slice](Node& self) {
                    const auto xa = Augment(self.inputs[0]->value(), m, d1);
                    const auto ya = Augment(self.inputs[2]->value(), n, d2);
                    std::vector<double> gxa(xa.size(), 0.0), gya(ya.size(), 0.0);
                    auto& gw = GradOf(*self.inputs[1]);
                    for (int l = 0; l < labels; ++l) {
                      BiaffineSliceBackward(xa, self.inputs[1]->value().data() + l * slice, ya, m,
                                            d1 + 1, n, d2 + 1, self.grad.data() + l,
                                            static_cast<size_t>(n) * labels, labels, gxa,
                                            gw.data() + l * slice, gya);
                    }
                    ScatterAugmented(gxa, m, d1, GradOf(*self.inputs[0]));
                    ScatterAugmented(gya, n, d2, GradOf(*self.inputs[2]));
                  });
}

namespace {

// t_j[a][c] = sum_b w[a][b][c] s'_jb for every row j of s'.
std::vector<double> ContractSibling(std::span<const double> w, const std::vector<double>& sa,
                                    int rows, int q) {
  std::vector<double> t(static_cast<size_t>(rows) * q * q, 0.0);
  for (int j = 0; j < rows; ++j) {
    double* tj = t.data() + static_cast<size_t>(j) * q * q;
    for (int a = 0; a < q; ++a) {
      for (int b = 0; b < q; ++b) {
        const double s = sa[static_cast<size_t>(j) * q + b];
        const double* wab = w.data() + (static_cast<size_t>(a) * q + b) * q;
        for (int c = 0; c < q; ++c) tj[a * q + c] += s * wab[c];
      }
    }
  }
  return t;
}

}  // namespace

Var Triaffine(const Var& h, const Var& s, const Var& m, const Var& w) {
  const int n = h.dim(0), d = h.dim(1);
  Require(s.dim(0) == n && m.dim(0) == n && s.dim(1) == d && m.dim(1) == d, "Triaffine inputs");
  Require(w.shape() == std::vector<int>({d + 1, d + 1, d + 1}), "Triaffine weight shape");
  const int q = d + 1;
  const auto ha = Augment(h.value(), n, d);
  const auto sa = Augment(s.value(), n, d);
  const auto ma = Augment(m.value(), n, d);
  const auto t = ContractSibling(w.value(), sa, n, q);
  std::vector<double> out(static_cast<size_t>(n) * n * n);
  for (int j = 0; j < n; ++j) {
    BiaffineSlice(ha, t.data() + static_cast<size_t>(j) * q * q, ma, n, q, n, q,
                  out.data() + static_cast<size_t>(j) * n, static_cast<size_t>(n) * n, 1);
  }
  return MakeNode(
      {n, n, n}, std::move(out), {h.shared(), s.shared(), m.shared(), w.shared()},
      [n, d, q](Node& self) {
        const auto ha = Augment(self.inputs[0]->value(), n, d);
        const auto sa = Augment(self.inputs[1]->value(), n, d);
        const auto ma = Augment(self.inputs[2]->value(), n, d);
        const auto wv = self.inputs[3]->value();
        const auto t = ContractSibling(wv, sa, n, q);
        std::vector<double> gha(ha.size(), 0.0), gsa(sa.size(), 0.0), gma(ma.size(), 0.0);
        std::vector<double> dt(static_cast<size_t>(q) * q);
        auto& gw = GradOf(*self.inputs[3]);
        for (int j = 0; j < n; ++j) {
          std::fill(dt.begin(), dt.end(), 0.0);
          BiaffineSliceBackward(ha, t.data() + static_cast<size_t>(j) * q * q, ma, n, q, n, q,
                                self.grad.data() + static_cast<size_t>(j) * n,
                                static_cast<size_t>(n) * n, 1, gha, dt.data(), gma);
          for (int a = 0; a < q; ++a) {
            for (int b = 0; b < q; ++b) {
              const double sv = sa[static_cast<size_t>(j) * q + b];
              const double* wab = wv.data() + (static_cast<size_t>(a) * q + b) * q;
              double* gwab = gw.data() + (static_cast<size_t>(a) * q + b) * q;
              double acc = 0.0;
              for (int c = 0; c < q; ++c) {
                const double g = dt[a * q + c];
                gwab[c] += g * sv;
                acc += g * wab[c];
              }
              gsa[static_cast<size_t>(j) * q + b] += acc;
            }
          }
        }
        ScatterAugmented(gha, n, d, GradOf(*self.inputs[0]));
        ScatterAugmented(gsa, n, d, GradOf(*self.inputs[1]));
        ScatterAugmented(gma, n, d, GradOf(*self.inputs[2]));
      });
}

Var LogSoftmax(const Var& a) {
  const int last = a.shape().back();
  const size_t rows = a.size() / last;
  std::vector<double> out(a.size());
  for (size_t r = 0; r < rows; ++r) {
    double mx = -INFINITY;
    for (int c = 0; c < last; ++c) mx = std::max(mx, a.at(r * last + c));
    double z = 0.0;
    for (int c = 0; c < last; ++c) z += std::exp(a.at(r * last + c) - mx);
    const double lse = mx + std::log(z);
    for (int c = 0; c < last; ++c) out[r * last + c] = a.at(r * last + c) - lse;
  }
  return MakeNode(a.shape(), std::move(out), {a.shared()}, [rows, last](Node& self) {
    auto& g = GradOf(*self.inputs[0]);
    for (size_t r = 0; r < rows; ++r) {
      double total = 0.0;
      for (int c = 0; c < last; ++c) total += self.grad[r * last + c];
      for (int c = 0; c < last; ++c) {
        g[r * last + c] += self.grad[r * last + c] - std::exp(self.own[r * last + c]) * total;
      }
    }
  });
}

}  // namespace treesrl::ad
