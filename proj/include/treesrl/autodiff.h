#ifndef TREESRL_AUTODIFF_H_
#define TREESRL_AUTODIFF_H_

// Minimal reverse-mode automatic differentiation over dense row-major
// tensors of doubles. A graph is built implicitly by calling the op
// functions; Backward() walks it once in reverse topological order.

#include <functional>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace treesrl::ad {

struct Node {
  std::vector<int> shape;
  std::vector<double> own;
  // Non-null for parameter views: values live outside the graph.
  const std::vector<double>* external = nullptr;
  std::vector<double> grad;
  std::vector<std::shared_ptr<Node>> inputs;
  std::function<void(Node&)> backward;

  std::span<const double> value() const {
    return external != nullptr ? std::span<const double>(*external) : std::span<const double>(own);
  }
  size_t size() const { return value().size(); }
};

class Var {
 public:
  Var() = default;
  explicit Var(std::shared_ptr<Node> node) : node_(std::move(node)) {}

  const std::vector<int>& shape() const { return node_->shape; }
  int dim(int axis) const { return node_->shape[axis]; }
  std::span<const double> value() const { return node_->value(); }
  double at(size_t k) const { return node_->value()[k]; }
  std::vector<double>& grad() { return node_->grad; }
  const std::vector<double>& grad() const { return node_->grad; }
  size_t size() const { return node_->size(); }
  Node* node() const { return node_.get(); }
  const std::shared_ptr<Node>& shared() const { return node_; }

 private:
  std::shared_ptr<Node> node_;
};

size_t NumElements(const std::vector<int>& shape);

// Leaf owning its values.
Var Constant(std::vector<int> shape, std::vector<double> values);
// Leaf viewing externally owned values; gradients land in the view's grad().
Var View(std::vector<int> shape, const std::vector<double>& values);

// Seeds d(output)/d(root) on each given node and back-propagates through
// everything reachable from them.
void Backward(const std::vector<std::pair<Var, std::vector<double>>>& seeds);

Var Add(const Var& a, const Var& b);
Var Scale(const Var& a, double factor);
Var Sum(const Var& a);
// Rows of `table` (shape [V, d]) selected by ids -> [ids.size(), d].
Var Gather(const Var& table, std::vector<int> ids);
// Column concatenation of equal-row matrices.
Var ConcatCols(const std::vector<Var>& parts);
// Rows [start, start + count) of a matrix.
Var Rows(const Var& a, int start, int count);
Var MatMul(const Var& a, const Var& b);
// a [m, n] plus row vector b [n] on every row.
Var AddRow(const Var& a, const Var& b);
Var Tanh(const Var& a);
// x [m, d1], w [d1 + 1, d2 + 1], y [n, d2] -> [m, n] with
// out(i, j) = [x_i; 1]^T w [y_j; 1].
Var Biaffine(const Var& x, const Var& w, const Var& y);
// Label-wise biaffine: w [L, d1 + 1, d2 + 1] -> [m, n, L].
Var BiaffineLabels(const Var& x, const Var& w, const Var& y);
// h, s, m [n, d]; w [d + 1, d + 1, d + 1] ->
// out(i, j, k) = sum_abc [h_i; 1]_a [s_j; 1]_b [m_k; 1]_c w(a, b, c).
Var Triaffine(const Var& h, const Var& s, const Var& m, const Var& w);
// Log-softmax over the last axis.
Var LogSoftmax(const Var& a);

}  // namespace treesrl::ad

#endif  // TREESRL_AUTODIFF_H_
