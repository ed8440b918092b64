#ifndef TREESRL_TABLES_H_
#define TREESRL_TABLES_H_

#include <cmath>
#include <limits>
#include <vector>

namespace treesrl {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// log(exp(a) + exp(b)) with -inf as the identity.
inline double LogAdd(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  return a > b ? a + std::log1p(std::exp(b - a)) : b + std::log1p(std::exp(a - b));
}

// Streaming log-sum-exp accumulator.
class LogSum {
 public:
  void Add(double value) {
    if (value == kNegInf) return;
    if (value > max_) {
      sum_ = sum_ * std::exp(max_ - value) + 1.0;
      max_ = value;
    } else {
      sum_ += std::exp(value - max_);
    }
  }
  double Result() const { return max_ == kNegInf ? kNegInf : max_ + std::log(sum_); }

 private:
  double max_ = kNegInf;
  double sum_ = 0.0;
};

// Dense row-major (rows x cols) table of doubles.
class Table2 {
 public:
  Table2() = default;
  Table2(int rows, int cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(static_cast<size_t>(rows) * cols, fill) {}

  double& operator()(int r, int c) { return data_[static_cast<size_t>(r) * cols_ + c]; }
  double operator()(int r, int c) const { return data_[static_cast<size_t>(r) * cols_ + c]; }

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  std::vector<double>& data() { return data_; }
  const std::vector<double>& data() const { return data_; }
  bool empty() const { return data_.empty(); }

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<double> data_;
};

// Dense (d0 x d1 x d2) table of doubles.
class Table3 {
 public:
  Table3() = default;
  Table3(int d0, int d1, int d2, double fill = 0.0)
      : d0_(d0), d1_(d1), d2_(d2), data_(static_cast<size_t>(d0) * d1 * d2, fill) {}

  double& operator()(int a, int b, int c) { return data_[Offset(a, b, c)]; }
  double operator()(int a, int b, int c) const { return data_[Offset(a, b, c)]; }

  int dim0() const { return d0_; }
  int dim1() const { return d1_; }
  int dim2() const { return d2_; }
  std::vector<double>& data() { return data_; }
  const std::vector<double>& data() const { return data_; }
  bool empty() const { return data_.empty(); }

 private:
  size_t Offset(int a, int b, int c) const {
    return (static_cast<size_t>(a) * d1_ + b) * d2_ + c;
  }

  int d0_ = 0;
  int d1_ = 0;
  int d2_ = 0;
  std::vector<double> data_;
};

}  // namespace treesrl

#endif  // TREESRL_TABLES_H_
