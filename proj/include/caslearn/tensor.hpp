// tensor.hpp
//   Minimal reverse-mode differentiation tape. Tensors are dense row-major
//   double matrices (vectors are 1 x n, scalars 1 x 1) owned by a Tape that
//   is rebuilt every training step; parameters live outside the tape and
//   enter as leaves. backward() accumulates into gradient slots; call
//   zero_grad() between passes. Inner loops go through the runtime-selected
//   kernels, so results are identical across lanes and runs.

#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace caslearn::ad {

class Tape;

// Cheap handle into the tape. Copyable; valid as long as its tape lives.
class Var {
 public:
  Var() = default;
  Var(Tape* tape, int idx) : tape_(tape), idx_(idx) {}

  bool valid() const { return tape_ != nullptr; }
  int rows() const;
  int cols() const;
  std::size_t size() const { return static_cast<std::size_t>(rows()) * static_cast<std::size_t>(cols()); }
  const std::vector<double>& value() const;
  const std::vector<double>& grad() const;
  double scalar() const { return value()[0]; }

  Tape* tape() const { return tape_; }
  int index() const { return idx_; }

 private:
  Tape* tape_ = nullptr;
  int idx_ = -1;
};

class Tape {
 public:
  struct Node {
    int rows = 0;
    int cols = 0;
    std::vector<double> val;
    std::vector<double> grad;
    std::function<void(Tape&)> back;  // empty for leaves
  };

  Var leaf(int rows, int cols, const double* data);
  Var leaf(int rows, int cols, const std::vector<double>& data);
  Var scalar(double v);

  // uninitialized op output; ops fill val and set back
  Var make(int rows, int cols);

  Node& node(int i) { return nodes_[static_cast<std::size_t>(i)]; }
  const Node& node(int i) const { return nodes_[static_cast<std::size_t>(i)]; }
  int size() const { return static_cast<int>(nodes_.size()); }

  void zero_grad();

  // Reverse accumulation from a scalar loss. Gradients add onto whatever is
  // already in the slots.
  void backward(const Var& loss);

 private:
  std::vector<Node> nodes_;
};

// elementwise and linear-algebra ops; all record their backward rule
Var matmul(const Var& a, const Var& b);
Var add(const Var& a, const Var& b);
Var add_rowwise(const Var& m, const Var& row);  // broadcast a 1 x c row over an r x c matrix
Var sub(const Var& a, const Var& b);
Var mul(const Var& a, const Var& b);
Var affine(const Var& a, double scale, double shift);  // scale * a + shift
Var sigmoid(const Var& a);
Var tanh_op(const Var& a);
Var exp_op(const Var& a);
Var log_op(const Var& a);
Var softplus(const Var& a);  // log(1 + e^x), overflow-safe
Var concat_cols(const Var& a, const Var& b);
Var concat_scalars(Tape& tape, const std::vector<Var>& xs);  // n scalars -> 1 x n
Var slice_cols(const Var& a, int begin, int end);
Var slice_rows(const Var& a, int begin, int end);
Var sum(const Var& a);
Var mean(const Var& a);
Var l2_normalize(const Var& a);
Var cosine_similarity(const Var& a, const Var& b);

}  // namespace caslearn::ad
