#pragma once

#include <functional>
#include <span>
#include <vector>

#include "ccorl/nn/tensor.hpp"
#include "ccorl/rng.hpp"

namespace ccorl::nn {

struct Var {
  int id = -1;
  bool valid() const { return id >= 0; }
};

class Tape;

// Receives the gradient of the node's output and accumulates into parents.
using BackwardFn = std::function<void(Tape& tape, const Tensor& out_grad)>;

// Records executed operations in order, with the activations their
// backward passes need. One tape per rollout; never shared across threads.
class Tape {
 public:
  explicit Tape(const ParamStore* params = nullptr) : params_(params) {}

  Var constant(Tensor value);
  // Differentiable leaf that is not a parameter; read its gradient with
  // grad() after backward.
  Var input(Tensor value);
  Var param(ParamId id);

  const Tensor& value(Var v) const;
  // Zero-filled until backward reaches the node.
  const Tensor& grad(Var v) const;

  // Reverse sweep from a scalar loss with d(loss) = seed. Parameter leaves
  // accumulate into `out`.
  void backward(Var loss, Gradients& out, double seed = 1.0);
  // Same, accumulating into the store's own gradient slots.
  void backward(Var loss, ParamStore& params, double seed = 1.0);
  // Reverse sweep seeded with an arbitrary upstream gradient for `out`.
  void backward_from(Var out, const Tensor& out_grad, Gradients& grads);

  void clear();
  std::size_t size() const { return nodes_.size(); }
  const ParamStore* params() const { return params_; }

  // For op implementations.
  Var push(Tensor value, BackwardFn fn, bool needs_grad);
  bool needs_grad(Var v) const { return nodes_[v.id].needs_grad; }
  Tensor& grad_slot(Var v);

 private:
  struct Node {
    Tensor value;
    const Tensor* ref = nullptr;  // parameter leaves point into the store
    ParamId param = -1;
    bool needs_grad = false;
    BackwardFn backward;
    Tensor grad;
  };

  void sweep(int from, Gradients& out);

  const ParamStore* params_;
  std::vector<Node> nodes_;
  Tensor empty_;
};

// Elementwise / matrix ops on rank-2 tensors. Binary elementwise ops
// broadcast a 1-row right operand over the rows of the left one.
Var matmul(Tape& t, Var a, Var b);
Var linear(Tape& t, Var x, Var w, Var b);  // x·W + b
Var add(Tape& t, Var a, Var b);
Var sub(Tape& t, Var a, Var b);
Var mul(Tape& t, Var a, Var b);
Var scale(Tape& t, Var a, double s);
Var relu(Tape& t, Var x);
Var sigmoid(Tape& t, Var x);
Var tanh(Tape& t, Var x);
Var log_sigmoid(Tape& t, Var x);
// log(1 - exp(x)) for x < 0.
Var log1mexp(Tape& t, Var x);
// axis 1 normalizes each row, axis 0 each column.
Var softmax(Tape& t, Var x, int axis = 1);
Var log_softmax(Tape& t, Var x, int axis = 1);
Var sum(Tape& t, Var x);
Var concat_cols(Tape& t, std::span<const Var> parts);
Var concat_rows(Tape& t, std::span<const Var> parts);
Var slice_cols(Tape& t, Var x, int begin, int end);
Var gather_rows(Tape& t, Var x, std::span<const int> rows);
// Training: zero each element with probability p and scale survivors by
// 1/(1-p). Inference: identity.
Var dropout(Tape& t, Var x, double p, bool training, Rng& rng);

// Plain (non-recorded) kernels shared by the ops; exposed for benchmarks.
void matmul_kernel(const Tensor& a, const Tensor& b, Tensor& out, bool accumulate = false);

}  // namespace ccorl::nn
