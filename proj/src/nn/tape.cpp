#include "ccorl/nn/tape.hpp"

#include <algorithm>
#include <cmath>

#include "ccorl/common.hpp"

namespace ccorl::nn {

Var Tape::constant(Tensor value) {
  Node n;
  n.value = std::move(value);
  nodes_.push_back(std::move(n));
  return {static_cast<int>(nodes_.size() - 1)};
}

Var Tape::input(Tensor value) {
  Node n;
  n.value = std::move(value);
  n.needs_grad = true;
  nodes_.push_back(std::move(n));
  return {static_cast<int>(nodes_.size() - 1)};
}

Var Tape::param(ParamId id) {
  if (!params_) throw ContractViolation("tape has no parameter store");
  if (id < 0 || id >= params_->size()) throw ContractViolation("parameter id out of range");
  Node n;
  n.ref = &params_->value(id);
  n.param = id;
  n.needs_grad = true;
  nodes_.push_back(std::move(n));
  return {static_cast<int>(nodes_.size() - 1)};
}

const Tensor& Tape::value(Var v) const {
  const Node& n = nodes_.at(v.id);
  return n.ref ? *n.ref : n.value;
}

const Tensor& Tape::grad(Var v) const {
  const Node& n = nodes_.at(v.id);
  return n.grad.size() ? n.grad : empty_;
}

Tensor& Tape::grad_slot(Var v) {
  Node& n = nodes_[v.id];
  if (n.grad.size() == 0) {
    const Tensor& val = n.ref ? *n.ref : n.value;
    n.grad = Tensor(val.shape(), std::vector<double>(val.size(), 0.0));
  }
  return n.grad;
}

Var Tape::push(Tensor value, BackwardFn fn, bool needs_grad) {
  Node n;
  n.value = std::move(value);
  n.needs_grad = needs_grad;
  if (needs_grad) n.backward = std::move(fn);
  nodes_.push_back(std::move(n));
  return {static_cast<int>(nodes_.size() - 1)};
}

void Tape::sweep(int from, Gradients& out) {
  for (int i = from; i >= 0; --i) {
    Node& n = nodes_[i];
    if (!n.needs_grad || n.grad.size() == 0) continue;
    if (n.param >= 0) {
      auto dst = out[n.param].values();
      auto src = n.grad.values();
      for (std::size_t k = 0; k < dst.size(); ++k) dst[k] += src[k];
    } else if (n.backward) {
      n.backward(*this, n.grad);
    }
  }
}

void Tape::backward(Var loss, Gradients& out, double seed) {
  if (nodes_.empty()) throw ContractViolation("backward on an empty tape");
  if (value(loss).size() != 1) throw ContractViolation("backward needs a scalar loss");
  for (auto& n : nodes_) n.grad = Tensor();
  grad_slot(loss)[0] = seed;
  sweep(loss.id, out);
}

void Tape::backward(Var loss, ParamStore& params, double seed) {
  Gradients g(params);
  backward(loss, g, seed);
  g.add_into(params);
}

void Tape::backward_from(Var out, const Tensor& out_grad, Gradients& grads) {
  if (nodes_.empty()) throw ContractViolation("backward on an empty tape");
  if (!value(out).same_shape(out_grad)) throw ContractViolation("seed gradient shape mismatch");
  for (auto& n : nodes_) n.grad = Tensor();
  grad_slot(out) = out_grad;
  sweep(out.id, grads);
}

void Tape::clear() { nodes_.clear(); }

namespace {

void require_rank2(const Tensor& t, const char* op) {
  if (t.rank() != 2) throw ContractViolation(std::string(op) + ": expected a rank-2 tensor, got " + shape_string(t.shape()));
}

// Right operand either matches or is a single row broadcast over the left.
bool broadcast_rows(const Tensor& a, const Tensor& b, const char* op) {
  require_rank2(a, op);
  require_rank2(b, op);
  if (a.same_shape(b)) return false;
  if (b.rows() == 1 && b.cols() == a.cols()) return true;
  throw ContractViolation(std::string(op) + ": shape mismatch " + shape_string(a.shape()) + " vs " +
                          shape_string(b.shape()));
}

bool any_grad(const Tape& t, std::initializer_list<Var> vs) {
  for (Var v : vs)
    if (t.needs_grad(v)) return true;
  return false;
}

// Visits groups of a rank-2 tensor along `axis`: calls fn(index_of(k), count) per group.
template <class F>
void for_each_group(const Tensor& x, int axis, F&& fn) {
  const int r = x.rows(), c = x.cols();
  if (axis == 1) {
    for (int g = 0; g < r; ++g) fn([=](int k) { return static_cast<std::size_t>(g) * c + k; }, c);
  } else if (axis == 0) {
    for (int g = 0; g < c; ++g) fn([=](int k) { return static_cast<std::size_t>(k) * c + g; }, r);
  } else {
    throw ContractViolation("softmax axis must be 0 or 1");
  }
}

}  // namespace

void matmul_kernel(const Tensor& a, const Tensor& b, Tensor& out, bool accumulate) {
  const int r = a.rows(), k = a.cols(), c = b.cols();
  if (b.rows() != k)
    throw ContractViolation("matmul shapes " + shape_string(a.shape()) + " x " + shape_string(b.shape()));
  if (out.rows() != r || out.cols() != c) {
    if (accumulate) throw ContractViolation("matmul accumulator has shape " + shape_string(out.shape()));
    out = Tensor(r, c);
  }
  if (!accumulate) out.fill(0.0);
  const double* ap = a.data();
  const double* bp = b.data();
  double* op = out.data();
  for (int i = 0; i < r; ++i) {
    double* orow = op + static_cast<std::size_t>(i) * c;
    const double* arow = ap + static_cast<std::size_t>(i) * k;
    for (int p = 0; p < k; ++p) {
      const double av = arow[p];
      if (av == 0.0) continue;
      const double* brow = bp + static_cast<std::size_t>(p) * c;
      for (int j = 0; j < c; ++j) orow[j] += av * brow[j];
    }
  }
}

namespace {

// ga += g · bᵀ
void matmul_grad_a(const Tensor& g, const Tensor& b, Tensor& ga) {
  const int r = g.rows(), c = g.cols(), k = b.rows();
  for (int i = 0; i < r; ++i) {
    const double* grow = g.data() + static_cast<std::size_t>(i) * c;
    double* garow = ga.data() + static_cast<std::size_t>(i) * k;
    for (int p = 0; p < k; ++p) {
      const double* brow = b.data() + static_cast<std::size_t>(p) * c;
      double s = 0;
      for (int j = 0; j < c; ++j) s += grow[j] * brow[j];
      garow[p] += s;
    }
  }
}

// gb += aᵀ · g
void matmul_grad_b(const Tensor& a, const Tensor& g, Tensor& gb) {
  const int r = a.rows(), k = a.cols(), c = g.cols();
  for (int i = 0; i < r; ++i) {
    const double* arow = a.data() + static_cast<std::size_t>(i) * k;
    const double* grow = g.data() + static_cast<std::size_t>(i) * c;
    for (int p = 0; p < k; ++p) {
      const double av = arow[p];
      if (av == 0.0) continue;
      double* gbrow = gb.data() + static_cast<std::size_t>(p) * c;
      for (int j = 0; j < c; ++j) gbrow[j] += av * grow[j];
    }
  }
}

void add_bias_grad(const Tensor& g, Tensor& gb) {
  const int r = g.rows(), c = g.cols();
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < c; ++j) gb[j] += g(i, j);
}

}  // namespace

Var matmul(Tape& t, Var a, Var b) {
  const Tensor& av = t.value(a);
  const Tensor& bv = t.value(b);
  require_rank2(av, "matmul");
  require_rank2(bv, "matmul");
  if (av.cols() != bv.rows())
    throw ContractViolation("matmul: shape mismatch " + shape_string(av.shape()) + " x " + shape_string(bv.shape()));
  Tensor out(av.rows(), bv.cols());
  matmul_kernel(av, bv, out);
  return t.push(
      std::move(out),
      [a, b](Tape& t, const Tensor& g) {
        if (t.needs_grad(a)) matmul_grad_a(g, t.value(b), t.grad_slot(a));
        if (t.needs_grad(b)) matmul_grad_b(t.value(a), g, t.grad_slot(b));
      },
      any_grad(t, {a, b}));
}

Var linear(Tape& t, Var x, Var w, Var b) {
  const Tensor& xv = t.value(x);
  const Tensor& wv = t.value(w);
  const Tensor& bv = t.value(b);
  require_rank2(xv, "linear");
  require_rank2(wv, "linear");
  if (xv.cols() != wv.rows() || bv.rows() != 1 || bv.cols() != wv.cols())
    throw ContractViolation("linear: shape mismatch " + shape_string(xv.shape()) + " x " + shape_string(wv.shape()) +
                            " + " + shape_string(bv.shape()));
  Tensor out(xv.rows(), wv.cols());
  for (int i = 0; i < out.rows(); ++i)
    for (int j = 0; j < out.cols(); ++j) out(i, j) = bv[j];
  matmul_kernel(xv, wv, out, /*accumulate=*/true);
  return t.push(
      std::move(out),
      [x, w, b](Tape& t, const Tensor& g) {
        if (t.needs_grad(x)) matmul_grad_a(g, t.value(w), t.grad_slot(x));
        if (t.needs_grad(w)) matmul_grad_b(t.value(x), g, t.grad_slot(w));
        if (t.needs_grad(b)) add_bias_grad(g, t.grad_slot(b));
      },
      any_grad(t, {x, w, b}));
}

namespace {

enum class BinOp { add, sub, mul };

Var binary(Tape& t, Var a, Var b, BinOp op, const char* name) {
  const Tensor& av = t.value(a);
  const Tensor& bv = t.value(b);
  const bool bc = broadcast_rows(av, bv, name);
  Tensor out = av;
  const int r = av.rows(), c = av.cols();
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < c; ++j) {
      const double y = bc ? bv[j] : bv(i, j);
      double& o = out(i, j);
      o = op == BinOp::add ? o + y : op == BinOp::sub ? o - y : o * y;
    }
  return t.push(
      std::move(out),
      [a, b, bc, op](Tape& t, const Tensor& g) {
        const int r = g.rows(), c = g.cols();
        if (t.needs_grad(a)) {
          Tensor& ga = t.grad_slot(a);
          const Tensor& bv = t.value(b);
          for (int i = 0; i < r; ++i)
            for (int j = 0; j < c; ++j) ga(i, j) += op == BinOp::mul ? g(i, j) * (bc ? bv[j] : bv(i, j)) : g(i, j);
        }
        if (t.needs_grad(b)) {
          Tensor& gb = t.grad_slot(b);
          const Tensor& av = t.value(a);
          for (int i = 0; i < r; ++i)
            for (int j = 0; j < c; ++j) {
              const double d = op == BinOp::add ? g(i, j) : op == BinOp::sub ? -g(i, j) : g(i, j) * av(i, j);
              (bc ? gb[j] : gb(i, j)) += d;
            }
        }
      },
      any_grad(t, {a, b}));
}

// Elementwise map with derivative expressed through input x and output y.
template <class F, class D>
Var map(Tape& t, Var x, F f, D dfdx) {
  Tensor out = t.value(x);
  for (double& v : out.values()) v = f(v);
  const int self = static_cast<int>(t.size());
  return t.push(
      std::move(out),
      [x, self, dfdx](Tape& t, const Tensor& g) {
        const Tensor& xv = t.value(x);
        const Tensor& yv = t.value(Var{self});
        Tensor& gx = t.grad_slot(x);
        for (std::size_t k = 0; k < g.size(); ++k) gx[k] += g[k] * dfdx(xv[k], yv[k]);
      },
      t.needs_grad(x));
}

double stable_sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace

Var add(Tape& t, Var a, Var b) { return binary(t, a, b, BinOp::add, "add"); }
Var sub(Tape& t, Var a, Var b) { return binary(t, a, b, BinOp::sub, "sub"); }
Var mul(Tape& t, Var a, Var b) { return binary(t, a, b, BinOp::mul, "mul"); }

Var scale(Tape& t, Var a, double s) {
  return map(t, a, [s](double v) { return v * s; }, [s](double, double) { return s; });
}

Var relu(Tape& t, Var x) {
  return map(t, x, [](double v) { return v > 0 ? v : 0.0; }, [](double v, double) { return v > 0 ? 1.0 : 0.0; });
}

Var sigmoid(Tape& t, Var x) {
  return map(t, x, stable_sigmoid, [](double, double y) { return y * (1.0 - y); });
}

Var tanh(Tape& t, Var x) {
  return map(t, x, [](double v) { return std::tanh(v); }, [](double, double y) { return 1.0 - y * y; });
}

Var log_sigmoid(Tape& t, Var x) {
  return map(
      t, x, [](double v) { return v < 0 ? v - std::log1p(std::exp(v)) : -std::log1p(std::exp(-v)); },
      [](double v, double) { return stable_sigmoid(-v); });
}

Var log1mexp(Tape& t, Var x) {
  for (double v : t.value(x).values())
    if (!(v < 0)) throw ContractViolation("log1mexp needs negative inputs");
  return map(
      t, x, [](double v) { return v > -M_LN2 ? std::log(-std::expm1(v)) : std::log1p(-std::exp(v)); },
      [](double v, double) { return -1.0 / std::expm1(-v); });
}

Var softmax(Tape& t, Var x, int axis) {
  const Tensor& xv = t.value(x);
  require_rank2(xv, "softmax");
  Tensor out = xv;
  for_each_group(xv, axis, [&](auto idx, int n) {
    double mx = -INFINITY;
    for (int k = 0; k < n; ++k) mx = std::max(mx, xv[idx(k)]);
    double s = 0;
    for (int k = 0; k < n; ++k) s += (out[idx(k)] = std::exp(xv[idx(k)] - mx));
    for (int k = 0; k < n; ++k) out[idx(k)] /= s;
  });
  const int self = static_cast<int>(t.size());
  return t.push(
      std::move(out),
      [x, self, axis](Tape& t, const Tensor& g) {
        const Tensor& y = t.value(Var{self});
        Tensor& gx = t.grad_slot(x);
        for_each_group(y, axis, [&](auto idx, int n) {
          double dot = 0;
          for (int k = 0; k < n; ++k) dot += g[idx(k)] * y[idx(k)];
          for (int k = 0; k < n; ++k) gx[idx(k)] += y[idx(k)] * (g[idx(k)] - dot);
        });
      },
      t.needs_grad(x));
}

Var log_softmax(Tape& t, Var x, int axis) {
  const Tensor& xv = t.value(x);
  require_rank2(xv, "log_softmax");
  Tensor out = xv;
  for_each_group(xv, axis, [&](auto idx, int n) {
    double mx = -INFINITY;
    for (int k = 0; k < n; ++k) mx = std::max(mx, xv[idx(k)]);
    double s = 0;
    for (int k = 0; k < n; ++k) s += std::exp(xv[idx(k)] - mx);
    const double lse = mx + std::log(s);
    for (int k = 0; k < n; ++k) out[idx(k)] = xv[idx(k)] - lse;
  });
  const int self = static_cast<int>(t.size());
  return t.push(
      std::move(out),
      [x, self, axis](Tape& t, const Tensor& g) {
        const Tensor& y = t.value(Var{self});
        Tensor& gx = t.grad_slot(x);
        for_each_group(y, axis, [&](auto idx, int n) {
          double gs = 0;
          for (int k = 0; k < n; ++k) gs += g[idx(k)];
          for (int k = 0; k < n; ++k) gx[idx(k)] += g[idx(k)] - std::exp(y[idx(k)]) * gs;
        });
      },
      t.needs_grad(x));
}

Var sum(Tape& t, Var x) {
  double s = 0;
  for (double v : t.value(x).values()) s += v;
  return t.push(
      Tensor::scalar(s),
      [x](Tape& t, const Tensor& g) {
        Tensor& gx = t.grad_slot(x);
        for (double& v : gx.values()) v += g[0];
      },
      t.needs_grad(x));
}

Var concat_cols(Tape& t, std::span<const Var> parts) {
  if (parts.empty()) throw ContractViolation("concat_cols: no inputs");
  const int r = t.value(parts[0]).rows();
  int c = 0;
  bool ng = false;
  for (Var p : parts) {
    const Tensor& v = t.value(p);
    require_rank2(v, "concat_cols");
    if (v.rows() != r) throw ContractViolation("concat_cols: row counts differ");
    c += v.cols();
    ng = ng || t.needs_grad(p);
  }
  Tensor out(r, c);
  int off = 0;
  for (Var p : parts) {
    const Tensor& v = t.value(p);
    for (int i = 0; i < r; ++i)
      for (int j = 0; j < v.cols(); ++j) out(i, off + j) = v(i, j);
    off += v.cols();
  }
  std::vector<Var> ps(parts.begin(), parts.end());
  return t.push(
      std::move(out),
      [ps](Tape& t, const Tensor& g) {
        int off = 0;
        for (Var p : ps) {
          const int pc = t.value(p).cols();
          if (t.needs_grad(p)) {
            Tensor& gp = t.grad_slot(p);
            for (int i = 0; i < g.rows(); ++i)
              for (int j = 0; j < pc; ++j) gp(i, j) += g(i, off + j);
          }
          off += pc;
        }
      },
      ng);
}

Var concat_rows(Tape& t, std::span<const Var> parts) {
  if (parts.empty()) throw ContractViolation("concat_rows: no inputs");
  const int c = t.value(parts[0]).cols();
  int r = 0;
  bool ng = false;
  for (Var p : parts) {
    const Tensor& v = t.value(p);
    require_rank2(v, "concat_rows");
    if (v.cols() != c) throw ContractViolation("concat_rows: column counts differ");
    r += v.rows();
    ng = ng || t.needs_grad(p);
  }
  Tensor out(r, c);
  std::size_t off = 0;
  for (Var p : parts) {
    const Tensor& v = t.value(p);
    std::copy(v.values().begin(), v.values().end(), out.values().begin() + static_cast<std::ptrdiff_t>(off));
    off += v.size();
  }
  std::vector<Var> ps(parts.begin(), parts.end());
  return t.push(
      std::move(out),
      [ps](Tape& t, const Tensor& g) {
        std::size_t off = 0;
        for (Var p : ps) {
          const std::size_t n = t.value(p).size();
          if (t.needs_grad(p)) {
            Tensor& gp = t.grad_slot(p);
            for (std::size_t k = 0; k < n; ++k) gp[k] += g[off + k];
          }
          off += n;
        }
      },
      ng);
}

Var slice_cols(Tape& t, Var x, int begin, int end) {
  const Tensor& xv = t.value(x);
  require_rank2(xv, "slice_cols");
  if (begin < 0 || end > xv.cols() || begin >= end) throw ContractViolation("slice_cols: bad range");
  Tensor out(xv.rows(), end - begin);
  for (int i = 0; i < xv.rows(); ++i)
    for (int j = begin; j < end; ++j) out(i, j - begin) = xv(i, j);
  return t.push(
      std::move(out),
      [x, begin](Tape& t, const Tensor& g) {
        Tensor& gx = t.grad_slot(x);
        for (int i = 0; i < g.rows(); ++i)
          for (int j = 0; j < g.cols(); ++j) gx(i, begin + j) += g(i, j);
      },
      t.needs_grad(x));
}

Var gather_rows(Tape& t, Var x, std::span<const int> rows) {
  const Tensor& xv = t.value(x);
  require_rank2(xv, "gather_rows");
  const int c = xv.cols();
  Tensor out(static_cast<int>(rows.size()), c);
  for (std::size_t k = 0; k < rows.size(); ++k) {
    if (rows[k] < 0 || rows[k] >= xv.rows()) throw ContractViolation("gather_rows: index out of range");
    std::copy_n(xv.data() + static_cast<std::size_t>(rows[k]) * c, c, out.data() + k * c);
  }
  std::vector<int> idx(rows.begin(), rows.end());
  return t.push(
      std::move(out),
      [x, idx = std::move(idx), c](Tape& t, const Tensor& g) {
        Tensor& gx = t.grad_slot(x);
        for (std::size_t k = 0; k < idx.size(); ++k) {
          double* dst = gx.data() + static_cast<std::size_t>(idx[k]) * c;
          const double* src = g.data() + k * c;
          for (int j = 0; j < c; ++j) dst[j] += src[j];
        }
      },
      t.needs_grad(x));
}

Var dropout(Tape& t, Var x, double p, bool training, Rng& rng) {
  if (!(p >= 0.0 && p < 1.0)) throw ValidationError("dropout probability must lie in [0, 1)");
  if (!training || p == 0.0) return x;
  const Tensor& xv = t.value(x);
  Tensor mask(xv.shape(), std::vector<double>(xv.size(), 0.0));
  const double keep = 1.0 / (1.0 - p);
  for (double& m : mask.values()) m = rng.uniform() < p ? 0.0 : keep;
  return mul(t, x, t.constant(std::move(mask)));
}

}  // namespace ccorl::nn
