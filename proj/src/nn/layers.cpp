#include "ccorl/nn/layers.hpp"

#include <cmath>

#include "ccorl/common.hpp"

namespace ccorl::nn {

Tensor xavier_init(const std::vector<int>& shape, Rng& rng) {
  if (shape.size() != 2) throw ValidationError("xavier_init needs a 2-D shape, got " + shape_string(shape));
  const int fan_in = shape[0], fan_out = shape[1];
  const double bound = std::sqrt(6.0 / (fan_in + fan_out));
  Tensor w(fan_in, fan_out);
  for (double& v : w.values()) v = rng.uniform(-bound, bound);
  return w;
}

DenseParams make_dense(ParamStore& store, const std::string& prefix, int in, int out, Rng& rng) {
  DenseParams p;
  p.w = store.add(prefix + ".w", xavier_init({in, out}, rng));
  p.b = store.add(prefix + ".b", Tensor(1, out));
  return p;
}

Var dense(Tape& t, const DenseParams& p, Var x) { return linear(t, x, t.param(p.w), t.param(p.b)); }

LstmParams make_lstm(ParamStore& store, const std::string& prefix, int input, int hidden, Rng& rng) {
  LstmParams p;
  p.input = input;
  p.hidden = hidden;
  p.w_ih = store.add(prefix + ".w_ih", xavier_init({input, 4 * hidden}, rng));
  p.w_hh = store.add(prefix + ".w_hh", xavier_init({hidden, 4 * hidden}, rng));
  Tensor bias(1, 4 * hidden);
  for (int j = hidden; j < 2 * hidden; ++j) bias[j] = 1.0;
  p.bias = store.add(prefix + ".bias", std::move(bias));
  return p;
}

LstmOutput lstm_cell(Tape& t, const LstmParams& p, Var x, Var h, Var c) {
  const int H = p.hidden;
  if (t.value(x).cols() != p.input) throw ContractViolation("lstm: input width mismatch");
  if (t.value(h).cols() != H || t.value(c).cols() != H) throw ContractViolation("lstm: hidden-size mismatch");
  Var gates = add(t, linear(t, x, t.param(p.w_ih), t.param(p.bias)), matmul(t, h, t.param(p.w_hh)));
  Var i = sigmoid(t, slice_cols(t, gates, 0, H));
  Var f = sigmoid(t, slice_cols(t, gates, H, 2 * H));
  Var g = tanh(t, slice_cols(t, gates, 2 * H, 3 * H));
  Var o = sigmoid(t, slice_cols(t, gates, 3 * H, 4 * H));
  Var c_next = add(t, mul(t, f, c), mul(t, i, g));
  Var h_next = mul(t, o, tanh(t, c_next));
  return {h_next, c_next};
}

std::vector<Var> lstm_encode_backward(Tape& t, const LstmParams& p, std::span<const Var> seq) {
  if (seq.empty()) throw ContractViolation("lstm_encode_backward: empty sequence");
  const int batch = t.value(seq[0]).rows();
  for (Var v : seq)
    if (t.value(v).rows() != batch || t.value(v).cols() != p.input)
      throw ContractViolation("lstm_encode_backward: sequence elements differ in shape");
  Var h = t.constant(Tensor(batch, p.hidden));
  Var c = t.constant(Tensor(batch, p.hidden));
  std::vector<Var> out(seq.size());
  for (std::size_t k = seq.size(); k-- > 0;) {
    auto step = lstm_cell(t, p, seq[k], h, c);
    h = step.h;
    c = step.c;
    out[k] = h;
  }
  return out;
}

}  // namespace ccorl::nn
