#pragma once

#include <string>
#include <vector>

#include "ccorl/nn/tape.hpp"

namespace ccorl::nn {

// Uniform in ±sqrt(6 / (fan_in + fan_out)); shape must be 2-D.
Tensor xavier_init(const std::vector<int>& shape, Rng& rng);

struct DenseParams {
  ParamId w = -1;
  ParamId b = -1;
};

DenseParams make_dense(ParamStore& store, const std::string& prefix, int in, int out, Rng& rng);
Var dense(Tape& t, const DenseParams& p, Var x);

// LSTM cell with gate blocks ordered [input, forget, cell, output]:
//   gates = x·W_ih + h·W_hh + b
//   c' = σ(f) ⊙ c + σ(i) ⊙ tanh(g),  h' = σ(o) ⊙ tanh(c')
struct LstmParams {
  ParamId w_ih = -1;  // in x 4h
  ParamId w_hh = -1;  // h x 4h
  ParamId bias = -1;  // 1 x 4h, forget block initialised to 1
  int input = 0;
  int hidden = 0;
};

LstmParams make_lstm(ParamStore& store, const std::string& prefix, int input, int hidden, Rng& rng);

struct LstmOutput {
  Var h;
  Var c;
};

LstmOutput lstm_cell(Tape& t, const LstmParams& p, Var x, Var h, Var c);

// Runs the sequence from last to first, so output j summarises inputs
// j..end. Each element is a batch (rows) x input tensor.
std::vector<Var> lstm_encode_backward(Tape& t, const LstmParams& p, std::span<const Var> seq);

}  // namespace ccorl::nn
