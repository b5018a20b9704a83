#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <numeric>

#include "ccorl/common.hpp"
#include "ccorl/nn/checkpoint.hpp"
#include "ccorl/nn/layers.hpp"
#include "ccorl/nn/tape.hpp"
#include "support.hpp"

using namespace ccorl;
using namespace ccorl::nn;
using ccorl::test::rel_error;

namespace {

Tensor random_tensor(int r, int c, Rng& rng, double lo = -1.0, double hi = 1.0) {
  Tensor t(r, c);
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = rng.uniform(lo, hi);
  return t;
}

using Builder = std::function<Var(Tape&, const std::vector<Var>&)>;

double evaluate(const Builder& f, const std::vector<Tensor>& inputs, const ParamStore* store) {
  Tape t(store);
  std::vector<Var> vars;
  for (const auto& x : inputs) vars.push_back(t.input(x));
  return t.value(f(t, vars)).item();
}

// Central differences against the tape gradient of a scalar loss with
// respect to every element of every input.
double max_gradient_error(const Builder& f, const std::vector<Tensor>& inputs, const ParamStore* store = nullptr,
                          double h = 1e-6) {
  Tape t(store);
  std::vector<Var> vars;
  for (const auto& x : inputs) vars.push_back(t.input(x));
  Gradients grads = store ? Gradients(*store) : Gradients();
  t.backward(f(t, vars), grads);
  double worst = 0;
  for (std::size_t k = 0; k < inputs.size(); ++k) {
    for (std::size_t i = 0; i < inputs[k].size(); ++i) {
      auto plus = inputs;
      auto minus = inputs;
      plus[k][i] += h;
      minus[k][i] -= h;
      const double numeric = (evaluate(f, plus, store) - evaluate(f, minus, store)) / (2 * h);
      worst = std::max(worst, rel_error(numeric, t.grad(vars[k])[i]));
    }
  }
  return worst;
}

// Weighted sum so every output element gets a distinct upstream gradient.
Var weighted(Tape& t, Var x) {
  const Tensor& v = t.value(x);
  Tensor w(v.rows(), v.cols());
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = 0.3 + 0.17 * static_cast<double>(i % 7);
  return sum(t, mul(t, x, t.constant(w)));
}

}  // namespace

TEST(Tensor, BasicsAndShapes) {
  Tensor t(2, 3, 1.5);
  EXPECT_EQ(t.shape(), (std::vector<int>{2, 3}));
  EXPECT_EQ(t.size(), 6u);
  t(1, 2) = 4;
  EXPECT_DOUBLE_EQ(t[5], 4);
  EXPECT_TRUE(t.all_finite());
  t[0] = NAN;
  EXPECT_FALSE(t.all_finite());
  EXPECT_DOUBLE_EQ(Tensor::scalar(2.5).item(), 2.5);
  EXPECT_THROW(Tensor(2, 2).item(), ContractViolation);
  EXPECT_EQ(shape_string({3, 4}), "[3, 4]");
}

TEST(Ops, MatmulMatchesNaiveLoop) {
  Rng rng(1);
  const Tensor a = random_tensor(5, 7, rng);
  const Tensor b = random_tensor(7, 3, rng);
  Tensor out;
  matmul_kernel(a, b, out);
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 3; ++j) {
      double s = 0;
      for (int k = 0; k < 7; ++k) s += a(i, k) * b(k, j);
      EXPECT_NEAR(out(i, j), s, 1e-12);
    }
  Tape t;
  EXPECT_THROW(matmul(t, t.constant(a), t.constant(a)), ContractViolation);
}

TEST(Ops, ForwardValues) {
  Tape t;
  const Var x = t.constant(Tensor::row({-2.0, 0.0, 3.0}));
  EXPECT_EQ(t.value(relu(t, x)), Tensor::row({0.0, 0.0, 3.0}));
  EXPECT_NEAR(t.value(sigmoid(t, x))[2], 1 / (1 + std::exp(-3.0)), 1e-15);
  EXPECT_NEAR(t.value(tanh(t, x))[0], std::tanh(-2.0), 1e-15);
  EXPECT_NEAR(t.value(log_sigmoid(t, x))[0], std::log(1 / (1 + std::exp(2.0))), 1e-14);
  const Var sm = softmax(t, x);
  double total = 0;
  for (double v : t.value(sm).values()) total += v;
  EXPECT_NEAR(total, 1.0, 1e-15);
  EXPECT_NEAR(t.value(sum(t, x)).item(), 1.0, 1e-15);
  const Var y = t.constant(Tensor::row({-0.5, -1e-10, -40.0}));
  const Tensor l = t.value(log1mexp(t, y));
  EXPECT_NEAR(l[0], std::log(1 - std::exp(-0.5)), 1e-14);
  EXPECT_NEAR(l[1], std::log(1e-10), 1e-6);
  EXPECT_NEAR(l[2], -std::exp(-40.0), 1e-30);
  EXPECT_THROW(log1mexp(t, x), ContractViolation);
}

TEST(Ops, LogSoftmaxIsStableForLargeLogits) {
  Tape t;
  const Var x = t.constant(Tensor::row({1000.0, 999.0, -1000.0}));
  const Tensor l = t.value(log_softmax(t, x));
  EXPECT_TRUE(l.all_finite());
  const double lse = 1000.0 + std::log1p(std::exp(-1.0));
  EXPECT_NEAR(l[0], 1000.0 - lse, 1e-12);
  EXPECT_NEAR(l[1], 999.0 - lse, 1e-12);
  const Tensor s = t.value(softmax(t, x));
  EXPECT_TRUE(s.all_finite());
  EXPECT_NEAR(s[0] + s[1] + s[2], 1.0, 1e-15);
}

TEST(Ops, SoftmaxAxisZeroNormalizesColumns) {
  Rng rng(2);
  Tape t;
  const Tensor xv = random_tensor(4, 3, rng, -3, 3);
  const Tensor s = t.value(softmax(t, t.constant(xv), 0));
  const Tensor l = t.value(log_softmax(t, t.constant(xv), 0));
  for (int c = 0; c < 3; ++c) {
    double total = 0;
    for (int r = 0; r < 4; ++r) {
      total += s(r, c);
      EXPECT_NEAR(std::exp(l(r, c)), s(r, c), 1e-14);
    }
    EXPECT_NEAR(total, 1.0, 1e-14);
  }
  EXPECT_THROW(softmax(t, t.constant(xv), 2), ContractViolation);
}

TEST(Ops, ConcatSliceGather) {
  Tape t;
  const Var a = t.constant(Tensor({2, 2}, {1, 2, 3, 4}));
  const Var b = t.constant(Tensor({2, 1}, {5, 6}));
  const Var parts[] = {a, b};
  EXPECT_EQ(t.value(concat_cols(t, parts)), Tensor({2, 3}, {1, 2, 5, 3, 4, 6}));
  const Var rows[] = {a, a};
  EXPECT_EQ(t.value(concat_rows(t, rows)).shape(), (std::vector<int>{4, 2}));
  EXPECT_EQ(t.value(slice_cols(t, a, 1, 2)), Tensor({2, 1}, {2, 4}));
  const int idx[] = {1, 1, 0};
  EXPECT_EQ(t.value(gather_rows(t, a, idx)), Tensor({3, 2}, {3, 4, 3, 4, 1, 2}));
  const int bad[] = {2};
  EXPECT_THROW(gather_rows(t, a, bad), ContractViolation);
}

TEST(Ops, BroadcastRowOperand) {
  Tape t;
  const Var a = t.constant(Tensor({2, 2}, {1, 2, 3, 4}));
  const Var r = t.constant(Tensor::row({10, 20}));
  EXPECT_EQ(t.value(add(t, a, r)), Tensor({2, 2}, {11, 22, 13, 24}));
  EXPECT_EQ(t.value(mul(t, a, r)), Tensor({2, 2}, {10, 40, 30, 80}));
  EXPECT_THROW(add(t, a, t.constant(Tensor::row({1, 2, 3}))), ContractViolation);
}

struct GradCase {
  const char* name;
  std::vector<std::vector<int>> shapes;
  Builder f;
  double lo = -1, hi = 1;
};

TEST(Gradients, FiniteDifferencesForEveryOp) {
  const std::vector<GradCase> cases = {
      {"matmul", {{3, 4}, {4, 2}}, [](Tape& t, const std::vector<Var>& v) { return weighted(t, matmul(t, v[0], v[1])); }},
      {"linear", {{3, 4}, {4, 2}, {1, 2}},
       [](Tape& t, const std::vector<Var>& v) { return weighted(t, linear(t, v[0], v[1], v[2])); }},
      {"add", {{3, 2}, {1, 2}}, [](Tape& t, const std::vector<Var>& v) { return weighted(t, add(t, v[0], v[1])); }},
      {"sub", {{3, 2}, {3, 2}}, [](Tape& t, const std::vector<Var>& v) { return weighted(t, sub(t, v[0], v[1])); }},
      {"mul", {{3, 2}, {1, 2}}, [](Tape& t, const std::vector<Var>& v) { return weighted(t, mul(t, v[0], v[1])); }},
      {"scale", {{2, 3}}, [](Tape& t, const std::vector<Var>& v) { return weighted(t, scale(t, v[0], -1.7)); }},
      {"relu", {{3, 3}}, [](Tape& t, const std::vector<Var>& v) { return weighted(t, relu(t, v[0])); }},
      {"sigmoid", {{3, 3}}, [](Tape& t, const std::vector<Var>& v) { return weighted(t, sigmoid(t, v[0])); }},
      {"tanh", {{3, 3}}, [](Tape& t, const std::vector<Var>& v) { return weighted(t, tanh(t, v[0])); }},
      {"log_sigmoid", {{3, 3}}, [](Tape& t, const std::vector<Var>& v) { return weighted(t, log_sigmoid(t, v[0])); }},
      {"log1mexp", {{2, 3}}, [](Tape& t, const std::vector<Var>& v) { return weighted(t, log1mexp(t, v[0])); }, -3, -0.05},
      {"softmax", {{3, 4}}, [](Tape& t, const std::vector<Var>& v) { return weighted(t, softmax(t, v[0])); }},
      {"softmax0", {{3, 4}}, [](Tape& t, const std::vector<Var>& v) { return weighted(t, softmax(t, v[0], 0)); }},
      {"log_softmax", {{3, 4}}, [](Tape& t, const std::vector<Var>& v) { return weighted(t, log_softmax(t, v[0])); }},
      {"log_softmax0", {{3, 4}},
       [](Tape& t, const std::vector<Var>& v) { return weighted(t, log_softmax(t, v[0], 0)); }},
      {"concat_cols", {{2, 2}, {2, 3}},
       [](Tape& t, const std::vector<Var>& v) {
         const Var p[] = {v[0], v[1]};
         return weighted(t, concat_cols(t, p));
       }},
      {"concat_rows", {{2, 3}, {1, 3}},
       [](Tape& t, const std::vector<Var>& v) {
         const Var p[] = {v[0], v[1], v[0]};
         return weighted(t, concat_rows(t, p));
       }},
      {"slice_cols", {{2, 5}}, [](Tape& t, const std::vector<Var>& v) { return weighted(t, slice_cols(t, v[0], 1, 4)); }},
      {"gather_rows", {{4, 2}},
       [](Tape& t, const std::vector<Var>& v) {
         const int rows[] = {3, 0, 3, 2};
         return weighted(t, gather_rows(t, v[0], rows));
       }},
      {"reuse", {{2, 2}},
       [](Tape& t, const std::vector<Var>& v) { return weighted(t, mul(t, v[0], tanh(t, v[0]))); }},
  };
  Rng rng(3);
  for (const auto& c : cases) {
    for (int draw = 0; draw < 5; ++draw) {
      std::vector<Tensor> inputs;
      for (const auto& s : c.shapes) inputs.push_back(random_tensor(s[0], s[1], rng, c.lo, c.hi));
      if (std::string(c.name) == "relu")
        for (auto& x : inputs)
          for (std::size_t i = 0; i < x.size(); ++i)
            if (std::abs(x[i]) < 1e-3) x[i] = 0.5;
      EXPECT_LT(max_gradient_error(c.f, inputs), 1e-5) << c.name;
    }
  }
}

TEST(Gradients, ParametersAccumulateIntoBuffers) {
  Rng rng(4);
  ParamStore store;
  const auto d = make_dense(store, "d", 3, 2, rng);
  const Tensor x = random_tensor(4, 3, rng);
  Gradients g(store);
  for (int rep = 0; rep < 2; ++rep) {
    Tape t(&store);
    t.backward(sum(t, dense(t, d, t.constant(x))), g);
  }
  // d(sum)/db = rows per pass, twice.
  for (std::size_t i = 0; i < g[d.b].size(); ++i) EXPECT_DOUBLE_EQ(g[d.b][i], 8.0);
  Tape t(&store);
  t.backward(sum(t, dense(t, d, t.constant(x))), store, 0.5);
  for (std::size_t i = 0; i < store.grad(d.b).size(); ++i) EXPECT_DOUBLE_EQ(store.grad(d.b)[i], 2.0);
  store.zero_grad();
  EXPECT_DOUBLE_EQ(store.grad(d.b)[0], 0.0);
  g.add_into(store);
  EXPECT_DOUBLE_EQ(store.grad(d.b)[0], 8.0);
  g.scale(0.5);
  EXPECT_DOUBLE_EQ(g[d.b][1], 4.0);
}

TEST(Gradients, ClipGlobalNorm) {
  ParamStore store;
  const auto a = store.add("a", Tensor(1, 2));
  const auto b = store.add("b", Tensor(1, 1));
  store.grad(a) = Tensor::row({3, 0});
  store.grad(b) = Tensor::row({4});
  EXPECT_DOUBLE_EQ(clip_global_norm(store, 1.0), 5.0);
  EXPECT_NEAR(store.grad(a)[0], 0.6, 1e-15);
  EXPECT_NEAR(store.grad(b)[0], 0.8, 1e-15);
  EXPECT_NEAR(clip_global_norm(store, 2.0), 1.0, 1e-15);
  EXPECT_NEAR(store.grad(a)[0], 0.6, 1e-15);
}

TEST(Layers, XavierBoundsAndVariance) {
  Rng rng(5);
  const int in = 200, out = 300;
  const Tensor w = xavier_init({in, out}, rng);
  const double bound = std::sqrt(6.0 / (in + out));
  double mean = 0, sq = 0;
  for (double v : w.values()) {
    EXPECT_LE(std::abs(v), bound);
    mean += v;
    sq += v * v;
  }
  mean /= static_cast<double>(w.size());
  const double var = sq / static_cast<double>(w.size()) - mean * mean;
  const double expected = 2.0 / (in + out);
  EXPECT_NEAR(var, expected, 0.05 * expected);
  EXPECT_THROW(xavier_init({3}, rng), ValidationError);
}

TEST(Layers, DropoutRateAndScaling) {
  Rng rng(6);
  Tape t;
  const Var x = t.constant(Tensor(200, 500, 1.0));
  const Tensor y = t.value(dropout(t, x, 0.1, true, rng));
  std::size_t zeros = 0;
  for (double v : y.values()) {
    if (v == 0.0)
      ++zeros;
    else
      EXPECT_DOUBLE_EQ(v, 1.0 / 0.9);
  }
  EXPECT_NEAR(static_cast<double>(zeros) / static_cast<double>(y.size()), 0.10, 0.01);
  EXPECT_EQ(t.value(dropout(t, x, 0.1, false, rng)), t.value(x));
  EXPECT_THROW(dropout(t, x, 1.0, true, rng), ValidationError);
}

TEST(Layers, DropoutGradientFollowsMask) {
  Rng rng(7);
  Tape t;
  const Var x = t.input(Tensor(4, 5, 2.0));
  const Var y = dropout(t, x, 0.5, true, rng);
  Gradients none;
  t.backward(sum(t, y), none);
  for (std::size_t i = 0; i < t.value(y).size(); ++i)
    EXPECT_DOUBLE_EQ(t.grad(x)[i], t.value(y)[i] == 0.0 ? 0.0 : 2.0);
}

TEST(Layers, LstmCellMatchesFormula) {
  Rng rng(8);
  ParamStore store;
  const auto p = make_lstm(store, "l", 3, 2, rng);
  for (int k = 0; k < 2; ++k) EXPECT_DOUBLE_EQ(store.value(p.bias)(0, 2 + k), 1.0);
  const Tensor x = random_tensor(1, 3, rng), h = random_tensor(1, 2, rng), c = random_tensor(1, 2, rng);
  Tape t(&store);
  const auto o = lstm_cell(t, p, t.constant(x), t.constant(h), t.constant(c));
  const Tensor& wih = store.value(p.w_ih);
  const Tensor& whh = store.value(p.w_hh);
  const Tensor& b = store.value(p.bias);
  auto gate = [&](int j) {
    double s = b(0, j);
    for (int k = 0; k < 3; ++k) s += x(0, k) * wih(k, j);
    for (int k = 0; k < 2; ++k) s += h(0, k) * whh(k, j);
    return s;
  };
  auto sig = [](double v) { return 1 / (1 + std::exp(-v)); };
  for (int u = 0; u < 2; ++u) {
    const double i = sig(gate(u)), f = sig(gate(2 + u)), g = std::tanh(gate(4 + u)), og = sig(gate(6 + u));
    const double c2 = f * c(0, u) + i * g;
    EXPECT_NEAR(t.value(o.c)(0, u), c2, 1e-14);
    EXPECT_NEAR(t.value(o.h)(0, u), og * std::tanh(c2), 1e-14);
  }
}

TEST(Layers, LstmBackwardEncodingIsSuffixSummary) {
  Rng rng(9);
  ParamStore store;
  const auto p = make_lstm(store, "l", 2, 3, rng);
  std::vector<Tensor> xs;
  for (int i = 0; i < 4; ++i) xs.push_back(random_tensor(1, 2, rng));
  auto run = [&](const std::vector<Tensor>& seq) {
    Tape t(&store);
    std::vector<Var> vars;
    for (const auto& x : seq) vars.push_back(t.constant(x));
    std::vector<Tensor> out;
    for (Var v : lstm_encode_backward(t, p, vars)) out.push_back(t.value(v));
    return out;
  };
  const auto base = run(xs);
  auto changed = xs;
  changed[0] = random_tensor(1, 2, rng);
  const auto other = run(changed);
  // Changing the first input only affects the first output.
  for (int j = 1; j < 4; ++j) EXPECT_EQ(base[j], other[j]);
  EXPECT_NE(base[0], other[0]);
  for (const auto& h : base)
    for (double v : h.values()) EXPECT_LT(std::abs(v), 1.0);
}

TEST(Layers, LstmGradientFiniteDifference) {
  Rng rng(10);
  ParamStore store;
  const auto p = make_lstm(store, "l", 2, 3, rng);
  const Builder f = [&](Tape& t, const std::vector<Var>& v) {
    std::vector<Var> seq = {v[0], v[1], v[2]};
    const auto hs = lstm_encode_backward(t, p, seq);
    return weighted(t, concat_rows(t, hs));
  };
  std::vector<Tensor> inputs;
  for (int i = 0; i < 3; ++i) inputs.push_back(random_tensor(2, 2, rng));
  EXPECT_LT(max_gradient_error(f, inputs, &store), 1e-5);
}

TEST(Ops, SumAccumulatesInDouble) {
  Tape t;
  const int n = 100000;
  const Var x = t.constant(Tensor(n, 1, 0.1));
  const double s = t.value(sum(t, x)).item();
  double ref = 0;
  float single = 0;
  for (int i = 0; i < n; ++i) {
    ref += 0.1;
    single += 0.1f;
  }
  EXPECT_DOUBLE_EQ(s, ref);
  EXPECT_LT(std::abs(s - 1e4), 1e-6);
  EXPECT_GT(std::abs(static_cast<double>(single) - 1e4), 1e-3);
}

TEST(Checkpoint, RoundTripIsBitExact) {
  Rng rng(11);
  ParamStore store;
  make_dense(store, "a.dense", 3, 4, rng);
  make_lstm(store, "b.lstm", 4, 2, rng);
  store.value(0)[0] = 0.1 + 0.2;
  store.value(0)[1] = -0.0;
  store.value(0)[2] = 1e-300;
  const std::string bytes = checkpoint_bytes(store);
  EXPECT_EQ(bytes.rfind("ccorl-v1\n", 0), 0u);
  const ParamStore back = parse_checkpoint(bytes);
  EXPECT_EQ(back, store);
  EXPECT_TRUE(std::signbit(back.value(0)[1]));

  ccorl::test::TempDir dir("ckpt");
  save_checkpoint(dir.file("m.ckpt"), store);
  EXPECT_EQ(load_checkpoint(dir.file("m.ckpt")), store);
  EXPECT_THROW(load_checkpoint(dir.file("missing.ckpt")), IoError);
}

TEST(Checkpoint, RejectsCorruptInput) {
  Rng rng(12);
  ParamStore store;
  make_dense(store, "d", 2, 2, rng);
  const std::string bytes = checkpoint_bytes(store);
  EXPECT_THROW(parse_checkpoint(bytes.substr(0, bytes.size() - 9)), ValidationError);
  EXPECT_THROW(parse_checkpoint("nope\n"), ValidationError);
  EXPECT_THROW(parse_checkpoint(""), ValidationError);
}

TEST(Checkpoint, AssignParamsChecksNamesAndShapes) {
  Rng rng(13);
  ParamStore a, b, c;
  make_dense(a, "d", 2, 3, rng);
  make_dense(b, "d", 2, 3, rng);
  make_dense(c, "d", 3, 3, rng);
  assign_params(b, a);
  EXPECT_EQ(a, b);
  EXPECT_THROW(assign_params(c, a), ValidationError);
  ParamStore other;
  make_dense(other, "e", 2, 3, rng);
  EXPECT_THROW(assign_params(other, a), ValidationError);
}
