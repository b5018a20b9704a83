#include <algorithm>
#include <cmath>

#include "ccorl/policy.hpp"

namespace ccorl::policy {

void backward_trace(Trace& trace, double seed, nn::Gradients& grads, nn::Tensor& proj_grad) {
  trace.tape.backward(trace.log_prob, grads, seed);
  const nn::Tensor& g = trace.tape.grad(trace.proj);
  if (g.size() == 0) return;
  if (!proj_grad.same_shape(g)) throw ContractViolation("encoding gradient buffer has the wrong shape");
  for (std::size_t k = 0; k < g.size(); ++k) proj_grad[k] += g[k];
}

void backward_encoding(Encoding& enc, const nn::Tensor& proj_grad, nn::Gradients& grads) {
  enc.tape.backward_from(enc.proj, proj_grad, grads);
}

namespace {

double sigmoid(double z) { return z >= 0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z)); }

}  // namespace

JspPolicyNet::JspPolicyNet(int n_jobs, int n_machines, double dur_norm, NetConfig cfg, std::uint64_t seed)
    : n_jobs_(n_jobs), n_machines_(n_machines), dur_norm_(dur_norm), cfg_(cfg) {
  if (n_jobs < 1 || n_machines < 1) throw ValidationError("JSP network needs n_jobs, n_machines >= 1");
  if (!(dur_norm > 0)) throw ValidationError("duration normaliser must be positive");
  Rng rng(seed);
  static_embed_ = nn::make_dense(params_, "jsp.static_embed", 2, cfg.embed, rng);
  encoder_ = nn::make_lstm(params_, "jsp.encoder", cfg.embed, cfg.hidden, rng);
  dynamic_embed_ = nn::make_dense(params_, "jsp.dynamic_embed", n_machines + n_jobs, cfg.embed, rng);
  // First decoder layer over [x_t, c_t, d̂_t], stored as three blocks.
  const int in1 = cfg.embed + cfg.hidden + 1;
  nn::Tensor w1 = nn::xavier_init({in1, cfg.dec1}, rng);
  auto block = [&](int r0, int r1) {
    nn::Tensor b(r1 - r0, cfg.dec1);
    for (int r = r0; r < r1; ++r)
      for (int c = 0; c < cfg.dec1; ++c) b(r - r0, c) = w1(r, c);
    return b;
  };
  w_state_ = params_.add("jsp.dec1.w_state", block(0, cfg.embed));
  w_ctx_ = params_.add("jsp.dec1.w_ctx", block(cfg.embed, cfg.embed + cfg.hidden));
  w_glimpse_ = params_.add("jsp.dec1.w_glimpse", block(cfg.embed + cfg.hidden, in1));
  b1_ = params_.add("jsp.dec1.b", nn::Tensor(1, cfg.dec1));
  dec2_ = nn::make_dense(params_, "jsp.dec2", cfg.dec1, cfg.dec2, rng);
  out_ = nn::make_dense(params_, "jsp.out", cfg.dec2, 1, rng);
}

void JspPolicyNet::check_compatible(const JspInstance& inst) const {
  if (inst.n_jobs != n_jobs_ || inst.n_machines != n_machines_)
    throw ValidationError("model expects " + std::to_string(n_jobs_) + "x" + std::to_string(n_machines_) +
                          " instances, got " + std::to_string(inst.n_jobs) + "x" + std::to_string(inst.n_machines));
}

Encoding JspPolicyNet::encode_static(const JspInstance& inst, bool training, Rng* dropout_rng) const {
  check_compatible(inst);
  Encoding enc{nn::Tape(&params_), {}, {}};
  auto& t = enc.tape;
  const int n = inst.n_jobs, m = inst.n_machines;
  const double mscale = m > 1 ? 1.0 / (m - 1) : 0.0;
  std::vector<nn::Var> seq;
  seq.reserve(m);
  for (int op = 0; op < m; ++op) {
    nn::Tensor s(n, 2);
    for (int i = 0; i < n; ++i) {
      s(i, 0) = inst.machine(i, op) * mscale;
      s(i, 1) = inst.duration(i, op) / dur_norm_;
    }
    seq.push_back(nn::dense(t, static_embed_, t.constant(std::move(s))));
  }
  auto outs = nn::lstm_encode_backward(t, encoder_, seq);
  if (training && cfg_.dropout > 0) {
    if (!dropout_rng) throw ContractViolation("training encoding needs a dropout generator");
    for (auto& o : outs) o = nn::dropout(t, o, cfg_.dropout, true, *dropout_rng);
  }
  // Row op*n + job.
  enc.features = nn::concat_rows(t, outs);
  enc.proj = nn::linear(t, enc.features, t.param(w_ctx_), t.param(b1_));
  return enc;
}

JspDistribution JspPolicyNet::action_distribution(nn::Tape& t, nn::Var proj, const jsp::State& s, const Mask& mask,
                                                  const JspInstance& inst) const {
  JspDistribution dist;
  const int n = inst.n_jobs, m = inst.n_machines;
  dist.prob.assign(n, 0.0);
  for (int i = 0; i < n; ++i)
    if (mask[i]) dist.jobs.push_back(i);
  if (dist.jobs.empty()) return dist;
  dist.must_act = jsp::is_idle(s);

  nn::Tensor d(1, m + n);
  for (int k = 0; k < m; ++k) d[k] = s.machine_release[k] / dur_norm_;
  for (int i = 0; i < n; ++i) d[m + i] = s.job_remaining[i] / dur_norm_;
  nn::Var x = nn::dense(t, dynamic_embed_, t.constant(std::move(d)));
  nn::Var xs = nn::matmul(t, x, t.param(w_state_));

  const int k = static_cast<int>(dist.jobs.size());
  std::vector<int> rows(k);
  nn::Tensor dhat(k, 1);
  for (int r = 0; r < k; ++r) {
    const int i = dist.jobs[r];
    rows[r] = s.next_op[i] * n + i;
    dhat[r] = s.job_remaining[i] / dur_norm_;
  }
  nn::Var ctx = nn::gather_rows(t, proj, rows);
  nn::Var glimpse = nn::matmul(t, t.constant(std::move(dhat)), t.param(w_glimpse_));
  nn::Var h1 = nn::relu(t, nn::add(t, nn::add(t, ctx, xs), glimpse));
  nn::Var h2 = nn::relu(t, nn::dense(t, dec2_, h1));
  dist.logits = nn::dense(t, out_, h2);
  const auto& z = t.value(dist.logits);
  for (int r = 0; r < k; ++r) dist.prob[dist.jobs[r]] = sigmoid(z[r]);
  return dist;
}

jsp::Action sample_action(const JspDistribution& dist, Rng& rng) {
  jsp::Action a(dist.prob.size(), 0);
  const int k = static_cast<int>(dist.jobs.size());
  if (k == 0) return a;
  if (!dist.must_act) {
    for (int j : dist.jobs) a[j] = rng.bernoulli(dist.prob[j]);
    return a;
  }
  // Sequential draw from the Bernoulli product conditioned on a non-empty
  // selection: suffix[r] = log P(no job among r..k-1 selected).
  std::vector<double> logq(k), suffix(k + 1, 0.0);
  for (int r = 0; r < k; ++r) {
    const double p = dist.prob[dist.jobs[r]];
    logq[r] = p >= 1.0 ? -INFINITY : std::log1p(-p);
  }
  for (int r = k - 1; r >= 0; --r) suffix[r] = suffix[r + 1] + logq[r];
  bool selected = false;
  for (int r = 0; r < k; ++r) {
    const int j = dist.jobs[r];
    double p = dist.prob[j];
    if (!selected) {
      // P(select r | nothing selected before r, at least one in r..k-1)
      const double at_least_one = -std::expm1(suffix[r]);
      p = r == k - 1 || at_least_one <= 0 ? 1.0 : std::min(1.0, p / at_least_one);
    }
    a[j] = p >= 1.0 || rng.bernoulli(p);
    selected = selected || a[j];
  }
  return a;
}

jsp::Action greedy_action(const JspDistribution& dist) {
  jsp::Action a(dist.prob.size(), 0);
  bool any = false;
  for (int j : dist.jobs)
    if (dist.prob[j] > 0.5) a[j] = 1, any = true;
  if (!any && dist.must_act && !dist.jobs.empty()) {
    int best = dist.jobs[0];
    for (int j : dist.jobs)
      if (dist.prob[j] > dist.prob[best]) best = j;
    a[best] = 1;
  }
  return a;
}

nn::Var log_prob(nn::Tape& t, const JspDistribution& dist, const jsp::Action& action) {
  if (action.size() != dist.prob.size()) throw ContractViolation("action length does not match the distribution");
  std::vector<std::uint8_t> in_set(action.size(), 0);
  for (int j : dist.jobs) in_set[j] = 1;
  bool any = false;
  for (std::size_t j = 0; j < action.size(); ++j) {
    if (action[j] && !in_set[j]) throw ContractViolation("action selects masked job " + std::to_string(j));
    any = any || action[j];
  }
  if (dist.jobs.empty()) return t.constant(nn::Tensor::scalar(0.0));
  if (dist.must_act && !any) throw ContractViolation("idle state requires a non-empty action");
  const int k = static_cast<int>(dist.jobs.size());
  nn::Tensor sign(k, 1);
  for (int r = 0; r < k; ++r) sign[r] = action[dist.jobs[r]] ? 1.0 : -1.0;
  nn::Var lp = nn::sum(t, nn::log_sigmoid(t, nn::mul(t, dist.logits, t.constant(std::move(sign)))));
  if (dist.must_act) {
    nn::Var none = nn::sum(t, nn::log_sigmoid(t, nn::scale(t, dist.logits, -1.0)));
    lp = nn::sub(t, lp, nn::log1mexp(t, none));
  }
  return lp;
}

namespace {

template <class ChooseAction>
Rollout<jsp::Schedule> run_episode(const JspPolicyNet& net, const Encoding& enc, const JspInstance& inst,
                                   ChooseAction&& choose) {
  Rollout<jsp::Schedule> out{Trace{nn::Tape(&net.params()), {}, {}, 0}, {}};
  auto& t = out.trace.tape;
  out.trace.proj = t.input(enc.tape.value(enc.proj));
  std::vector<nn::Var> terms;
  jsp::State s = jsp::reset(inst);
  while (!jsp::is_done(s)) {
    const Mask mask = jsp::feasible_mask(s, inst);
    auto dist = net.action_distribution(t, out.trace.proj, s, mask, inst);
    const jsp::Action a = choose(dist, out.trace.decisions);
    terms.push_back(log_prob(t, dist, a));
    s = jsp::step(s, a, inst);
    ++out.trace.decisions;
  }
  out.trace.log_prob = terms.empty() ? t.constant(nn::Tensor::scalar(0.0)) : nn::sum(t, nn::concat_rows(t, terms));
  out.solution = jsp::to_schedule(s);
  return out;
}

}  // namespace

Rollout<jsp::Schedule> JspPolicyNet::rollout(const Encoding& enc, const JspInstance& inst, Decode decode,
                                              Rng& rng) const {
  return run_episode(*this, enc, inst, [&](const JspDistribution& d, int) {
    return decode == Decode::greedy ? greedy_action(d) : sample_action(d, rng);
  });
}

Rollout<jsp::Schedule> JspPolicyNet::replay(const Encoding& enc, const JspInstance& inst,
                                             std::span<const jsp::Action> actions) const {
  return run_episode(*this, enc, inst, [&](const JspDistribution&, int k) {
    if (k >= static_cast<int>(actions.size())) throw ContractViolation("replay ran out of actions");
    return actions[k];
  });
}

}  // namespace ccorl::policy
