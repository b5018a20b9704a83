#include "ccorl/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <exception>
#include <sstream>

#include "ccorl/instances.hpp"
#include "ccorl/nn/checkpoint.hpp"

namespace ccorl::train {

Score score(const jsp::Schedule& sched, const JspInstance& inst, const Objective& obj) {
  Score s;
  s.primary = sched.makespan;
  s.excess = jsp::idle_excess(sched, inst, obj.t_th, obj.idle_mode);
  return s;
}

Score score(const vrap::Placement& pl, const VrapInstance& inst, const Objective& obj) {
  Score s;
  s.feasible = pl.feasible;
  if (!pl.feasible) {
    s.primary = vrap::infeasible_sentinel(inst, obj.lambda, obj.sentinel_factor);
    return s;
  }
  s.primary = pl.energy;
  s.excess = vrap::latency_excess(pl, inst);
  return s;
}

double penalized_reward(const Score& s, double lambda) { return -s.primary - lambda * s.excess; }

double self_competing_baseline(std::span<const double> values, double alpha) {
  if (values.empty()) throw ValidationError("baseline needs at least one value");
  if (!(alpha > 0 && alpha < 1)) throw ValidationError("alpha must lie in (0, 1)");
  const auto n = static_cast<long long>(values.size());
  // alpha * n within kRankTolerance above an integer counts as that integer,
  // so decimal alphas such as 0.07 select the rank they denote.
  constexpr double kRankTolerance = 1e-9;
  const auto k = std::clamp(static_cast<long long>(std::ceil(alpha * static_cast<double>(n) - kRankTolerance)), 1LL, n);
  std::vector<double> sorted(values.begin(), values.end());
  std::nth_element(sorted.begin(), sorted.begin() + (k - 1), sorted.end());
  return sorted[k - 1];
}

MovingAverageBaseline::MovingAverageBaseline(double beta) : beta_(beta) {
  if (!(beta >= 0 && beta < 1)) throw ValidationError("moving-average beta must lie in [0, 1)");
}

double MovingAverageBaseline::update(double value) {
  m_ = m_ ? beta_ * *m_ + (1 - beta_) * value : value;
  return *m_;
}

Adam::Adam(const nn::ParamStore& params, double lr, double beta1, double beta2, double eps)
    : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {
  if (!(lr > 0)) throw ValidationError("learning rate must be positive");
  for (nn::ParamId i = 0; i < params.size(); ++i) {
    const auto& shape = params.value(i).shape();
    m_.emplace_back(shape, std::vector<double>(params.value(i).size(), 0.0));
    v_.emplace_back(shape, std::vector<double>(params.value(i).size(), 0.0));
  }
}

void Adam::step(nn::ParamStore& params) {
  if (params.size() != static_cast<int>(m_.size())) throw ValidationError("optimizer/parameter count mismatch");
  ++t_;
  const double c1 = 1 - std::pow(beta1_, static_cast<double>(t_));
  const double c2 = 1 - std::pow(beta2_, static_cast<double>(t_));
  for (nn::ParamId i = 0; i < params.size(); ++i) {
    auto& w = params.value(i);
    const auto& g = params.grad(i);
    if (!w.same_shape(m_[i]) || !g.same_shape(w)) throw ValidationError("optimizer shape mismatch for " + params.name(i));
    auto& m = m_[i];
    auto& v = v_[i];
    for (std::size_t k = 0; k < w.size(); ++k) {
      m[k] = beta1_ * m[k] + (1 - beta1_) * g[k];
      v[k] = beta2_ * v[k] + (1 - beta2_) * g[k] * g[k];
      w[k] -= lr_ * (m[k] / c1) / (std::sqrt(v[k] / c2) + eps_);
    }
  }
}

void Adam::export_state(nn::ParamStore& out, const nn::ParamStore& params) const {
  for (nn::ParamId i = 0; i < params.size(); ++i) {
    out.add("adam.m." + params.name(i), m_[i]);
    out.add("adam.v." + params.name(i), v_[i]);
  }
  out.add("adam.t", nn::Tensor::scalar(static_cast<double>(t_)));
}

void Adam::import_state(const nn::ParamStore& in, const nn::ParamStore& params) {
  for (nn::ParamId i = 0; i < params.size(); ++i) {
    const auto mi = in.find("adam.m." + params.name(i));
    const auto vi = in.find("adam.v." + params.name(i));
    if (mi < 0 || vi < 0) throw ValidationError("checkpoint lacks optimizer state for " + params.name(i));
    if (!in.value(mi).same_shape(m_[i]) || !in.value(vi).same_shape(v_[i]))
      throw ValidationError("optimizer state shape mismatch for " + params.name(i));
    m_[i] = in.value(mi);
    v_[i] = in.value(vi);
  }
  t_ = static_cast<long long>(in.value(in.at("adam.t")).item());
}

BaselineMode parse_baseline_mode(const std::string& name) {
  if (name == "quantile") return BaselineMode::quantile;
  if (name == "moving_average") return BaselineMode::moving_average;
  throw ValidationError("unknown baseline '" + name + "' (expected quantile or moving_average)");
}

DatasetMode parse_dataset_mode(const std::string& name) {
  if (name == "fixed") return DatasetMode::fixed;
  if (name == "fresh") return DatasetMode::fresh;
  throw ValidationError("unknown dataset mode '" + name + "' (expected fixed or fresh)");
}

const char* to_string(BaselineMode mode) { return mode == BaselineMode::quantile ? "quantile" : "moving_average"; }
const char* to_string(DatasetMode mode) { return mode == DatasetMode::fixed ? "fixed" : "fresh"; }

void TrainConfig::validate() const {
  std::vector<std::string> errors;
  if (B < 1) errors.push_back("B must be >= 1");
  if (N < 1) errors.push_back("N must be >= 1");
  if (!(alpha > 0 && alpha < 1)) errors.push_back("alpha must lie in (0, 1)");
  if (!(lr > 0)) errors.push_back("lr must be positive");
  if (!(grad_clip_norm > 0)) errors.push_back("grad_clip_norm must be positive");
  if (!(dropout >= 0 && dropout < 1)) errors.push_back("dropout must lie in [0, 1)");
  if (epochs < 0) errors.push_back("epochs must be >= 0");
  if (!(beta >= 0 && beta < 1)) errors.push_back("beta must lie in [0, 1)");
  if (!(objective.lambda >= 0)) errors.push_back("lambda must be >= 0");
  if (!std::isfinite(objective.t_th)) errors.push_back("t_th must be finite");
  if (errors.empty()) return;
  std::string msg = "invalid training configuration:";
  for (const auto& e : errors) msg += "\n  " + e;
  throw ValidationError(msg);
}

bool EpochStats::same_values(const EpochStats& o) const {
  return epoch == o.epoch && mean_L == o.mean_L && std_L == o.std_L && mean_reward == o.mean_reward &&
         mean_penalty == o.mean_penalty && grad_norm == o.grad_norm;
}

std::string stats_csv_row(const EpochStats& s) {
  std::ostringstream out;
  out << s.epoch << ',' << format_double(s.mean_L) << ',' << format_double(s.std_L) << ','
      << format_double(s.mean_reward) << ',' << format_double(s.mean_penalty) << ',' << format_double(s.grad_norm)
      << ',' << format_double(s.seconds);
  return out.str();
}

namespace {

// Stream tags mixed into split paths.
constexpr std::uint64_t kBatchStream = 0xba7c4;
constexpr std::uint64_t kDropoutStream = 0xd50;
constexpr std::uint64_t kSampleStream = 0x5a3;

struct InstanceResult {
  std::vector<double> L;
  std::vector<double> reward;
  std::vector<double> excess;
};

}  // namespace

Rng dropout_stream(std::uint64_t seed, int epoch, int b) {
  return Rng(seed).split({static_cast<std::uint64_t>(epoch), static_cast<std::uint64_t>(b), kDropoutStream});
}

Rng sample_stream(std::uint64_t seed, int epoch, int b, int sample) {
  return Rng(seed).split(
      {static_cast<std::uint64_t>(epoch), static_cast<std::uint64_t>(b), kSampleStream, static_cast<std::uint64_t>(sample)});
}

namespace {

template <class Net>
void check_dropout(const Net& net, const TrainConfig& cfg) {
  if (net.config().dropout != cfg.dropout)
    throw ValidationError("network dropout differs from the training configuration");
}

// Runs the N rollouts of one instance. With `grads` set, also backpropagates
// -(L - b)/(B*N) through each of them and then through the shared encoder.
template <class Net>
InstanceResult run_instance(const Net& net, const TrainConfig& cfg, const typename Net::Instance& inst,
                            std::uint64_t seed, int epoch, int b, std::optional<double> fixed_baseline,
                            nn::Gradients* grads) {
  Rng drop = dropout_stream(seed, epoch, b);
  policy::Encoding enc = net.encode_static(inst, true, &drop);
  const double lambda = cfg.objective.lambda;
  InstanceResult res;
  std::vector<policy::Trace> traces;
  traces.reserve(cfg.N);
  for (int s = 0; s < cfg.N; ++s) {
    Rng rng = sample_stream(seed, epoch, b, s);
    auto r = net.rollout(enc, inst, policy::Decode::sample, rng);
    const Score sc = score(r.solution, inst, cfg.objective);
    res.L.push_back(penalized_reward(sc, lambda));
    res.reward.push_back(-sc.primary);
    res.excess.push_back(sc.excess);
    if (grads) traces.push_back(std::move(r.trace));
  }
  if (!grads) return res;
  const double base = fixed_baseline ? *fixed_baseline : self_competing_baseline(res.L, cfg.alpha);
  const double denom = static_cast<double>(cfg.B) * cfg.N;
  nn::Tensor proj_grad = enc.tape.value(enc.proj);
  proj_grad.fill(0.0);
  bool any = false;
  for (int s = 0; s < cfg.N; ++s) {
    const double adv = res.L[s] - base;
    if (adv == 0) continue;
    policy::backward_trace(traces[s], -adv / denom, *grads, proj_grad);
    any = true;
    traces[s].tape.clear();
  }
  if (any) policy::backward_encoding(enc, proj_grad, *grads);
  return res;
}

template <class F>
void for_each_index(int n, Exec exec, F&& body) {
  std::vector<std::exception_ptr> errors(n);
#pragma omp parallel for schedule(dynamic, 1) if (exec == Exec::parallel && n > 1)
  for (int i = 0; i < n; ++i) {
    try {
      body(i);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace

template <class Net>
Trainer<Net>::Trainer(Net& net, TrainConfig cfg, std::vector<Instance> pool)
    : net_(net), cfg_(cfg), pool_(std::move(pool)), adam_(net.params(), cfg.lr), moving_(cfg.beta) {
  cfg_.validate();
  check_dropout(net_, cfg_);
  if (pool_.empty()) throw ValidationError("training pool is empty");
}

template <class Net>
Trainer<Net>::Trainer(Net& net, TrainConfig cfg, Generator generate)
    : net_(net), cfg_(cfg), generate_(std::move(generate)), adam_(net.params(), cfg.lr), moving_(cfg.beta) {
  cfg_.validate();
  check_dropout(net_, cfg_);
  if (!generate_) throw ValidationError("training generator is empty");
}

template <class Net>
std::vector<typename Net::Instance> Trainer<Net>::batch_for_epoch(int epoch) const {
  Rng rng = Rng(cfg_.seed).split({kBatchStream, static_cast<std::uint64_t>(epoch)});
  std::vector<Instance> batch;
  batch.reserve(cfg_.B);
  for (int b = 0; b < cfg_.B; ++b) {
    if (!pool_.empty())
      batch.push_back(pool_[rng.uniform_int(0, static_cast<std::int64_t>(pool_.size()) - 1)]);
    else
      batch.push_back(generate_(rng.next_u64()));
  }
  return batch;
}

template <class Net>
EpochStats Trainer<Net>::run_epoch(Exec exec) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto batch = batch_for_epoch(epoch_);
  const int B = cfg_.B;

  std::optional<double> fixed;
  if (cfg_.baseline == BaselineMode::moving_average) {
    if (!moving_.value()) {
      // No history yet: seed M with this epoch's batch mean, using the same
      // streams so the pass below draws identical rollouts.
      std::vector<InstanceResult> warm(B);
      for_each_index(B, exec, [&](int b) { warm[b] = run_instance(net_, cfg_, batch[b], cfg_.seed, epoch_, b, 0.0, nullptr); });
      double sum = 0;
      for (const auto& r : warm)
        for (double l : r.L) sum += l;
      moving_.update(sum / (static_cast<double>(B) * cfg_.N));
    }
    fixed = *moving_.value();
  }

  std::vector<InstanceResult> results(B);
  std::vector<nn::Gradients> grads(B);
  for_each_index(B, exec, [&](int b) {
    grads[b] = nn::Gradients(net_.params());
    results[b] = run_instance(net_, cfg_, batch[b], cfg_.seed, epoch_, b, fixed, &grads[b]);
  });

  auto& params = net_.params();
  params.zero_grad();
  for (const auto& g : grads) g.add_into(params);
  EpochStats st;
  st.epoch = epoch_;
  st.grad_norm = nn::clip_global_norm(params, cfg_.grad_clip_norm);
  adam_.step(params);

  const double count = static_cast<double>(B) * cfg_.N;
  double sum_l = 0, sum_r = 0, sum_c = 0;
  for (const auto& r : results)
    for (int s = 0; s < cfg_.N; ++s) sum_l += r.L[s], sum_r += r.reward[s], sum_c += r.excess[s];
  st.mean_L = sum_l / count;
  st.mean_reward = sum_r / count;
  st.mean_penalty = sum_c / count;
  double var = 0;
  for (const auto& r : results)
    for (double l : r.L) var += (l - st.mean_L) * (l - st.mean_L);
  st.std_L = std::sqrt(var / count);
  if (cfg_.baseline == BaselineMode::moving_average) moving_.update(st.mean_L);

  ++epoch_;
  st.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return st;
}

template <class Net>
nn::ParamStore Trainer<Net>::snapshot() const {
  nn::ParamStore snap;
  const auto& p = net_.params();
  for (nn::ParamId i = 0; i < p.size(); ++i) snap.add(p.name(i), p.value(i));
  adam_.export_state(snap, p);
  snap.add("trainer.epoch", nn::Tensor::scalar(epoch_));
  if (moving_.value()) snap.add("trainer.moving_average", nn::Tensor::scalar(*moving_.value()));
  return snap;
}

template <class Net>
void Trainer<Net>::restore(const nn::ParamStore& snap) {
  nn::assign_params(net_.params(), snap);
  adam_.import_state(snap, net_.params());
  const auto e = snap.find("trainer.epoch");
  epoch_ = e < 0 ? 0 : static_cast<int>(snap.value(e).item());
  const auto m = snap.find("trainer.moving_average");
  moving_.set(m < 0 ? std::nullopt : std::optional<double>(snap.value(m).item()));
}

template <class Net>
SampleResult<typename Net::Solution> sample_decode(const Net& net, const typename Net::Instance& inst, int n,
                                                   const Rng& rng, const Objective& obj) {
  if (n < 1) throw ValidationError("sample decode needs N >= 1");
  const policy::Encoding enc = net.encode_static(inst, false, nullptr);
  SampleResult<typename Net::Solution> out;
  double best = INFINITY;
  for (int s = 0; s < n; ++s) {
    Rng r = rng.split(static_cast<std::uint64_t>(s));
    auto ro = net.rollout(enc, inst, policy::Decode::sample, r);
    const Score sc = score(ro.solution, inst, obj);
    const double v = sc.objective(obj.lambda);
    if (v < best) {
      best = v;
      out.best = std::move(ro.solution);
      out.score = sc;
    }
    out.best_so_far.push_back(best);
  }
  return out;
}

template <class Net>
typename Net::Solution greedy_decode(const Net& net, const typename Net::Instance& inst) {
  const policy::Encoding enc = net.encode_static(inst, false, nullptr);
  Rng unused(0);
  return net.rollout(enc, inst, policy::Decode::greedy, unused).solution;
}

template class Trainer<policy::JspPolicyNet>;
template class Trainer<policy::VrapPolicyNet>;
template SampleResult<jsp::Schedule> sample_decode(const policy::JspPolicyNet&, const JspInstance&, int, const Rng&,
                                                   const Objective&);
template SampleResult<vrap::Placement> sample_decode(const policy::VrapPolicyNet&, const VrapInstance&, int,
                                                     const Rng&, const Objective&);
template jsp::Schedule greedy_decode(const policy::JspPolicyNet&, const JspInstance&);
template vrap::Placement greedy_decode(const policy::VrapPolicyNet&, const VrapInstance&);

}  // namespace ccorl::train
