#include <algorithm>
#include <cmath>

#include "ccorl/policy.hpp"

namespace ccorl::policy {

VrapPolicyNet::VrapPolicyNet(VrapNorm norm, NetConfig cfg, std::uint64_t seed) : norm_(norm), cfg_(cfg) {
  Rng rng(seed);
  static_embed_ = nn::make_dense(params_, "vrap.static_embed", 3, cfg.embed, rng);
  encoder_ = nn::make_lstm(params_, "vrap.encoder", cfg.embed, cfg.hidden, rng);
  host_embed_ = nn::make_dense(params_, "vrap.host_embed", kHostFeatures, cfg.embed, rng);
  const int in1 = cfg.embed + cfg.hidden;
  nn::Tensor w1 = nn::xavier_init({in1, cfg.dec1}, rng);
  nn::Tensor wh(cfg.embed, cfg.dec1), wc(cfg.hidden, cfg.dec1);
  for (int c = 0; c < cfg.dec1; ++c) {
    for (int r = 0; r < cfg.embed; ++r) wh(r, c) = w1(r, c);
    for (int r = 0; r < cfg.hidden; ++r) wc(r, c) = w1(cfg.embed + r, c);
  }
  w_host_ = params_.add("vrap.dec1.w_host", std::move(wh));
  w_ctx_ = params_.add("vrap.dec1.w_ctx", std::move(wc));
  b1_ = params_.add("vrap.dec1.b", nn::Tensor(1, cfg.dec1));
  dec2_ = nn::make_dense(params_, "vrap.dec2", cfg.dec1, cfg.dec2, rng);
  out_ = nn::make_dense(params_, "vrap.out", cfg.dec2, 1, rng);
}

Encoding VrapPolicyNet::encode_static(const VrapInstance& inst, bool training, Rng* dropout_rng) const {
  Encoding enc{nn::Tape(&params_), {}, {}};
  auto& t = enc.tape;
  const int len = inst.chain_length();
  if (len < 1) throw ValidationError("service chain is empty");
  std::vector<nn::Var> seq;
  seq.reserve(len);
  for (int p = 0; p < len; ++p) {
    const auto& vm = inst.vm_at(p);
    seq.push_back(nn::dense(
        t, static_embed_,
        t.constant(nn::Tensor::row({vm.cpu / norm_.vm_cpu, vm.bw / norm_.vm_bw, vm.compute_latency / norm_.latency}))));
  }
  auto outs = nn::lstm_encode_backward(t, encoder_, seq);
  if (training && cfg_.dropout > 0) {
    if (!dropout_rng) throw ContractViolation("training encoding needs a dropout generator");
    for (auto& o : outs) o = nn::dropout(t, o, cfg_.dropout, true, *dropout_rng);
  }
  enc.features = nn::concat_rows(t, outs);
  enc.proj = nn::linear(t, enc.features, t.param(w_ctx_), t.param(b1_));
  return enc;
}

nn::Tensor VrapPolicyNet::host_features(const vrap::State& s, const VrapInstance& inst) const {
  const int n = inst.n_hosts(), len = inst.chain_length();
  double used = 0;
  for (int p = 0; p < s.position; ++p) used += inst.vm_at(p).compute_latency + inst.hosts[s.placement[p]].link_latency;
  const double budget = (inst.latency_threshold - used) / (norm_.latency * std::max(1, len));
  const int prev = s.position > 0 ? s.placement[s.position - 1] : vrap::kUnset;
  nn::Tensor f(n, kHostFeatures);
  for (int i = 0; i < n; ++i) {
    f(i, 0) = s.cpu_free[i] / norm_.host_cpu;
    f(i, 1) = s.bw_free[i] / norm_.host_bw;
    f(i, 2) = inst.hosts[i].link_latency / norm_.latency;
    f(i, 3) = s.hosts_active[i] ? 1.0 : 0.0;
    f(i, 4) = i == prev ? 1.0 : 0.0;
    f(i, 5) = budget;
    f(i, 6) = static_cast<double>(s.position) / len;
  }
  return f;
}

VrapDistribution VrapPolicyNet::action_distribution(nn::Tape& t, nn::Var proj, const vrap::State& s, const Mask& mask,
                                                    const VrapInstance& inst) const {
  VrapDistribution dist;
  const int n = inst.n_hosts();
  dist.prob.assign(n, 0.0);
  for (int i = 0; i < n; ++i)
    if (mask[i]) dist.hosts.push_back(i);
  if (dist.hosts.empty()) throw ValidationError("no host can take the VM at position " + std::to_string(s.position));

  nn::Var h = nn::dense(t, host_embed_, t.constant(host_features(s, inst)));
  const int pos[] = {s.position};
  nn::Var ctx = nn::gather_rows(t, proj, pos);
  nn::Var h1 = nn::relu(t, nn::add(t, nn::matmul(t, h, t.param(w_host_)), ctx));
  nn::Var h2 = nn::relu(t, nn::dense(t, dec2_, h1));
  nn::Var z = nn::dense(t, out_, h2);
  dist.log_probs = nn::log_softmax(t, nn::gather_rows(t, z, dist.hosts), 0);
  const auto& lp = t.value(dist.log_probs);
  for (std::size_t r = 0; r < dist.hosts.size(); ++r) dist.prob[dist.hosts[r]] = std::exp(lp[r]);
  return dist;
}

int sample_action(const VrapDistribution& dist, Rng& rng) {
  const double u = rng.uniform();
  double acc = 0;
  for (int h : dist.hosts) {
    acc += dist.prob[h];
    if (u < acc) return h;
  }
  return dist.hosts.back();
}

int greedy_action(const VrapDistribution& dist) {
  int best = dist.hosts.front();
  for (int h : dist.hosts)
    if (dist.prob[h] > dist.prob[best]) best = h;
  return best;
}

nn::Var log_prob(nn::Tape& t, const VrapDistribution& dist, int host) {
  const auto it = std::find(dist.hosts.begin(), dist.hosts.end(), host);
  if (it == dist.hosts.end()) throw ContractViolation("host " + std::to_string(host) + " is masked");
  const int row[] = {static_cast<int>(it - dist.hosts.begin())};
  return nn::gather_rows(t, dist.log_probs, row);
}

namespace {

template <class ChooseHost>
Rollout<vrap::Placement> run_episode(const VrapPolicyNet& net, const Encoding& enc, const VrapInstance& inst,
                                     ChooseHost&& choose) {
  Rollout<vrap::Placement> out{Trace{nn::Tape(&net.params()), {}, {}, 0}, {}};
  auto& t = out.trace.tape;
  out.trace.proj = t.input(enc.tape.value(enc.proj));
  std::vector<nn::Var> terms;
  vrap::State s = vrap::reset(inst);
  while (!vrap::is_done(s, inst)) {
    const Mask mask = vrap::feasible_mask(s, inst);
    if (std::none_of(mask.begin(), mask.end(), [](auto v) { return v != 0; })) {
      s = vrap::abort(s);
      break;
    }
    auto dist = net.action_distribution(t, out.trace.proj, s, mask, inst);
    const int host = choose(dist, out.trace.decisions);
    terms.push_back(log_prob(t, dist, host));
    s = vrap::step(s, host, inst);
    ++out.trace.decisions;
  }
  out.trace.log_prob = terms.empty() ? t.constant(nn::Tensor::scalar(0.0)) : nn::sum(t, nn::concat_rows(t, terms));
  out.solution = vrap::to_placement(s, inst);
  return out;
}

}  // namespace

Rollout<vrap::Placement> VrapPolicyNet::rollout(const Encoding& enc, const VrapInstance& inst, Decode decode,
                                                Rng& rng) const {
  return run_episode(*this, enc, inst, [&](const VrapDistribution& d, int) {
    return decode == Decode::greedy ? greedy_action(d) : sample_action(d, rng);
  });
}

Rollout<vrap::Placement> VrapPolicyNet::replay(const Encoding& enc, const VrapInstance& inst,
                                               std::span<const int> hosts) const {
  return run_episode(*this, enc, inst, [&](const VrapDistribution&, int k) {
    if (k >= static_cast<int>(hosts.size())) throw ContractViolation("replay ran out of actions");
    return hosts[k];
  });
}

}  // namespace ccorl::policy
