#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ccorl/instances.hpp"
#include "ccorl/jsp_env.hpp"
#include "ccorl/nn/layers.hpp"
#include "ccorl/vrap_env.hpp"

namespace ccorl::policy {

enum class Decode { sample, greedy };

// Static encoding of one instance, kept on its own tape so that all rollouts
// of the instance share it. `proj` is the encoding already multiplied into
// the first decoder layer (e·W_ctx + b1); rollouts gather rows of it.
struct Encoding {
  nn::Tape tape;
  nn::Var features;  // e: one row per operation (JSP) or chain position (VRAP)
  nn::Var proj;
};

// Per-rollout tape and its differentiable episode log-probability.
struct Trace {
  nn::Tape tape;
  nn::Var proj;      // leaf copy of Encoding::proj
  nn::Var log_prob;  // scalar sum of per-decision log-probabilities
  int decisions = 0;
};

template <class Solution>
struct Rollout {
  Trace trace;
  Solution solution;
};

// Reverse sweep through one rollout scaled by `seed` (d loss / d log_prob).
// Parameter gradients go to `grads`; the gradient w.r.t. the shared encoding
// projection is added to `proj_grad`.
void backward_trace(Trace& trace, double seed, nn::Gradients& grads, nn::Tensor& proj_grad);
// Finishes the sweep through the encoder for the accumulated `proj_grad`.
void backward_encoding(Encoding& enc, const nn::Tensor& proj_grad, nn::Gradients& grads);

struct NetConfig {
  int embed = 64;      // static and dynamic embedding width
  int hidden = 64;     // LSTM hidden size
  int dec1 = 128;      // decoder hidden widths
  int dec2 = 64;
  double dropout = 0.1;  // applied to the encoder outputs while training
};

// Narrower encoder for the short VRAP service chains.
inline NetConfig vrap_net_config() {
  NetConfig c;
  c.embed = 16;
  c.hidden = 16;
  return c;
}

// ---------------------------------------------------------------- JSP

struct JspDistribution {
  std::vector<int> jobs;     // decision set: the feasible jobs
  std::vector<double> prob;  // per job; exactly 0 for masked jobs
  bool must_act = false;     // idle state: the empty action is excluded
  nn::Var logits;            // jobs.size() x 1 on the rollout tape
};

class JspPolicyNet {
 public:
  using Instance = JspInstance;
  using Solution = jsp::Schedule;

  JspPolicyNet(int n_jobs, int n_machines, double dur_norm, NetConfig cfg, std::uint64_t seed);

  nn::ParamStore& params() { return params_; }
  const nn::ParamStore& params() const { return params_; }
  const NetConfig& config() const { return cfg_; }
  int n_jobs() const { return n_jobs_; }
  int n_machines() const { return n_machines_; }
  double dur_norm() const { return dur_norm_; }

  // Throws ValidationError when the instance size differs from the network's.
  void check_compatible(const JspInstance& inst) const;

  // Embeds each operation's (machine, duration) pair and runs the backward
  // LSTM along every job; row op*n + job of `features` is e_{job,op}.
  Encoding encode_static(const JspInstance& inst, bool training, Rng* dropout_rng) const;

  // Decoder pass for the current state; `proj` lives on `tape`.
  JspDistribution action_distribution(nn::Tape& tape, nn::Var proj, const jsp::State& state, const Mask& mask,
                                      const JspInstance& inst) const;

  Rollout<jsp::Schedule> rollout(const Encoding& enc, const JspInstance& inst, Decode decode, Rng& rng) const;

  // Re-plays a fixed action sequence; used for consistency and gradient checks.
  Rollout<jsp::Schedule> replay(const Encoding& enc, const JspInstance& inst, std::span<const jsp::Action> actions) const;

 private:
  int n_jobs_, n_machines_;
  double dur_norm_;
  NetConfig cfg_;
  nn::ParamStore params_;
  nn::DenseParams static_embed_, dynamic_embed_, dec2_, out_;
  nn::LstmParams encoder_;
  nn::ParamId w_ctx_ = -1, w_state_ = -1, w_glimpse_ = -1, b1_ = -1;
};

jsp::Action sample_action(const JspDistribution& dist, Rng& rng);
jsp::Action greedy_action(const JspDistribution& dist);
// Bernoulli log-likelihood of `action` over the decision set, conditioned on
// selecting at least one job when must_act is set.
nn::Var log_prob(nn::Tape& tape, const JspDistribution& dist, const jsp::Action& action);

// ---------------------------------------------------------------- VRAP

// Scales used to normalise VRAP inputs to roughly [0, 1].
struct VrapNorm {
  double host_cpu = 64, host_bw = 400, vm_cpu = 16, vm_bw = 100, latency = 10;
};

struct VrapDistribution {
  std::vector<int> hosts;    // feasible hosts
  std::vector<double> prob;  // per host; exactly 0 for masked hosts
  nn::Var log_probs;         // hosts.size() x 1 log-softmax over feasible hosts
};

class VrapPolicyNet {
 public:
  using Instance = VrapInstance;
  using Solution = vrap::Placement;

  static constexpr int kHostFeatures = 7;

  VrapPolicyNet(VrapNorm norm, NetConfig cfg, std::uint64_t seed);

  nn::ParamStore& params() { return params_; }
  const nn::ParamStore& params() const { return params_; }
  const NetConfig& config() const { return cfg_; }
  const VrapNorm& norm() const { return norm_; }

  Encoding encode_static(const VrapInstance& inst, bool training, Rng* dropout_rng) const;

  // Throws ValidationError (infeasible placement) when the mask is all-false.
  VrapDistribution action_distribution(nn::Tape& tape, nn::Var proj, const vrap::State& state, const Mask& mask,
                                       const VrapInstance& inst) const;

  Rollout<vrap::Placement> rollout(const Encoding& enc, const VrapInstance& inst, Decode decode, Rng& rng) const;
  Rollout<vrap::Placement> replay(const Encoding& enc, const VrapInstance& inst, std::span<const int> hosts) const;

  // Dynamic per-host features fed to the state embedding.
  nn::Tensor host_features(const vrap::State& state, const VrapInstance& inst) const;

 private:
  VrapNorm norm_;
  NetConfig cfg_;
  nn::ParamStore params_;
  nn::DenseParams static_embed_, host_embed_, dec2_, out_;
  nn::LstmParams encoder_;
  nn::ParamId w_ctx_ = -1, w_host_ = -1, b1_ = -1;
};

int sample_action(const VrapDistribution& dist, Rng& rng);
int greedy_action(const VrapDistribution& dist);
nn::Var log_prob(nn::Tape& tape, const VrapDistribution& dist, int host);

}  // namespace ccorl::policy
