#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ccorl/common.hpp"
#include "ccorl/policy.hpp"

namespace ccorl::train {

// How a finished solution is scored. One constraint per problem: machine
// idle time for JSP, end-to-end latency for VRAP.
struct Objective {
  double lambda = 0;
  double t_th = 0;
  jsp::IdleMode idle_mode = jsp::IdleMode::machine_gap;
  double sentinel_factor = vrap::kDefaultSentinelFactor;
};

struct Score {
  double primary = 0;  // makespan or energy; the sentinel for infeasible placements
  double excess = 0;   // constraint dissatisfaction C(y|x) >= 0
  bool feasible = true;

  // Cost minimised by every solver: primary + lambda * excess.
  double objective(double lambda) const { return primary + lambda * excess; }
};

Score score(const jsp::Schedule& sched, const JspInstance& inst, const Objective& obj);
Score score(const vrap::Placement& pl, const VrapInstance& inst, const Objective& obj);

// L = R - lambda * C with R = -primary.
double penalized_reward(const Score& s, double lambda);

// Value at 1-based rank ceil(alpha * N) of the ascending-sorted values.
// alpha * N is compared to integers with a 1e-9 tolerance.
double self_competing_baseline(std::span<const double> values, double alpha);

class MovingAverageBaseline {
 public:
  explicit MovingAverageBaseline(double beta);

  // M <- beta * M + (1 - beta) * value; the first call returns `value`.
  double update(double value);
  std::optional<double> value() const { return m_; }
  void set(std::optional<double> m) { m_ = m; }
  double beta() const { return beta_; }

 private:
  double beta_;
  std::optional<double> m_;
};

// Bias-corrected Adam reading the gradient slots of the store.
class Adam {
 public:
  Adam(const nn::ParamStore& params, double lr, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8);

  void step(nn::ParamStore& params);
  long long steps() const { return t_; }
  double lr() const { return lr_; }

  // Moments are stored as "adam.m.<name>" / "adam.v.<name>" plus "adam.t".
  void export_state(nn::ParamStore& out, const nn::ParamStore& params) const;
  void import_state(const nn::ParamStore& in, const nn::ParamStore& params);

 private:
  double lr_, beta1_, beta2_, eps_;
  long long t_ = 0;
  std::vector<nn::Tensor> m_, v_;
};

enum class BaselineMode { quantile, moving_average };
enum class DatasetMode { fixed, fresh };

BaselineMode parse_baseline_mode(const std::string& name);
DatasetMode parse_dataset_mode(const std::string& name);
const char* to_string(BaselineMode mode);
const char* to_string(DatasetMode mode);

struct TrainConfig {
  int B = 20;
  int N = 40;
  double alpha = 0.1;
  Objective objective;
  double lr = 5e-4;
  double grad_clip_norm = 1.0;
  double dropout = 0.1;
  int epochs = 300;
  std::uint64_t seed = 0;
  BaselineMode baseline = BaselineMode::quantile;
  double beta = 0.9;
  DatasetMode dataset = DatasetMode::fixed;

  // Throws ValidationError listing every violated field.
  void validate() const;
};

struct EpochStats {
  int epoch = 0;
  double mean_L = 0;
  double std_L = 0;
  double mean_reward = 0;
  double mean_penalty = 0;  // mean constraint dissatisfaction
  double grad_norm = 0;     // before clipping
  double seconds = 0;

  bool same_values(const EpochStats& o) const;  // everything except wall time
};

inline constexpr const char* kStatsHeader = "epoch,mean_L,std_L,mean_reward,mean_penalty,grad_norm,seconds";
std::string stats_csv_row(const EpochStats& s);

// Generators used by Trainer for instance `b` of `epoch`, derived from the
// run seed only, so results do not depend on scheduling.
Rng dropout_stream(std::uint64_t seed, int epoch, int b);
Rng sample_stream(std::uint64_t seed, int epoch, int b, int sample);

// Algorithm 1: each epoch draws B instances, runs N sampled rollouts per
// instance, takes the per-instance baseline, and applies one clipped Adam step
// on -(1/(B*N)) * sum (L - b) * log pi.
template <class Net>
class Trainer {
 public:
  using Instance = typename Net::Instance;
  using Generator = std::function<Instance(std::uint64_t seed)>;

  // Fixed-dataset mode: batches are drawn from `pool`.
  Trainer(Net& net, TrainConfig cfg, std::vector<Instance> pool);
  // Fresh mode: B new instances per epoch from `generate`.
  Trainer(Net& net, TrainConfig cfg, Generator generate);

  EpochStats run_epoch(Exec exec = Exec::parallel);

  int epoch() const { return epoch_; }
  const TrainConfig& config() const { return cfg_; }
  Adam& optimizer() { return adam_; }

  // Parameters plus optimizer and trainer state, for resumable checkpoints.
  nn::ParamStore snapshot() const;
  void restore(const nn::ParamStore& snap);

  std::vector<Instance> batch_for_epoch(int epoch) const;

 private:
  Net& net_;
  TrainConfig cfg_;
  std::vector<Instance> pool_;
  Generator generate_;
  Adam adam_;
  MovingAverageBaseline moving_;
  int epoch_ = 0;
};

template <class Solution>
struct SampleResult {
  Solution best;
  Score score;
  std::vector<double> best_so_far;  // prefix minima of the objective, one per sample
};

// RL_S(N): N sampled rollouts on split(k) of `rng`, keeping the lowest objective.
template <class Net>
SampleResult<typename Net::Solution> sample_decode(const Net& net, const typename Net::Instance& inst, int n,
                                                   const Rng& rng, const Objective& obj);

template <class Net>
typename Net::Solution greedy_decode(const Net& net, const typename Net::Instance& inst);

}  // namespace ccorl::train
