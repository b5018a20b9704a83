#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "ccorl/common.hpp"
#include "ccorl/instances.hpp"

namespace ccorl::vrap {

inline constexpr int kUnset = -1;
inline constexpr double kDefaultSentinelFactor = 10.0;

// Placement progress for one service chain. Bandwidth accounting charges a
// VM's ingress and egress flows to its host; a flow between two consecutive
// VMs on the same host is internal and costs nothing.
struct State {
  int position = 0;
  std::vector<double> cpu_free;
  std::vector<double> bw_free;
  std::vector<int> placement;        // host per chain position, kUnset until placed
  std::vector<std::uint8_t> hosts_active;  // host carries at least one VM of this service
  bool aborted = false;              // no host could take the VM at `position`

  bool operator==(const State&) const = default;
};

State reset(const VrapInstance& inst);

bool is_done(const State& state, const VrapInstance& inst);

// Bandwidth a host must have free to take the VM at `position`, and the
// amount it gets back (the previous VM's egress becoming internal).
struct BandwidthDelta {
  double charge = 0;
  double refund = 0;
};
BandwidthDelta bandwidth_delta(const State& state, int host, const VrapInstance& inst);

// mask[i] is set iff host i has room for the VM at the current position.
Mask feasible_mask(const State& state, const VrapInstance& inst);

// Places the current VM on `host`. When no host is feasible the episode is
// aborted instead (the returned state has aborted = true); choosing a masked
// host while others are feasible throws ContractViolation.
State step(const State& state, int host, const VrapInstance& inst);

// Marks the episode infeasible.
State abort(const State& state);

struct Placement {
  std::vector<int> hosts;  // per chain position
  bool feasible = true;
  double energy = 0;
  double latency_total = 0;
  bool operator==(const Placement&) const = default;
};

// Requires a finished or aborted state.
Placement to_placement(const State& state, const VrapInstance& inst);

// Evaluates an explicit host assignment through the environment; returns an
// infeasible placement if any step would exceed capacity.
Placement evaluate_hosts(const std::vector<int>& hosts, const VrapInstance& inst);

double energy(const std::vector<int>& hosts, const VrapInstance& inst);
double latency(const std::vector<int>& hosts, const VrapInstance& inst);
double latency_excess(const Placement& pl, const VrapInstance& inst);

// Objective assigned to aborted episodes: `factor` times the objective of an
// all-hosts-active set-up with the worst possible latency penalty.
double infeasible_sentinel(const VrapInstance& inst, double lambda, double factor = kDefaultSentinelFactor);

// energy + lambda * latency excess, or the sentinel for infeasible placements.
double objective(const Placement& pl, const VrapInstance& inst, double lambda,
                 double sentinel_factor = kDefaultSentinelFactor);

// "placement-v1" record: feasibility, energy, latency and one host per position.
std::string placement_to_text(const Placement& pl);
Placement parse_placement_text(std::string_view text);

}  // namespace ccorl::vrap
