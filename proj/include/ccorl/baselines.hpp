#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "ccorl/common.hpp"
#include "ccorl/jsp_env.hpp"
#include "ccorl/trainer.hpp"
#include "ccorl/vrap_env.hpp"

namespace ccorl::baselines {

enum class Rule { SPT, LPT, FCFS, LWR };

Rule parse_rule(std::string_view name);  // case-insensitive
const char* to_string(Rule rule);

// Non-delay dispatching through the environment: whenever jobs compete, the
// top-ranked one is started; ties go to the lower job index.
jsp::Schedule dispatch(const JspInstance& inst, Rule rule);

struct GaConfig {
  int population = 300;
  double crossover_rate = 0.8;
  double mutation_rate = 0.3;
  int generations = 500;
  int tournament = 3;
  std::uint64_t seed = 0;

  void validate() const;
};

template <class Solution>
struct GaResult {
  Solution best;
  double objective = 0;
  std::vector<double> history;  // best objective after each generation, starting with the initial population
};

// Operation-sequence encoding (each job appears n_machines times) with
// semi-active decoding, POX crossover and swap mutation.
GaResult<jsp::Schedule> ga_jsp(const JspInstance& inst, const GaConfig& cfg, const train::Objective& obj = {},
                               Exec exec = Exec::parallel);

// Host-vector encoding, one-point crossover and random-reset mutation;
// infeasible vectors score the infeasibility sentinel.
GaResult<vrap::Placement> ga_vrap(const VrapInstance& inst, const GaConfig& cfg, const train::Objective& obj = {},
                                  Exec exec = Exec::parallel);

inline constexpr int kMaxBruteForceOps = 9;
inline constexpr long long kMaxBruteForcePlacements = 1'000'000;

struct BruteForceJsp {
  jsp::Schedule best;
  double objective = 0;
  long long sequences = 0;  // distinct operation sequences decoded
};

// Enumerates every operation sequence (multiset permutation of job indices)
// and decodes it semi-actively, which covers every active schedule.
// Throws ValidationError above kMaxBruteForceOps operations.
BruteForceJsp brute_force(const JspInstance& inst, const train::Objective& obj = {});

struct BruteForceVrap {
  vrap::Placement best;
  double objective = 0;
  long long placements = 0;  // complete feasible placements visited
};

// Depth-first search over all host vectors through the masked environment.
// Throws ValidationError above kMaxBruteForcePlacements host vectors.
BruteForceVrap brute_force(const VrapInstance& inst, const train::Objective& obj = {});

}  // namespace ccorl::baselines
