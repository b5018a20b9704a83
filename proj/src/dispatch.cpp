#include <algorithm>
#include <cctype>
#include <string>

#include "ccorl/baselines.hpp"

namespace ccorl::baselines {

Rule parse_rule(std::string_view name) {
  std::string up(name);
  for (auto& c : up) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  if (up == "SPT") return Rule::SPT;
  if (up == "LPT") return Rule::LPT;
  if (up == "FCFS") return Rule::FCFS;
  if (up == "LWR") return Rule::LWR;
  throw ValidationError("unknown dispatching rule '" + std::string(name) + "'");
}

const char* to_string(Rule rule) {
  switch (rule) {
    case Rule::SPT: return "SPT";
    case Rule::LPT: return "LPT";
    case Rule::FCFS: return "FCFS";
    case Rule::LWR: return "LWR";
  }
  return "?";
}

namespace {

// Smaller key wins.
long long priority(Rule rule, const jsp::State& s, const JspInstance& inst, int job) {
  const int op = s.next_op[job];
  switch (rule) {
    case Rule::SPT: return inst.duration(job, op);
    case Rule::LPT: return -inst.duration(job, op);
    case Rule::FCFS: return job;
    case Rule::LWR: {
      long long work = 0;
      for (int j = op; j < inst.n_machines; ++j) work += inst.duration(job, j);
      return work;
    }
  }
  return 0;
}

}  // namespace

jsp::Schedule dispatch(const JspInstance& inst, Rule rule) {
  inst.validate();
  jsp::State s = jsp::reset(inst);
  while (!jsp::is_done(s)) {
    const Mask mask = jsp::feasible_mask(s, inst);
    int best = -1;
    long long best_key = 0;
    for (int i = 0; i < inst.n_jobs; ++i) {
      if (!mask[i]) continue;
      const long long key = priority(rule, s, inst, i);
      if (best < 0 || key < best_key) best = i, best_key = key;
    }
    jsp::Action a(inst.n_jobs, 0);
    a[best] = 1;
    s = jsp::step(s, a, inst);
  }
  return jsp::to_schedule(s);
}

}  // namespace ccorl::baselines
