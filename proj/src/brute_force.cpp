#include <algorithm>
#include <cmath>

#include "ccorl/baselines.hpp"

namespace ccorl::baselines {

namespace {

struct JspSearch {
  const JspInstance& inst;
  const train::Objective& obj;
  std::vector<int> next, job_ready, machine_ready;
  jsp::Schedule cur;
  BruteForceJsp out;
  bool found = false;

  void leaf() {
    ++out.sequences;
    cur.makespan = *std::max_element(cur.ends.begin(), cur.ends.end());
    const double v = train::score(cur, inst, obj).objective(obj.lambda);
    if (!found || v < out.objective) {
      out.objective = v;
      out.best = cur;
      found = true;
    }
  }

  void dfs(int placed) {
    if (placed == inst.num_ops()) return leaf();
    for (int job = 0; job < inst.n_jobs; ++job) {
      const int op = next[job];
      if (op >= inst.n_machines) continue;
      const int mach = inst.machine(job, op);
      const int start = std::max(job_ready[job], machine_ready[mach]);
      const int end = start + inst.duration(job, op);
      const int saved_job = job_ready[job], saved_mach = machine_ready[mach];
      const int k = job * inst.n_machines + op;
      cur.starts[k] = start;
      cur.ends[k] = end;
      job_ready[job] = machine_ready[mach] = end;
      ++next[job];
      dfs(placed + 1);
      --next[job];
      job_ready[job] = saved_job;
      machine_ready[mach] = saved_mach;
      cur.starts[k] = cur.ends[k] = jsp::kUnset;
    }
  }
};

struct VrapSearch {
  const VrapInstance& inst;
  const train::Objective& obj;
  BruteForceVrap out;
  bool found = false;

  void dfs(const vrap::State& s) {
    if (vrap::is_done(s, inst)) {
      ++out.placements;
      const auto pl = vrap::to_placement(s, inst);
      const double v = train::score(pl, inst, obj).objective(obj.lambda);
      if (!found || v < out.objective) {
        out.objective = v;
        out.best = pl;
        found = true;
      }
      return;
    }
    const Mask mask = vrap::feasible_mask(s, inst);
    for (int h = 0; h < inst.n_hosts(); ++h)
      if (mask[h]) dfs(vrap::step(s, h, inst));
  }
};

}  // namespace

BruteForceJsp brute_force(const JspInstance& inst, const train::Objective& obj) {
  inst.validate();
  if (inst.num_ops() > kMaxBruteForceOps)
    throw ValidationError("brute force supports at most " + std::to_string(kMaxBruteForceOps) + " operations, got " +
                          std::to_string(inst.num_ops()));
  JspSearch s{inst, obj, std::vector<int>(inst.n_jobs, 0), std::vector<int>(inst.n_jobs, 0),
              std::vector<int>(inst.n_machines, 0), {}, {}};
  s.cur.n_jobs = inst.n_jobs;
  s.cur.n_machines = inst.n_machines;
  s.cur.starts.assign(inst.num_ops(), jsp::kUnset);
  s.cur.ends.assign(inst.num_ops(), jsp::kUnset);
  s.dfs(0);
  return s.out;
}

BruteForceVrap brute_force(const VrapInstance& inst, const train::Objective& obj) {
  inst.validate();
  const double count = std::pow(static_cast<double>(inst.n_hosts()), inst.chain_length());
  if (count > static_cast<double>(kMaxBruteForcePlacements))
    throw ValidationError("brute force supports at most " + std::to_string(kMaxBruteForcePlacements) +
                          " placements, instance has " + format_double(count));
  VrapSearch s{inst, obj, {}};
  s.dfs(vrap::reset(inst));
  if (!s.found) {
    s.out.best = vrap::evaluate_hosts(std::vector<int>(inst.chain_length(), 0), inst);
    s.out.objective = train::score(s.out.best, inst, obj).objective(obj.lambda);
  }
  return s.out;
}

}  // namespace ccorl::baselines
