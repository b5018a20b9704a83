#include "ccorl/jsp_env.hpp"

#include <algorithm>
#include <string>

namespace ccorl::jsp {

IdleMode parse_idle_mode(std::string_view name) {
  if (name == "machine_gap" || name == "machine") return IdleMode::machine_gap;
  if (name == "job_gap" || name == "job") return IdleMode::job_gap;
  throw ValidationError("unknown idle mode '" + std::string(name) + "' (expected machine_gap or job_gap)");
}

const char* to_string(IdleMode mode) { return mode == IdleMode::machine_gap ? "machine_gap" : "job_gap"; }

State reset(const JspInstance& inst) {
  State s;
  s.n_machines = inst.n_machines;
  s.machine_release.assign(inst.n_machines, 0);
  s.job_remaining.assign(inst.n_jobs, 0);
  s.next_op.assign(inst.n_jobs, 0);
  s.starts.assign(inst.num_ops(), kUnset);
  s.ends.assign(inst.num_ops(), kUnset);
  return s;
}

Mask feasible_mask(const State& s, const JspInstance& inst) {
  Mask mask(inst.n_jobs, 0);
  for (int i = 0; i < inst.n_jobs; ++i) {
    const int op = s.next_op[i];
    mask[i] = op < inst.n_machines && s.job_remaining[i] == 0 && s.machine_release[inst.machine(i, op)] == 0;
  }
  return mask;
}

bool is_done(const State& s) {
  return std::all_of(s.next_op.begin(), s.next_op.end(), [&](int op) { return op == s.n_machines; });
}

bool is_idle(const State& s) {
  return std::all_of(s.job_remaining.begin(), s.job_remaining.end(), [](int r) { return r == 0; }) &&
         std::all_of(s.machine_release.begin(), s.machine_release.end(), [](int r) { return r == 0; });
}

State start_selected(const State& s, const Action& action, const JspInstance& inst) {
  if (action.size() != static_cast<std::size_t>(inst.n_jobs))
    throw ContractViolation("action has " + std::to_string(action.size()) + " entries, expected " +
                            std::to_string(inst.n_jobs));
  State t = s;
  for (int i = 0; i < inst.n_jobs; ++i) {
    if (!action[i]) continue;
    const int op = t.next_op[i];
    if (op >= inst.n_machines || t.job_remaining[i] != 0) continue;
    const int mach = inst.machine(i, op);
    if (t.machine_release[mach] != 0) continue;
    const int d = inst.duration(i, op);
    t.starts[i * inst.n_machines + op] = t.clock;
    t.ends[i * inst.n_machines + op] = t.clock + d;
    t.machine_release[mach] = d;
    t.job_remaining[i] = d;
    ++t.next_op[i];
    ++t.scheduled;
  }
  return t;
}

std::optional<int> next_event(const State& s) {
  std::optional<int> best;
  auto consider = [&](int r) {
    if (r > 0 && (!best || r < *best)) best = r;
  };
  for (int r : s.machine_release) consider(r);
  for (int r : s.job_remaining) consider(r);
  return best;
}

State advance(const State& s) {
  const auto delta = next_event(s);
  if (!delta) throw ContractViolation("cannot advance the clock: no operation is running");
  State t = s;
  t.clock += *delta;
  for (int& r : t.machine_release) r = std::max(0, r - *delta);
  for (int& r : t.job_remaining) r = std::max(0, r - *delta);
  return t;
}

State step(const State& s, const Action& action, const JspInstance& inst) {
  const Mask mask = feasible_mask(s, inst);
  if (action.size() != mask.size())
    throw ContractViolation("action has " + std::to_string(action.size()) + " entries, expected " +
                            std::to_string(mask.size()));
  bool any = false;
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (action[i] && !mask[i]) throw ContractViolation("job " + std::to_string(i) + " is masked");
    any = any || action[i];
  }
  if (is_done(s)) return s;
  if (!any && is_idle(s)) throw ContractViolation("idle state needs at least one scheduled job");

  State t = start_selected(s, action, inst);
  if (!any) t = advance(t);
  while (!is_done(t)) {
    const Mask m = feasible_mask(t, inst);
    if (std::any_of(m.begin(), m.end(), [](auto v) { return v != 0; })) break;
    t = advance(t);
  }
  return t;
}

Schedule to_schedule(const State& s) {
  if (!is_done(s)) throw ContractViolation("schedule is incomplete");
  Schedule sched;
  sched.n_jobs = static_cast<int>(s.next_op.size());
  sched.n_machines = s.n_machines;
  sched.starts = s.starts;
  sched.ends = s.ends;
  sched.makespan = sched.ends.empty() ? 0 : *std::max_element(sched.ends.begin(), sched.ends.end());
  return sched;
}

namespace {

void require_complete(const Schedule& sched, const JspInstance& inst) {
  if (sched.n_jobs != inst.n_jobs || sched.n_machines != inst.n_machines ||
      sched.starts.size() != static_cast<std::size_t>(inst.num_ops()) || sched.ends.size() != sched.starts.size())
    throw ContractViolation("schedule does not match the instance dimensions");
  for (std::size_t k = 0; k < sched.starts.size(); ++k)
    if (sched.starts[k] == kUnset || sched.ends[k] == kUnset) throw ContractViolation("schedule is incomplete");
}

// Operations per machine sorted by start time, as (start, end, job, op).
std::vector<std::vector<GanttBar>> bars_by_machine(const Schedule& sched, const JspInstance& inst) {
  std::vector<std::vector<GanttBar>> rows(inst.n_machines);
  for (int i = 0; i < inst.n_jobs; ++i)
    for (int j = 0; j < inst.n_machines; ++j)
      rows[inst.machine(i, j)].push_back({i, j, sched.start(i, j), sched.end(i, j)});
  for (auto& row : rows)
    std::sort(row.begin(), row.end(), [](const GanttBar& a, const GanttBar& b) {
      return a.start != b.start ? a.start < b.start : a.job < b.job;
    });
  return rows;
}

}  // namespace

double idle_excess(const Schedule& sched, const JspInstance& inst, double t_th, IdleMode mode) {
  require_complete(sched, inst);
  double excess = 0;
  auto add_gap = [&](int gap) { excess += std::max(0.0, static_cast<double>(gap) - t_th); };
  if (mode == IdleMode::machine_gap) {
    for (const auto& row : bars_by_machine(sched, inst))
      for (std::size_t k = 1; k < row.size(); ++k) add_gap(row[k].start - row[k - 1].end);
  } else {
    for (int i = 0; i < inst.n_jobs; ++i)
      for (int j = 1; j < inst.n_machines; ++j) add_gap(sched.start(i, j) - sched.end(i, j - 1));
  }
  return excess;
}

double objective(const Schedule& sched, const JspInstance& inst, double lambda, double t_th, IdleMode mode) {
  require_complete(sched, inst);
  const double base = static_cast<double>(sched.makespan);
  if (lambda == 0.0) return base;
  return base + lambda * idle_excess(sched, inst, t_th, mode);
}

Schedule decode_sequence(const JspInstance& inst, std::span<const int> seq) {
  std::vector<int> job_ready(inst.n_jobs, 0), machine_ready(inst.n_machines, 0), next(inst.n_jobs, 0);
  Schedule sched;
  sched.n_jobs = inst.n_jobs;
  sched.n_machines = inst.n_machines;
  sched.starts.assign(inst.num_ops(), kUnset);
  sched.ends.assign(inst.num_ops(), kUnset);
  for (int job : seq) {
    if (job < 0 || job >= inst.n_jobs || next[job] >= inst.n_machines)
      throw ContractViolation("operation sequence names job " + std::to_string(job) + " too often");
    const int op = next[job]++;
    const int mach = inst.machine(job, op);
    const int start = std::max(job_ready[job], machine_ready[mach]);
    const int end = start + inst.duration(job, op);
    sched.starts[job * inst.n_machines + op] = start;
    sched.ends[job * inst.n_machines + op] = end;
    job_ready[job] = machine_ready[mach] = end;
    sched.makespan = std::max(sched.makespan, end);
  }
  require_complete(sched, inst);
  return sched;
}

void check_feasible(const Schedule& sched, const JspInstance& inst) {
  require_complete(sched, inst);
  int makespan = 0;
  for (int i = 0; i < inst.n_jobs; ++i)
    for (int j = 0; j < inst.n_machines; ++j) {
      if (sched.start(i, j) < 0) throw ContractViolation("negative start time");
      if (sched.end(i, j) != sched.start(i, j) + inst.duration(i, j))
        throw ContractViolation("operation duration mismatch at job " + std::to_string(i));
      if (j > 0 && sched.start(i, j) < sched.end(i, j - 1))
        throw ContractViolation("precedence violated in job " + std::to_string(i));
      makespan = std::max(makespan, sched.end(i, j));
    }
  for (const auto& row : bars_by_machine(sched, inst))
    for (std::size_t k = 1; k < row.size(); ++k)
      if (row[k].start < row[k - 1].end) throw ContractViolation("overlapping operations on a machine");
  if (makespan != sched.makespan) throw ContractViolation("makespan does not match the latest end time");
}

int makespan_lower_bound(const JspInstance& inst) {
  std::vector<int> load(inst.n_machines, 0);
  int best = 0;
  for (int i = 0; i < inst.n_jobs; ++i) {
    best = std::max(best, inst.total_work(i));
    for (int j = 0; j < inst.n_machines; ++j) load[inst.machine(i, j)] += inst.duration(i, j);
  }
  for (int l : load) best = std::max(best, l);
  return best;
}

GanttDoc to_gantt(const Schedule& sched, const JspInstance& inst) {
  require_complete(sched, inst);
  GanttDoc doc;
  doc.n_jobs = inst.n_jobs;
  doc.machines = bars_by_machine(sched, inst);
  doc.makespan = sched.makespan;
  return doc;
}

}  // namespace ccorl::jsp
