#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ccorl/common.hpp"
#include "ccorl/instances.hpp"

namespace ccorl::jsp {

inline constexpr int kUnset = -1;

// Which idle intervals the limited-idle-time constraint measures.
//   machine_gap: gaps between consecutive operations on each machine.
//   job_gap:     gaps between consecutive operations of each job.
enum class IdleMode { machine_gap, job_gap };

IdleMode parse_idle_mode(std::string_view name);
const char* to_string(IdleMode mode);

// Dynamic observation of the scheduling process. Times are integers.
struct State {
  int n_machines = 0;
  int clock = 0;
  std::vector<int> machine_release;  // time units until each machine is free
  std::vector<int> job_remaining;    // time units until each job's running op ends
  std::vector<int> next_op;          // per job; n_machines once the job is done
  std::vector<int> starts;           // per operation (job-major), kUnset until scheduled
  std::vector<int> ends;
  int scheduled = 0;

  bool operator==(const State&) const = default;
};

// One flag per job: schedule its next operation now.
using Action = Mask;

State reset(const JspInstance& inst);

// mask[i] is set iff job i has an operation left, its previous operation has
// finished and the machine it needs is free at the current clock.
Mask feasible_mask(const State& state, const JspInstance& inst);

bool is_done(const State& state);

// True when nothing is running: declining every job would leave no future
// event to advance to, so the action must select at least one job.
bool is_idle(const State& state);

// Starts the selected jobs at the current clock, in ascending job order. A
// selected job whose machine was claimed by a lower-index job in the same
// action stays waiting. Does not move the clock.
State start_selected(const State& state, const Action& action, const JspInstance& inst);

// Delay until the earliest running operation ends, if any is running.
std::optional<int> next_event(const State& state);

// Moves the clock forward to the next event.
State advance(const State& state);

// Full decision step. Starts the selected jobs, then moves the clock forward
// while no job is schedulable. An action that selects nothing is a wait: the
// clock moves to the next event even if jobs were schedulable.
// Throws ContractViolation when a masked job is selected or when an idle
// state receives an empty action.
State step(const State& state, const Action& action, const JspInstance& inst);

struct Schedule {
  int n_jobs = 0;
  int n_machines = 0;
  std::vector<int> starts;  // job-major, one entry per operation
  std::vector<int> ends;
  int makespan = 0;

  int start(int job, int op) const { return starts[job * n_machines + op]; }
  int end(int job, int op) const { return ends[job * n_machines + op]; }
  bool operator==(const Schedule&) const = default;
};

// Requires a finished state.
Schedule to_schedule(const State& state);

// Sum over idle intervals of (gap - t_th)^+.
double idle_excess(const Schedule& sched, const JspInstance& inst, double t_th, IdleMode mode);

// makespan + lambda * idle_excess.
double objective(const Schedule& sched, const JspInstance& inst, double lambda, double t_th, IdleMode mode);

// Semi-active decoding of an operation sequence: entry k names a job, and
// its next operation starts as early as its job and machine allow.
Schedule decode_sequence(const JspInstance& inst, std::span<const int> job_sequence);

// Throws ContractViolation describing the first precedence, overlap or
// duration violation.
void check_feasible(const Schedule& sched, const JspInstance& inst);

// max(max machine load, max job length).
int makespan_lower_bound(const JspInstance& inst);

struct GanttBar {
  int job = 0;
  int op = 0;
  int start = 0;
  int end = 0;
  bool operator==(const GanttBar&) const = default;
};

struct GanttDoc {
  int n_jobs = 0;
  std::vector<std::vector<GanttBar>> machines;  // bars sorted by start
  int makespan = 0;
  bool operator==(const GanttDoc&) const = default;
};

GanttDoc to_gantt(const Schedule& sched, const JspInstance& inst);

// "gantt-v1" text: one "bar <machine> <job> <op> <start> <end>" record per bar.
std::string gantt_to_text(const GanttDoc& doc);
GanttDoc parse_gantt_text(std::string_view text);

// SVG rendering: one row per machine, one colour per job.
std::string gantt_to_svg(const GanttDoc& doc, const std::string& title = {});

}  // namespace ccorl::jsp
