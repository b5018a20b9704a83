#include <gtest/gtest.h>
#include <omp.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include "ccorl/baselines.hpp"
#include "support.hpp"

using namespace ccorl;
using namespace ccorl::baselines;

namespace {

constexpr Rule kRules[] = {Rule::SPT, Rule::LPT, Rule::FCFS, Rule::LWR};

// Best makespan over every action sequence the environment accepts: all
// subsets of the feasible jobs, including waiting when something is running.
int env_exhaustive_makespan(const JspInstance& inst) {
  int best = std::numeric_limits<int>::max();
  std::function<void(const jsp::State&)> dfs = [&](const jsp::State& s) {
    if (jsp::is_done(s)) {
      best = std::min(best, jsp::to_schedule(s).makespan);
      return;
    }
    const Mask mask = jsp::feasible_mask(s, inst);
    std::vector<int> jobs;
    for (int j = 0; j < inst.n_jobs; ++j)
      if (mask[j]) jobs.push_back(j);
    const unsigned subsets = 1u << jobs.size();
    for (unsigned bits = 0; bits < subsets; ++bits) {
      if (bits == 0 && (jsp::is_idle(s) || jobs.empty())) {
        if (jobs.empty()) dfs(jsp::step(s, jsp::Action(inst.n_jobs, 0), inst));
        continue;
      }
      jsp::Action a(inst.n_jobs, 0);
      for (std::size_t r = 0; r < jobs.size(); ++r) a[jobs[r]] = bits >> r & 1;
      dfs(jsp::step(s, a, inst));
    }
  };
  dfs(jsp::reset(inst));
  return best;
}

long long multinomial_sequences(int n, int m) {
  long long v = 1;
  int placed = 0;
  for (int j = 0; j < n; ++j)
    for (int k = 1; k <= m; ++k) v = v * ++placed / k;
  return v;
}

}  // namespace

TEST(Dispatch, RuleNames) {
  EXPECT_EQ(parse_rule("spt"), Rule::SPT);
  EXPECT_EQ(parse_rule("Lwr"), Rule::LWR);
  EXPECT_STREQ(to_string(Rule::FCFS), "FCFS");
  EXPECT_THROW(parse_rule("edd"), ValidationError);
}

TEST(Dispatch, TwoByTwoExample) {
  const auto inst = test::two_by_two();
  for (Rule r : kRules) {
    const auto s = dispatch(inst, r);
    EXPECT_EQ(s.makespan, 7) << to_string(r);
    EXPECT_NO_THROW(jsp::check_feasible(s, inst));
  }
}

TEST(Dispatch, SingleJobRulesAgree) {
  const auto inst = gen_jsp(1, 5, 1, 20, 3);
  const auto ref = dispatch(inst, Rule::SPT);
  for (Rule r : kRules) EXPECT_EQ(dispatch(inst, r), ref);
  int total = 0;
  for (int op = 0; op < 5; ++op) total += inst.duration(0, op);
  EXPECT_EQ(ref.makespan, total);
}

TEST(Dispatch, SingleMachineOrders) {
  // Four one-operation jobs on one machine.
  const auto inst = parse_orlib("4 1\n0 5\n0 2\n0 9\n0 2\n");
  auto order = [&](Rule r) {
    const auto s = dispatch(inst, r);
    std::vector<int> jobs = {0, 1, 2, 3};
    std::sort(jobs.begin(), jobs.end(), [&](int a, int b) { return s.start(a, 0) < s.start(b, 0); });
    return jobs;
  };
  EXPECT_EQ(order(Rule::SPT), (std::vector<int>{1, 3, 0, 2}));
  EXPECT_EQ(order(Rule::LPT), (std::vector<int>{2, 0, 1, 3}));
  EXPECT_EQ(order(Rule::FCFS), (std::vector<int>{0, 1, 2, 3}));
  EXPECT_EQ(order(Rule::LWR), (std::vector<int>{1, 3, 0, 2}));
  EXPECT_EQ(dispatch(inst, Rule::SPT).makespan, 18);
}

TEST(Dispatch, LwrUsesRemainingWork) {
  // Both jobs want M0 first; job 1 has less work left overall, job 0 the
  // shorter current operation.
  const auto inst = parse_orlib("2 2\n0 2 1 9\n0 3 1 1\n");
  EXPECT_EQ(dispatch(inst, Rule::SPT).start(0, 0), 0);
  EXPECT_EQ(dispatch(inst, Rule::LWR).start(1, 0), 0);
}

TEST(Dispatch, ResultsAreFeasible) {
  for (int k = 0; k < 30; ++k) {
    const auto inst = gen_jsp(2 + k % 5, 2 + k % 4, 1, 99, 500 + k);
    for (Rule r : kRules) EXPECT_NO_THROW(jsp::check_feasible(dispatch(inst, r), inst));
  }
}

TEST(BruteForce, MatchesEnvironmentExhaustiveSearch) {
  const std::vector<std::pair<int, int>> sizes = {{1, 3}, {2, 2}, {2, 3}, {3, 2}, {3, 3}, {4, 2}, {2, 4}};
  for (std::size_t k = 0; k < sizes.size() * 3; ++k) {
    const auto [n, m] = sizes[k % sizes.size()];
    const auto inst = gen_jsp(n, m, 1, 9, 900 + k);
    const auto bf = brute_force(inst);
    EXPECT_EQ(bf.objective, env_exhaustive_makespan(inst)) << n << "x" << m;
    EXPECT_EQ(bf.sequences, multinomial_sequences(n, m));
    EXPECT_NO_THROW(jsp::check_feasible(bf.best, inst));
    EXPECT_GE(bf.objective, jsp::makespan_lower_bound(inst));
  }
}

TEST(BruteForce, LowerBoundsHeuristicsWithPenalty) {
  train::Objective obj{1.0, 1.0, jsp::IdleMode::machine_gap};
  for (int k = 0; k < 20; ++k) {
    const auto inst = gen_jsp(3, 3, 1, 20, 1000 + k);
    const auto bf = brute_force(inst, obj);
    EXPECT_DOUBLE_EQ(bf.objective, train::score(bf.best, inst, obj).objective(1.0));
    for (Rule r : kRules) EXPECT_LE(bf.objective, train::score(dispatch(inst, r), inst, obj).objective(1.0));
  }
  EXPECT_THROW(brute_force(gen_jsp(2, 5, 1, 9, 0)), ValidationError);
}

TEST(BruteForce, VrapMatchesHostVectorEnumeration) {
  train::Objective obj{1.0};
  for (int k = 0; k < 20; ++k) {
    const auto inst = gen_vrap(1 + k % 4, 3, 1 + k % 4, 2000 + k);
    const auto bf = brute_force(inst, obj);
    const int n = inst.n_hosts(), len = inst.chain_length();
    double best = vrap::infeasible_sentinel(inst, obj.lambda, obj.sentinel_factor);
    long long feasible = 0;
    std::vector<int> hosts(len, 0);
    long long total = 1;
    for (int p = 0; p < len; ++p) total *= n;
    for (long long code = 0; code < total; ++code) {
      long long c = code;
      for (int p = 0; p < len; ++p) hosts[p] = static_cast<int>(c % n), c /= n;
      const auto pl = vrap::evaluate_hosts(hosts, inst);
      if (!pl.feasible) continue;
      ++feasible;
      best = std::min(best, vrap::objective(pl, inst, obj.lambda));
    }
    EXPECT_EQ(bf.placements, feasible);
    EXPECT_NEAR(bf.objective, best, 1e-9);
    EXPECT_EQ(bf.best.feasible, feasible > 0);
  }
}

TEST(BruteForce, VrapSizeLimit) {
  EXPECT_THROW(brute_force(gen_vrap(20, 3, 5, 0)), ValidationError);
}

TEST(Ga, ConfigValidation) {
  GaConfig c;
  EXPECT_NO_THROW(c.validate());
  c.population = 1;
  c.crossover_rate = 2;
  EXPECT_THROW(c.validate(), ValidationError);
}

TEST(Ga, HistoryIsMonotoneAndResultFeasible) {
  GaConfig cfg;
  cfg.population = 40;
  cfg.generations = 30;
  cfg.seed = 5;
  const auto inst = gen_jsp(5, 4, 1, 50, 7);
  const auto r = ga_jsp(inst, cfg);
  ASSERT_EQ(r.history.size(), 31u);
  for (std::size_t k = 1; k < r.history.size(); ++k) EXPECT_LE(r.history[k], r.history[k - 1]);
  EXPECT_EQ(r.objective, r.history.back());
  EXPECT_EQ(r.objective, r.best.makespan);
  EXPECT_NO_THROW(jsp::check_feasible(r.best, inst));
}

TEST(Ga, ZeroGenerationsReturnsBestInitial) {
  GaConfig cfg;
  cfg.population = 20;
  cfg.generations = 0;
  const auto r = ga_jsp(gen_jsp(3, 3, 1, 20, 1), cfg);
  EXPECT_EQ(r.history.size(), 1u);
  EXPECT_EQ(r.history[0], r.objective);
}

TEST(Ga, DeterministicAndSerialEqualsParallel) {
  GaConfig cfg;
  cfg.population = 30;
  cfg.generations = 20;
  cfg.seed = 9;
  const auto inst = gen_jsp(4, 4, 1, 30, 11);
  const auto vinst = gen_vrap(4, 4, 4, 12);
  const int saved = omp_get_max_threads();
  omp_set_num_threads(3);
  const auto a = ga_jsp(inst, cfg, {}, Exec::parallel);
  const auto b = ga_jsp(inst, cfg, {}, Exec::serial);
  const auto va = ga_vrap(vinst, cfg, {1.0}, Exec::parallel);
  const auto vb = ga_vrap(vinst, cfg, {1.0}, Exec::serial);
  omp_set_num_threads(saved);
  EXPECT_EQ(a.best, b.best);
  EXPECT_EQ(a.history, b.history);
  EXPECT_EQ(va.best, vb.best);
  EXPECT_EQ(va.history, vb.history);
  cfg.seed = 10;
  EXPECT_EQ(ga_jsp(inst, cfg).history.size(), a.history.size());
}

TEST(Ga, ReachesSmallOptima) {
  GaConfig cfg;
  cfg.population = 60;
  cfg.generations = 60;
  int hits = 0;
  for (int k = 0; k < 10; ++k) {
    const auto inst = gen_jsp(3, 3, 1, 20, 3000 + k);
    cfg.seed = k;
    const auto r = ga_jsp(inst, cfg);
    const auto bf = brute_force(inst);
    EXPECT_GE(r.objective, bf.objective);
    hits += r.objective == bf.objective;
  }
  EXPECT_GE(hits, 9);
}

TEST(Ga, VrapNeverBeatsBruteForce) {
  GaConfig cfg;
  cfg.population = 30;
  cfg.generations = 20;
  train::Objective obj{1.0};
  for (int k = 0; k < 10; ++k) {
    const auto inst = gen_vrap(4, 4, 4, 4000 + k);
    cfg.seed = k;
    const auto r = ga_vrap(inst, cfg, obj);
    const auto bf = brute_force(inst, obj);
    EXPECT_GE(r.objective, bf.objective - 1e-9);
    for (std::size_t g = 1; g < r.history.size(); ++g) EXPECT_LE(r.history[g], r.history[g - 1]);
    if (r.best.feasible) {
      EXPECT_EQ(r.best, vrap::evaluate_hosts(r.best.hosts, inst));
    }
  }
}
