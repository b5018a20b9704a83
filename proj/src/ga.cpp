#include <algorithm>
#include <exception>
#include <numeric>

#include "ccorl/baselines.hpp"

namespace ccorl::baselines {

void GaConfig::validate() const {
  std::vector<std::string> errors;
  if (population < 2) errors.push_back("population must be >= 2");
  if (!(crossover_rate >= 0 && crossover_rate <= 1)) errors.push_back("crossover_rate must lie in [0, 1]");
  if (!(mutation_rate >= 0 && mutation_rate <= 1)) errors.push_back("mutation_rate must lie in [0, 1]");
  if (generations < 0) errors.push_back("generations must be >= 0");
  if (tournament < 1) errors.push_back("tournament must be >= 1");
  if (errors.empty()) return;
  std::string msg = "invalid GA configuration:";
  for (const auto& e : errors) msg += "\n  " + e;
  throw ValidationError(msg);
}

namespace {

using Genome = std::vector<int>;

// Generational loop shared by both problems. `evaluate` must be thread-safe;
// all random draws happen on the calling thread.
template <class Problem>
GaResult<typename Problem::Solution> evolve(const Problem& prob, const GaConfig& cfg, Exec exec) {
  cfg.validate();
  Rng rng(cfg.seed);
  const int P = cfg.population;
  std::vector<Genome> pop(P);
  for (auto& g : pop) g = prob.random_genome(rng);
  std::vector<double> fit(P);
  std::vector<typename Problem::Solution> sols(P);

  auto evaluate_all = [&]() {
    std::vector<std::exception_ptr> errors(P);
#pragma omp parallel for schedule(static) if (exec == Exec::parallel)
    for (int i = 0; i < P; ++i) {
      try {
        sols[i] = prob.decode(pop[i]);
        fit[i] = prob.objective(sols[i]);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
    for (auto& e : errors)
      if (e) std::rethrow_exception(e);
  };
  auto best_index = [&]() { return static_cast<int>(std::min_element(fit.begin(), fit.end()) - fit.begin()); };
  auto tournament = [&]() {
    int best = static_cast<int>(rng.uniform_int(0, P - 1));
    for (int k = 1; k < cfg.tournament; ++k) {
      const int c = static_cast<int>(rng.uniform_int(0, P - 1));
      if (fit[c] < fit[best]) best = c;
    }
    return best;
  };

  evaluate_all();
  GaResult<typename Problem::Solution> res;
  res.history.push_back(fit[best_index()]);
  for (int gen = 0; gen < cfg.generations; ++gen) {
    std::vector<Genome> next;
    next.reserve(P);
    next.push_back(pop[best_index()]);
    while (static_cast<int>(next.size()) < P) {
      Genome a = pop[tournament()], b = pop[tournament()];
      if (rng.bernoulli(cfg.crossover_rate)) prob.crossover(a, b, rng);
      for (Genome* g : {&a, &b}) {
        if (rng.bernoulli(cfg.mutation_rate)) prob.mutate(*g, rng);
        if (static_cast<int>(next.size()) < P) next.push_back(std::move(*g));
      }
    }
    pop = std::move(next);
    evaluate_all();
    res.history.push_back(fit[best_index()]);
  }
  const int b = best_index();
  res.best = sols[b];
  res.objective = fit[b];
  return res;
}

struct JspProblem {
  using Solution = jsp::Schedule;
  const JspInstance& inst;
  train::Objective obj;

  Genome random_genome(Rng& rng) const {
    Genome g;
    g.reserve(inst.num_ops());
    for (int i = 0; i < inst.n_jobs; ++i)
      for (int j = 0; j < inst.n_machines; ++j) g.push_back(i);
    rng.shuffle(g.begin(), g.end());
    return g;
  }

  Solution decode(const Genome& g) const { return jsp::decode_sequence(inst, g); }
  double objective(const Solution& s) const { return train::score(s, inst, obj).objective(obj.lambda); }

  // Precedence-preserving crossover: genes of a random job subset keep their
  // positions, the remaining positions are filled in the other parent's order.
  void crossover(Genome& a, Genome& b, Rng& rng) const {
    std::vector<std::uint8_t> keep(inst.n_jobs, 0);
    for (auto& k : keep) k = rng.bernoulli(0.5);
    auto child = [&](const Genome& p1, const Genome& p2) {
      Genome c(p1.size(), -1);
      for (std::size_t k = 0; k < p1.size(); ++k)
        if (keep[p1[k]]) c[k] = p1[k];
      std::size_t pos = 0;
      for (int job : p2) {
        if (keep[job]) continue;
        while (c[pos] >= 0) ++pos;
        c[pos] = job;
      }
      return c;
    };
    Genome c1 = child(a, b), c2 = child(b, a);
    a = std::move(c1);
    b = std::move(c2);
  }

  void mutate(Genome& g, Rng& rng) const {
    const auto n = static_cast<std::int64_t>(g.size());
    if (n < 2) return;
    std::swap(g[rng.uniform_int(0, n - 1)], g[rng.uniform_int(0, n - 1)]);
  }
};

struct VrapProblem {
  using Solution = vrap::Placement;
  const VrapInstance& inst;
  train::Objective obj;

  Genome random_genome(Rng& rng) const {
    Genome g(inst.chain_length());
    for (auto& h : g) h = static_cast<int>(rng.uniform_int(0, inst.n_hosts() - 1));
    return g;
  }

  Solution decode(const Genome& g) const { return vrap::evaluate_hosts(g, inst); }
  double objective(const Solution& s) const { return train::score(s, inst, obj).objective(obj.lambda); }

  void crossover(Genome& a, Genome& b, Rng& rng) const {
    const auto n = static_cast<std::int64_t>(a.size());
    if (n < 2) return;
    const auto cut = rng.uniform_int(1, n - 1);
    std::swap_ranges(a.begin() + cut, a.end(), b.begin() + cut);
  }

  void mutate(Genome& g, Rng& rng) const {
    g[rng.uniform_int(0, static_cast<std::int64_t>(g.size()) - 1)] =
        static_cast<int>(rng.uniform_int(0, inst.n_hosts() - 1));
  }
};

}  // namespace

GaResult<jsp::Schedule> ga_jsp(const JspInstance& inst, const GaConfig& cfg, const train::Objective& obj, Exec exec) {
  inst.validate();
  return evolve(JspProblem{inst, obj}, cfg, exec);
}

GaResult<vrap::Placement> ga_vrap(const VrapInstance& inst, const GaConfig& cfg, const train::Objective& obj,
                                  Exec exec) {
  inst.validate();
  return evolve(VrapProblem{inst, obj}, cfg, exec);
}

}  // namespace ccorl::baselines
