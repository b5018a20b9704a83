#include <charconv>
#include <chrono>
#include <cstdio>
#include <exception>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>

#include <CLI11.hpp>

#include "ccorl/baselines.hpp"
#include "ccorl/cli.hpp"
#include "ccorl/instances.hpp"
#include "ccorl/nn/checkpoint.hpp"

namespace ccorl::cli {

namespace fs = std::filesystem;

namespace {

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw IoError("cannot create directory '" + dir.string() + "'");
}

void append_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::app);
  if (!out) throw IoError("cannot open '" + path + "' for appending");
  out << text;
  if (!out) throw IoError("error while writing '" + path + "'");
}

Problem detect_problem(const fs::path& path) {
  const std::string text = read_file(path.string());
  return text.rfind("vrap-v1", 0) == 0 ? Problem::vrap : Problem::jsp;
}

std::string epoch_suffix(int epoch) {
  char buf[16];
  std::snprintf(buf, sizeof buf, ".e%04d", epoch);
  return buf;
}

struct Model {
  ModelManifest manifest;
  std::unique_ptr<policy::JspPolicyNet> jsp;
  std::unique_ptr<policy::VrapPolicyNet> vrap;

  nn::ParamStore& params() { return jsp ? jsp->params() : vrap->params(); }
};

Model build_model(const ModelManifest& m) {
  Model model;
  model.manifest = m;
  if (m.problem == Problem::jsp)
    model.jsp = std::make_unique<policy::JspPolicyNet>(m.n_jobs, m.n_machines, m.dur_norm, m.net, m.seed);
  else
    model.vrap = std::make_unique<policy::VrapPolicyNet>(m.vrap_norm, m.net, m.seed);
  return model;
}

Model load_model(const std::string& path) {
  Model model = build_model(parse_manifest(read_file(manifest_path(path)), manifest_path(path)));
  nn::assign_params(model.params(), nn::load_checkpoint(path));
  return model;
}

train::Objective resolve_objective(train::Objective base, std::optional<double> lambda, std::optional<double> t_th,
                                   const std::string& idle_mode) {
  if (lambda) base.lambda = *lambda;
  if (t_th) base.t_th = *t_th;
  if (!idle_mode.empty()) base.idle_mode = jsp::parse_idle_mode(idle_mode);
  if (!(base.lambda >= 0)) throw ValidationError("lambda must be >= 0");
  return base;
}

template <class Net>
void train_loop(Net& net, const RunConfig& cfg, train::Trainer<Net>& trainer, const ModelManifest& base,
                const TrainOptions& opt) {
  const std::string stats = opt.out + ".stats.csv";
  auto save = [&](const std::string& path) {
    nn::save_checkpoint(path, trainer.snapshot());
    ModelManifest m = base;
    m.epochs_done = trainer.epoch();
    write_file(manifest_path(path), write_manifest(m));
  };
  if (trainer.epoch() == 0) {
    write_file(stats, std::string(train::kStatsHeader) + "\n");
    save(opt.out + epoch_suffix(0));
  } else if (!fs::exists(stats)) {
    write_file(stats, std::string(train::kStatsHeader) + "\n");
  }
  while (trainer.epoch() < cfg.train.epochs) {
    const auto st = trainer.run_epoch(Exec::parallel);
    append_file(stats, train::stats_csv_row(st) + "\n");
    if (!opt.quiet)
      std::fprintf(stderr, "epoch %d  mean_L %.3f  std_L %.3f  penalty %.3f  grad %.3f  %.2fs\n", st.epoch, st.mean_L,
                   st.std_L, st.mean_penalty, st.grad_norm, st.seconds);
    if (cfg.checkpoint_every > 0 && trainer.epoch() % cfg.checkpoint_every == 0)
      save(opt.out + epoch_suffix(trainer.epoch()));
  }
  save(opt.out);
  (void)net;
}

template <class Net>
void run_training(Net& net, const RunConfig& cfg, const ModelManifest& manifest, const TrainOptions& opt,
                  std::vector<typename Net::Instance> pool, typename train::Trainer<Net>::Generator gen) {
  auto trainer = cfg.train.dataset == train::DatasetMode::fixed
                     ? train::Trainer<Net>(net, cfg.train, std::move(pool))
                     : train::Trainer<Net>(net, cfg.train, std::move(gen));
  if (!opt.resume.empty()) {
    const ModelManifest prev = parse_manifest(read_file(manifest_path(opt.resume)), manifest_path(opt.resume));
    if (prev.problem != manifest.problem || prev.n_jobs != manifest.n_jobs || prev.n_machines != manifest.n_machines)
      throw ValidationError("checkpoint '" + opt.resume + "' was trained for a different problem size");
    trainer.restore(nn::load_checkpoint(opt.resume));
  }
  train_loop(net, cfg, trainer, manifest, opt);
}

std::string solve_summary_jsp(const std::string& method, const jsp::Schedule& s, const JspInstance& inst,
                              const train::Objective& obj) {
  const auto sc = train::score(s, inst, obj);
  std::ostringstream out;
  out << "problem jsp\nmethod " << method << "\nobjective " << format_double(sc.objective(obj.lambda))
      << "\nmakespan " << s.makespan << "\nidle_excess " << format_double(sc.excess) << "\npenalty "
      << format_double(obj.lambda * sc.excess) << "\n";
  return out.str();
}

std::string solve_summary_vrap(const std::string& method, const vrap::Placement& p, const VrapInstance& inst,
                               const train::Objective& obj) {
  const auto sc = train::score(p, inst, obj);
  std::ostringstream out;
  out << "problem vrap\nmethod " << method << "\nobjective " << format_double(sc.objective(obj.lambda))
      << "\nfeasible " << (p.feasible ? 1 : 0) << "\nenergy " << format_double(p.energy) << "\nlatency "
      << format_double(p.latency_total) << "\nlatency_excess " << format_double(sc.excess) << "\npenalty "
      << format_double(obj.lambda * sc.excess) << "\n";
  return out.str();
}

jsp::Schedule solve_jsp(const std::string& method, const JspInstance& inst, Model* model, const Decoding& dec,
                        const Rng& rng, const train::Objective& obj, const baselines::GaConfig& ga, Exec exec) {
  if (method == "rl") {
    if (!model || !model->jsp) throw ValidationError("method rl needs a JSP model");
    model->jsp->check_compatible(inst);
    if (dec.mode == policy::Decode::greedy) return train::greedy_decode(*model->jsp, inst);
    return train::sample_decode(*model->jsp, inst, dec.samples, rng, obj).best;
  }
  if (method == "ga") return baselines::ga_jsp(inst, ga, obj, exec).best;
  if (method == "brute") return baselines::brute_force(inst, obj).best;
  return baselines::dispatch(inst, baselines::parse_rule(method));
}

vrap::Placement solve_vrap(const std::string& method, const VrapInstance& inst, Model* model, const Decoding& dec,
                           const Rng& rng, const train::Objective& obj, const baselines::GaConfig& ga, Exec exec) {
  if (method == "rl") {
    if (!model || !model->vrap) throw ValidationError("method rl needs a VRAP model");
    if (dec.mode == policy::Decode::greedy) return train::greedy_decode(*model->vrap, inst);
    return train::sample_decode(*model->vrap, inst, dec.samples, rng, obj).best;
  }
  if (method == "ga") return baselines::ga_vrap(inst, ga, obj, exec).best;
  if (method == "brute") return baselines::brute_force(inst, obj).best;
  throw ValidationError("method '" + method + "' is not available for VRAP");
}

// Bench method token -> (solver method, decoding).
std::pair<std::string, Decoding> split_method(const std::string& token) {
  if (token == "rl_greedy") return {"rl", {}};
  if (token.rfind("rl_sample:", 0) == 0) return {"rl", parse_decoding(token.substr(3))};
  if (token == "ga" || token == "brute") return {token, {}};
  baselines::parse_rule(token);
  return {token, {}};
}

}  // namespace

std::vector<fs::path> cmd_gen(const GenOptions& opt) {
  if (opt.count < 0) throw ValidationError("count must be >= 0");
  if (opt.out_dir.empty()) throw ValidationError("an output directory is required");
  ensure_dir(opt.out_dir);
  std::vector<fs::path> files;
  for (int i = 0; i < opt.count; ++i) {
    const auto seed = dataset_instance_seed(opt.seed, i);
    const fs::path path = opt.out_dir / dataset_file_name(opt.problem, i);
    if (opt.problem == Problem::jsp)
      write_file(path.string(), write_orlib(gen_jsp(opt.n_jobs, opt.n_machines, opt.dur_lo, opt.dur_hi, seed)));
    else
      write_file(path.string(), write_vrap(gen_vrap(opt.n_hosts, opt.catalog_size, opt.chain_len, seed)));
    files.push_back(path);
  }
  KeyValues kv{{"problem", to_string(opt.problem)}, {"count", std::to_string(opt.count)},
               {"seed", std::to_string(opt.seed)}};
  if (opt.problem == Problem::jsp) {
    kv["n_jobs"] = std::to_string(opt.n_jobs);
    kv["n_machines"] = std::to_string(opt.n_machines);
    kv["dur_lo"] = std::to_string(opt.dur_lo);
    kv["dur_hi"] = std::to_string(opt.dur_hi);
  } else {
    kv["n_hosts"] = std::to_string(opt.n_hosts);
    kv["catalog_size"] = std::to_string(opt.catalog_size);
    kv["chain_len"] = std::to_string(opt.chain_len);
  }
  write_file((opt.out_dir / "manifest.txt").string(), write_key_values(kv));
  return files;
}

void cmd_train(const TrainOptions& opt) {
  if (opt.out.empty()) throw ValidationError("an output checkpoint path is required");
  RunConfig cfg = parse_run_config(read_file(opt.config_path), opt.config_path);
  if (opt.seed) cfg.train.seed = *opt.seed;
  if (opt.lambda) cfg.train.objective.lambda = *opt.lambda;
  if (opt.t_th) cfg.train.objective.t_th = *opt.t_th;
  if (opt.epochs) cfg.train.epochs = *opt.epochs;
  cfg.validate();

  ModelManifest m;
  m.problem = cfg.problem;
  m.net = cfg.net;
  m.objective = cfg.train.objective;
  m.seed = cfg.train.seed;
  const std::uint64_t pool_seed = mix64(cfg.train.seed ^ 0x706f6f6cULL);
  if (cfg.problem == Problem::jsp) {
    m.n_jobs = cfg.n_jobs;
    m.n_machines = cfg.n_machines;
    m.dur_norm = cfg.dur_hi;
    policy::JspPolicyNet net(m.n_jobs, m.n_machines, m.dur_norm, m.net, m.seed);
    std::vector<JspInstance> pool;
    if (cfg.train.dataset == train::DatasetMode::fixed) {
      if (!cfg.dataset_dir.empty()) {
        for (const auto& f : list_dataset(cfg.dataset_dir)) pool.push_back(load_jsp(f));
        for (const auto& inst : pool) net.check_compatible(inst);
      } else {
        for (int i = 0; i < cfg.dataset_size; ++i)
          pool.push_back(gen_jsp(cfg.n_jobs, cfg.n_machines, cfg.dur_lo, cfg.dur_hi, dataset_instance_seed(pool_seed, i)));
      }
    }
    auto gen = [cfg](std::uint64_t seed) { return gen_jsp(cfg.n_jobs, cfg.n_machines, cfg.dur_lo, cfg.dur_hi, seed); };
    run_training(net, cfg, m, opt, std::move(pool), gen);
  } else {
    policy::VrapPolicyNet net(m.vrap_norm, m.net, m.seed);
    std::vector<VrapInstance> pool;
    if (cfg.train.dataset == train::DatasetMode::fixed) {
      if (!cfg.dataset_dir.empty()) {
        for (const auto& f : list_dataset(cfg.dataset_dir)) pool.push_back(load_vrap(f));
      } else {
        for (int i = 0; i < cfg.dataset_size; ++i)
          pool.push_back(gen_vrap(cfg.n_hosts, cfg.catalog_size, cfg.chain_len, dataset_instance_seed(pool_seed, i)));
      }
    }
    auto gen = [cfg](std::uint64_t seed) { return gen_vrap(cfg.n_hosts, cfg.catalog_size, cfg.chain_len, seed); };
    run_training(net, cfg, m, opt, std::move(pool), gen);
  }
}

Decoding parse_decoding(std::string_view text) {
  if (text == "greedy") return {};
  if (text.rfind("sample:", 0) == 0) {
    int n = 0;
    const auto digits = text.substr(7);
    auto [p, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), n);
    if (ec == std::errc() && p == digits.data() + digits.size() && n >= 1) return {policy::Decode::sample, n};
  }
  throw ValidationError("decode must be 'greedy' or 'sample:N' with N >= 1, got '" + std::string(text) + "'");
}

std::string cmd_solve(const SolveOptions& opt) {
  if (opt.instance.empty()) throw ValidationError("an instance file is required");
  const Decoding dec = parse_decoding(opt.decode);
  std::optional<Model> model;
  train::Objective base;
  if (opt.method == "rl") {
    if (opt.model.empty()) throw ValidationError("method rl needs --model");
    model = load_model(opt.model);
    base = model->manifest.objective;
  }
  const train::Objective obj = resolve_objective(base, opt.lambda, opt.t_th, opt.idle_mode);
  baselines::GaConfig ga;
  ga.generations = opt.ga_generations;
  ga.seed = opt.seed;
  const Rng rng(opt.seed);
  const Problem problem = detect_problem(opt.instance);
  if (model && model->manifest.problem != problem)
    throw ValidationError("model was trained for " + std::string(to_string(model->manifest.problem)) +
                          " but the instance is " + to_string(problem));
  Model* mp = model ? &*model : nullptr;
  if (problem == Problem::jsp) {
    const JspInstance inst = load_jsp(opt.instance);
    const auto sched = solve_jsp(opt.method, inst, mp, dec, rng, obj, ga, Exec::parallel);
    jsp::check_feasible(sched, inst);
    if (!opt.out.empty()) write_file(opt.out, jsp::gantt_to_text(jsp::to_gantt(sched, inst)));
    return solve_summary_jsp(opt.method, sched, inst, obj);
  }
  const VrapInstance inst = load_vrap(opt.instance);
  const auto pl = solve_vrap(opt.method, inst, mp, dec, rng, obj, ga, Exec::parallel);
  if (!opt.out.empty()) write_file(opt.out, vrap::placement_to_text(pl));
  return solve_summary_vrap(opt.method, pl, inst, obj);
}

BenchReport cmd_bench(const BenchOptions& opt) {
  if (opt.methods.empty()) throw ValidationError("at least one method is required");
  const auto files = list_dataset(opt.suite);
  if (files.empty()) throw ValidationError("suite '" + opt.suite + "' contains no instances");
  std::vector<std::pair<std::string, Decoding>> methods;
  bool needs_model = false;
  for (const auto& m : opt.methods) {
    methods.push_back(split_method(m));
    needs_model = needs_model || methods.back().first == "rl";
  }
  std::optional<Model> model;
  train::Objective base;
  if (needs_model) {
    if (opt.model.empty()) throw ValidationError("RL methods need --model");
    model = load_model(opt.model);
    base = model->manifest.objective;
  }
  const train::Objective obj = resolve_objective(base, opt.lambda, opt.t_th, opt.idle_mode);
  const Problem problem = detect_problem(files.front());
  if (model && model->manifest.problem != problem)
    throw ValidationError("model was trained for a different problem than the suite");

  std::vector<JspInstance> jsps;
  std::vector<VrapInstance> vraps;
  for (const auto& f : files) {
    if (detect_problem(f) != problem) throw ValidationError(f.string() + ": suite mixes problem types");
    if (problem == Problem::jsp)
      jsps.push_back(load_jsp(f));
    else
      vraps.push_back(load_vrap(f));
  }
  const int n = static_cast<int>(files.size());
  if (model && model->jsp)
    for (const auto& inst : jsps) model->jsp->check_compatible(inst);

  std::map<std::string, double> optima;
  if (!opt.optima.empty()) optima = parse_optima(read_file(opt.optima));
  if (opt.brute) {
    std::vector<double> best(n);
    std::vector<std::exception_ptr> errors(n);
#pragma omp parallel for schedule(dynamic, 1) if (opt.exec == Exec::parallel)
    for (int i = 0; i < n; ++i) {
      try {
        best[i] = problem == Problem::jsp ? baselines::brute_force(jsps[i], obj).objective
                                          : baselines::brute_force(vraps[i], obj).objective;
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
    for (auto& e : errors)
      if (e) std::rethrow_exception(e);
    for (int i = 0; i < n; ++i) optima[files[i].filename().string()] = best[i];
  }

  baselines::GaConfig ga;
  ga.generations = opt.ga_generations;
  ga.population = opt.ga_population;
  ga.seed = opt.seed;
  ga.validate();
  const int tasks = static_cast<int>(methods.size()) * n;
  BenchReport report;
  report.rows.resize(tasks);
  std::vector<std::exception_ptr> errors(tasks);
  Model* mp = model ? &*model : nullptr;
#pragma omp parallel for schedule(dynamic, 1) if (opt.exec == Exec::parallel)
  for (int t = 0; t < tasks; ++t) {
    try {
      const auto& [method, dec] = methods[t / n];
      const int i = t % n;
      BenchRow& row = report.rows[t];
      row.method = opt.methods[t / n];
      row.instance = files[i].filename().string();
      const Rng rng = Rng(opt.seed).split(static_cast<std::uint64_t>(i));
      train::Score sc;
      const auto t0 = std::chrono::steady_clock::now();
      if (problem == Problem::jsp) {
        const auto s = solve_jsp(method, jsps[i], mp, dec, rng, obj, ga, Exec::serial);
        row.time_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
        jsp::check_feasible(s, jsps[i]);
        sc = train::score(s, jsps[i], obj);
      } else {
        const auto p = solve_vrap(method, vraps[i], mp, dec, rng, obj, ga, Exec::serial);
        row.time_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
        sc = train::score(p, vraps[i], obj);
      }
      row.objective = sc.objective(obj.lambda);
      row.primary = sc.primary;
      row.penalty = obj.lambda * sc.excess;
      row.feasible = sc.feasible;
      if (const auto it = optima.find(row.instance); it != optima.end())
        row.gap = it->second != 0 ? (row.objective - it->second) / it->second * 100.0
                                  : (row.objective == 0 ? 0.0 : INFINITY);
    } catch (...) {
      errors[t] = std::current_exception();
    }
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  report.summary = summarize(report.rows);
  if (!opt.report.empty()) write_file(opt.report, rows_csv(report));
  if (!opt.summary.empty()) write_file(opt.summary, summary_csv(report));
  return report;
}

void cmd_gantt(const GanttOptions& opt) {
  if (opt.schedule.empty() || opt.out.empty()) throw ValidationError("gantt needs a schedule file and an output path");
  const auto doc = jsp::parse_gantt_text(read_file(opt.schedule));
  write_file(opt.out, jsp::gantt_to_svg(doc, opt.title));
}

int run(int argc, char** argv) {
  configure_threads_from_env();
  CLI::App app{"Constrained combinatorial optimisation with policy-gradient agents and classical baselines"};
  app.require_subcommand(1);

  GenOptions gen;
  std::string gen_problem = "jsp", gen_out;
  auto* g = app.add_subcommand("gen", "Generate an instance suite");
  g->add_option("--problem", gen_problem, "jsp or vrap")->capture_default_str();
  g->add_option("--jobs", gen.n_jobs, "JSP jobs")->capture_default_str();
  g->add_option("--machines", gen.n_machines, "JSP machines")->capture_default_str();
  g->add_option("--dur-lo", gen.dur_lo, "Smallest duration")->capture_default_str();
  g->add_option("--dur-hi", gen.dur_hi, "Largest duration")->capture_default_str();
  g->add_option("--hosts", gen.n_hosts, "VRAP hosts")->capture_default_str();
  g->add_option("--catalog", gen.catalog_size, "VRAP VM catalog size")->capture_default_str();
  g->add_option("--chain", gen.chain_len, "VRAP chain length")->capture_default_str();
  g->add_option("--count", gen.count, "Number of instances")->capture_default_str();
  g->add_option("--seed", gen.seed, "Generator seed")->capture_default_str();
  g->add_option("--out", gen_out, "Output directory")->required();

  TrainOptions tr;
  std::uint64_t tr_seed = 0;
  double tr_lambda = 0, tr_tth = 0;
  int tr_epochs = 0;
  auto* t = app.add_subcommand("train", "Train a policy");
  t->add_option("--config", tr.config_path, "Training configuration file")->required();
  t->add_option("--out", tr.out, "Output checkpoint path")->required();
  t->add_option("--resume", tr.resume, "Checkpoint to continue from");
  auto* t_seed = t->add_option("--seed", tr_seed, "Override the configured seed");
  auto* t_lambda = t->add_option("--lambda", tr_lambda, "Override the penalty weight");
  auto* t_tth = t->add_option("--tth", tr_tth, "Override the idle-time threshold");
  auto* t_epochs = t->add_option("--epochs", tr_epochs, "Override the total epoch count");
  t->add_flag("--quiet", tr.quiet, "No per-epoch progress");

  SolveOptions so;
  double so_lambda = 0, so_tth = 0;
  auto* s = app.add_subcommand("solve", "Solve one instance");
  s->add_option("--model", so.model, "Model checkpoint");
  s->add_option("--method", so.method, "rl, spt, lpt, fcfs, lwr, ga or brute")->capture_default_str();
  s->add_option("--instance", so.instance, "Instance file")->required();
  s->add_option("--decode", so.decode, "greedy or sample:N")->capture_default_str();
  s->add_option("--seed", so.seed, "Sampling / GA seed")->capture_default_str();
  auto* s_lambda = s->add_option("--lambda", so_lambda, "Penalty weight");
  auto* s_tth = s->add_option("--tth", so_tth, "Idle-time threshold");
  s->add_option("--idle-mode", so.idle_mode, "machine_gap or job_gap");
  s->add_option("--ga-generations", so.ga_generations, "GA generations")->capture_default_str();
  s->add_option("--out", so.out, "Solution file (gantt-v1 or placement-v1)");

  BenchOptions bo;
  std::string bo_methods;
  double bo_lambda = 0, bo_tth = 0;
  bool pretty = false;
  auto* b = app.add_subcommand("bench", "Benchmark methods over an instance suite");
  b->add_option("--suite", bo.suite, "Instance directory")->required();
  b->add_option("--methods", bo_methods, "Comma-separated: spt,lpt,fcfs,lwr,ga,rl_greedy,rl_sample:N,brute")
      ->required();
  b->add_option("--model", bo.model, "Model checkpoint for RL methods");
  auto* b_lambda = b->add_option("--lambda", bo_lambda, "Penalty weight");
  auto* b_tth = b->add_option("--tth", bo_tth, "Idle-time threshold");
  b->add_option("--idle-mode", bo.idle_mode, "machine_gap or job_gap");
  b->add_option("--seed", bo.seed, "Sampling / GA seed")->capture_default_str();
  b->add_option("--ga-generations", bo.ga_generations, "GA generations")->capture_default_str();
  b->add_option("--ga-population", bo.ga_population, "GA population")->capture_default_str();
  b->add_flag("--brute", bo.brute, "Compute exact optima for the gap column");
  b->add_option("--optima", bo.optima, "CSV of reference optima (instance,optimum)");
  b->add_option("--report", bo.report, "Per-row CSV output");
  b->add_option("--summary", bo.summary, "Summary CSV output");
  b->add_flag("--pretty", pretty, "Print an aligned table instead of CSV");

  GanttOptions go;
  auto* gt = app.add_subcommand("gantt", "Render a schedule as SVG");
  gt->add_option("--schedule", go.schedule, "gantt-v1 schedule file")->required();
  gt->add_option("--out", go.out, "SVG output path")->required();
  gt->add_option("--title", go.title, "Chart title");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (g->parsed()) {
      gen.problem = parse_problem(gen_problem);
      gen.out_dir = gen_out;
      const auto files = cmd_gen(gen);
      std::cout << "wrote " << files.size() << " instances to " << gen_out << "\n";
    } else if (t->parsed()) {
      if (*t_seed) tr.seed = tr_seed;
      if (*t_lambda) tr.lambda = tr_lambda;
      if (*t_tth) tr.t_th = tr_tth;
      if (*t_epochs) tr.epochs = tr_epochs;
      cmd_train(tr);
      std::cout << "wrote " << tr.out << "\n";
    } else if (s->parsed()) {
      if (*s_lambda) so.lambda = so_lambda;
      if (*s_tth) so.t_th = so_tth;
      std::cout << cmd_solve(so);
    } else if (b->parsed()) {
      if (*b_lambda) bo.lambda = bo_lambda;
      if (*b_tth) bo.t_th = bo_tth;
      std::stringstream ss(bo_methods);
      for (std::string m; std::getline(ss, m, ',');)
        if (!m.empty()) bo.methods.push_back(m);
      const auto report = cmd_bench(bo);
      std::cout << (pretty ? summary_pretty(report) : summary_csv(report));
    } else if (gt->parsed()) {
      cmd_gantt(go);
      std::cout << "wrote " << go.out << "\n";
    }
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace ccorl::cli
