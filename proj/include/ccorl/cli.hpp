#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ccorl/policy.hpp"
#include "ccorl/trainer.hpp"

namespace ccorl::cli {

enum class Problem { jsp, vrap };
Problem parse_problem(std::string_view name);
const char* to_string(Problem p);

// "key = value" lines; '#' starts a comment. Duplicate keys are errors.
using KeyValues = std::map<std::string, std::string>;
KeyValues parse_key_values(std::string_view text, const std::string& origin);
std::string write_key_values(const KeyValues& kv);

// Training run description read from a config file.
struct RunConfig {
  Problem problem = Problem::jsp;
  int n_jobs = 6, n_machines = 6, dur_lo = 1, dur_hi = 99;
  int n_hosts = 4, catalog_size = 8, chain_len = 4;
  policy::NetConfig net;
  train::TrainConfig train;
  int dataset_size = 1000;  // fixed mode, generated pool
  std::string dataset_dir;  // fixed mode, pool loaded from a directory instead
  int checkpoint_every = 0;  // 0: only the epoch-0 and final checkpoints

  void validate() const;
};

// Unknown keys and bad values are all reported in one ValidationError.
RunConfig parse_run_config(std::string_view text, const std::string& origin = "config");

// Sidecar written next to each checkpoint; tells solve/bench which network
// to rebuild and which instances it accepts.
struct ModelManifest {
  Problem problem = Problem::jsp;
  int n_jobs = 0, n_machines = 0;
  double dur_norm = 99;
  policy::VrapNorm vrap_norm;
  policy::NetConfig net;
  train::Objective objective;
  int epochs_done = 0;
  std::uint64_t seed = 0;
};

std::string write_manifest(const ModelManifest& m);
ModelManifest parse_manifest(std::string_view text, const std::string& origin = "manifest");
std::string manifest_path(const std::string& checkpoint);

// Seed of instance `index` in a dataset generated from `seed`.
std::uint64_t dataset_instance_seed(std::uint64_t seed, int index);
std::string dataset_file_name(Problem p, int index);

struct GenOptions {
  Problem problem = Problem::jsp;
  int n_jobs = 6, n_machines = 6, dur_lo = 1, dur_hi = 99;
  int n_hosts = 4, catalog_size = 8, chain_len = 4;
  int count = 50;
  std::uint64_t seed = 0;
  std::filesystem::path out_dir;
};
// Writes the instances and a manifest.txt; returns the instance paths.
std::vector<std::filesystem::path> cmd_gen(const GenOptions& opt);

struct TrainOptions {
  std::string config_path;
  std::string out;
  std::string resume;
  std::optional<std::uint64_t> seed;
  std::optional<double> lambda, t_th;
  std::optional<int> epochs;
  bool quiet = false;
};
void cmd_train(const TrainOptions& opt);

struct Decoding {
  policy::Decode mode = policy::Decode::greedy;
  int samples = 1;
};
Decoding parse_decoding(std::string_view text);  // "greedy" or "sample:N"

struct SolveOptions {
  std::string model;       // required for method rl
  std::string method = "rl";  // rl, spt, lpt, fcfs, lwr, ga, brute
  std::string instance;
  std::string decode = "greedy";
  std::uint64_t seed = 0;
  std::optional<double> lambda, t_th;
  std::string idle_mode;
  int ga_generations = 500;
  std::string out;
};
// Returns the printed objective summary.
std::string cmd_solve(const SolveOptions& opt);

struct BenchRow {
  std::string method;
  std::string instance;
  double objective = 0;
  double primary = 0;
  double penalty = 0;
  bool feasible = true;
  double time_ms = 0;
  std::optional<double> gap;  // percent above the supplied optimum
};

struct BenchSummary {
  std::string method;
  int count = 0;
  double mean = 0, std = 0;  // objective; sample standard deviation
  double mean_time_ms = 0;
  std::optional<double> mean_gap;
};

struct BenchReport {
  std::vector<BenchRow> rows;
  std::vector<BenchSummary> summary;
};

std::vector<BenchSummary> summarize(const std::vector<BenchRow>& rows);
std::string rows_csv(const BenchReport& r);
std::string summary_csv(const BenchReport& r);
std::string summary_pretty(const BenchReport& r);

// "instance,optimum" CSV.
std::map<std::string, double> parse_optima(std::string_view text);

struct BenchOptions {
  std::string suite;
  std::vector<std::string> methods;  // spt lpt fcfs lwr ga rl_greedy rl_sample:N brute
  std::string model;
  std::optional<double> lambda, t_th;
  std::string idle_mode;
  std::uint64_t seed = 0;
  int ga_generations = 500;
  int ga_population = 300;
  bool brute = false;
  std::string optima;
  std::string report;   // rows CSV
  std::string summary;  // summary CSV
  Exec exec = Exec::parallel;
};
BenchReport cmd_bench(const BenchOptions& opt);

struct GanttOptions {
  std::string schedule;
  std::string out;
  std::string title;
};
void cmd_gantt(const GanttOptions& opt);

// Full command-line entry point; returns the process exit code.
int run(int argc, char** argv);

}  // namespace ccorl::cli
