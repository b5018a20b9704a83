#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace ccorl {

// Static JSP definition. Operation j of job i runs on machine(i, j) for
// duration(i, j) time units. Matrices are stored row-major by job.
struct JspInstance {
  int n_jobs = 0;
  int n_machines = 0;
  std::vector<int> machines;
  std::vector<int> durations;

  int machine(int job, int op) const { return machines[job * n_machines + op]; }
  int duration(int job, int op) const { return durations[job * n_machines + op]; }
  int num_ops() const { return n_jobs * n_machines; }
  int total_work(int job) const;
  int max_duration() const;

  // Throws ValidationError when an invariant does not hold.
  void validate() const;

  bool operator==(const JspInstance&) const = default;
};

// OR-Library layout: "n m" heading, then one line per job listing
// (machine, duration) pairs. Lines starting with '#' are comments.
JspInstance parse_orlib(std::string_view text);
std::string write_orlib(const JspInstance& inst);

JspInstance gen_jsp(int n_jobs, int n_machines, int dur_lo, int dur_hi, std::uint64_t seed);

struct Host {
  double cpu_capacity = 0;
  double bw_capacity = 0;
  double link_latency = 0;
  bool operator==(const Host&) const = default;
};

struct VmType {
  double cpu = 0;
  double bw = 0;
  double compute_latency = 0;
  bool operator==(const VmType&) const = default;
};

struct EnergyWeights {
  double w_min = 0;
  double w_cpu = 0;
  double w_net = 0;
  bool operator==(const EnergyWeights&) const = default;
};

// Fraction of a host's capacity already in use before placement.
struct Occupancy {
  double cpu = 0;
  double bw = 0;
  bool operator==(const Occupancy&) const = default;
};

struct VrapInstance {
  std::vector<Host> hosts;
  std::vector<VmType> vm_catalog;
  std::vector<int> chain;  // indices into vm_catalog, in flow order
  double latency_threshold = 0;
  EnergyWeights energy;
  std::vector<Occupancy> initial_occupancy;  // one per host

  int n_hosts() const { return static_cast<int>(hosts.size()); }
  int chain_length() const { return static_cast<int>(chain.size()); }
  const VmType& vm_at(int position) const { return vm_catalog[chain[position]]; }

  void validate() const;

  bool operator==(const VrapInstance&) const = default;
};

// Generator ranges. Integer-valued quantities are drawn uniformly from the
// inclusive integer range; occupancy fractions uniformly from [0, occupancy_hi).
struct VrapGenParams {
  int host_cpu_lo = 16, host_cpu_hi = 64;
  int host_bw_lo = 100, host_bw_hi = 400;
  int host_lat_lo = 1, host_lat_hi = 10;
  int vm_cpu_lo = 2, vm_cpu_hi = 16;
  int vm_bw_lo = 10, vm_bw_hi = 100;
  int vm_lat_lo = 1, vm_lat_hi = 10;
  double occupancy_hi = 0.5;
  double latency_per_vm = 10.0;  // L_th = latency_per_vm * chain_len
  EnergyWeights energy{10.0, 1.0, 0.1};
};

VrapInstance gen_vrap(int n_hosts, int catalog_size, int chain_len, std::uint64_t seed,
                      const VrapGenParams& params = {});

// "vrap-v1" key-value document; floating values use shortest round-trip form.
VrapInstance parse_vrap(std::string_view text);
std::string write_vrap(const VrapInstance& inst);

JspInstance load_jsp(const std::filesystem::path& path);
VrapInstance load_vrap(const std::filesystem::path& path);

// Regular files of a dataset directory in lexicographic order, skipping
// the generator manifest.
std::vector<std::filesystem::path> list_dataset(const std::filesystem::path& dir);

// Shortest decimal form that parses back to the same double.
std::string format_double(double v);
double parse_double(std::string_view token);

}  // namespace ccorl
