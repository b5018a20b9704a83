#include "ccorl/instances.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <sstream>

#include "ccorl/common.hpp"
#include "ccorl/rng.hpp"

namespace ccorl {

namespace {

struct Line {
  int number;
  std::vector<std::string_view> tokens;
};

// Splits into non-empty, non-comment lines of whitespace-separated tokens.
std::vector<Line> tokenize(std::string_view text) {
  std::vector<Line> lines;
  int number = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view raw = text.substr(pos, end - pos);
    ++number;
    pos = end + 1;
    Line line{number, {}};
    std::size_t i = 0;
    while (i < raw.size()) {
      while (i < raw.size() && std::isspace(static_cast<unsigned char>(raw[i]))) ++i;
      std::size_t j = i;
      while (j < raw.size() && !std::isspace(static_cast<unsigned char>(raw[j]))) ++j;
      if (j > i) line.tokens.push_back(raw.substr(i, j - i));
      i = j;
    }
    if (!line.tokens.empty() && line.tokens[0].front() != '#') lines.push_back(std::move(line));
    if (end == text.size()) break;
  }
  return lines;
}

[[noreturn]] void fail_at(int line, const std::string& what) {
  throw ValidationError("line " + std::to_string(line) + ": " + what);
}

bool parse_int(std::string_view tok, int& out) {
  auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), out);
  return ec == std::errc() && p == tok.data() + tok.size();
}

int int_at(const Line& line, std::size_t idx, const char* what) {
  int v = 0;
  if (!parse_int(line.tokens[idx], v))
    fail_at(line.number, std::string("expected integer ") + what + ", got '" +
                             std::string(line.tokens[idx]) + "'");
  return v;
}

double double_at(const Line& line, std::size_t idx) {
  try {
    return parse_double(line.tokens[idx]);
  } catch (const ValidationError& e) {
    fail_at(line.number, e.what());
  }
}

bool is_permutation_row(const int* row, int m) {
  std::vector<char> seen(m, 0);
  for (int j = 0; j < m; ++j) {
    if (row[j] < 0 || row[j] >= m || seen[row[j]]) return false;
    seen[row[j]] = 1;
  }
  return true;
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, p);
}

double parse_double(std::string_view tok) {
  double v = 0;
  auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || p != tok.data() + tok.size())
    throw ValidationError("expected number, got '" + std::string(tok) + "'");
  return v;
}

int JspInstance::total_work(int job) const {
  int sum = 0;
  for (int j = 0; j < n_machines; ++j) sum += duration(job, j);
  return sum;
}

int JspInstance::max_duration() const {
  return durations.empty() ? 0 : *std::max_element(durations.begin(), durations.end());
}

void JspInstance::validate() const {
  if (n_jobs < 1 || n_machines < 1) throw ValidationError("instance needs at least one job and one machine");
  const auto cells = static_cast<std::size_t>(n_jobs) * n_machines;
  if (machines.size() != cells || durations.size() != cells)
    throw ValidationError("matrix shapes do not match n_jobs x n_machines");
  for (int i = 0; i < n_jobs; ++i) {
    if (!is_permutation_row(&machines[i * n_machines], n_machines))
      throw ValidationError("machine row " + std::to_string(i) + " is not a permutation");
    for (int j = 0; j < n_machines; ++j)
      if (duration(i, j) < 1)
        throw ValidationError("duration of job " + std::to_string(i) + " op " + std::to_string(j) +
                              " must be positive");
  }
}

JspInstance parse_orlib(std::string_view text) {
  const auto lines = tokenize(text);
  if (lines.empty()) throw ValidationError("line 1: missing heading 'n_jobs n_machines'");
  const Line& head = lines[0];
  if (head.tokens.size() != 2) fail_at(head.number, "malformed heading, expected 'n_jobs n_machines'");
  JspInstance inst;
  inst.n_jobs = int_at(head, 0, "job count");
  inst.n_machines = int_at(head, 1, "machine count");
  if (inst.n_jobs < 1 || inst.n_machines < 1) fail_at(head.number, "malformed heading, counts must be positive");
  if (lines.size() - 1 != static_cast<std::size_t>(inst.n_jobs))
    fail_at(lines.back().number, "expected " + std::to_string(inst.n_jobs) + " job lines, found " +
                                     std::to_string(lines.size() - 1));
  const int m = inst.n_machines;
  inst.machines.reserve(static_cast<std::size_t>(inst.n_jobs) * m);
  inst.durations.reserve(static_cast<std::size_t>(inst.n_jobs) * m);
  for (int i = 0; i < inst.n_jobs; ++i) {
    const Line& line = lines[i + 1];
    if (line.tokens.size() != static_cast<std::size_t>(2 * m))
      fail_at(line.number, "job " + std::to_string(i) + " lists " + std::to_string(line.tokens.size()) +
                               " values, expected " + std::to_string(m) + " (machine, duration) pairs");
    for (int j = 0; j < m; ++j) {
      inst.machines.push_back(int_at(line, 2 * j, "machine"));
      const int d = int_at(line, 2 * j + 1, "duration");
      if (d < 1) fail_at(line.number, "non-positive duration " + std::to_string(d) + " in job " + std::to_string(i));
      inst.durations.push_back(d);
    }
    if (!is_permutation_row(&inst.machines[i * m], m))
      fail_at(line.number, "machine row " + std::to_string(i) + " is not a permutation");
  }
  return inst;
}

std::string write_orlib(const JspInstance& inst) {
  std::ostringstream out;
  out << inst.n_jobs << ' ' << inst.n_machines << '\n';
  for (int i = 0; i < inst.n_jobs; ++i) {
    for (int j = 0; j < inst.n_machines; ++j) {
      if (j) out << ' ';
      out << inst.machine(i, j) << ' ' << inst.duration(i, j);
    }
    out << '\n';
  }
  return out.str();
}

JspInstance gen_jsp(int n_jobs, int n_machines, int dur_lo, int dur_hi, std::uint64_t seed) {
  if (n_jobs < 1 || n_machines < 1) throw ValidationError("gen_jsp: n_jobs and n_machines must be >= 1");
  if (dur_lo < 1 || dur_hi < dur_lo) throw ValidationError("gen_jsp: need 1 <= dur_lo <= dur_hi");
  Rng rng(seed);
  JspInstance inst;
  inst.n_jobs = n_jobs;
  inst.n_machines = n_machines;
  inst.machines.resize(static_cast<std::size_t>(n_jobs) * n_machines);
  inst.durations.resize(inst.machines.size());
  std::vector<int> row(n_machines);
  for (int i = 0; i < n_jobs; ++i) {
    for (int j = 0; j < n_machines; ++j) row[j] = j;
    rng.shuffle(row.begin(), row.end());
    for (int j = 0; j < n_machines; ++j) {
      inst.machines[i * n_machines + j] = row[j];
      inst.durations[i * n_machines + j] = static_cast<int>(rng.uniform_int(dur_lo, dur_hi));
    }
  }
  return inst;
}

void VrapInstance::validate() const {
  if (hosts.empty()) throw ValidationError("VRAP instance needs at least one host");
  if (vm_catalog.empty()) throw ValidationError("VRAP instance needs a non-empty VM catalog");
  if (chain.empty()) throw ValidationError("service chain must contain at least one VM");
  if (initial_occupancy.size() != hosts.size())
    throw ValidationError("initial_occupancy needs one entry per host");
  for (int f : chain)
    if (f < 0 || f >= static_cast<int>(vm_catalog.size()))
      throw ValidationError("chain index " + std::to_string(f) + " is outside the VM catalog");
  auto nonneg = [](double v) { return std::isfinite(v) && v >= 0; };
  for (const auto& h : hosts)
    if (!nonneg(h.cpu_capacity) || !nonneg(h.bw_capacity) || !nonneg(h.link_latency))
      throw ValidationError("host capacities and latencies must be >= 0");
  for (const auto& v : vm_catalog)
    if (!nonneg(v.cpu) || !nonneg(v.bw) || !nonneg(v.compute_latency))
      throw ValidationError("VM requirements and latencies must be >= 0");
  if (!nonneg(energy.w_min) || !nonneg(energy.w_cpu) || !nonneg(energy.w_net))
    throw ValidationError("energy weights must be >= 0");
  if (!nonneg(latency_threshold)) throw ValidationError("latency threshold must be >= 0");
  for (const auto& o : initial_occupancy)
    if (!(o.cpu >= 0 && o.cpu <= 1 && o.bw >= 0 && o.bw <= 1))
      throw ValidationError("initial occupancy fractions must lie in [0, 1]");
}

VrapInstance gen_vrap(int n_hosts, int catalog_size, int chain_len, std::uint64_t seed,
                      const VrapGenParams& p) {
  if (n_hosts < 1 || catalog_size < 1 || chain_len < 1)
    throw ValidationError("gen_vrap: n_hosts, catalog_size and chain_len must be >= 1");
  Rng rng(seed);
  VrapInstance inst;
  inst.hosts.resize(n_hosts);
  inst.initial_occupancy.resize(n_hosts);
  for (int i = 0; i < n_hosts; ++i) {
    inst.hosts[i].cpu_capacity = static_cast<double>(rng.uniform_int(p.host_cpu_lo, p.host_cpu_hi));
    inst.hosts[i].bw_capacity = static_cast<double>(rng.uniform_int(p.host_bw_lo, p.host_bw_hi));
    inst.hosts[i].link_latency = static_cast<double>(rng.uniform_int(p.host_lat_lo, p.host_lat_hi));
    inst.initial_occupancy[i].cpu = rng.uniform(0.0, p.occupancy_hi);
    inst.initial_occupancy[i].bw = rng.uniform(0.0, p.occupancy_hi);
  }
  inst.vm_catalog.resize(catalog_size);
  for (auto& vm : inst.vm_catalog) {
    vm.cpu = static_cast<double>(rng.uniform_int(p.vm_cpu_lo, p.vm_cpu_hi));
    vm.bw = static_cast<double>(rng.uniform_int(p.vm_bw_lo, p.vm_bw_hi));
    vm.compute_latency = static_cast<double>(rng.uniform_int(p.vm_lat_lo, p.vm_lat_hi));
  }
  inst.chain.resize(chain_len);
  for (auto& f : inst.chain) f = static_cast<int>(rng.uniform_int(0, catalog_size - 1));
  inst.latency_threshold = p.latency_per_vm * chain_len;
  inst.energy = p.energy;
  inst.validate();
  return inst;
}

std::string write_vrap(const VrapInstance& inst) {
  std::ostringstream out;
  out << "vrap-v1\n";
  out << "hosts " << inst.hosts.size() << '\n';
  for (std::size_t i = 0; i < inst.hosts.size(); ++i) {
    const auto& h = inst.hosts[i];
    const auto& o = inst.initial_occupancy[i];
    out << "host " << format_double(h.cpu_capacity) << ' ' << format_double(h.bw_capacity) << ' '
        << format_double(h.link_latency) << ' ' << format_double(o.cpu) << ' ' << format_double(o.bw) << '\n';
  }
  out << "vms " << inst.vm_catalog.size() << '\n';
  for (const auto& v : inst.vm_catalog)
    out << "vm " << format_double(v.cpu) << ' ' << format_double(v.bw) << ' ' << format_double(v.compute_latency)
        << '\n';
  out << "chain " << inst.chain.size();
  for (int f : inst.chain) out << ' ' << f;
  out << '\n';
  out << "latency_threshold " << format_double(inst.latency_threshold) << '\n';
  out << "energy " << format_double(inst.energy.w_min) << ' ' << format_double(inst.energy.w_cpu) << ' '
      << format_double(inst.energy.w_net) << '\n';
  return out.str();
}

VrapInstance parse_vrap(std::string_view text) {
  const auto lines = tokenize(text);
  if (lines.empty() || lines[0].tokens.size() != 1 || lines[0].tokens[0] != "vrap-v1")
    throw ValidationError("line 1: expected 'vrap-v1' version line");
  VrapInstance inst;
  int declared_hosts = -1, declared_vms = -1;
  bool have_chain = false, have_lth = false, have_energy = false;
  auto expect = [](const Line& l, std::size_t n) {
    if (l.tokens.size() != n)
      fail_at(l.number, "'" + std::string(l.tokens[0]) + "' expects " + std::to_string(n - 1) + " values");
  };
  for (std::size_t k = 1; k < lines.size(); ++k) {
    const Line& l = lines[k];
    const auto key = l.tokens[0];
    if (key == "hosts") {
      expect(l, 2);
      declared_hosts = int_at(l, 1, "host count");
    } else if (key == "host") {
      expect(l, 6);
      inst.hosts.push_back({double_at(l, 1), double_at(l, 2), double_at(l, 3)});
      inst.initial_occupancy.push_back({double_at(l, 4), double_at(l, 5)});
    } else if (key == "vms") {
      expect(l, 2);
      declared_vms = int_at(l, 1, "VM count");
    } else if (key == "vm") {
      expect(l, 4);
      inst.vm_catalog.push_back({double_at(l, 1), double_at(l, 2), double_at(l, 3)});
    } else if (key == "chain") {
      if (l.tokens.size() < 2) fail_at(l.number, "'chain' expects a length");
      const int len = int_at(l, 1, "chain length");
      if (len < 0 || l.tokens.size() != static_cast<std::size_t>(len) + 2)
        fail_at(l.number, "chain length does not match the number of listed VMs");
      for (int i = 0; i < len; ++i) inst.chain.push_back(int_at(l, i + 2, "chain index"));
      have_chain = true;
    } else if (key == "latency_threshold") {
      expect(l, 2);
      inst.latency_threshold = double_at(l, 1);
      have_lth = true;
    } else if (key == "energy") {
      expect(l, 4);
      inst.energy = {double_at(l, 1), double_at(l, 2), double_at(l, 3)};
      have_energy = true;
    } else {
      fail_at(l.number, "unknown key '" + std::string(key) + "'");
    }
  }
  if (declared_hosts != static_cast<int>(inst.hosts.size()))
    throw ValidationError("declared host count does not match host lines");
  if (declared_vms != static_cast<int>(inst.vm_catalog.size()))
    throw ValidationError("declared VM count does not match vm lines");
  if (!have_chain || !have_lth || !have_energy)
    throw ValidationError("VRAP document needs 'chain', 'latency_threshold' and 'energy' entries");
  inst.validate();
  return inst;
}

JspInstance load_jsp(const std::filesystem::path& path) {
  try {
    return parse_orlib(read_file(path.string()));
  } catch (const ValidationError& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

VrapInstance load_vrap(const std::filesystem::path& path) {
  try {
    return parse_vrap(read_file(path.string()));
  } catch (const ValidationError& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

std::vector<std::filesystem::path> list_dataset(const std::filesystem::path& dir) {
  std::error_code ec;
  if (!std::filesystem::is_directory(dir, ec)) throw IoError("not a directory: " + dir.string());
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    const auto name = entry.path().filename().string();
    if (name == "manifest.txt" || name.front() == '.') continue;
    files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  return files;
}

}  // namespace ccorl
