#include "ccorl/vrap_env.hpp"

#include <algorithm>
#include <sstream>

namespace ccorl::vrap {

namespace {
constexpr double kTol = 1e-9;
}

State reset(const VrapInstance& inst) {
  State s;
  const int n = inst.n_hosts();
  s.cpu_free.resize(n);
  s.bw_free.resize(n);
  for (int i = 0; i < n; ++i) {
    s.cpu_free[i] = inst.hosts[i].cpu_capacity * (1.0 - inst.initial_occupancy[i].cpu);
    s.bw_free[i] = inst.hosts[i].bw_capacity * (1.0 - inst.initial_occupancy[i].bw);
  }
  s.placement.assign(inst.chain_length(), kUnset);
  s.hosts_active.assign(n, 0);
  return s;
}

bool is_done(const State& s, const VrapInstance& inst) { return s.aborted || s.position >= inst.chain_length(); }

BandwidthDelta bandwidth_delta(const State& s, int host, const VrapInstance& inst) {
  const int p = s.position;
  const double bw = inst.vm_at(p).bw;
  const bool colocated = p > 0 && s.placement[p - 1] == host;
  BandwidthDelta d;
  d.charge = (colocated ? 0.0 : bw) + bw;  // ingress unless internal, plus egress
  d.refund = colocated ? inst.vm_at(p - 1).bw : 0.0;
  return d;
}

Mask feasible_mask(const State& s, const VrapInstance& inst) {
  const int n = inst.n_hosts();
  Mask mask(n, 0);
  if (is_done(s, inst)) return mask;
  const double cpu = inst.vm_at(s.position).cpu;
  for (int i = 0; i < n; ++i) {
    const auto d = bandwidth_delta(s, i, inst);
    mask[i] = s.cpu_free[i] + kTol >= cpu && s.bw_free[i] + d.refund + kTol >= d.charge;
  }
  return mask;
}

State abort(const State& s) {
  State t = s;
  t.aborted = true;
  return t;
}

State step(const State& s, int host, const VrapInstance& inst) {
  if (is_done(s, inst)) throw ContractViolation("placement is already complete");
  const Mask mask = feasible_mask(s, inst);
  if (std::none_of(mask.begin(), mask.end(), [](auto v) { return v != 0; })) return abort(s);
  if (host < 0 || host >= inst.n_hosts()) throw ContractViolation("host index out of range");
  if (!mask[host]) throw ContractViolation("host " + std::to_string(host) + " is masked");
  State t = s;
  const auto d = bandwidth_delta(s, host, inst);
  t.cpu_free[host] = std::max(0.0, t.cpu_free[host] - inst.vm_at(s.position).cpu);
  t.bw_free[host] = std::max(0.0, t.bw_free[host] + d.refund - d.charge);
  t.placement[s.position] = host;
  t.hosts_active[host] = 1;
  ++t.position;
  return t;
}

double energy(const std::vector<int>& hosts, const VrapInstance& inst) {
  std::vector<std::uint8_t> active(inst.n_hosts(), 0);
  double cpu = 0, bw = 0;
  for (std::size_t p = 0; p < hosts.size(); ++p) {
    active[hosts[p]] = 1;
    cpu += inst.vm_at(static_cast<int>(p)).cpu;
    bw += inst.vm_at(static_cast<int>(p)).bw;
  }
  const double n_active = static_cast<double>(std::count(active.begin(), active.end(), 1));
  return inst.energy.w_cpu * cpu + inst.energy.w_min * n_active + inst.energy.w_net * bw;
}

double latency(const std::vector<int>& hosts, const VrapInstance& inst) {
  double total = 0;
  for (std::size_t p = 0; p < hosts.size(); ++p)
    total += inst.vm_at(static_cast<int>(p)).compute_latency + inst.hosts[hosts[p]].link_latency;
  return total;
}

Placement to_placement(const State& s, const VrapInstance& inst) {
  if (!is_done(s, inst)) throw ContractViolation("placement is incomplete");
  Placement pl;
  pl.hosts = s.placement;
  pl.feasible = !s.aborted;
  if (pl.feasible) {
    pl.energy = energy(pl.hosts, inst);
    pl.latency_total = latency(pl.hosts, inst);
  }
  return pl;
}

Placement evaluate_hosts(const std::vector<int>& hosts, const VrapInstance& inst) {
  if (hosts.size() != static_cast<std::size_t>(inst.chain_length()))
    throw ContractViolation("host vector length does not match the chain");
  State s = reset(inst);
  for (int h : hosts) {
    if (h < 0 || h >= inst.n_hosts()) throw ContractViolation("host index out of range");
    if (!feasible_mask(s, inst)[h]) {
      s = abort(s);
      break;
    }
    s = step(s, h, inst);
  }
  Placement pl = to_placement(s, inst);
  if (!pl.feasible) pl.hosts = hosts;
  return pl;
}

double latency_excess(const Placement& pl, const VrapInstance& inst) {
  if (!pl.feasible) return 0.0;
  return std::max(0.0, pl.latency_total - inst.latency_threshold);
}

double infeasible_sentinel(const VrapInstance& inst, double lambda, double factor) {
  double cpu = 0, bw = 0, lat = 0, max_link = 0;
  for (int p = 0; p < inst.chain_length(); ++p) {
    cpu += inst.vm_at(p).cpu;
    bw += inst.vm_at(p).bw;
    lat += inst.vm_at(p).compute_latency;
  }
  for (const auto& h : inst.hosts) max_link = std::max(max_link, h.link_latency);
  const double all_active = inst.energy.w_cpu * cpu + inst.energy.w_min * inst.n_hosts() + inst.energy.w_net * bw;
  const double worst_penalty = lambda * std::max(0.0, lat + inst.chain_length() * max_link - inst.latency_threshold);
  return factor * (all_active + worst_penalty);
}

double objective(const Placement& pl, const VrapInstance& inst, double lambda, double sentinel_factor) {
  if (!pl.feasible) return infeasible_sentinel(inst, lambda, sentinel_factor);
  if (pl.hosts.size() != static_cast<std::size_t>(inst.chain_length()) ||
      std::any_of(pl.hosts.begin(), pl.hosts.end(), [](int h) { return h == kUnset; }))
    throw ContractViolation("placement is incomplete");
  return pl.energy + lambda * latency_excess(pl, inst);
}

std::string placement_to_text(const Placement& pl) {
  std::ostringstream out;
  out << "placement-v1\n";
  out << "feasible " << (pl.feasible ? 1 : 0) << '\n';
  out << "energy " << format_double(pl.energy) << '\n';
  out << "latency " << format_double(pl.latency_total) << '\n';
  for (std::size_t p = 0; p < pl.hosts.size(); ++p) out << "pos " << p << " host " << pl.hosts[p] << '\n';
  return out.str();
}

Placement parse_placement_text(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line, key;
  int line_no = 0;
  bool have_header = false;
  Placement pl;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream ls(line);
    if (!(ls >> key) || key[0] == '#') continue;
    auto fail = [&](const char* what) { throw ValidationError("line " + std::to_string(line_no) + ": " + what); };
    if (!have_header) {
      if (key != "placement-v1") fail("expected 'placement-v1' version line");
      have_header = true;
    } else if (key == "feasible") {
      int f;
      if (!(ls >> f)) fail("bad feasible flag");
      pl.feasible = f != 0;
    } else if (key == "energy" || key == "latency") {
      std::string tok;
      if (!(ls >> tok)) fail("missing value");
      (key == "energy" ? pl.energy : pl.latency_total) = parse_double(tok);
    } else if (key == "pos") {
      std::size_t p;
      std::string h_key;
      int h;
      if (!(ls >> p >> h_key >> h) || h_key != "host" || p != pl.hosts.size()) fail("bad position record");
      pl.hosts.push_back(h);
    } else {
      fail("unknown key");
    }
  }
  if (!have_header) throw ValidationError("empty placement document");
  return pl;
}

}  // namespace ccorl::vrap
