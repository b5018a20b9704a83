#include <charconv>
#include <functional>
#include <sstream>

#include "ccorl/cli.hpp"
#include "ccorl/instances.hpp"

namespace ccorl::cli {

Problem parse_problem(std::string_view name) {
  if (name == "jsp") return Problem::jsp;
  if (name == "vrap") return Problem::vrap;
  throw ValidationError("unknown problem '" + std::string(name) + "' (expected jsp or vrap)");
}

const char* to_string(Problem p) { return p == Problem::jsp ? "jsp" : "vrap"; }

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <class T>
bool parse_int(std::string_view s, T& out) {
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && p == s.data() + s.size();
}

// Field readers that record problems instead of throwing, so that every
// invalid key is reported together.
class Fields {
 public:
  Fields(const KeyValues& kv, std::string origin) : kv_(kv), origin_(std::move(origin)) {}

  template <class T>
  void integer(const std::string& key, T& out) {
    read(key, [&](const std::string& v) {
      if (!parse_int(v, out)) errors_.push_back(key + ": expected an integer, got '" + v + "'");
    });
  }

  void real(const std::string& key, double& out) {
    read(key, [&](const std::string& v) {
      try {
        out = parse_double(v);
      } catch (const ValidationError&) {
        errors_.push_back(key + ": expected a number, got '" + v + "'");
      }
    });
  }

  template <class Parse>
  void choice(const std::string& key, Parse&& parse) {
    read(key, [&](const std::string& v) {
      try {
        parse(v);
      } catch (const ValidationError& e) {
        errors_.push_back(key + ": " + e.what());
      }
    });
  }

  void text(const std::string& key, std::string& out) {
    read(key, [&](const std::string& v) { out = v; });
  }

  void error(std::string msg) { errors_.push_back(std::move(msg)); }

  void finish() {
    for (const auto& [k, v] : kv_)
      if (!used_.count(k)) errors_.push_back("unknown key '" + k + "'");
    if (errors_.empty()) return;
    std::string msg = origin_ + ": invalid configuration:";
    for (const auto& e : errors_) msg += "\n  " + e;
    throw ValidationError(msg);
  }

 private:
  template <class F>
  void read(const std::string& key, F&& f) {
    used_[key] = true;
    const auto it = kv_.find(key);
    if (it != kv_.end()) f(it->second);
  }

  const KeyValues& kv_;
  std::string origin_;
  std::map<std::string, bool> used_;
  std::vector<std::string> errors_;
};

}  // namespace

KeyValues parse_key_values(std::string_view text, const std::string& origin) {
  KeyValues kv;
  std::size_t pos = 0;
  int line_no = 0;
  while (pos <= text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    auto line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos)
      throw ValidationError(origin + ": line " + std::to_string(line_no) + ": expected 'key = value'");
    const std::string key(trim(line.substr(0, eq)));
    const std::string value(trim(line.substr(eq + 1)));
    if (key.empty()) throw ValidationError(origin + ": line " + std::to_string(line_no) + ": empty key");
    if (!kv.emplace(key, value).second)
      throw ValidationError(origin + ": line " + std::to_string(line_no) + ": duplicate key '" + key + "'");
  }
  return kv;
}

std::string write_key_values(const KeyValues& kv) {
  std::string out;
  for (const auto& [k, v] : kv) out += k + " = " + v + "\n";
  return out;
}

void RunConfig::validate() const {
  std::vector<std::string> errors;
  if (problem == Problem::jsp) {
    if (n_jobs < 1 || n_machines < 1) errors.push_back("n_jobs and n_machines must be >= 1");
    if (dur_lo < 1 || dur_hi < dur_lo) errors.push_back("durations need 1 <= dur_lo <= dur_hi");
  } else {
    if (n_hosts < 1) errors.push_back("n_hosts must be >= 1");
    if (catalog_size < 1) errors.push_back("catalog_size must be >= 1");
    if (chain_len < 1) errors.push_back("chain_len must be >= 1");
  }
  if (net.embed < 1 || net.hidden < 1 || net.dec1 < 1 || net.dec2 < 1) errors.push_back("layer widths must be >= 1");
  if (train.dataset == train::DatasetMode::fixed && dataset_dir.empty() && dataset_size < 1)
    errors.push_back("dataset_size must be >= 1");
  if (checkpoint_every < 0) errors.push_back("checkpoint_every must be >= 0");
  try {
    train.validate();
  } catch (const ValidationError& e) {
    errors.push_back(e.what());
  }
  if (errors.empty()) return;
  std::string msg = "invalid training configuration:";
  for (const auto& e : errors) msg += "\n  " + e;
  throw ValidationError(msg);
}

RunConfig parse_run_config(std::string_view text, const std::string& origin) {
  const KeyValues kv = parse_key_values(text, origin);
  RunConfig c;
  Fields f(kv, origin);
  f.choice("problem", [&](const std::string& v) { c.problem = parse_problem(v); });
  if (c.problem == Problem::vrap) c.net = policy::vrap_net_config();
  f.integer("n_jobs", c.n_jobs);
  f.integer("n_machines", c.n_machines);
  f.integer("dur_lo", c.dur_lo);
  f.integer("dur_hi", c.dur_hi);
  f.integer("n_hosts", c.n_hosts);
  f.integer("catalog_size", c.catalog_size);
  f.integer("chain_len", c.chain_len);
  f.integer("embed", c.net.embed);
  f.integer("hidden", c.net.hidden);
  f.integer("dec1", c.net.dec1);
  f.integer("dec2", c.net.dec2);
  f.integer("B", c.train.B);
  f.integer("N", c.train.N);
  f.real("alpha", c.train.alpha);
  f.real("lambda", c.train.objective.lambda);
  f.real("t_th", c.train.objective.t_th);
  f.choice("idle_mode", [&](const std::string& v) { c.train.objective.idle_mode = jsp::parse_idle_mode(v); });
  f.real("lr", c.train.lr);
  f.real("grad_clip_norm", c.train.grad_clip_norm);
  f.real("dropout", c.train.dropout);
  f.integer("epochs", c.train.epochs);
  f.integer("seed", c.train.seed);
  f.choice("baseline", [&](const std::string& v) { c.train.baseline = train::parse_baseline_mode(v); });
  f.real("beta", c.train.beta);
  f.choice("dataset", [&](const std::string& v) { c.train.dataset = train::parse_dataset_mode(v); });
  f.integer("dataset_size", c.dataset_size);
  f.text("dataset_dir", c.dataset_dir);
  f.integer("checkpoint_every", c.checkpoint_every);
  f.finish();
  c.net.dropout = c.train.dropout;
  c.validate();
  return c;
}

std::string write_manifest(const ModelManifest& m) {
  KeyValues kv;
  kv["format"] = "ccorl-model-v1";
  kv["problem"] = to_string(m.problem);
  if (m.problem == Problem::jsp) {
    kv["n_jobs"] = std::to_string(m.n_jobs);
    kv["n_machines"] = std::to_string(m.n_machines);
    kv["dur_norm"] = format_double(m.dur_norm);
  } else {
    kv["norm_host_cpu"] = format_double(m.vrap_norm.host_cpu);
    kv["norm_host_bw"] = format_double(m.vrap_norm.host_bw);
    kv["norm_vm_cpu"] = format_double(m.vrap_norm.vm_cpu);
    kv["norm_vm_bw"] = format_double(m.vrap_norm.vm_bw);
    kv["norm_latency"] = format_double(m.vrap_norm.latency);
  }
  kv["embed"] = std::to_string(m.net.embed);
  kv["hidden"] = std::to_string(m.net.hidden);
  kv["dec1"] = std::to_string(m.net.dec1);
  kv["dec2"] = std::to_string(m.net.dec2);
  kv["dropout"] = format_double(m.net.dropout);
  kv["lambda"] = format_double(m.objective.lambda);
  kv["t_th"] = format_double(m.objective.t_th);
  kv["idle_mode"] = jsp::to_string(m.objective.idle_mode);
  kv["epochs_done"] = std::to_string(m.epochs_done);
  kv["seed"] = std::to_string(m.seed);
  return write_key_values(kv);
}

ModelManifest parse_manifest(std::string_view text, const std::string& origin) {
  const KeyValues kv = parse_key_values(text, origin);
  ModelManifest m;
  Fields f(kv, origin);
  std::string format;
  f.text("format", format);
  if (format != "ccorl-model-v1") f.error("format: expected ccorl-model-v1");
  f.choice("problem", [&](const std::string& v) { m.problem = parse_problem(v); });
  f.integer("n_jobs", m.n_jobs);
  f.integer("n_machines", m.n_machines);
  f.real("dur_norm", m.dur_norm);
  f.real("norm_host_cpu", m.vrap_norm.host_cpu);
  f.real("norm_host_bw", m.vrap_norm.host_bw);
  f.real("norm_vm_cpu", m.vrap_norm.vm_cpu);
  f.real("norm_vm_bw", m.vrap_norm.vm_bw);
  f.real("norm_latency", m.vrap_norm.latency);
  f.integer("embed", m.net.embed);
  f.integer("hidden", m.net.hidden);
  f.integer("dec1", m.net.dec1);
  f.integer("dec2", m.net.dec2);
  f.real("dropout", m.net.dropout);
  f.real("lambda", m.objective.lambda);
  f.real("t_th", m.objective.t_th);
  f.choice("idle_mode", [&](const std::string& v) { m.objective.idle_mode = jsp::parse_idle_mode(v); });
  f.integer("epochs_done", m.epochs_done);
  f.integer("seed", m.seed);
  f.finish();
  return m;
}

std::string manifest_path(const std::string& checkpoint) { return checkpoint + ".manifest"; }

std::uint64_t dataset_instance_seed(std::uint64_t seed, int index) {
  return Rng(seed).split(static_cast<std::uint64_t>(index)).next_u64();
}

std::string dataset_file_name(Problem p, int index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "inst_%04d.%s", index, p == Problem::jsp ? "txt" : "vrap");
  return buf;
}

}  // namespace ccorl::cli
