#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "ccorl/cli.hpp"
#include "ccorl/instances.hpp"

namespace ccorl::cli {

std::vector<BenchSummary> summarize(const std::vector<BenchRow>& rows) {
  std::vector<BenchSummary> out;
  auto find = [&](const std::string& method) -> BenchSummary& {
    for (auto& s : out)
      if (s.method == method) return s;
    out.push_back({method, 0, 0, 0, 0, std::nullopt});
    return out.back();
  };
  for (const auto& r : rows) find(r.method);
  for (auto& s : out) {
    double sum = 0, time = 0, gap = 0;
    int gaps = 0;
    for (const auto& r : rows) {
      if (r.method != s.method) continue;
      ++s.count;
      sum += r.objective;
      time += r.time_ms;
      if (r.gap) gap += *r.gap, ++gaps;
    }
    s.mean = sum / s.count;
    s.mean_time_ms = time / s.count;
    double var = 0;
    for (const auto& r : rows)
      if (r.method == s.method) var += (r.objective - s.mean) * (r.objective - s.mean);
    s.std = s.count > 1 ? std::sqrt(var / (s.count - 1)) : 0.0;
    if (gaps == s.count) s.mean_gap = gap / gaps;
  }
  return out;
}

std::string rows_csv(const BenchReport& r) {
  std::ostringstream out;
  out << "method,instance,objective,primary,penalty,feasible,time_ms,gap\n";
  for (const auto& row : r.rows)
    out << row.method << ',' << row.instance << ',' << format_double(row.objective) << ','
        << format_double(row.primary) << ',' << format_double(row.penalty) << ',' << (row.feasible ? 1 : 0) << ','
        << format_double(row.time_ms) << ',' << (row.gap ? format_double(*row.gap) : "") << '\n';
  return out.str();
}

std::string summary_csv(const BenchReport& r) {
  std::ostringstream out;
  out << "method,count,mean,std,mean_time_ms,mean_gap\n";
  for (const auto& s : r.summary)
    out << s.method << ',' << s.count << ',' << format_double(s.mean) << ',' << format_double(s.std) << ','
        << format_double(s.mean_time_ms) << ',' << (s.mean_gap ? format_double(*s.mean_gap) : "") << '\n';
  return out.str();
}

std::string summary_pretty(const BenchReport& r) {
  std::ostringstream out;
  char line[160];
  std::snprintf(line, sizeof line, "%-16s %6s %12s %12s %14s %10s\n", "method", "count", "mean", "std", "time_ms",
                "gap_%");
  out << line;
  for (const auto& s : r.summary) {
    const std::string gap = s.mean_gap ? [&] {
      char b[32];
      std::snprintf(b, sizeof b, "%.2f", *s.mean_gap);
      return std::string(b);
    }()
                                       : std::string("-");
    std::snprintf(line, sizeof line, "%-16s %6d %12.3f %12.3f %14.3f %10s\n", s.method.c_str(), s.count, s.mean, s.std,
                  s.mean_time_ms, gap.c_str());
    out << line;
  }
  return out.str();
}

std::map<std::string, double> parse_optima(std::string_view text) {
  std::map<std::string, double> out;
  std::istringstream in{std::string(text)};
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw ValidationError("optima line " + std::to_string(line_no) + ": expected 'instance,optimum'");
    const std::string name = line.substr(0, comma);
    const std::string value = line.substr(comma + 1);
    if (line_no == 1 && name == "instance") continue;
    out[name] = parse_double(value);
  }
  return out;
}

}  // namespace ccorl::cli
