#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "ccorl/jsp_env.hpp"

namespace ccorl::jsp {

std::string gantt_to_text(const GanttDoc& doc) {
  std::ostringstream out;
  out << "gantt-v1\n";
  out << "jobs " << doc.n_jobs << '\n';
  out << "machines " << doc.machines.size() << '\n';
  out << "makespan " << doc.makespan << '\n';
  for (std::size_t m = 0; m < doc.machines.size(); ++m)
    for (const auto& b : doc.machines[m])
      out << "bar " << m << ' ' << b.job << ' ' << b.op << ' ' << b.start << ' ' << b.end << '\n';
  return out.str();
}

GanttDoc parse_gantt_text(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  int line_no = 0;
  auto fail = [&](const std::string& what) {
    throw ValidationError("line " + std::to_string(line_no) + ": " + what);
  };
  GanttDoc doc;
  bool have_header = false;
  int n_machines = -1;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream ls(line);
    std::string key;
    if (!(ls >> key) || key[0] == '#') continue;
    if (!have_header) {
      if (key != "gantt-v1") fail("expected 'gantt-v1' version line");
      have_header = true;
      continue;
    }
    if (key == "jobs") {
      if (!(ls >> doc.n_jobs)) fail("bad job count");
    } else if (key == "machines") {
      if (!(ls >> n_machines) || n_machines < 0) fail("bad machine count");
      doc.machines.assign(n_machines, {});
    } else if (key == "makespan") {
      if (!(ls >> doc.makespan)) fail("bad makespan");
    } else if (key == "bar") {
      int m;
      GanttBar b;
      if (!(ls >> m >> b.job >> b.op >> b.start >> b.end)) fail("bar needs machine job op start end");
      if (m < 0 || m >= n_machines) fail("bar machine out of range");
      if (b.end < b.start) fail("bar ends before it starts");
      doc.machines[m].push_back(b);
    } else {
      fail("unknown key '" + key + "'");
    }
  }
  if (!have_header) throw ValidationError("empty Gantt document");
  for (auto& row : doc.machines)
    std::sort(row.begin(), row.end(), [](const GanttBar& a, const GanttBar& b) { return a.start < b.start; });
  return doc;
}

namespace {

std::string job_colour(int job, int n_jobs) {
  // Evenly spaced hues, fixed saturation/value.
  const double h = std::fmod(360.0 * job / std::max(1, n_jobs), 360.0) / 60.0;
  const double s = 0.55, v = 0.9;
  const double c = v * s, x = c * (1 - std::fabs(std::fmod(h, 2.0) - 1)), m = v - c;
  double r = 0, g = 0, b = 0;
  switch (static_cast<int>(h)) {
    case 0: r = c, g = x; break;
    case 1: r = x, g = c; break;
    case 2: g = c, b = x; break;
    case 3: g = x, b = c; break;
    case 4: r = x, b = c; break;
    default: r = c, b = x; break;
  }
  char buf[8];
  std::snprintf(buf, sizeof(buf), "#%02x%02x%02x", static_cast<int>(std::lround((r + m) * 255)),
                static_cast<int>(std::lround((g + m) * 255)), static_cast<int>(std::lround((b + m) * 255)));
  return buf;
}

}  // namespace

std::string gantt_to_svg(const GanttDoc& doc, const std::string& title) {
  constexpr double kLeft = 60, kTop = 40, kRowH = 28, kBarH = 20, kWidth = 800;
  const int rows = static_cast<int>(doc.machines.size());
  const double span = std::max(1, doc.makespan);
  const double scale = kWidth / span;
  const double height = kTop + rows * kRowH + 40;

  std::ostringstream out;
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kLeft + kWidth + 20 << "\" height=\"" << height
      << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  out << "<title>" << (title.empty() ? "Gantt" : title) << "</title>\n";
  out << "<text x=\"" << kLeft << "\" y=\"20\" font-size=\"14\">" << (title.empty() ? "" : title + " ")
      << "makespan=" << doc.makespan << "</text>\n";
  for (int m = 0; m < rows; ++m) {
    const double y = kTop + m * kRowH;
    out << "<text x=\"5\" y=\"" << y + kBarH * 0.7 << "\">M" << m << "</text>\n";
    out << "<g class=\"machine\" id=\"M" << m << "\">\n";
    for (const auto& b : doc.machines[m]) {
      const double x = kLeft + b.start * scale;
      const double w = (b.end - b.start) * scale;
      out << "<rect class=\"bar\" x=\"" << x << "\" y=\"" << y << "\" width=\"" << w << "\" height=\"" << kBarH
          << "\" fill=\"" << job_colour(b.job, doc.n_jobs) << "\" stroke=\"#333\" data-job=\"" << b.job
          << "\" data-op=\"" << b.op << "\" data-start=\"" << b.start << "\" data-end=\"" << b.end << "\"/>\n";
      out << "<text x=\"" << x + w / 2 << "\" y=\"" << y + kBarH * 0.7 << "\" text-anchor=\"middle\">J" << b.job
          << "</text>\n";
    }
    out << "</g>\n";
  }
  const double axis_y = kTop + rows * kRowH + 5;
  out << "<line x1=\"" << kLeft << "\" y1=\"" << axis_y << "\" x2=\"" << kLeft + kWidth << "\" y2=\"" << axis_y
      << "\" stroke=\"#000\"/>\n";
  out << "<text x=\"" << kLeft << "\" y=\"" << axis_y + 15 << "\">0</text>\n";
  out << "<text x=\"" << kLeft + kWidth << "\" y=\"" << axis_y + 15 << "\" text-anchor=\"end\">" << doc.makespan
      << "</text>\n";
  out << "</svg>\n";
  return out.str();
}

}  // namespace ccorl::jsp
