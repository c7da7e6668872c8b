#pragma once

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>
#include <vector>

namespace htreg {

/// One polyline on the chart.
struct ChartSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

/// Minimal static SVG line chart (log-log), enough to eyeball a rate sweep
/// without any plotting stack. Data stays authoritative in the CSV.
inline std::string svg_loglog_chart(const std::string& title, const std::string& xlabel,
                                    const std::string& ylabel,
                                    const std::vector<ChartSeries>& series) {
  const double w = 640, h = 440, ml = 70, mr = 20, mt = 40, mb = 50;
  double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
  for (const auto& s : series)
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!(s.x[i] > 0.0) || !(s.y[i] > 0.0)) continue;
      xmin = std::min(xmin, std::log10(s.x[i]));
      xmax = std::max(xmax, std::log10(s.x[i]));
      ymin = std::min(ymin, std::log10(s.y[i]));
      ymax = std::max(ymax, std::log10(s.y[i]));
    }
  if (xmin > xmax) {
    xmin = ymin = 0.0;
    xmax = ymax = 1.0;
  }
  if (xmax - xmin < 1e-9) xmax = xmin + 1.0;
  if (ymax - ymin < 1e-9) ymax = ymin + 1.0;
  auto px = [&](double lx) { return ml + (lx - xmin) / (xmax - xmin) * (w - ml - mr); };
  auto py = [&](double ly) { return h - mb - (ly - ymin) / (ymax - ymin) * (h - mt - mb); };
  const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"};

  std::ostringstream svg;
  svg << "<svg xmlns='http://www.w3.org/2000/svg' width='" << w << "' height='" << h << "'>\n";
  svg << "<rect width='100%' height='100%' fill='white'/>\n";
  svg << "<text x='" << w / 2 << "' y='24' text-anchor='middle' font-size='16'>" << title
      << "</text>\n";
  svg << "<line x1='" << ml << "' y1='" << h - mb << "' x2='" << w - mr << "' y2='" << h - mb
      << "' stroke='black'/>\n";
  svg << "<line x1='" << ml << "' y1='" << mt << "' x2='" << ml << "' y2='" << h - mb
      << "' stroke='black'/>\n";
  svg << "<text x='" << w / 2 << "' y='" << h - 12 << "' text-anchor='middle' font-size='12'>"
      << xlabel << " (log10)</text>\n";
  svg << "<text x='16' y='" << h / 2 << "' font-size='12' transform='rotate(-90 16 " << h / 2
      << ")' text-anchor='middle'>" << ylabel << " (log10)</text>\n";
  for (int t = 0; t <= 4; ++t) {
    const double lx = xmin + (xmax - xmin) * t / 4.0;
    const double ly = ymin + (ymax - ymin) * t / 4.0;
    svg << "<text x='" << px(lx) << "' y='" << h - mb + 16
        << "' text-anchor='middle' font-size='10'>" << std::round(lx * 100) / 100 << "</text>\n";
    svg << "<text x='" << ml - 6 << "' y='" << py(ly) + 3
        << "' text-anchor='end' font-size='10'>" << std::round(ly * 100) / 100 << "</text>\n";
  }
  for (std::size_t si = 0; si < series.size(); ++si) {
    const auto& s = series[si];
    const char* color = colors[si % 5];
    svg << "<polyline fill='none' stroke='" << color << "' stroke-width='2' points='";
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!(s.x[i] > 0.0) || !(s.y[i] > 0.0)) continue;
      svg << px(std::log10(s.x[i])) << "," << py(std::log10(s.y[i])) << " ";
    }
    svg << "'/>\n";
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!(s.x[i] > 0.0) || !(s.y[i] > 0.0)) continue;
      svg << "<circle cx='" << px(std::log10(s.x[i])) << "' cy='" << py(std::log10(s.y[i]))
          << "' r='3' fill='" << color << "'/>\n";
    }
    svg << "<text x='" << w - mr - 6 << "' y='" << mt + 16 + 16 * static_cast<double>(si)
        << "' text-anchor='end' font-size='12' fill='" << color << "'>" << s.label << "</text>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace htreg
