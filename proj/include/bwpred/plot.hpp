#pragma once

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace bwpred {

/// Self-contained SVG with the actual and predicted curves overlaid.
inline void write_trace_svg(const std::string& path, const std::vector<double>& actual,
                            const std::vector<double>& predicted,
                            const std::string& title = "prediction vs. actual") {
  if (actual.size() != predicted.size() || actual.empty())
    throw std::runtime_error("trace svg: need equally sized, nonempty series");
  const int width = 960, height = 360, margin = 40;
  double ymax = 0.0;
  for (double v : actual) ymax = std::max(ymax, v);
  for (double v : predicted) ymax = std::max(ymax, v);
  ymax = std::max(ymax, 1e-6) * 1.05;

  auto polyline = [&](const std::vector<double>& ys) {
    std::string pts;
    char buf[64];
    double xstep = static_cast<double>(width - 2 * margin) /
                   static_cast<double>(std::max<std::size_t>(1, ys.size() - 1));
    for (std::size_t i = 0; i < ys.size(); ++i) {
      double x = margin + xstep * static_cast<double>(i);
      double y = height - margin - (height - 2 * margin) * (ys[i] / ymax);
      std::snprintf(buf, sizeof(buf), "%.1f,%.1f ", x, y);
      pts += buf;
    }
    return pts;
  };

  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
      << height << "\" viewBox=\"0 0 " << width << " " << height << "\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      << "<text x=\"" << margin << "\" y=\"24\" font-family=\"sans-serif\" font-size=\"14\">"
      << title << "</text>\n"
      << "<line x1=\"" << margin << "\" y1=\"" << height - margin << "\" x2=\"" << width - margin
      << "\" y2=\"" << height - margin << "\" stroke=\"#888\"/>\n"
      << "<line x1=\"" << margin << "\" y1=\"" << margin << "\" x2=\"" << margin << "\" y2=\""
      << height - margin << "\" stroke=\"#888\"/>\n"
      << "<polyline fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"1\" points=\""
      << polyline(actual) << "\"/>\n"
      << "<polyline fill=\"none\" stroke=\"#d62728\" stroke-width=\"1\" points=\""
      << polyline(predicted) << "\"/>\n"
      << "<text x=\"" << width - 220 << "\" y=\"24\" font-family=\"sans-serif\" font-size=\"12\""
      << " fill=\"#1f77b4\">actual</text>\n"
      << "<text x=\"" << width - 150 << "\" y=\"24\" font-family=\"sans-serif\" font-size=\"12\""
      << " fill=\"#d62728\">predicted</text>\n"
      << "</svg>\n";
}

}  // namespace bwpred
