// Copyright 2026 The ranklab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef RANKLAB_TOOLS_SVG_HPP_
#define RANKLAB_TOOLS_SVG_HPP_

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <string>
#include <utility>
#include <vector>

namespace ranklab_tools {

// Bare-bones scatter/line figures. Every figure also exists as CSV, so this
// only needs to be good enough for a quick look.
inline void write_xy_svg(const std::string& path, const std::string& title,
                         const std::vector<std::pair<double, double>>& points,
                         bool connect) {
  const double width = 640, height = 480, margin = 56;
  double x_lo = 0, x_hi = 1, y_lo = 0, y_hi = 1;
  if (!points.empty()) {
    x_lo = x_hi = points[0].first;
    y_lo = y_hi = points[0].second;
    for (const auto& [x, y] : points) {
      x_lo = std::min(x_lo, x);
      x_hi = std::max(x_hi, x);
      y_lo = std::min(y_lo, y);
      y_hi = std::max(y_hi, y);
    }
  }
  if (x_hi == x_lo) x_hi = x_lo + 1;
  if (y_hi == y_lo) y_hi = y_lo + 1;
  auto sx = [&](double x) {
    return margin + (x - x_lo) / (x_hi - x_lo) * (width - 2 * margin);
  };
  auto sy = [&](double y) {
    return height - margin - (y - y_lo) / (y_hi - y_lo) * (height - 2 * margin);
  };

  std::ofstream out(path);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
      << "\" height=\"" << height << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << width / 2 << "\" y=\"24\" text-anchor=\"middle\" "
      << "font-family=\"sans-serif\" font-size=\"16\">" << title << "</text>\n";
  out << "<line x1=\"" << margin << "\" y1=\"" << height - margin << "\" x2=\""
      << width - margin << "\" y2=\"" << height - margin
      << "\" stroke=\"black\"/>\n";
  out << "<line x1=\"" << margin << "\" y1=\"" << margin << "\" x2=\"" << margin
      << "\" y2=\"" << height - margin << "\" stroke=\"black\"/>\n";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.3g", x_lo);
  out << "<text x=\"" << margin << "\" y=\"" << height - margin + 20
      << "\" font-family=\"sans-serif\" font-size=\"11\">" << buf << "</text>\n";
  std::snprintf(buf, sizeof(buf), "%.3g", x_hi);
  out << "<text x=\"" << width - margin << "\" y=\"" << height - margin + 20
      << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" << buf
      << "</text>\n";
  std::snprintf(buf, sizeof(buf), "%.3g", y_lo);
  out << "<text x=\"" << margin - 6 << "\" y=\"" << height - margin
      << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" << buf
      << "</text>\n";
  std::snprintf(buf, sizeof(buf), "%.3g", y_hi);
  out << "<text x=\"" << margin - 6 << "\" y=\"" << margin + 4
      << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" << buf
      << "</text>\n";

  if (connect && points.size() > 1) {
    out << "<polyline fill=\"none\" stroke=\"steelblue\" stroke-width=\"1.5\" points=\"";
    for (const auto& [x, y] : points) out << sx(x) << ',' << sy(y) << ' ';
    out << "\"/>\n";
  }
  for (const auto& [x, y] : points) {
    out << "<circle cx=\"" << sx(x) << "\" cy=\"" << sy(y)
        << "\" r=\"2.5\" fill=\"steelblue\" fill-opacity=\"0.7\"/>\n";
  }
  out << "</svg>\n";
}

}  // namespace ranklab_tools

#endif  // RANKLAB_TOOLS_SVG_HPP_
