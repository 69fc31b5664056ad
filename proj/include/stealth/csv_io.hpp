#pragma once

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace stealth {

// CSV numeric formatting contract: 9 significant digits, locale-independent.
inline std::string fmt_float(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

inline std::string fmt_int(std::int64_t v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%lld", static_cast<long long>(v));
  return buf;
}

inline void write_csv(const std::string& path, const std::vector<std::string>& header,
                      const std::vector<std::vector<std::string>>& rows) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (i) out << ',';
    out << header[i];
  }
  out << '\n';
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out << ',';
      out << row[i];
    }
    out << '\n';
  }
}

// Minimal SVG 1.1 line plot: axes plus one polyline per series.
struct SvgSeries {
  std::vector<double> x;
  std::vector<double> y;
  std::string color;
};

inline void write_svg_plot(const std::string& path, const std::string& title,
                           const std::vector<SvgSeries>& series) {
  const int width = 640, height = 480, margin = 56;
  double xmin = 1e308, xmax = -1e308, ymin = 1e308, ymax = -1e308;
  for (const auto& s : series)
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      xmin = std::min(xmin, s.x[i]);
      xmax = std::max(xmax, s.x[i]);
      ymin = std::min(ymin, s.y[i]);
      ymax = std::max(ymax, s.y[i]);
    }
  if (!(xmax > xmin)) xmax = xmin + 1.0;
  if (!(ymax > ymin)) {
    ymin -= 0.5;
    ymax += 0.5;
  }
  const double ypad = 0.05 * (ymax - ymin);
  ymin -= ypad;
  ymax += ypad;

  auto px = [&](double x) { return margin + (x - xmin) / (xmax - xmin) * (width - 2 * margin); };
  auto py = [&](double y) {
    return height - margin - (y - ymin) / (ymax - ymin) * (height - 2 * margin);
  };

  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << width
      << "\" height=\"" << height << "\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      << "<text x=\"" << width / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">"
      << title << "</text>\n"
      << "<line x1=\"" << margin << "\" y1=\"" << height - margin << "\" x2=\"" << width - margin
      << "\" y2=\"" << height - margin << "\" stroke=\"black\"/>\n"
      << "<line x1=\"" << margin << "\" y1=\"" << margin << "\" x2=\"" << margin << "\" y2=\""
      << height - margin << "\" stroke=\"black\"/>\n";
  out << "<text x=\"" << margin << "\" y=\"" << height - margin + 18
      << "\" font-size=\"11\" text-anchor=\"middle\">" << fmt_float(xmin) << "</text>\n"
      << "<text x=\"" << width - margin << "\" y=\"" << height - margin + 18
      << "\" font-size=\"11\" text-anchor=\"middle\">" << fmt_float(xmax) << "</text>\n"
      << "<text x=\"" << margin - 6 << "\" y=\"" << height - margin
      << "\" font-size=\"11\" text-anchor=\"end\">" << fmt_float(ymin + ypad) << "</text>\n"
      << "<text x=\"" << margin - 6 << "\" y=\"" << margin + 4
      << "\" font-size=\"11\" text-anchor=\"end\">" << fmt_float(ymax - ypad) << "</text>\n";
  for (const auto& s : series) {
    out << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (i) out << ' ';
      out << fmt_float(px(s.x[i])) << ',' << fmt_float(py(s.y[i]));
    }
    out << "\"/>\n";
  }
  out << "</svg>\n";
}

}  // namespace stealth
