#include "crosc/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>

namespace crosc::svg {

namespace {

constexpr double kWidth = 640.0;
constexpr double kHeight = 420.0;
constexpr double kLeft = 70.0;
constexpr double kRight = 20.0;
constexpr double kTop = 40.0;
constexpr double kBottom = 50.0;

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      default: out += c;
    }
  }
  return out;
}

struct Range {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();

  void add(double v) {
    if (!std::isfinite(v)) return;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  void pad() {
    if (!std::isfinite(lo)) lo = 0.0, hi = 1.0;
    if (hi == lo) lo -= 0.5, hi += 0.5;
  }
};

void frame(std::ostream& out, const Range& xr, const Range& yr, const std::string& title, const std::string& xl,
           const std::string& yl) {
  const double x1 = kWidth - kRight, y1 = kHeight - kBottom;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n"
      << "<rect x=\"0\" y=\"0\" width=\"" << kWidth << "\" height=\"" << kHeight << "\" fill=\"white\"/>\n"
      << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << x1 - kLeft << "\" height=\"" << y1 - kTop
      << "\" fill=\"none\" stroke=\"black\"/>\n"
      << "<text x=\"" << kWidth / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"14\">" << escape(title)
      << "</text>\n"
      << "<text x=\"" << (kLeft + x1) / 2 << "\" y=\"" << kHeight - 12 << "\" text-anchor=\"middle\">" << escape(xl)
      << "</text>\n"
      << "<text x=\"16\" y=\"" << (kTop + y1) / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
      << (kTop + y1) / 2 << ")\">" << escape(yl) << "</text>\n"
      << "<text x=\"" << kLeft << "\" y=\"" << y1 + 16 << "\" text-anchor=\"start\">" << num(xr.lo) << "</text>\n"
      << "<text x=\"" << x1 << "\" y=\"" << y1 + 16 << "\" text-anchor=\"end\">" << num(xr.hi) << "</text>\n"
      << "<text x=\"" << kLeft - 4 << "\" y=\"" << y1 << "\" text-anchor=\"end\">" << num(yr.lo) << "</text>\n"
      << "<text x=\"" << kLeft - 4 << "\" y=\"" << kTop + 10 << "\" text-anchor=\"end\">" << num(yr.hi)
      << "</text>\n";
}

}  // namespace

void line_plot(std::ostream& out, const std::vector<Line>& lines, const std::string& title, const std::string& x_label,
               const std::string& y_label) {
  Range xr, yr;
  for (const auto& l : lines) {
    for (double v : l.x) xr.add(v);
    for (double v : l.y) yr.add(v);
  }
  xr.pad();
  yr.pad();
  frame(out, xr, yr, title, x_label, y_label);
  const double w = kWidth - kRight - kLeft, h = kHeight - kBottom - kTop;
  double legend_y = kTop + 16;
  for (const auto& l : lines) {
    out << "<polyline fill=\"none\" stroke=\"" << l.color << "\" stroke-width=\"1.2\" points=\"";
    for (std::size_t i = 0; i < std::min(l.x.size(), l.y.size()); ++i) {
      if (!std::isfinite(l.x[i]) || !std::isfinite(l.y[i])) continue;
      const double px = kLeft + w * (l.x[i] - xr.lo) / (xr.hi - xr.lo);
      const double py = kTop + h * (1.0 - (l.y[i] - yr.lo) / (yr.hi - yr.lo));
      out << num(px) << ',' << num(py) << ' ';
    }
    out << "\"/>\n";
    if (!l.label.empty()) {
      out << "<text x=\"" << kWidth - kRight - 8 << "\" y=\"" << legend_y << "\" text-anchor=\"end\" fill=\""
          << l.color << "\">" << escape(l.label) << "</text>\n";
      legend_y += 16;
    }
  }
  out << "</svg>\n";
}

void heatmap(std::ostream& out, const std::vector<double>& x, const std::vector<double>& y,
             const std::vector<std::vector<double>>& values, const std::string& title, const std::string& x_label,
             const std::string& y_label) {
  Range xr, yr, vr;
  for (double v : x) xr.add(v);
  for (double v : y) yr.add(v);
  for (const auto& row : values) {
    for (double v : row) vr.add(v);
  }
  xr.pad();
  yr.pad();
  vr.pad();
  frame(out, xr, yr, title, x_label, y_label);
  const double w = kWidth - kRight - kLeft, h = kHeight - kBottom - kTop;
  const double cw = w / std::max<std::size_t>(1, x.size()), ch = h / std::max<std::size_t>(1, y.size());
  for (std::size_t i = 0; i < x.size() && i < values.size(); ++i) {
    for (std::size_t j = 0; j < y.size() && j < values[i].size(); ++j) {
      const double v = values[i][j];
      if (!std::isfinite(v)) continue;
      const double s = (v - vr.lo) / (vr.hi - vr.lo);
      const int r = static_cast<int>(255 * s), b = static_cast<int>(255 * (1.0 - s));
      out << "<rect x=\"" << num(kLeft + cw * i) << "\" y=\"" << num(kTop + h - ch * (j + 1)) << "\" width=\""
          << num(cw) << "\" height=\"" << num(ch) << "\" fill=\"rgb(" << r << ",60," << b << ")\"/>\n";
    }
  }
  out << "</svg>\n";
}

}  // namespace crosc::svg
