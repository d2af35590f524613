#ifndef NOONSIM_SVG_HPP
#define NOONSIM_SVG_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <limits>
#include <string>
#include <vector>

namespace noonsim::svg {

struct Trace {
  std::string label;
  std::vector<double> xs;
  std::vector<double> ys;
  bool markers = false;
};

struct Plot {
  std::string title;
  std::string xlabel;
  std::string ylabel;
  std::vector<Trace> traces;
  int width = 720;
  int height = 480;
};

namespace detail {

inline std::string fmt(double v, const char* spec = "%.6g") {
  char buf[40];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

inline std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

/// Tick positions at 1/2/5 x 10^k spacing covering [lo, hi].
inline std::vector<double> nice_ticks(double lo, double hi, int target = 6) {
  const double span = hi - lo;
  const double raw = span / target;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double step = mag;
  for (double m : {1.0, 2.0, 5.0, 10.0})
    if (m * mag >= raw) {
      step = m * mag;
      break;
    }
  std::vector<double> ticks;
  for (double t = std::ceil(lo / step) * step; t <= hi + 1e-9 * span; t += step)
    ticks.push_back(std::abs(t) < 1e-12 * span ? 0.0 : t);
  return ticks;
}

inline constexpr std::array<const char*, 8> palette = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                                        "#9467bd", "#8c564b", "#e377c2", "#17becf"};

}  // namespace detail

/// Static line plot with axes, ticks and a legend.
inline std::string render(const Plot& p) {
  using detail::fmt;
  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  for (const auto& t : p.traces) {
    for (double x : t.xs) x0 = std::min(x0, x), x1 = std::max(x1, x);
    for (double y : t.ys) y0 = std::min(y0, y), y1 = std::max(y1, y);
  }
  if (!std::isfinite(x0)) x0 = 0.0, x1 = 1.0, y0 = 0.0, y1 = 1.0;
  if (x1 == x0) x0 -= 0.5, x1 += 0.5;
  if (y1 == y0) y0 -= 0.5, y1 += 0.5;
  const double pad = 0.05 * (y1 - y0);
  y0 -= pad;
  y1 += pad;

  const double left = 80, right = 150, top = 40, bottom = 60;
  const double pw = p.width - left - right, ph = p.height - top - bottom;
  auto sx = [&](double x) { return left + (x - x0) / (x1 - x0) * pw; };
  auto sy = [&](double y) { return top + (y1 - y) / (y1 - y0) * ph; };

  std::string s;
  s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(p.width) + "\" height=\"" +
       std::to_string(p.height) + "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  s += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  s += "<text x=\"" + fmt(left + pw / 2) + "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" +
       detail::escape(p.title) + "</text>\n";
  s += "<rect x=\"" + fmt(left) + "\" y=\"" + fmt(top) + "\" width=\"" + fmt(pw) + "\" height=\"" + fmt(ph) +
       "\" fill=\"none\" stroke=\"black\"/>\n";

  for (double t : detail::nice_ticks(x0, x1)) {
    const double x = sx(t);
    s += "<line x1=\"" + fmt(x) + "\" y1=\"" + fmt(top + ph) + "\" x2=\"" + fmt(x) + "\" y2=\"" + fmt(top + ph + 5) +
         "\" stroke=\"black\"/>\n";
    s += "<text x=\"" + fmt(x) + "\" y=\"" + fmt(top + ph + 18) + "\" text-anchor=\"middle\">" + fmt(t, "%.4g") +
         "</text>\n";
  }
  for (double t : detail::nice_ticks(y0, y1)) {
    const double y = sy(t);
    s += "<line x1=\"" + fmt(left - 5) + "\" y1=\"" + fmt(y) + "\" x2=\"" + fmt(left) + "\" y2=\"" + fmt(y) +
         "\" stroke=\"black\"/>\n";
    s += "<text x=\"" + fmt(left - 8) + "\" y=\"" + fmt(y + 4) + "\" text-anchor=\"end\">" + fmt(t, "%.4g") +
         "</text>\n";
  }
  s += "<text x=\"" + fmt(left + pw / 2) + "\" y=\"" + fmt(p.height - 15.0) + "\" text-anchor=\"middle\">" +
       detail::escape(p.xlabel) + "</text>\n";
  s += "<text x=\"18\" y=\"" + fmt(top + ph / 2) + "\" text-anchor=\"middle\" transform=\"rotate(-90 18 " +
       fmt(top + ph / 2) + ")\">" + detail::escape(p.ylabel) + "</text>\n";

  for (std::size_t i = 0; i < p.traces.size(); ++i) {
    const auto& t = p.traces[i];
    const char* color = detail::palette[i % detail::palette.size()];
    std::string pts;
    for (std::size_t k = 0; k < std::min(t.xs.size(), t.ys.size()); ++k) {
      if (k) pts += ' ';
      pts += fmt(sx(t.xs[k]), "%.2f") + ',' + fmt(sy(t.ys[k]), "%.2f");
    }
    s += "<polyline fill=\"none\" stroke=\"" + std::string(color) + "\" stroke-width=\"1.5\" points=\"" + pts +
         "\"/>\n";
    if (t.markers)
      for (std::size_t k = 0; k < std::min(t.xs.size(), t.ys.size()); ++k)
        s += "<circle cx=\"" + fmt(sx(t.xs[k]), "%.2f") + "\" cy=\"" + fmt(sy(t.ys[k]), "%.2f") +
             "\" r=\"3\" fill=\"" + color + "\"/>\n";
    const double ly = top + 10 + 18.0 * i;
    s += "<line x1=\"" + fmt(left + pw + 12) + "\" y1=\"" + fmt(ly) + "\" x2=\"" + fmt(left + pw + 36) + "\" y2=\"" +
         fmt(ly) + "\" stroke=\"" + color + "\" stroke-width=\"2\"/>\n";
    s += "<text x=\"" + fmt(left + pw + 42) + "\" y=\"" + fmt(ly + 4) + "\">" + detail::escape(t.label) +
         "</text>\n";
  }
  s += "</svg>\n";
  return s;
}

}  // namespace noonsim::svg

#endif
