#include "svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace dynip::cli {

namespace {

constexpr double kWidth = 640.0, kHeight = 400.0;
constexpr double kLeft = 70.0, kRight = 20.0, kTop = 40.0, kBottom = 50.0;

std::string fixed(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string tick(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
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

struct Axis {
  double lo = 0.0, hi = 1.0;
  bool log = false;

  double map(double v) const {
    const double u = log ? std::log10(v) : v;
    return hi > lo ? (u - lo) / (hi - lo) : 0.5;
  }
};

Axis fit(const std::vector<double>& v, bool log) {
  Axis a;
  a.log = log;
  if (v.empty()) return a;
  auto [mn, mx] = std::minmax_element(v.begin(), v.end());
  a.lo = log ? std::log10(*mn) : *mn;
  a.hi = log ? std::log10(*mx) : *mx;
  return a;
}

}  // namespace

std::string line_plot(const PlotSpec& spec, const std::vector<std::pair<double, double>>& points) {
  std::vector<double> xs, ys;
  for (auto [x, y] : points) {
    if (!std::isfinite(x) || !std::isfinite(y)) continue;
    if ((spec.log_x && !(x > 0.0)) || (spec.log_y && !(y > 0.0))) continue;
    xs.push_back(x);
    ys.push_back(y);
  }
  const Axis ax = fit(xs, spec.log_x), ay = fit(ys, spec.log_y);
  const double pw = kWidth - kLeft - kRight, ph = kHeight - kTop - kBottom;

  std::string s;
  s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"400\" viewBox=\"0 0 640 400\">\n";
  s += "<rect width=\"640\" height=\"400\" fill=\"white\"/>\n";
  s += "<text x=\"320\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\">" +
       escape(spec.title) + "</text>\n";
  s += "<rect x=\"" + fixed(kLeft) + "\" y=\"" + fixed(kTop) + "\" width=\"" + fixed(pw) +
       "\" height=\"" + fixed(ph) + "\" fill=\"none\" stroke=\"black\"/>\n";
  s += "<text x=\"320\" y=\"" + fixed(kHeight - 12.0) +
       "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">" +
       escape(spec.x_label) + (spec.log_x ? " (log)" : "") + "</text>\n";
  s += "<text x=\"16\" y=\"" + fixed(kTop + ph / 2) + "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
       "font-size=\"12\" transform=\"rotate(-90 16 " + fixed(kTop + ph / 2) + ")\">" +
       escape(spec.y_label) + (spec.log_y ? " (log)" : "") + "</text>\n";

  if (!xs.empty()) {
    auto label = [](const Axis& a, double u) { return tick(a.log ? std::pow(10.0, u) : u); };
    s += "<g font-family=\"sans-serif\" font-size=\"10\">\n";
    s += "<text x=\"" + fixed(kLeft) + "\" y=\"" + fixed(kTop + ph + 14) + "\" text-anchor=\"start\">" +
         label(ax, ax.lo) + "</text>\n";
    s += "<text x=\"" + fixed(kLeft + pw) + "\" y=\"" + fixed(kTop + ph + 14) + "\" text-anchor=\"end\">" +
         label(ax, ax.hi) + "</text>\n";
    s += "<text x=\"" + fixed(kLeft - 4) + "\" y=\"" + fixed(kTop + ph) + "\" text-anchor=\"end\">" +
         label(ay, ay.lo) + "</text>\n";
    s += "<text x=\"" + fixed(kLeft - 4) + "\" y=\"" + fixed(kTop + 10) + "\" text-anchor=\"end\">" +
         label(ay, ay.hi) + "</text>\n";
    s += "</g>\n<polyline fill=\"none\" stroke=\"#1f5fa8\" stroke-width=\"1.5\" points=\"";
    for (std::size_t k = 0; k < xs.size(); ++k) {
      if (k) s += ' ';
      s += fixed(kLeft + pw * ax.map(xs[k])) + "," + fixed(kTop + ph * (1.0 - ay.map(ys[k])));
    }
    s += "\"/>\n";
  }
  s += "</svg>\n";
  return s;
}

}  // namespace dynip::cli
