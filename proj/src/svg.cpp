#include "gdfactor/svg.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <limits>

namespace gdfactor {

namespace {

constexpr double kWidth = 800.0;
constexpr double kHeight = 600.0;
constexpr double kLeft = 90.0;
constexpr double kRight = 180.0;
constexpr double kTop = 50.0;
constexpr double kBottom = 70.0;

constexpr std::array<const char*, 8> kPalette = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                                 "#9467bd", "#8c564b", "#e377c2", "#17becf"};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string tick_label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

struct Axis {
  bool log = false;
  double lo = 0.0;
  double hi = 1.0;

  double map(double v) const { return log ? std::log10(v) : v; }
  double frac(double v) const { return (map(v) - lo) / (hi - lo); }
};

bool usable(double v, bool log) { return std::isfinite(v) && (!log || v > 0.0); }

Axis fit_axis(const std::vector<PlotSeries>& series, bool use_x, bool log) {
  Axis a;
  a.log = log;
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (const auto& s : series) {
    const auto& vals = use_x ? s.x : s.y;
    for (double v : vals) {
      if (!usable(v, log)) continue;
      lo = std::min(lo, a.map(v));
      hi = std::max(hi, a.map(v));
    }
  }
  if (!std::isfinite(lo)) {
    lo = 0.0;
    hi = 1.0;
  }
  if (hi - lo < 1e-12) {
    lo -= 0.5;
    hi += 0.5;
  }
  if (log) {
    lo = std::floor(lo);
    hi = std::ceil(hi);
  } else {
    const double pad = 0.05 * (hi - lo);
    lo -= pad;
    hi += pad;
  }
  a.lo = lo;
  a.hi = hi;
  return a;
}

std::vector<double> ticks(const Axis& a) {
  std::vector<double> out;
  if (a.log) {
    const int span = static_cast<int>(a.hi - a.lo);
    const int stride = std::max(1, span / 8);
    for (int e = static_cast<int>(a.lo); e <= static_cast<int>(a.hi); e += stride) out.push_back(std::pow(10.0, e));
    return out;
  }
  const double raw = (a.hi - a.lo) / 6.0;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double step = mag;
  for (double m : {1.0, 2.0, 5.0, 10.0}) {
    step = m * mag;
    if (step >= raw) break;
  }
  for (double v = std::ceil(a.lo / step) * step; v <= a.hi + 1e-9 * step; v += step) {
    out.push_back(std::abs(v) < 1e-12 * step ? 0.0 : v);
  }
  return out;
}

}  // namespace

std::string render_line_plot(const PlotSpec& spec, const std::vector<PlotSeries>& series) {
  const Axis ax = fit_axis(series, true, spec.log_x);
  const Axis ay = fit_axis(series, false, spec.log_y);
  const double pw = kWidth - kLeft - kRight;
  const double ph = kHeight - kTop - kBottom;
  auto px = [&](double v) { return kLeft + ax.frac(v) * pw; };
  auto py = [&](double v) { return kTop + (1.0 - ay.frac(v)) * ph; };

  std::string s;
  s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"800\" height=\"600\" viewBox=\"0 0 800 600\">\n";
  s += "<rect width=\"800\" height=\"600\" fill=\"white\"/>\n";
  s += "<text x=\"" + num(kLeft + pw / 2) + "\" y=\"28\" text-anchor=\"middle\" font-family=\"sans-serif\" "
       "font-size=\"16\">" + escape(spec.title) + "</text>\n";
  s += "<rect x=\"" + num(kLeft) + "\" y=\"" + num(kTop) + "\" width=\"" + num(pw) + "\" height=\"" + num(ph) +
       "\" fill=\"none\" stroke=\"black\"/>\n";

  for (double t : ticks(ax)) {
    const double x = px(t);
    s += "<line x1=\"" + num(x) + "\" y1=\"" + num(kTop + ph) + "\" x2=\"" + num(x) + "\" y2=\"" +
         num(kTop + ph + 5) + "\" stroke=\"black\"/>\n";
    s += "<text x=\"" + num(x) + "\" y=\"" + num(kTop + ph + 20) +
         "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" + tick_label(t) + "</text>\n";
  }
  for (double t : ticks(ay)) {
    const double y = py(t);
    s += "<line x1=\"" + num(kLeft - 5) + "\" y1=\"" + num(y) + "\" x2=\"" + num(kLeft) + "\" y2=\"" + num(y) +
         "\" stroke=\"black\"/>\n";
    s += "<line x1=\"" + num(kLeft) + "\" y1=\"" + num(y) + "\" x2=\"" + num(kLeft + pw) + "\" y2=\"" + num(y) +
         "\" stroke=\"#dddddd\"/>\n";
    s += "<text x=\"" + num(kLeft - 8) + "\" y=\"" + num(y + 4) +
         "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" + tick_label(t) + "</text>\n";
  }
  s += "<text x=\"" + num(kLeft + pw / 2) + "\" y=\"" + num(kHeight - 20) +
       "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">" + escape(spec.x_label) + "</text>\n";
  s += "<text x=\"20\" y=\"" + num(kTop + ph / 2) + "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
       "font-size=\"13\" transform=\"rotate(-90 20 " + num(kTop + ph / 2) + ")\">" + escape(spec.y_label) + "</text>\n";

  for (std::size_t i = 0; i < series.size(); ++i) {
    const auto& ser = series[i];
    const std::string color = kPalette[i % kPalette.size()];
    std::string pts;
    std::string marks;
    const std::size_t count = std::min(ser.x.size(), ser.y.size());
    for (std::size_t j = 0; j < count; ++j) {
      if (!usable(ser.x[j], spec.log_x) || !usable(ser.y[j], spec.log_y)) continue;
      const std::string xy = num(px(ser.x[j])) + "," + num(py(ser.y[j]));
      pts += (pts.empty() ? "" : " ") + xy;
      if (spec.markers) {
        marks += "<circle cx=\"" + num(px(ser.x[j])) + "\" cy=\"" + num(py(ser.y[j])) + "\" r=\"3\" fill=\"" + color +
                 "\"/>\n";
      }
    }
    if (!pts.empty()) {
      s += "<polyline fill=\"none\" stroke=\"" + color + "\" stroke-width=\"1.5\" points=\"" + pts + "\"/>\n";
    }
    s += marks;
    const double ly = kTop + 15.0 + 20.0 * static_cast<double>(i);
    s += "<line x1=\"" + num(kLeft + pw + 12) + "\" y1=\"" + num(ly) + "\" x2=\"" + num(kLeft + pw + 36) +
         "\" y2=\"" + num(ly) + "\" stroke=\"" + color + "\" stroke-width=\"2\"/>\n";
    s += "<text x=\"" + num(kLeft + pw + 42) + "\" y=\"" + num(ly + 4) +
         "\" font-family=\"sans-serif\" font-size=\"11\">" + escape(ser.label) + "</text>\n";
  }
  s += "</svg>\n";
  return s;
}

}  // namespace gdfactor
