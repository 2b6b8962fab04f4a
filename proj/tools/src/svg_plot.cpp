#include "neurodream_cli/svg_plot.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <limits>

namespace neurodream::cli {

namespace {

constexpr std::array<const char*, 6> kColors = {"#1f77b4", "#8e44ad", "#d62728",
                                                "#2ca02c", "#ff7f0e", "#17becf"};
constexpr double kLeft = 64.0;
constexpr double kRight = 150.0;
constexpr double kTop = 36.0;
constexpr double kBottom = 48.0;

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

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

// Tick step from {1, 2, 5} x 10^k giving about `target` intervals.
double nice_step(double span, int target) {
  const double raw = span / target;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  for (double m : {1.0, 2.0, 5.0, 10.0}) {
    if (m * mag >= raw) return m * mag;
  }
  return 10.0 * mag;
}

std::string tick_label(double v, double step) {
  char buf[32];
  const int decimals = step >= 1.0 ? 0 : static_cast<int>(std::ceil(-std::log10(step)));
  std::snprintf(buf, sizeof(buf), "%.*f", decimals, std::abs(v) < step * 1e-9 ? 0.0 : v);
  return buf;
}

struct Frame {
  double x0, x1, y0, y1;
  double w, h;
  double px(double x) const { return kLeft + (x - x0) / (x1 - x0) * (w - kLeft - kRight); }
  double py(double y) const { return h - kBottom - (y - y0) / (y1 - y0) * (h - kTop - kBottom); }
};

std::string polyline(const Frame& f, int first, const std::vector<double>& ys) {
  std::string pts;
  for (std::size_t j = 0; j < ys.size(); ++j) {
    if (j) pts += ' ';
    pts += num(f.px(first + static_cast<double>(j))) + "," + num(f.py(ys[j]));
  }
  return pts;
}

}  // namespace

std::string render_plot(const std::vector<PlotSeries>& series, const PlotStyle& style) {
  double x0 = std::numeric_limits<double>::infinity();
  double x1 = -x0;
  double y0 = x0;
  double y1 = -x0;
  for (const auto& s : series) {
    const auto& st = s.stats;
    if (st.mean.empty()) continue;
    x0 = std::min(x0, static_cast<double>(s.first_game));
    x1 = std::max(x1, static_cast<double>(s.first_game + st.mean.size() - 1));
    for (std::size_t j = 0; j < st.mean.size(); ++j) {
      y0 = std::min({y0, st.mean[j] - st.stddev[j], st.p80[j]});
      y1 = std::max({y1, st.mean[j] + st.stddev[j], st.p80[j]});
    }
  }
  if (!std::isfinite(x0)) {
    x0 = 0.0;
    x1 = 1.0;
    y0 = 0.0;
    y1 = 1.0;
  }
  if (x1 <= x0) x1 = x0 + 1.0;
  if (y1 - y0 < 1e-9) {
    y0 -= 0.5;
    y1 += 0.5;
  }
  const double pad = 0.05 * (y1 - y0);
  const Frame f{x0, x1, y0 - pad, y1 + pad, static_cast<double>(style.width),
                static_cast<double>(style.height)};

  std::string svg;
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(style.width) +
         "\" height=\"" + std::to_string(style.height) + "\" font-family=\"sans-serif\" " +
         "font-size=\"12\">\n";
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg += "<text x=\"" + num(f.w / 2) + "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">" +
         escape(style.title) + "</text>\n";

  // Axes and ticks.
  const double left = kLeft;
  const double right = f.w - kRight;
  const double top = kTop;
  const double bottom = f.h - kBottom;
  svg += "<g stroke=\"#444\" fill=\"none\"><path d=\"M" + num(left) + "," + num(top) + " L" +
         num(left) + "," + num(bottom) + " L" + num(right) + "," + num(bottom) + "\"/></g>\n";
  const double xs = nice_step(f.x1 - f.x0, 6);
  for (double x = std::ceil(f.x0 / xs) * xs; x <= f.x1 + 1e-9; x += xs) {
    svg += "<line x1=\"" + num(f.px(x)) + "\" y1=\"" + num(bottom) + "\" x2=\"" + num(f.px(x)) +
           "\" y2=\"" + num(bottom + 4) + "\" stroke=\"#444\"/>";
    svg += "<text x=\"" + num(f.px(x)) + "\" y=\"" + num(bottom + 17) +
           "\" text-anchor=\"middle\">" + tick_label(x, xs) + "</text>\n";
  }
  const double ys = nice_step(f.y1 - f.y0, 5);
  for (double y = std::ceil(f.y0 / ys) * ys; y <= f.y1 + 1e-9; y += ys) {
    svg += "<line x1=\"" + num(left) + "\" y1=\"" + num(f.py(y)) + "\" x2=\"" + num(right) +
           "\" y2=\"" + num(f.py(y)) + "\" stroke=\"#e5e5e5\"/>";
    svg += "<text x=\"" + num(left - 6) + "\" y=\"" + num(f.py(y) + 4) +
           "\" text-anchor=\"end\">" + tick_label(y, ys) + "</text>\n";
  }
  svg += "<text x=\"" + num((left + right) / 2) + "\" y=\"" + num(f.h - 10) +
         "\" text-anchor=\"middle\">" + escape(style.x_label) + "</text>\n";
  svg += "<text transform=\"translate(16," + num((top + bottom) / 2) +
         ") rotate(-90)\" text-anchor=\"middle\">" + escape(style.y_label) + "</text>\n";

  for (std::size_t s = 0; s < series.size(); ++s) {
    const auto& st = series[s].stats;
    const std::string color = kColors[s % kColors.size()];
    const int first = series[s].first_game;
    if (!st.mean.empty()) {
      std::vector<double> upper(st.mean.size());
      std::vector<double> lower(st.mean.size());
      for (std::size_t j = 0; j < st.mean.size(); ++j) {
        upper[j] = st.mean[j] + st.stddev[j];
        lower[j] = st.mean[j] - st.stddev[j];
      }
      std::reverse(lower.begin(), lower.end());
      std::string band = polyline(f, first, upper);
      // The lower edge runs backwards to close the polygon.
      for (std::size_t j = 0; j < lower.size(); ++j) {
        const double x = first + static_cast<double>(lower.size() - 1 - j);
        band += " " + num(f.px(x)) + "," + num(f.py(lower[j]));
      }
      svg += "<polygon points=\"" + band + "\" fill=\"" + color +
             "\" fill-opacity=\"0.18\" stroke=\"none\"/>\n";
      svg += "<polyline points=\"" + polyline(f, first, st.mean) + "\" fill=\"none\" stroke=\"" +
             color + "\" stroke-width=\"1.5\" stroke-dasharray=\"6,4\"/>\n";
      svg += "<polyline points=\"" + polyline(f, first, st.p80) + "\" fill=\"none\" stroke=\"" +
             color + "\" stroke-width=\"1.5\"/>\n";
    }
    const double ly = top + 14 + 36.0 * static_cast<double>(s);
    svg += "<text x=\"" + num(right + 12) + "\" y=\"" + num(ly) + "\" fill=\"" + color + "\">" +
           escape(series[s].label) + "</text>\n";
    svg += "<line x1=\"" + num(right + 12) + "\" y1=\"" + num(ly + 10) + "\" x2=\"" +
           num(right + 36) + "\" y2=\"" + num(ly + 10) + "\" stroke=\"" + color +
           "\" stroke-dasharray=\"6,4\"/><text x=\"" + num(right + 40) + "\" y=\"" +
           num(ly + 14) + "\" font-size=\"10\">mean</text>\n";
    svg += "<line x1=\"" + num(right + 76) + "\" y1=\"" + num(ly + 10) + "\" x2=\"" +
           num(right + 100) + "\" y2=\"" + num(ly + 10) + "\" stroke=\"" + color +
           "\"/><text x=\"" + num(right + 104) + "\" y=\"" + num(ly + 14) +
           "\" font-size=\"10\">p80</text>\n";
  }
  svg += "</svg>\n";
  return svg;
}

}  // namespace neurodream::cli
