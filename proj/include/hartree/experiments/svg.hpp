#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

namespace hartree::experiments {

struct ScatterPoint {
  double x = 0.0;
  double y = 0.0;
  std::string color;
  bool hollow = false;
  std::string label;
};

struct ScatterPlot {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<double> vertical_lines;
  std::vector<double> horizontal_lines;
  std::vector<ScatterPoint> points;
  std::vector<std::pair<std::string, std::string>> legend;  // color, text
};

namespace detail {

inline std::string num(double v)
{
  char b[32];
  std::snprintf(b, sizeof b, "%.2f", v);
  return b;
}

inline std::string escape(const std::string& s)
{
  std::string o;
  for (char c : s) {
    switch (c) {
      case '&': o += "&amp;"; break;
      case '<': o += "&lt;"; break;
      case '>': o += "&gt;"; break;
      case '"': o += "&quot;"; break;
      default: o += c;
    }
  }
  return o;
}

inline double nice_step(double span)
{
  const double raw = span / 6.0;
  const double p = std::pow(10.0, std::floor(std::log10(raw)));
  for (double m : {1.0, 2.0, 5.0, 10.0})
    if (raw <= m * p)
      return m * p;
  return 10.0 * p;
}

}  // namespace detail

// Minimal SVG 1.1 scatter with axes, ticks and reference lines.
inline std::string render_svg(const ScatterPlot& plot)
{
  const double W = 640, H = 480, left = 70, right = 170, top = 40, bottom = 60;
  double x0 = 0.0, x1 = 1.0, y0 = 0.0, y1 = 1.0;
  bool first = true;
  auto extend = [&](double x, double y) {
    if (!std::isfinite(x) || !std::isfinite(y))
      return;
    if (first) {
      x0 = x1 = x;
      y0 = y1 = y;
      first = false;
    }
    x0 = std::min(x0, x);
    x1 = std::max(x1, x);
    y0 = std::min(y0, y);
    y1 = std::max(y1, y);
  };
  for (const auto& p : plot.points)
    extend(p.x, p.y);
  for (double v : plot.vertical_lines)
    extend(v, first ? 0.0 : y0);
  for (double h : plot.horizontal_lines)
    extend(first ? 0.0 : x0, h);
  const double px = 0.08 * std::max(x1 - x0, 1e-3), py = 0.08 * std::max(y1 - y0, 1e-3);
  x0 -= px;
  x1 += px;
  y0 -= py;
  y1 += py;
  const double pw = W - left - right, ph = H - top - bottom;
  auto sx = [&](double x) { return left + (x - x0) / (x1 - x0) * pw; };
  auto sy = [&](double y) { return top + (y1 - y) / (y1 - y0) * ph; };
  using detail::num;

  std::string s;
  s += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  s += "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" + num(W) + "\" height=\"" + num(H) +
       "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  s += "<rect x=\"0\" y=\"0\" width=\"" + num(W) + "\" height=\"" + num(H) + "\" fill=\"white\"/>\n";
  s += "<text x=\"" + num(left + pw / 2) + "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" +
       detail::escape(plot.title) + "</text>\n";
  s += "<rect x=\"" + num(left) + "\" y=\"" + num(top) + "\" width=\"" + num(pw) + "\" height=\"" + num(ph) +
       "\" fill=\"none\" stroke=\"black\"/>\n";

  const double stx = detail::nice_step(x1 - x0), sty = detail::nice_step(y1 - y0);
  for (double t = std::ceil(x0 / stx) * stx; t <= x1; t += stx) {
    s += "<line x1=\"" + num(sx(t)) + "\" y1=\"" + num(top + ph) + "\" x2=\"" + num(sx(t)) + "\" y2=\"" +
         num(top + ph + 5) + "\" stroke=\"black\"/>\n";
    s += "<text x=\"" + num(sx(t)) + "\" y=\"" + num(top + ph + 18) + "\" text-anchor=\"middle\">" +
         detail::escape(num(std::abs(t) < 1e-12 ? 0.0 : t)) + "</text>\n";
  }
  for (double t = std::ceil(y0 / sty) * sty; t <= y1; t += sty) {
    s += "<line x1=\"" + num(left - 5) + "\" y1=\"" + num(sy(t)) + "\" x2=\"" + num(left) + "\" y2=\"" +
         num(sy(t)) + "\" stroke=\"black\"/>\n";
    s += "<text x=\"" + num(left - 8) + "\" y=\"" + num(sy(t) + 4) + "\" text-anchor=\"end\">" +
         detail::escape(num(std::abs(t) < 1e-12 ? 0.0 : t)) + "</text>\n";
  }
  s += "<text x=\"" + num(left + pw / 2) + "\" y=\"" + num(H - 15) + "\" text-anchor=\"middle\">" +
       detail::escape(plot.x_label) + "</text>\n";
  s += "<text x=\"18\" y=\"" + num(top + ph / 2) + "\" text-anchor=\"middle\" transform=\"rotate(-90 18 " +
       num(top + ph / 2) + ")\">" + detail::escape(plot.y_label) + "</text>\n";

  for (double v : plot.vertical_lines)
    if (v > x0 && v < x1)
      s += "<line x1=\"" + num(sx(v)) + "\" y1=\"" + num(top) + "\" x2=\"" + num(sx(v)) + "\" y2=\"" +
           num(top + ph) + "\" stroke=\"gray\" stroke-dasharray=\"6,4\"/>\n";
  for (double h : plot.horizontal_lines)
    if (h > y0 && h < y1)
      s += "<line x1=\"" + num(left) + "\" y1=\"" + num(sy(h)) + "\" x2=\"" + num(left + pw) + "\" y2=\"" +
           num(sy(h)) + "\" stroke=\"gray\" stroke-dasharray=\"6,4\"/>\n";

  for (const auto& p : plot.points) {
    if (!std::isfinite(p.x) || !std::isfinite(p.y))
      continue;
    s += "<circle cx=\"" + num(sx(p.x)) + "\" cy=\"" + num(sy(p.y)) + "\" r=\"5\" " +
         (p.hollow ? "fill=\"white\" stroke=\"" + p.color + "\" stroke-width=\"2\""
                   : "fill=\"" + p.color + "\" stroke=\"black\" stroke-width=\"0.5\"") +
         ">";
    if (!p.label.empty())
      s += "<title>" + detail::escape(p.label) + "</title>";
    s += "</circle>\n";
  }

  double ly = top + 10;
  for (const auto& [color, text] : plot.legend) {
    s += "<circle cx=\"" + num(W - right + 20) + "\" cy=\"" + num(ly) + "\" r=\"5\" fill=\"" + color +
         "\" stroke=\"black\" stroke-width=\"0.5\"/>\n";
    s += "<text x=\"" + num(W - right + 32) + "\" y=\"" + num(ly + 4) + "\">" + detail::escape(text) +
         "</text>\n";
    ly += 20;
  }
  s += "</svg>\n";
  return s;
}

}  // namespace hartree::experiments
