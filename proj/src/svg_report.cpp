#include "tonelex/svg_report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "tonelex/errors.hpp"

namespace tonelex::svg {

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

std::string xml_escape(const std::string& s) {
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

struct Range {
  double lo = 0.0, hi = 1.0;
  void expand(double v) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  void pad() {
    if (hi - lo < 1e-12) {
      lo -= 1.0;
      hi += 1.0;
    }
    double m = 0.06 * (hi - lo);
    lo -= m;
    hi += m;
  }
};

double quantile(std::vector<double> v, double q) {
  std::sort(v.begin(), v.end());
  if (v.size() == 1) return v[0];
  double h = q * (v.size() - 1);
  std::size_t lo = static_cast<std::size_t>(h);
  std::size_t hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (h - lo) * (v[hi] - v[lo]);
}

}  // namespace

std::string render_panel_grid(const std::vector<Panel>& panels, int columns,
                              int panel_w, int panel_h) {
  if (panels.empty() || columns < 1)
    throw Error(Errc::config_error, "panel grid needs panels and columns");
  const int rows = (static_cast<int>(panels.size()) + columns - 1) / columns;
  const int width = columns * panel_w;
  const int height = rows * panel_h;
  const double ml = 46, mr = 12, mt = 30, mb = 28;  // per-panel margins

  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
      << "\" height=\"" << height << "\" viewBox=\"0 0 " << width << " " << height
      << "\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

  for (std::size_t p = 0; p < panels.size(); ++p) {
    const Panel& panel = panels[p];
    const double ox = static_cast<double>(p % columns) * panel_w;
    const double oy = static_cast<double>(p / columns) * panel_h;
    const double plot_w = panel_w - ml - mr;
    const double plot_h = panel_h - mt - mb;

    Range rx, ry;
    bool any = false;
    for (const Series& s : panel.series)
      for (std::size_t i = 0; i < s.x.size(); ++i) {
        if (!any) {
          rx = {s.x[i], s.x[i]};
          ry = {s.y[i], s.y[i]};
          any = true;
        }
        rx.expand(s.x[i]);
        ry.expand(s.y[i]);
      }
    rx.pad();
    ry.pad();

    auto px = [&](double x) { return ox + ml + (x - rx.lo) / (rx.hi - rx.lo) * plot_w; };
    auto py = [&](double y) { return oy + mt + (ry.hi - y) / (ry.hi - ry.lo) * plot_h; };

    out << "<g>\n<rect x=\"" << num(ox + ml) << "\" y=\"" << num(oy + mt)
        << "\" width=\"" << num(plot_w) << "\" height=\"" << num(plot_h)
        << "\" fill=\"none\" stroke=\"#999\" stroke-width=\"1\"/>\n";
    out << "<text x=\"" << num(ox + panel_w / 2.0) << "\" y=\"" << num(oy + 19)
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\">"
        << xml_escape(panel.title) << "</text>\n";

    // y=0 reference when it lies inside the range
    if (ry.lo < 0.0 && ry.hi > 0.0)
      out << "<line x1=\"" << num(px(rx.lo)) << "\" y1=\"" << num(py(0))
          << "\" x2=\"" << num(px(rx.hi)) << "\" y2=\"" << num(py(0))
          << "\" stroke=\"#bbb\" stroke-width=\"1\" stroke-dasharray=\"4 3\"/>\n";

    for (const Series& s : panel.series) {
      if (s.x.empty()) continue;
      out << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\""
          << num(s.width) << "\"";
      if (s.dashed) out << " stroke-dasharray=\"6 4\"";
      out << " points=\"";
      for (std::size_t i = 0; i < s.x.size(); ++i) {
        if (i) out << ' ';
        out << num(px(s.x[i])) << ',' << num(py(s.y[i]));
      }
      out << "\"/>\n";
    }

    // legend: colored labels across the bottom
    double lx = ox + ml;
    for (const Series& s : panel.series) {
      if (s.label.empty()) continue;
      out << "<text x=\"" << num(lx) << "\" y=\"" << num(oy + panel_h - 8)
          << "\" font-family=\"sans-serif\" font-size=\"12\" fill=\"" << s.color
          << "\">" << xml_escape(s.label) << "</text>\n";
      lx += 14.0 + 7.0 * s.label.size();
    }
    out << "</g>\n";
  }
  out << "</svg>\n";
  return out.str();
}

std::string render_boxplot(const std::string& title,
                           const std::vector<BoxGroup>& groups, int width,
                           int height) {
  if (groups.empty())
    throw Error(Errc::config_error, "boxplot needs at least one group");
  const double ml = 50, mr = 14, mt = 34, mb = 40;
  const double plot_w = width - ml - mr;
  const double plot_h = height - mt - mb;

  Range ry;
  bool any = false;
  for (const BoxGroup& g : groups)
    for (double v : g.values) {
      if (!any) {
        ry = {v, v};
        any = true;
      }
      ry.expand(v);
    }
  if (!any) throw Error(Errc::empty_data, "boxplot groups are empty");
  ry.pad();

  auto py = [&](double y) { return mt + (ry.hi - y) / (ry.hi - ry.lo) * plot_h; };

  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
      << "\" height=\"" << height << "\" viewBox=\"0 0 " << width << " " << height
      << "\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << num(width / 2.0)
      << "\" y=\"20\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"14\">"
      << xml_escape(title) << "</text>\n";
  out << "<rect x=\"" << num(ml) << "\" y=\"" << num(mt) << "\" width=\""
      << num(plot_w) << "\" height=\"" << num(plot_h)
      << "\" fill=\"none\" stroke=\"#999\"/>\n";

  const double slot = plot_w / groups.size();
  for (std::size_t i = 0; i < groups.size(); ++i) {
    const BoxGroup& g = groups[i];
    if (g.values.empty()) continue;
    const double cx = ml + slot * (i + 0.5);
    const double half = std::min(slot * 0.3, 40.0);
    const double q1 = quantile(g.values, 0.25);
    const double q2 = quantile(g.values, 0.5);
    const double q3 = quantile(g.values, 0.75);
    const double lo = *std::min_element(g.values.begin(), g.values.end());
    const double hi = *std::max_element(g.values.begin(), g.values.end());

    out << "<line x1=\"" << num(cx) << "\" y1=\"" << num(py(lo)) << "\" x2=\""
        << num(cx) << "\" y2=\"" << num(py(hi)) << "\" stroke=\"#444\"/>\n";
    for (double w : {lo, hi})
      out << "<line x1=\"" << num(cx - half * 0.6) << "\" y1=\"" << num(py(w))
          << "\" x2=\"" << num(cx + half * 0.6) << "\" y2=\"" << num(py(w))
          << "\" stroke=\"#444\"/>\n";
    out << "<rect x=\"" << num(cx - half) << "\" y=\"" << num(py(q3))
        << "\" width=\"" << num(2 * half) << "\" height=\"" << num(py(q1) - py(q3))
        << "\" fill=\"" << g.color << "\" fill-opacity=\"0.55\" stroke=\"#333\"/>\n";
    out << "<line x1=\"" << num(cx - half) << "\" y1=\"" << num(py(q2))
        << "\" x2=\"" << num(cx + half) << "\" y2=\"" << num(py(q2))
        << "\" stroke=\"#111\" stroke-width=\"2\"/>\n";
    out << "<text x=\"" << num(cx) << "\" y=\"" << num(height - 14.0)
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">"
        << xml_escape(g.label) << "</text>\n";
  }
  out << "</svg>\n";
  return out.str();
}

}  // namespace tonelex::svg
