#pragma once

#include <string>
#include <vector>

namespace tonelex::svg {

struct Series {
  std::vector<double> x;
  std::vector<double> y;
  std::string color = "black";
  double width = 1.5;
  bool dashed = false;
  std::string label;
};

struct Panel {
  std::string title;
  std::vector<Series> series;
};

/// Self-contained SVG (inline styles only) laying the panels out in a grid
/// of `columns` columns, each panel panel_w x panel_h. Axes are scaled per
/// panel over the union of its series.
std::string render_panel_grid(const std::vector<Panel>& panels, int columns,
                              int panel_w = 600, int panel_h = 400);

struct BoxGroup {
  std::string label;
  std::vector<double> values;
  std::string color = "steelblue";
};

/// Simple box-and-whisker summary: median, quartiles (linear interpolation),
/// whiskers at min/max.
std::string render_boxplot(const std::string& title,
                           const std::vector<BoxGroup>& groups, int width = 600,
                           int height = 400);

}  // namespace tonelex::svg
