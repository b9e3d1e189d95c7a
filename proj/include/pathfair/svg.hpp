#pragma once

#include <string>
#include <vector>

namespace pathfair::svgplot {

// Minimal self-contained SVG charts: no dependencies, deterministic output.

struct Series {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
  std::string color;  // CSS color
};

std::string line_chart(const std::string& title, const std::string& x_label,
                       const std::string& y_label,
                       const std::vector<Series>& series, int width = 720,
                       int height = 420);

std::string bar_chart(const std::string& title,
                      const std::vector<std::string>& labels,
                      const std::vector<double>& values,
                      const std::string& y_label = "", int width = 720,
                      int height = 420);

// Stacks pre-rendered charts into one document, top to bottom.
std::string stack_vertical(const std::vector<std::string>& charts);

}  // namespace pathfair::svgplot
