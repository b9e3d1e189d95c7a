#include "pathfair/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace pathfair::svgplot {

namespace {

std::string fmt(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

struct Range {
  double lo = 0.0, hi = 1.0;
};

Range nice_range(double lo, double hi) {
  if (!(hi > lo)) {
    lo -= 0.5;
    hi += 0.5;
  }
  const double pad = 0.05 * (hi - lo);
  return {lo - pad, hi + pad};
}

double tick_step(const Range& r, int target_ticks = 6) {
  const double span = r.hi - r.lo;
  const double raw = span / target_ticks;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  for (double m : {1.0, 2.0, 5.0, 10.0}) {
    if (raw <= m * mag) return m * mag;
  }
  return 10.0 * mag;
}

const char* kPalette[] = {"#1f6fb2", "#d1495b", "#2e8b57", "#946bb5",
                          "#c98a1c", "#4f5d75"};

}  // namespace

std::string line_chart(const std::string& title, const std::string& x_label,
                       const std::string& y_label,
                       const std::vector<Series>& series, int width,
                       int height) {
  const double ml = 64, mr = 18, mt = 36, mb = 46;
  const double pw = width - ml - mr, ph = height - mt - mb;

  double xlo = 1e300, xhi = -1e300, ylo = 1e300, yhi = -1e300;
  for (const auto& s : series) {
    for (double v : s.x) {
      xlo = std::min(xlo, v);
      xhi = std::max(xhi, v);
    }
    for (double v : s.y) {
      ylo = std::min(ylo, v);
      yhi = std::max(yhi, v);
    }
  }
  if (xlo > xhi) {
    xlo = 0;
    xhi = 1;
    ylo = 0;
    yhi = 1;
  }
  const Range rx = nice_range(xlo, xhi), ry = nice_range(ylo, yhi);
  auto sx = [&](double v) { return ml + pw * (v - rx.lo) / (rx.hi - rx.lo); };
  auto sy = [&](double v) { return mt + ph * (1.0 - (v - ry.lo) / (ry.hi - ry.lo)); };

  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
    << "\" height=\"" << height << "\" viewBox=\"0 0 " << width << " "
    << height << "\" font-family=\"Helvetica,Arial,sans-serif\">\n";
  o << "<rect width=\"" << width << "\" height=\"" << height
    << "\" fill=\"white\"/>\n";
  o << "<text x=\"" << width / 2 << "\" y=\"20\" text-anchor=\"middle\" "
    << "font-size=\"14\" font-weight=\"bold\">" << escape(title)
    << "</text>\n";

  // Grid + ticks.
  const double xstep = tick_step(rx), ystep = tick_step(ry);
  for (double t = std::ceil(rx.lo / xstep) * xstep; t <= rx.hi + 1e-12;
       t += xstep) {
    const double px = sx(t);
    o << "<line x1=\"" << fmt(px) << "\" y1=\"" << mt << "\" x2=\"" << fmt(px)
      << "\" y2=\"" << mt + ph << "\" stroke=\"#e4e4e4\"/>\n";
    o << "<text x=\"" << fmt(px) << "\" y=\"" << mt + ph + 16
      << "\" text-anchor=\"middle\" font-size=\"11\">" << fmt(t)
      << "</text>\n";
  }
  for (double t = std::ceil(ry.lo / ystep) * ystep; t <= ry.hi + 1e-12;
       t += ystep) {
    const double py = sy(t);
    o << "<line x1=\"" << ml << "\" y1=\"" << fmt(py) << "\" x2=\"" << ml + pw
      << "\" y2=\"" << fmt(py) << "\" stroke=\"#e4e4e4\"/>\n";
    o << "<text x=\"" << ml - 6 << "\" y=\"" << fmt(py + 4)
      << "\" text-anchor=\"end\" font-size=\"11\">" << fmt(t) << "</text>\n";
  }
  o << "<rect x=\"" << ml << "\" y=\"" << mt << "\" width=\"" << pw
    << "\" height=\"" << ph << "\" fill=\"none\" stroke=\"#333\"/>\n";

  // Series.
  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& s = series[k];
    const std::string color =
        s.color.empty() ? kPalette[k % 6] : s.color;
    o << "<polyline fill=\"none\" stroke=\"" << color
      << "\" stroke-width=\"2\" points=\"";
    for (std::size_t i = 0; i < s.x.size(); ++i)
      o << fmt(sx(s.x[i])) << "," << fmt(sy(s.y[i])) << " ";
    o << "\"/>\n";
    for (std::size_t i = 0; i < s.x.size(); ++i)
      o << "<circle cx=\"" << fmt(sx(s.x[i])) << "\" cy=\"" << fmt(sy(s.y[i]))
        << "\" r=\"2.5\" fill=\"" << color << "\"/>\n";
    // Legend entry.
    const double lx = ml + 12, lyy = mt + 14 + 16.0 * k;
    o << "<line x1=\"" << lx << "\" y1=\"" << lyy << "\" x2=\"" << lx + 22
      << "\" y2=\"" << lyy << "\" stroke=\"" << color
      << "\" stroke-width=\"2\"/>\n";
    o << "<text x=\"" << lx + 28 << "\" y=\"" << lyy + 4
      << "\" font-size=\"11\">" << escape(s.name) << "</text>\n";
  }

  // Axis labels.
  o << "<text x=\"" << ml + pw / 2 << "\" y=\"" << height - 10
    << "\" text-anchor=\"middle\" font-size=\"12\">" << escape(x_label)
    << "</text>\n";
  o << "<text x=\"16\" y=\"" << mt + ph / 2
    << "\" text-anchor=\"middle\" font-size=\"12\" transform=\"rotate(-90 16 "
    << mt + ph / 2 << ")\">" << escape(y_label) << "</text>\n";
  o << "</svg>\n";
  return o.str();
}

std::string bar_chart(const std::string& title,
                      const std::vector<std::string>& labels,
                      const std::vector<double>& values,
                      const std::string& y_label, int width, int height) {
  const double ml = 64, mr = 18, mt = 36, mb = 56;
  const double pw = width - ml - mr, ph = height - mt - mb;
  double ylo = 0.0, yhi = 0.0;
  for (double v : values) {
    ylo = std::min(ylo, v);
    yhi = std::max(yhi, v);
  }
  const Range ry = nice_range(std::min(ylo, 0.0), std::max(yhi, 1e-9));
  auto sy = [&](double v) {
    return mt + ph * (1.0 - (v - ry.lo) / (ry.hi - ry.lo));
  };

  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
    << "\" height=\"" << height << "\" viewBox=\"0 0 " << width << " "
    << height << "\" font-family=\"Helvetica,Arial,sans-serif\">\n";
  o << "<rect width=\"" << width << "\" height=\"" << height
    << "\" fill=\"white\"/>\n";
  o << "<text x=\"" << width / 2 << "\" y=\"20\" text-anchor=\"middle\" "
    << "font-size=\"14\" font-weight=\"bold\">" << escape(title)
    << "</text>\n";
  const double ystep = tick_step(ry);
  for (double t = std::ceil(ry.lo / ystep) * ystep; t <= ry.hi + 1e-12;
       t += ystep) {
    const double py = sy(t);
    o << "<line x1=\"" << ml << "\" y1=\"" << fmt(py) << "\" x2=\"" << ml + pw
      << "\" y2=\"" << fmt(py) << "\" stroke=\"#e4e4e4\"/>\n";
    o << "<text x=\"" << ml - 6 << "\" y=\"" << fmt(py + 4)
      << "\" text-anchor=\"end\" font-size=\"11\">" << fmt(t) << "</text>\n";
  }
  const std::size_t nb = values.size();
  const double slot = pw / std::max<std::size_t>(nb, 1);
  for (std::size_t i = 0; i < nb; ++i) {
    const double bx = ml + slot * i + slot * 0.2;
    const double bw = slot * 0.6;
    const double y0 = sy(0.0), y1 = sy(values[i]);
    o << "<rect x=\"" << fmt(bx) << "\" y=\"" << fmt(std::min(y0, y1))
      << "\" width=\"" << fmt(bw) << "\" height=\"" << fmt(std::abs(y0 - y1))
      << "\" fill=\"" << kPalette[i % 6] << "\"/>\n";
    o << "<text x=\"" << fmt(bx + bw / 2) << "\" y=\"" << mt + ph + 16
      << "\" text-anchor=\"middle\" font-size=\"11\">" << escape(labels[i])
      << "</text>\n";
    o << "<text x=\"" << fmt(bx + bw / 2) << "\" y=\""
      << fmt(std::min(y0, y1) - 4) << "\" text-anchor=\"middle\" "
      << "font-size=\"10\">" << fmt(values[i]) << "</text>\n";
  }
  o << "<rect x=\"" << ml << "\" y=\"" << mt << "\" width=\"" << pw
    << "\" height=\"" << ph << "\" fill=\"none\" stroke=\"#333\"/>\n";
  o << "<text x=\"16\" y=\"" << mt + ph / 2
    << "\" text-anchor=\"middle\" font-size=\"12\" transform=\"rotate(-90 16 "
    << mt + ph / 2 << ")\">" << escape(y_label) << "</text>\n";
  o << "</svg>\n";
  return o.str();
}

std::string stack_vertical(const std::vector<std::string>& charts) {
  // Parse width/height from each chart's opening tag.
  int total_h = 0, max_w = 0;
  std::vector<std::pair<int, int>> dims;
  for (const auto& c : charts) {
    int w = 720, h = 420;
    const auto wp = c.find("width=\"");
    if (wp != std::string::npos) w = std::atoi(c.c_str() + wp + 7);
    const auto hp = c.find("height=\"");
    if (hp != std::string::npos) h = std::atoi(c.c_str() + hp + 8);
    dims.push_back({w, h});
    total_h += h;
    max_w = std::max(max_w, w);
  }
  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << max_w
    << "\" height=\"" << total_h << "\">\n";
  int y = 0;
  for (std::size_t i = 0; i < charts.size(); ++i) {
    std::string body = charts[i];
    // Re-anchor the nested document at its vertical offset.
    const auto pos = body.find("<svg ");
    if (pos != std::string::npos) {
      body.insert(pos + 5, "y=\"" + std::to_string(y) + "\" ");
    }
    o << body;
    y += dims[i].second;
  }
  o << "</svg>\n";
  return o.str();
}

}  // namespace pathfair::svgplot
