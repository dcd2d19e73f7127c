#include "eiprobe/plot.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>

#include "eiprobe/errors.hpp"

namespace eiprobe {

namespace {

constexpr double kWidth = 640.0;
constexpr double kHeight = 480.0;
constexpr double kLeft = 70.0;
constexpr double kRight = 150.0; // legend column
constexpr double kTop = 40.0;
constexpr double kBottom = 60.0;

constexpr std::array<const char*, 8> kPalette{"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                              "#ff7f0e", "#8c564b", "#e377c2", "#17becf"};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v == 0.0 ? 0.0 : v);
  return buf;
}

std::string label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v == 0.0 ? 0.0 : v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
    case '&':
      out += "&amp;";
      break;
    case '<':
      out += "&lt;";
      break;
    case '>':
      out += "&gt;";
      break;
    case '"':
      out += "&quot;";
      break;
    default:
      out += c;
    }
  }
  return out;
}

struct Range {
  double lo = INFINITY;
  double hi = -INFINITY;

  void add(double v) {
    if (std::isfinite(v)) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  void finish() {
    if (!(lo <= hi)) {
      lo = 0.0;
      hi = 1.0;
    } else if (lo == hi) {
      lo -= 0.5;
      hi += 0.5;
    }
  }
};

struct Frame {
  Range x, y;
  double px(double v) const {
    return kLeft + (v - x.lo) / (x.hi - x.lo) * (kWidth - kLeft - kRight);
  }
  double py(double v) const {
    return kHeight - kBottom - (v - y.lo) / (y.hi - y.lo) * (kHeight - kTop - kBottom);
  }
};

std::string open_svg(const PlotSpec& spec) {
  std::string s = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(kWidth) + "\" height=\"" +
       num(kHeight) + "\" viewBox=\"0 0 " + num(kWidth) + " " + num(kHeight) + "\">\n";
  s += "<rect x=\"0\" y=\"0\" width=\"" + num(kWidth) + "\" height=\"" + num(kHeight) +
       "\" fill=\"white\"/>\n";
  s += "<text x=\"" + num(kWidth / 2) + "\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">" +
       escape(spec.title) + "</text>\n";
  return s;
}

std::string axes(const Frame& f, const PlotSpec& spec) {
  const double x0 = kLeft, x1 = kWidth - kRight;
  const double y0 = kHeight - kBottom, y1 = kTop;
  std::string s;
  s += "<line class=\"axis\" x1=\"" + num(x0) + "\" y1=\"" + num(y0) + "\" x2=\"" + num(x1) +
       "\" y2=\"" + num(y0) + "\" stroke=\"black\"/>\n";
  s += "<line class=\"axis\" x1=\"" + num(x0) + "\" y1=\"" + num(y0) + "\" x2=\"" + num(x0) +
       "\" y2=\"" + num(y1) + "\" stroke=\"black\"/>\n";
  for (int k = 0; k <= 4; ++k) {
    const double xv = f.x.lo + (f.x.hi - f.x.lo) * k / 4.0;
    const double yv = f.y.lo + (f.y.hi - f.y.lo) * k / 4.0;
    s += "<text x=\"" + num(f.px(xv)) + "\" y=\"" + num(y0 + 16) +
         "\" text-anchor=\"middle\" font-size=\"11\">" + label(xv) + "</text>\n";
    s += "<text x=\"" + num(x0 - 6) + "\" y=\"" + num(f.py(yv) + 4) +
         "\" text-anchor=\"end\" font-size=\"11\">" + label(yv) + "</text>\n";
  }
  s += "<text x=\"" + num((x0 + x1) / 2) + "\" y=\"" + num(kHeight - 18) +
       "\" text-anchor=\"middle\" font-size=\"13\">" + escape(spec.x_label) + "</text>\n";
  s += "<text x=\"18\" y=\"" + num((y0 + y1) / 2) + "\" text-anchor=\"middle\" font-size=\"13\" "
       "transform=\"rotate(-90 18 " + num((y0 + y1) / 2) + ")\">" + escape(spec.y_label) +
       "</text>\n";
  return s;
}

std::string legend_entry(std::size_t k, const std::string& name) {
  const double y = kTop + 10 + 18.0 * static_cast<double>(k);
  const double x = kWidth - kRight + 14;
  const char* colour = kPalette[k % kPalette.size()];
  return "<rect x=\"" + num(x) + "\" y=\"" + num(y - 9) + "\" width=\"12\" height=\"12\" fill=\"" +
         colour + "\"/>\n<text x=\"" + num(x + 18) + "\" y=\"" + num(y + 1) +
         "\" font-size=\"12\">" + escape(name) + "</text>\n";
}

} // namespace

std::string line_plot_svg(const std::vector<Series>& series, const PlotSpec& spec) {
  bool any = false;
  Frame f;
  for (const auto& s : series) {
    for (const auto& [x, y] : s.points) {
      any = true;
      f.x.add(x);
      f.y.add(y);
    }
  }
  if (!any) {
    throw EmptyDataError("line plot '" + spec.title + "' has no data points");
  }
  f.x.finish();
  f.y.finish();
  std::string svg = open_svg(spec) + axes(f, spec);
  for (std::size_t k = 0; k < series.size(); ++k) {
    if (series[k].points.empty()) {
      continue;
    }
    svg += "<polyline fill=\"none\" stroke=\"" + std::string(kPalette[k % kPalette.size()]) +
           "\" stroke-width=\"1.5\" points=\"";
    bool first = true;
    for (const auto& [x, y] : series[k].points) {
      if (!first) {
        svg += ' ';
      }
      first = false;
      svg += num(f.px(x)) + "," + num(f.py(y));
    }
    svg += "\"/>\n";
    if (series.size() > 1 || !series[k].name.empty()) {
      svg += legend_entry(k, series[k].name);
    }
  }
  return svg + "</svg>\n";
}

std::string heatmap_svg(const Matrix& values, const std::vector<double>& x_values,
                        const std::vector<double>& y_values, const PlotSpec& spec) {
  if (values.empty()) {
    throw EmptyDataError("heatmap '" + spec.title + "' has no cells");
  }
  if (values.rows() != x_values.size() || values.cols() != y_values.size()) {
    throw DimensionError("heatmap axes do not match the value matrix");
  }
  Range v;
  for (double c : values.values()) {
    v.add(c);
  }
  const double vmin = v.lo <= v.hi ? v.lo : 0.0;
  const double vmax = v.lo <= v.hi ? v.hi : 0.0;
  Frame f;
  // Cells are centred on their grid values; pad by half a step.
  auto pad = [](const std::vector<double>& g, Range& r) {
    const double step = g.size() > 1 ? (g.back() - g.front()) / (g.size() - 1) : 1.0;
    r.add(g.front() - step / 2);
    r.add(g.back() + step / 2);
    r.finish();
    return step;
  };
  const double dx = pad(x_values, f.x);
  const double dy = pad(y_values, f.y);
  std::string svg = open_svg(spec);
  constexpr std::array<int, 3> lo_rgb{247, 251, 255};
  constexpr std::array<int, 3> hi_rgb{8, 48, 107};
  for (std::size_t i = 0; i < values.rows(); ++i) {
    for (std::size_t j = 0; j < values.cols(); ++j) {
      const double t = vmax > vmin ? (values(i, j) - vmin) / (vmax - vmin) : 0.0;
      char colour[8];
      std::snprintf(colour, sizeof colour, "#%02x%02x%02x",
                    static_cast<int>(std::lround(lo_rgb[0] + t * (hi_rgb[0] - lo_rgb[0]))),
                    static_cast<int>(std::lround(lo_rgb[1] + t * (hi_rgb[1] - lo_rgb[1]))),
                    static_cast<int>(std::lround(lo_rgb[2] + t * (hi_rgb[2] - lo_rgb[2]))));
      const double x0 = f.px(x_values[i] - dx / 2), x1 = f.px(x_values[i] + dx / 2);
      const double y0 = f.py(y_values[j] + dy / 2), y1 = f.py(y_values[j] - dy / 2);
      svg += "<rect class=\"cell\" x=\"" + num(x0) + "\" y=\"" + num(y0) + "\" width=\"" +
             num(x1 - x0) + "\" height=\"" + num(y1 - y0) + "\" fill=\"" + colour + "\"/>\n";
    }
  }
  svg += axes(f, spec);
  const double lx = kWidth - kRight + 14;
  svg += "<rect x=\"" + num(lx) + "\" y=\"" + num(kTop) + "\" width=\"14\" height=\"14\" "
         "fill=\"#08306b\"/>\n";
  svg += "<text class=\"max\" x=\"" + num(lx + 20) + "\" y=\"" + num(kTop + 11) +
         "\" font-size=\"12\">max " + label(vmax) + "</text>\n";
  svg += "<rect x=\"" + num(lx) + "\" y=\"" + num(kTop + 22) + "\" width=\"14\" height=\"14\" "
         "fill=\"#f7fbff\" stroke=\"black\"/>\n";
  svg += "<text class=\"min\" x=\"" + num(lx + 20) + "\" y=\"" + num(kTop + 33) +
         "\" font-size=\"12\">min " + label(vmin) + "</text>\n";
  return svg + "</svg>\n";
}

std::string trajectory_svg(const std::vector<CausalPlanePoint>& points, const PlotSpec& spec) {
  if (points.empty()) {
    throw EmptyDataError("trajectory plot '" + spec.title + "' has no points");
  }
  // Shared range on both axes so the nullcline is the diagonal.
  Range r;
  std::map<std::size_t, std::vector<const CausalPlanePoint*>> layers;
  for (const auto& p : points) {
    r.add(p.x);
    r.add(p.y);
    layers[p.layer_index].push_back(&p);
  }
  r.add(0.0);
  r.finish();
  const Frame f{r, r};
  std::string svg = open_svg(spec) + axes(f, spec);
  svg += "<line class=\"nullcline\" x1=\"" + num(f.px(r.lo)) + "\" y1=\"" + num(f.py(r.lo)) +
         "\" x2=\"" + num(f.px(r.hi)) + "\" y2=\"" + num(f.py(r.hi)) +
         "\" stroke=\"gray\" stroke-dasharray=\"4 3\"/>\n";
  std::size_t k = 0;
  for (const auto& [layer, pts] : layers) {
    std::string d;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      d += (i == 0 ? "M " : " L ") + num(f.px(pts[i]->x)) + " " + num(f.py(pts[i]->y));
    }
    if (pts.size() == 1) {
      d += " L " + num(f.px(pts[0]->x)) + " " + num(f.py(pts[0]->y));
    }
    const char* colour = kPalette[k % kPalette.size()];
    svg += "<path fill=\"none\" stroke=\"" + std::string(colour) +
           "\" stroke-width=\"1.5\" d=\"" + d + "\"/>\n";
    svg += "<circle cx=\"" + num(f.px(pts.back()->x)) + "\" cy=\"" + num(f.py(pts.back()->y)) +
           "\" r=\"3\" fill=\"" + colour + "\"/>\n";
    svg += legend_entry(k, "layer " + std::to_string(layer));
    ++k;
  }
  return svg + "</svg>\n";
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw IoError("cannot write '" + path.string() + "'");
  }
  out << content;
  if (!out) {
    throw IoError("failed writing '" + path.string() + "'");
  }
}

void emit_line_plot(const std::vector<Series>& series, const PlotSpec& spec,
                    const std::filesystem::path& path) {
  write_text_file(path, line_plot_svg(series, spec));
}

void emit_heatmap(const Matrix& values, const std::vector<double>& x_values,
                  const std::vector<double>& y_values, const PlotSpec& spec,
                  const std::filesystem::path& path) {
  write_text_file(path, heatmap_svg(values, x_values, y_values, spec));
}

void emit_trajectory(const std::vector<CausalPlanePoint>& points, const PlotSpec& spec,
                     const std::filesystem::path& path) {
  write_text_file(path, trajectory_svg(points, spec));
}

} // namespace eiprobe
