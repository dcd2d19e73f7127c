#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "eiprobe/harness.hpp"
#include "eiprobe/matrix.hpp"

namespace eiprobe {

struct PlotSpec {
  std::string title;
  std::string x_label;
  std::string y_label;
};

struct Series {
  std::string name;
  std::vector<std::pair<double, double>> points;
};

// Standalone SVG documents. Output bytes depend only on the arguments.
// Every series becomes one <polyline>; axes are <line> elements.
std::string line_plot_svg(const std::vector<Series>& series, const PlotSpec& spec);

// Cell (i, j) of `values` is drawn at x = x_values[i], y = y_values[j] on a
// two-colour linear ramp; the min and max are annotated.
std::string heatmap_svg(const Matrix& values, const std::vector<double>& x_values,
                        const std::vector<double>& y_values, const PlotSpec& spec);

// One <path> per layer in the causal plane (degeneracy on x, sensitivity on
// y), the y = x nullcline, and a per-layer legend.
std::string trajectory_svg(const std::vector<CausalPlanePoint>& points, const PlotSpec& spec);

void emit_line_plot(const std::vector<Series>& series, const PlotSpec& spec,
                    const std::filesystem::path& path);
void emit_heatmap(const Matrix& values, const std::vector<double>& x_values,
                  const std::vector<double>& y_values, const PlotSpec& spec,
                  const std::filesystem::path& path);
void emit_trajectory(const std::vector<CausalPlanePoint>& points, const PlotSpec& spec,
                     const std::filesystem::path& path);

void write_text_file(const std::filesystem::path& path, const std::string& content);

} // namespace eiprobe
