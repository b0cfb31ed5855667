#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace sldlab {

struct PlotSeries {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
  std::vector<double> err;  // symmetric error bars; empty for none
};

/// floor + beta * N^alpha drawn as a dashed line over [n_lo, n_hi].
struct PlotOverlay {
  std::string label;
  double alpha = 0.0;
  double log_beta = 0.0;
  double floor = 0.0;
  double n_lo = 1.0;
  double n_hi = 10.0;
};

struct PlotSpec {
  std::string title;
  std::string x_label = "Training set size N";
  std::string y_label = "Risk";
  std::vector<PlotSeries> series;
  std::vector<PlotOverlay> overlays;
  int width = 720;
  int height = 480;
};

/// SVG 1.1 log-log line chart. Non-positive points are skipped (they have no
/// position on a log axis). Output depends only on `spec`. Throws
/// Error(InvalidArgument) when there is nothing to draw.
std::string render_loglog_svg(const PlotSpec& spec);

void write_loglog_svg(const PlotSpec& spec, const std::filesystem::path& path);

}  // namespace sldlab
