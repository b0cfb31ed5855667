#include "sldlab/svg_plot.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

#include "sldlab/error.hpp"

namespace sldlab {
namespace {

constexpr std::array<const char*, 8> kPalette = {"#1f3a93", "#c0392b", "#27ae60", "#8e44ad",
                                                 "#d35400", "#16a085", "#7f8c8d", "#2c3e50"};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string escape_xml(const std::string& s) {
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

struct LogAxis {
  double lo = 0.0;  // log10 bounds, whole decades
  double hi = 1.0;
  double pixel_lo = 0.0;
  double pixel_hi = 1.0;

  double map(double v) const {
    return pixel_lo + (std::log10(v) - lo) / (hi - lo) * (pixel_hi - pixel_lo);
  }
};

void widen(double v, double& lo, double& hi) {
  if (v > 0.0 && std::isfinite(v)) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
}

std::string decade_label(int e) {
  if (e >= 0 && e <= 4) {
    std::string s = "1";
    s.append(static_cast<std::size_t>(e), '0');
    return s;
  }
  return "1e" + std::to_string(e);
}

}  // namespace

std::string render_loglog_svg(const PlotSpec& spec) {
  double xmin = std::numeric_limits<double>::infinity(), xmax = 0.0;
  double ymin = std::numeric_limits<double>::infinity(), ymax = 0.0;
  std::size_t drawable = 0;
  for (const PlotSeries& s : spec.series) {
    for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
      if (s.x[i] > 0.0 && s.y[i] > 0.0) {
        widen(s.x[i], xmin, xmax);
        widen(s.y[i], ymin, ymax);
        ++drawable;
      }
    }
  }
  if (drawable == 0) {
    throw Error(ErrorCode::InvalidArgument, "plot has no positive data points");
  }

  const double left = 80.0, right = 20.0, top = 40.0, bottom = 60.0;
  const double legend_h = 16.0 * static_cast<double>(spec.series.size() + spec.overlays.size());
  LogAxis ax{std::floor(std::log10(xmin)), std::ceil(std::log10(xmax)), left,
             spec.width - right};
  LogAxis ay{std::floor(std::log10(ymin)), std::ceil(std::log10(ymax)),
             spec.height - bottom, top};
  if (ax.hi == ax.lo) ax.hi += 1.0;
  if (ay.hi == ay.lo) ay.hi += 1.0;

  std::string o;
  o += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  o += "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" +
       std::to_string(spec.width) + "\" height=\"" + std::to_string(spec.height) +
       "\" viewBox=\"0 0 " + std::to_string(spec.width) + " " + std::to_string(spec.height) +
       "\">\n";
  o += "<rect x=\"0\" y=\"0\" width=\"" + std::to_string(spec.width) + "\" height=\"" +
       std::to_string(spec.height) + "\" fill=\"white\"/>\n";
  if (!spec.title.empty()) {
    o += "<text x=\"" + num(spec.width / 2.0) +
         "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"15\">" +
         escape_xml(spec.title) + "</text>\n";
  }

  // Grid and tick labels, one line per decade.
  o += "<g stroke=\"#dddddd\" stroke-width=\"1\">\n";
  for (int e = static_cast<int>(ax.lo); e <= static_cast<int>(ax.hi); ++e) {
    const double px = ax.map(std::pow(10.0, e));
    o += "<line x1=\"" + num(px) + "\" y1=\"" + num(ay.pixel_hi) + "\" x2=\"" + num(px) +
         "\" y2=\"" + num(ay.pixel_lo) + "\"/>\n";
  }
  for (int e = static_cast<int>(ay.lo); e <= static_cast<int>(ay.hi); ++e) {
    const double py = ay.map(std::pow(10.0, e));
    o += "<line x1=\"" + num(ax.pixel_lo) + "\" y1=\"" + num(py) + "\" x2=\"" +
         num(ax.pixel_hi) + "\" y2=\"" + num(py) + "\"/>\n";
  }
  o += "</g>\n";
  o += "<g font-family=\"sans-serif\" font-size=\"11\" fill=\"#333333\">\n";
  for (int e = static_cast<int>(ax.lo); e <= static_cast<int>(ax.hi); ++e) {
    o += "<text x=\"" + num(ax.map(std::pow(10.0, e))) + "\" y=\"" + num(ay.pixel_lo + 16) +
         "\" text-anchor=\"middle\">" + decade_label(e) + "</text>\n";
  }
  for (int e = static_cast<int>(ay.lo); e <= static_cast<int>(ay.hi); ++e) {
    o += "<text x=\"" + num(ax.pixel_lo - 6) + "\" y=\"" + num(ay.map(std::pow(10.0, e)) + 4) +
         "\" text-anchor=\"end\">" + decade_label(e) + "</text>\n";
  }
  o += "<text x=\"" + num((ax.pixel_lo + ax.pixel_hi) / 2) + "\" y=\"" +
       num(spec.height - 18.0) + "\" text-anchor=\"middle\" font-size=\"13\">" +
       escape_xml(spec.x_label) + "</text>\n";
  o += "<text x=\"18\" y=\"" + num((ay.pixel_lo + ay.pixel_hi) / 2) +
       "\" text-anchor=\"middle\" font-size=\"13\" transform=\"rotate(-90 18 " +
       num((ay.pixel_lo + ay.pixel_hi) / 2) + ")\">" + escape_xml(spec.y_label) + "</text>\n";
  o += "</g>\n";
  o += "<rect x=\"" + num(ax.pixel_lo) + "\" y=\"" + num(ay.pixel_hi) + "\" width=\"" +
       num(ax.pixel_hi - ax.pixel_lo) + "\" height=\"" + num(ay.pixel_lo - ay.pixel_hi) +
       "\" fill=\"none\" stroke=\"#333333\"/>\n";

  const auto clip_y = [&](double v) {
    return std::clamp(v, std::pow(10.0, ay.lo), std::pow(10.0, ay.hi));
  };

  for (std::size_t si = 0; si < spec.series.size(); ++si) {
    const PlotSeries& s = spec.series[si];
    const char* color = kPalette[si % kPalette.size()];
    std::string points;
    std::string bars;
    std::string marks;
    for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
      if (!(s.x[i] > 0.0 && s.y[i] > 0.0)) continue;
      const double px = ax.map(s.x[i]);
      const double py = ay.map(s.y[i]);
      if (!points.empty()) points += ' ';
      points += num(px) + "," + num(py);
      marks += "<circle cx=\"" + num(px) + "\" cy=\"" + num(py) + "\" r=\"2.5\"/>\n";
      if (i < s.err.size() && s.err[i] > 0.0) {
        const double lo = s.y[i] - s.err[i];
        const double y_lo = lo > 0.0 ? ay.map(clip_y(lo)) : ay.pixel_lo;
        const double y_hi = ay.map(clip_y(s.y[i] + s.err[i]));
        bars += "<line x1=\"" + num(px) + "\" y1=\"" + num(y_lo) + "\" x2=\"" + num(px) +
                "\" y2=\"" + num(y_hi) + "\"/>\n";
      }
    }
    o += "<g stroke=\"" + std::string(color) + "\" fill=\"" + color + "\">\n";
    o += "<polyline fill=\"none\" stroke-width=\"1.6\" points=\"" + points + "\"/>\n";
    o += bars;
    o += marks;
    o += "</g>\n";
  }

  for (std::size_t oi = 0; oi < spec.overlays.size(); ++oi) {
    const PlotOverlay& ov = spec.overlays[oi];
    const char* color = kPalette[oi % kPalette.size()];
    std::string points;
    constexpr int kSteps = 48;
    const double a = std::log10(std::max(ov.n_lo, std::pow(10.0, ax.lo)));
    const double b = std::log10(std::min(ov.n_hi, std::pow(10.0, ax.hi)));
    for (int i = 0; i <= kSteps && b > a; ++i) {
      const double n = std::pow(10.0, a + (b - a) * i / kSteps);
      const double v = ov.floor + std::exp(ov.log_beta + ov.alpha * std::log(n));
      if (!(v > 0.0) || !std::isfinite(v)) continue;
      if (!points.empty()) points += ' ';
      points += num(ax.map(n)) + "," + num(ay.map(clip_y(v)));
    }
    if (points.empty()) continue;
    o += "<polyline fill=\"none\" stroke=\"" + std::string(color) +
         "\" stroke-width=\"1.2\" stroke-dasharray=\"6,4\" points=\"" + points + "\"/>\n";
  }

  // Legend, top right inside the plot frame.
  const double lx = ax.pixel_hi - 230.0;
  double ly = ay.pixel_hi + 10.0;
  o += "<g font-family=\"sans-serif\" font-size=\"11\">\n";
  o += "<rect x=\"" + num(lx - 6) + "\" y=\"" + num(ly - 4) + "\" width=\"230\" height=\"" +
       num(legend_h + 6) + "\" fill=\"white\" stroke=\"#999999\"/>\n";
  for (std::size_t si = 0; si < spec.series.size(); ++si) {
    const char* color = kPalette[si % kPalette.size()];
    o += "<line x1=\"" + num(lx) + "\" y1=\"" + num(ly + 6) + "\" x2=\"" + num(lx + 22) +
         "\" y2=\"" + num(ly + 6) + "\" stroke=\"" + color + "\" stroke-width=\"1.6\"/>\n";
    o += "<text x=\"" + num(lx + 28) + "\" y=\"" + num(ly + 10) + "\">" +
         escape_xml(spec.series[si].name) + "</text>\n";
    ly += 16.0;
  }
  for (std::size_t oi = 0; oi < spec.overlays.size(); ++oi) {
    const char* color = kPalette[oi % kPalette.size()];
    o += "<line x1=\"" + num(lx) + "\" y1=\"" + num(ly + 6) + "\" x2=\"" + num(lx + 22) +
         "\" y2=\"" + num(ly + 6) + "\" stroke=\"" + color +
         "\" stroke-width=\"1.2\" stroke-dasharray=\"6,4\"/>\n";
    o += "<text x=\"" + num(lx + 28) + "\" y=\"" + num(ly + 10) + "\">" +
         escape_xml(spec.overlays[oi].label) + "</text>\n";
    ly += 16.0;
  }
  o += "</g>\n</svg>\n";
  return o;
}

void write_loglog_svg(const PlotSpec& spec, const std::filesystem::path& path) {
  const std::string svg = render_loglog_svg(spec);
  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw Error(ErrorCode::Io, "cannot open " + path.string() + " for writing");
  file << svg;
  if (!file) throw Error(ErrorCode::Io, "failed writing " + path.string());
}

}  // namespace sldlab
