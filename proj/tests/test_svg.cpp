#include <filesystem>
#include <fstream>
#include <sstream>

#include "sldlab/svg_plot.hpp"
#include "test_util.hpp"
#include "xml_check.hpp"

using namespace sldlab;
using sldlab::testing::count_occurrences;
using sldlab::testing::well_formed_xml;

namespace {

PlotSpec three_point_spec() {
  PlotSpec spec;
  spec.title = "Risk <vs> N & friends";
  spec.series.push_back({"ESGD", {1, 10, 100}, {0.9, 0.1, 0.012}, {0.01, 0.005, 0.001}});
  spec.series.push_back({"PCA", {1, 10, 100}, {0.95, 0.3, 0.04}, {}});
  return spec;
}

}  // namespace

TEST_SUITE("svg") {

TEST_CASE("three-point curve renders well-formed SVG") {
  const std::string svg = render_loglog_svg(three_point_spec());
  std::string why;
  CHECK_MESSAGE(well_formed_xml(svg, &why), why);
  CHECK(svg.find("<svg") != std::string::npos);
  CHECK(svg.find("version=\"1.1\"") != std::string::npos);
  CHECK(count_occurrences(svg, "<polyline") == 2);
  CHECK(svg.find("&lt;vs&gt;") != std::string::npos);
  CHECK(svg.find("&amp;") != std::string::npos);
  CHECK(svg.find("ESGD") != std::string::npos);
}

TEST_CASE("identical input gives identical bytes") {
  CHECK(render_loglog_svg(three_point_spec()) == render_loglog_svg(three_point_spec()));
  const auto dir = std::filesystem::temp_directory_path();
  write_loglog_svg(three_point_spec(), dir / "sldlab_svg_a.svg");
  write_loglog_svg(three_point_spec(), dir / "sldlab_svg_b.svg");
  auto slurp = [](const std::filesystem::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
  };
  CHECK(slurp(dir / "sldlab_svg_a.svg") == slurp(dir / "sldlab_svg_b.svg"));
  std::filesystem::remove(dir / "sldlab_svg_a.svg");
  std::filesystem::remove(dir / "sldlab_svg_b.svg");
}

TEST_CASE("overlays are dashed and extra") {
  PlotSpec spec = three_point_spec();
  spec.overlays.push_back({"fit", -1.0, std::log(0.9), 0.0, 1.0, 100.0});
  const std::string svg = render_loglog_svg(spec);
  CHECK(well_formed_xml(svg));
  CHECK(count_occurrences(svg, "<polyline") == 3);
  CHECK(count_occurrences(svg, "stroke-dasharray=\"6,4\" points") == 1);
}

TEST_CASE("nonpositive points are skipped, empty plots rejected") {
  PlotSpec spec;
  spec.series.push_back({"A", {1, 10, 100}, {0.5, -1.0, 0.1}, {}});
  CHECK(well_formed_xml(render_loglog_svg(spec)));
  PlotSpec empty;
  CHECK_THROWS_CODE(render_loglog_svg(empty), ErrorCode::InvalidArgument);
  PlotSpec nonpositive;
  nonpositive.series.push_back({"A", {1, 2}, {0.0, -1.0}, {}});
  CHECK_THROWS_CODE(render_loglog_svg(nonpositive), ErrorCode::InvalidArgument);
}

}  // TEST_SUITE
