#include <filesystem>
#include <fstream>

#include "sldlab/curve_csv.hpp"
#include "test_util.hpp"

using namespace sldlab;

namespace {

RiskCurve three_point_curve() {
  RiskCurve c;
  c.train_sizes = {1, 10, 100};
  c.series.push_back({"ESGD", {0.9, 0.1 / 3.0, 0.0123456789012345678}, {0.01, 1e-17, 0.0}});
  c.series.push_back({"PCA", {0.95, 0.2, 2.0 / 3.0}, {0.02, 0.003, 1.0 / 7.0}});
  return c;
}

std::size_t parse_error_line(std::string_view text, CsvMode mode) {
  try {
    (void)parse_curve_csv(text, mode);
  } catch (const CsvParseError& e) {
    return e.line();
  }
  return 0;
}

std::string parse_error_text(std::string_view text, CsvMode mode) {
  try {
    (void)parse_curve_csv(text, mode);
  } catch (const CsvParseError& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST_SUITE("curve_csv") {

TEST_CASE("canonical header and formatting") {
  const std::string text = format_curve_csv(three_point_curve());
  CHECK(text.rfind("train_size,ESGD_M,ESGD_S,PCA_M,PCA_S\n", 0) == 0);
  CHECK(text.find('\r') == std::string::npos);
  CHECK(text.back() == '\n');
}

TEST_CASE("round trip is field-identical") {
  const RiskCurve c = three_point_curve();
  const RiskCurve back = parse_curve_csv(format_curve_csv(c), CsvMode::Canonical);
  CHECK(back.train_sizes == c.train_sizes);
  REQUIRE(back.series.size() == 2);
  for (std::size_t s = 0; s < 2; ++s) {
    CHECK(back.series[s].name == c.series[s].name);
    CHECK(back.series[s].mean == c.series[s].mean);
    CHECK(back.series[s].std == c.series[s].std);
  }
  const auto path = std::filesystem::temp_directory_path() / "sldlab_roundtrip_test.csv";
  write_curve_csv(c, path);
  const RiskCurve file_back = read_curve_csv(path);
  CHECK(format_curve_csv(file_back) == format_curve_csv(c));
  std::filesystem::remove(path);
}

TEST_CASE("missing partner column is named") {
  const std::string text = "train_size,ESGD_M,PCA_M,PCA_S\n1,0.5,0.6,0.1\n";
  const std::string msg = parse_error_text(text, CsvMode::Canonical);
  CHECK(msg.find("ESGD_S") != std::string::npos);
  CHECK(parse_error_line(text, CsvMode::Canonical) == 1);
}

TEST_CASE("errors carry line numbers") {
  CHECK(parse_error_line("train_size,A_M,A_S\n1,0.5,0.1\n2,abc,0.1\n", CsvMode::Canonical) == 3);
  CHECK(parse_error_line("train_size,A_M,A_S\n1,0.5,0.1\n2,0.4\n", CsvMode::Canonical) == 3);
  CHECK(parse_error_line("train_size,A_M,A_S\n5,0.5,0.1\n2,0.4,0.1\n", CsvMode::Canonical) == 3);
  CHECK(parse_error_line("size,A_M,A_S\n5,0.5,0.1\n", CsvMode::Canonical) == 1);
  CHECK(parse_error_line("", CsvMode::Canonical) == 1);
  CHECK(parse_error_line("train_size,A_M,A_S\n", CsvMode::Canonical) == 1);
  CHECK(parse_error_text("train_size,A_M,A_S\n1,0.5,0.1\n2,abc,0.1\n", CsvMode::Canonical)
            .find("A_M") != std::string::npos);
}

TEST_CASE("bare mode reads external curves") {
  const std::string text = "train_size,psnr\n100,30.1\n1000,31.5\n10000,32.2\n";
  CHECK(parse_error_line(text, CsvMode::Canonical) == 1);
  const RiskCurve c = parse_curve_csv(text, CsvMode::Bare);
  REQUIRE(c.series.size() == 1);
  CHECK(c.series[0].name == "psnr");
  CHECK(c.series[0].std.empty());
  CHECK(curve_column(c, "psnr") == std::vector<double>{30.1, 31.5, 32.2});
  CHECK(csv_columns(c) == std::vector<std::string>{"train_size", "psnr"});
  const RiskCurve again = parse_curve_csv(format_curve_csv(c), CsvMode::Bare);
  CHECK(again.series[0].mean == c.series[0].mean);
}

TEST_CASE("columns and lookup") {
  const RiskCurve c = three_point_curve();
  CHECK(csv_columns(c) ==
        std::vector<std::string>{"train_size", "ESGD_M", "ESGD_S", "PCA_M", "PCA_S"});
  CHECK(curve_column(c, "train_size") == c.train_sizes);
  CHECK(curve_column(c, "PCA_S") == c.series[1].std);
  try {
    (void)curve_column(c, "NOPE");
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::InvalidArgument);
    CHECK(std::string(e.what()).find("ESGD_M") != std::string::npos);
  }
}

TEST_CASE("CRLF input and missing file") {
  const RiskCurve c = parse_curve_csv("train_size,A_M,A_S\r\n1,0.5,0.1\r\n", CsvMode::Canonical);
  CHECK(c.series[0].mean[0] == 0.5);
  CHECK_THROWS_CODE(read_curve_csv("/nonexistent/dir/none.csv"), ErrorCode::Io);
}

}  // TEST_SUITE
