#pragma once

// Curve tables as CSV.
//
// Canonical: train_size,<EST>_M,<EST>_S,... one mean/std pair per series.
// Bare:      train_size,<name>,...         arbitrary metric columns, e.g.
//                                          external learning curves.
// Comma separated, '.' decimal point, LF line endings, numbers written with
// 17 significant digits so they read back bit-identical.

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "sldlab/error.hpp"
#include "sldlab/sweep.hpp"

namespace sldlab {

enum class CsvMode { Canonical, Bare };

class CsvParseError : public Error {
 public:
  CsvParseError(const std::string& what, std::size_t line)
      : Error(ErrorCode::Parse, what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

std::string format_curve_csv(const RiskCurve& curve);
void write_curve_csv(const RiskCurve& curve, const std::filesystem::path& path);

/// Throws CsvParseError (with 1-based line number) on malformed input and
/// Error(Io) if the file cannot be read.
RiskCurve parse_curve_csv(std::string_view text, CsvMode mode);
RiskCurve read_curve_csv(const std::filesystem::path& path, CsvMode mode = CsvMode::Canonical);

/// Header columns of a CSV file, in order.
std::vector<std::string> csv_columns(const RiskCurve& curve);

/// Column lookup over the CSV view of a curve: "train_size", "<name>_M",
/// "<name>_S" for canonical series and "<name>" for bare ones. Throws
/// Error(InvalidArgument) listing the available columns when missing.
std::vector<double> curve_column(const RiskCurve& curve, std::string_view column);

}  // namespace sldlab
