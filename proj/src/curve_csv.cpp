#include "sldlab/curve_csv.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace sldlab {
namespace {

std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

double parse_number(std::string_view field, std::size_t line, std::string_view column) {
  field = trim(field);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (field.empty() || ec != std::errc() || ptr != field.data() + field.size()) {
    throw CsvParseError("line " + std::to_string(line) + ": column '" + std::string(column) +
                            "': cannot parse '" + std::string(field) + "' as a number",
                        line);
  }
  if (!std::isfinite(v)) {
    throw CsvParseError("line " + std::to_string(line) + ": column '" + std::string(column) +
                            "' is not finite",
                        line);
  }
  return v;
}

bool ends_with(std::string_view s, std::string_view suffix) {
  return s.size() > suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

}  // namespace

std::vector<std::string> csv_columns(const RiskCurve& curve) {
  std::vector<std::string> cols{"train_size"};
  for (const Series& s : curve.series) {
    if (s.std.empty()) {
      cols.push_back(s.name);
    } else {
      cols.push_back(s.name + "_M");
      cols.push_back(s.name + "_S");
    }
  }
  return cols;
}

std::string format_curve_csv(const RiskCurve& curve) {
  std::string out;
  const auto cols = csv_columns(curve);
  for (std::size_t i = 0; i < cols.size(); ++i) {
    if (i) out += ',';
    out += cols[i];
  }
  out += '\n';
  for (std::size_t row = 0; row < curve.train_sizes.size(); ++row) {
    out += format_number(curve.train_sizes[row]);
    for (const Series& s : curve.series) {
      out += ',';
      out += format_number(s.mean.at(row));
      if (!s.std.empty()) {
        out += ',';
        out += format_number(s.std.at(row));
      }
    }
    out += '\n';
  }
  return out;
}

void write_curve_csv(const RiskCurve& curve, const std::filesystem::path& path) {
  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw Error(ErrorCode::Io, "cannot open " + path.string() + " for writing");
  file << format_curve_csv(curve);
  file.close();
  if (!file) throw Error(ErrorCode::Io, "failed writing " + path.string());
}

RiskCurve parse_curve_csv(std::string_view text, CsvMode mode) {
  std::vector<std::pair<std::size_t, std::string_view>> lines;
  {
    std::size_t start = 0;
    std::size_t number = 1;
    while (start < text.size()) {
      std::size_t end = text.find('\n', start);
      if (end == std::string_view::npos) end = text.size();
      const std::string_view line = trim(text.substr(start, end - start));
      if (!line.empty()) lines.emplace_back(number, line);
      start = end + 1;
      ++number;
    }
  }
  if (lines.empty()) throw CsvParseError("empty CSV input", 1);

  const std::size_t header_line = lines.front().first;
  std::vector<std::string> header;
  for (std::string_view f : split_fields(lines.front().second)) header.emplace_back(trim(f));
  if (header.front() != "train_size") {
    throw CsvParseError("line " + std::to_string(header_line) +
                            ": missing column 'train_size' (first column is '" +
                            header.front() + "')",
                        header_line);
  }
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i].empty()) {
      throw CsvParseError("line " + std::to_string(header_line) + ": empty column name",
                          header_line);
    }
    for (std::size_t j = 0; j < i; ++j) {
      if (header[i] == header[j]) {
        throw CsvParseError("line " + std::to_string(header_line) + ": duplicate column '" +
                                header[i] + "'",
                            header_line);
      }
    }
  }

  // Map header columns to (series index, is_std).
  RiskCurve curve;
  struct Slot {
    std::size_t series;
    bool is_std;
  };
  std::vector<Slot> slots(header.size());
  if (mode == CsvMode::Bare) {
    if (header.size() < 2) {
      throw CsvParseError("line " + std::to_string(header_line) +
                              ": bare curve needs train_size and at least one metric column",
                          header_line);
    }
    for (std::size_t c = 1; c < header.size(); ++c) {
      slots[c] = {curve.series.size(), false};
      curve.series.push_back(Series{header[c], {}, {}});
    }
  } else {
    auto column_index = [&](const std::string& name) -> std::size_t {
      for (std::size_t c = 0; c < header.size(); ++c) {
        if (header[c] == name) return c;
      }
      return header.size();
    };
    std::vector<bool> used(header.size(), false);
    used[0] = true;
    for (std::size_t c = 1; c < header.size(); ++c) {
      if (used[c]) continue;
      const std::string& name = header[c];
      std::string stem;
      std::string partner;
      if (ends_with(name, "_M")) {
        stem = name.substr(0, name.size() - 2);
        partner = stem + "_S";
      } else if (ends_with(name, "_S")) {
        stem = name.substr(0, name.size() - 2);
        partner = stem + "_M";
      } else {
        throw CsvParseError("line " + std::to_string(header_line) + ": column '" + name +
                                "' is neither <EST>_M nor <EST>_S (use bare mode for "
                                "external curves)",
                            header_line);
      }
      const std::size_t p = column_index(partner);
      if (p == header.size()) {
        throw CsvParseError("line " + std::to_string(header_line) + ": missing column '" +
                                partner + "' (paired with '" + name + "')",
                            header_line);
      }
      const std::size_t mean_col = ends_with(name, "_M") ? c : p;
      const std::size_t std_col = ends_with(name, "_M") ? p : c;
      slots[mean_col] = {curve.series.size(), false};
      slots[std_col] = {curve.series.size(), true};
      used[mean_col] = used[std_col] = true;
      curve.series.push_back(Series{stem, {}, {}});
    }
    if (curve.series.empty()) {
      throw CsvParseError("line " + std::to_string(header_line) +
                              ": no <EST>_M/<EST>_S column pairs",
                          header_line);
    }
  }

  for (std::size_t li = 1; li < lines.size(); ++li) {
    const auto [number, line] = lines[li];
    const auto fields = split_fields(line);
    if (fields.size() != header.size()) {
      throw CsvParseError("line " + std::to_string(number) + ": expected " +
                              std::to_string(header.size()) + " fields, found " +
                              std::to_string(fields.size()),
                          number);
    }
    const double n = parse_number(fields[0], number, header[0]);
    if (!(n > 0.0)) {
      throw CsvParseError("line " + std::to_string(number) + ": train_size must be positive",
                          number);
    }
    if (mode == CsvMode::Canonical && !curve.train_sizes.empty() &&
        n <= curve.train_sizes.back()) {
      throw CsvParseError("line " + std::to_string(number) +
                              ": train_size values must be strictly ascending",
                          number);
    }
    curve.train_sizes.push_back(n);
    for (std::size_t c = 1; c < header.size(); ++c) {
      const double v = parse_number(fields[c], number, header[c]);
      Series& s = curve.series[slots[c].series];
      (slots[c].is_std ? s.std : s.mean).push_back(v);
    }
  }
  if (curve.train_sizes.empty()) {
    throw CsvParseError("no data rows after the header", header_line);
  }
  return curve;
}

RiskCurve read_curve_csv(const std::filesystem::path& path, CsvMode mode) {
  std::ifstream file(path, std::ios::binary);
  if (!file) throw Error(ErrorCode::Io, "cannot open " + path.string());
  std::ostringstream buffer;
  buffer << file.rdbuf();
  try {
    return parse_curve_csv(buffer.str(), mode);
  } catch (const CsvParseError& e) {
    throw CsvParseError(path.string() + ": " + e.what(), e.line());
  }
}

std::vector<double> curve_column(const RiskCurve& curve, std::string_view column) {
  if (column == "train_size") return curve.train_sizes;
  for (const Series& s : curve.series) {
    if (s.std.empty()) {
      if (s.name == column) return s.mean;
    } else {
      if (column == s.name + "_M") return s.mean;
      if (column == s.name + "_S") return s.std;
    }
  }
  std::string available;
  for (const std::string& c : csv_columns(curve)) {
    if (!available.empty()) available += ", ";
    available += c;
  }
  throw Error(ErrorCode::InvalidArgument, "no column '" + std::string(column) +
                                              "'; available columns: " + available);
}

}  // namespace sldlab
