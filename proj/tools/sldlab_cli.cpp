// sldlab command-line front end.
//
//   sldlab simulate  --d 10 --n 1000 --sigma 0.1 --grid 1:20000:5 --est esgd,pca --out c.csv
//   sldlab fit       --in c.csv --col ESGD_M --floor auto --sigma 0.1
//   sldlab plot      --in c.csv --out c.svg [--fits fits.csv]
//   sldlab reproduce fig5 --out dir/
//
// Exit codes: 0 success, 1 runtime or numerical failure, 2 usage error.
// Everything numerical goes through the C API in sldlab.h.

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "sldlab/sldlab.h"

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

// Runtime failure reported by the library or the file system.
struct RuntimeFailure {
  std::string message;
};

// Flag combination the parser cannot catch on its own.
struct UsageFailure {
  std::string message;
};

void check(sld_status st, const std::string& context) {
  if (st != SLD_OK) {
    throw RuntimeFailure{context + ": " + sld_last_error()};
  }
}

struct CurveDeleter {
  void operator()(sld_curve* c) const { sld_curve_free(c); }
};
using CurvePtr = std::unique_ptr<sld_curve, CurveDeleter>;

std::string format_g(double v, int precision = 17) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", precision, v);
  return buf;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(item);
  return out;
}

std::vector<int64_t> parse_grid(const std::string& spec) {
  const auto parts = split(spec, ':');
  if (parts.size() != 3) {
    throw UsageFailure{"--grid expects lo:hi:points_per_decade, got '" + spec + "'"};
  }
  int64_t lo = 0, hi = 0;
  int ppd = 0;
  try {
    std::size_t pos = 0;
    lo = std::stoll(parts[0], &pos);
    if (pos != parts[0].size()) throw std::invalid_argument("lo");
    hi = std::stoll(parts[1], &pos);
    if (pos != parts[1].size()) throw std::invalid_argument("hi");
    ppd = std::stoi(parts[2], &pos);
    if (pos != parts[2].size()) throw std::invalid_argument("ppd");
  } catch (const std::exception&) {
    throw UsageFailure{"--grid expects integers lo:hi:points_per_decade, got '" + spec + "'"};
  }
  std::size_t count = 0;
  if (sld_train_grid(lo, hi, ppd, nullptr, 0, &count) != SLD_OK) {
    throw UsageFailure{std::string("--grid: ") + sld_last_error()};
  }
  std::vector<int64_t> grid(count);
  check(sld_train_grid(lo, hi, ppd, grid.data(), grid.size(), &count), "--grid");
  return grid;
}

uint32_t parse_threads(const std::string& value) {
  if (value == "max") return 0;
  try {
    std::size_t pos = 0;
    const long t = std::stol(value, &pos);
    if (pos == value.size() && t >= 1) return static_cast<uint32_t>(t);
  } catch (const std::exception&) {
  }
  throw UsageFailure{"--threads expects a positive integer or 'max', got '" + value + "'"};
}

uint64_t default_base_seed() {
  if (const char* env = std::getenv("SLDLAB_BASE_SEED")) {
    try {
      return std::stoull(env);
    } catch (const std::exception&) {
      throw UsageFailure{std::string("SLDLAB_BASE_SEED is not an unsigned integer: ") + env};
    }
  }
  return 0;
}

std::vector<sld_estimator> parse_estimators(const std::vector<std::string>& names) {
  std::vector<sld_estimator> out;
  for (const std::string& name : names) {
    sld_estimator e{};
    if (sld_estimator_parse(name.c_str(), &e) != SLD_OK) {
      throw UsageFailure{std::string("--est: ") + sld_last_error()};
    }
    out.push_back(e);
  }
  return out;
}

std::vector<std::string> column_names(const sld_curve* curve) {
  std::vector<std::string> names;
  for (size_t i = 0; i < sld_curve_num_columns(curve); ++i) {
    names.emplace_back(sld_curve_column_name(curve, i));
  }
  return names;
}

std::vector<double> column(const sld_curve* curve, const std::string& name) {
  std::vector<double> out(sld_curve_num_rows(curve));
  check(sld_curve_column(curve, name.c_str(), out.data(), out.size()), "column '" + name + "'");
  return out;
}

std::string command_line(int argc, char** argv) {
  std::string s;
  for (int i = 0; i < argc; ++i) {
    if (i) s += ' ';
    s += argv[i];
  }
  return s;
}

// Output bookkeeping shared by every command that writes files.
class Manifest {
 public:
  Manifest(std::string cmdline) : cmdline_(std::move(cmdline)), start_(clock::now()) {}

  void add_output(const fs::path& p) { outputs_.push_back(p.string()); }
  json& config() { return config_; }
  void set_base_seed(uint64_t s) { base_seed_ = s; }

  void write(const fs::path& path) {
    add_output(path);
    json m;
    m["tool"] = "sldlab";
    m["version"] = sld_version();
    m["command_line"] = cmdline_;
    m["config"] = config_;
    if (base_seed_) m["base_seed"] = *base_seed_;
    m["outputs"] = outputs_;
    m["duration_seconds"] =
        std::chrono::duration<double>(clock::now() - start_).count();
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw RuntimeFailure{"cannot write manifest " + path.string()};
    f << m.dump(2) << '\n';
    if (!f) throw RuntimeFailure{"failed writing manifest " + path.string()};
  }

 private:
  using clock = std::chrono::steady_clock;
  std::string cmdline_;
  clock::time_point start_;
  json config_ = json::object();
  std::optional<uint64_t> base_seed_;
  std::vector<std::string> outputs_;
};

// ---- simulate ------------------------------------------------------------

struct SimulateArgs {
  int64_t d = 10;
  int64_t n = 1000;
  double sigma = 0.1;
  std::string grid = "1:20000:5";
  int32_t seeds = 5;
  std::vector<std::string> est{"esgd", "pca"};
  std::string out;
  std::string threads;
  std::optional<uint64_t> base_seed;
  int64_t mc_test = 0;
  std::string manifest;
  bool verbose = false;
};

void progress_to_stderr(size_t done, size_t total, void*) {
  std::fprintf(stderr, "\r  %zu/%zu cells", done, total);
  if (done == total) std::fputc('\n', stderr);
  std::fflush(stderr);
}

CurvePtr run_simulation(int64_t d, int64_t n, double sigma, const std::vector<int64_t>& sizes,
                        int32_t seeds, const std::vector<sld_estimator>& est, uint64_t base_seed,
                        int64_t mc_test, uint32_t threads, bool verbose) {
  sld_sweep_config cfg;
  sld_sweep_config_init(&cfg);
  cfg.d = d;
  cfg.n = n;
  cfg.sigma_z = sigma;
  cfg.train_sizes = sizes.data();
  cfg.n_train_sizes = sizes.size();
  cfg.n_seeds = seeds;
  cfg.estimators = est.data();
  cfg.n_estimators = est.size();
  cfg.base_seed = base_seed;
  cfg.mc_test_size = mc_test;
  cfg.threads = threads;
  sld_curve* raw = nullptr;
  const sld_status st =
      sld_sweep_run(&cfg, verbose ? progress_to_stderr : nullptr, nullptr, &raw);
  if (st == SLD_ERR_INVALID_ARGUMENT || st == SLD_ERR_DIMENSION) {
    throw UsageFailure{sld_last_error()};
  }
  check(st, "simulate");
  return CurvePtr(raw);
}

json sweep_json(int64_t d, int64_t n, double sigma, const std::string& grid,
                const std::vector<int64_t>& sizes, int32_t seeds,
                const std::vector<std::string>& est, int64_t mc_test, uint32_t threads) {
  return json{{"d", d},           {"n", n},         {"sigma", sigma},
              {"grid", grid},     {"train_sizes", sizes}, {"seeds", seeds},
              {"estimators", est}, {"mc_test", mc_test},
              {"threads", threads == 0 ? std::string("max") : std::to_string(threads)}};
}

int cmd_simulate(const SimulateArgs& a, const std::string& cmdline) {
  if (a.sigma < 0.0 || !std::isfinite(a.sigma)) {
    throw UsageFailure{"--sigma must be a nonnegative number, got " + format_g(a.sigma)};
  }
  if (a.d < 1 || a.n <= a.d) {
    throw UsageFailure{"--d and --n must satisfy 1 <= d < n"};
  }
  if (a.seeds < 1) throw UsageFailure{"--seeds must be >= 1"};
  if (a.mc_test < 0 || a.mc_test == 1) throw UsageFailure{"--mc-test must be 0 or >= 2"};
  const std::vector<int64_t> sizes = parse_grid(a.grid);
  const std::vector<sld_estimator> est = parse_estimators(a.est);
  const uint32_t threads = a.threads.empty() ? 0 : parse_threads(a.threads);
  const uint64_t base_seed = a.base_seed.value_or(default_base_seed());

  Manifest manifest(cmdline);
  manifest.set_base_seed(base_seed);
  manifest.config() =
      sweep_json(a.d, a.n, a.sigma, a.grid, sizes, a.seeds, a.est, a.mc_test, threads);

  CurvePtr curve = run_simulation(a.d, a.n, a.sigma, sizes, a.seeds, est, base_seed, a.mc_test,
                                  threads, a.verbose);
  const fs::path out(a.out);
  if (out.has_parent_path()) fs::create_directories(out.parent_path());
  check(sld_curve_write_csv(curve.get(), out.string().c_str()), "writing " + out.string());
  manifest.add_output(out);
  manifest.write(a.manifest.empty() ? fs::path(out.string() + ".manifest.json")
                                    : fs::path(a.manifest));
  std::cout << "wrote " << out.string() << " (" << sld_curve_num_rows(curve.get())
            << " train sizes)\n";
  return kExitOk;
}

// ---- fit -------------------------------------------------------------------

struct FitRow {
  std::string curve;
  std::string column;
  std::string segment;  // all | left | right
  std::string mode;
  sld_powerlaw fit{};
  double n_min = 0.0;
  double n_max = 0.0;
  double break_n = 0.0;
  int evidence = -1;  // -1: not applicable
};

const char* kFitHeader =
    "curve,column,segment,mode,alpha,log_beta,beta,r_squared,sse,n_min,n_max,n_points,"
    "dropped,floor,break_n,breakpoint_evidence";

std::string fit_csv_line(const FitRow& r) {
  std::string s = r.curve + "," + r.column + "," + r.segment + "," + r.mode + ",";
  s += format_g(r.fit.alpha) + "," + format_g(r.fit.log_beta) + "," +
       format_g(std::exp(r.fit.log_beta)) + "," + format_g(r.fit.r_squared) + "," +
       format_g(r.fit.sse) + "," + format_g(r.n_min) + "," + format_g(r.n_max) + "," +
       std::to_string(r.fit.n_points) + "," + std::to_string(r.fit.n_dropped) + "," +
       format_g(r.fit.floor) + "," + format_g(r.break_n) + ",";
  s += r.evidence < 0 ? "" : (r.evidence ? "yes" : "no");
  return s;
}

void write_fits_csv(const std::vector<FitRow>& rows, const fs::path& path) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw RuntimeFailure{"cannot write " + path.string()};
  f << kFitHeader << '\n';
  for (const FitRow& r : rows) f << fit_csv_line(r) << '\n';
  if (!f) throw RuntimeFailure{"failed writing " + path.string()};
}

void print_fits(const std::vector<FitRow>& rows, std::ostream& os) {
  char line[256];
  std::snprintf(line, sizeof line, "%-10s %-8s %-9s %11s %12s %9s %21s %6s %7s\n", "column",
                "segment", "mode", "alpha", "beta", "r2", "N range", "points", "dropped");
  os << line;
  for (const FitRow& r : rows) {
    const std::string range = format_g(r.n_min, 6) + ".." + format_g(r.n_max, 6);
    std::snprintf(line, sizeof line, "%-10s %-8s %-9s %11.5f %12.5g %9.6f %21s %6zu %7zu\n",
                  r.column.c_str(), r.segment.c_str(), r.mode.c_str(), r.fit.alpha,
                  std::exp(r.fit.log_beta), r.fit.r_squared, range.c_str(), r.fit.n_points,
                  r.fit.n_dropped);
    os << line;
  }
  for (const FitRow& r : rows) {
    if (r.segment == "right") {
      os << r.column << ": break at N ~ " << format_g(r.break_n, 6) << ", "
         << (r.evidence ? "breakpoint evidence" : "no breakpoint evidence") << '\n';
    }
  }
}

struct FitRequest {
  std::string mode;                // single | excess | segmented
  std::optional<double> floor;
  int32_t min_seg = 3;
  double n_min = 0.0;
  double n_max = std::numeric_limits<double>::infinity();
};

std::vector<FitRow> fit_column(const sld_curve* curve, const std::string& curve_label,
                               const std::string& col, const FitRequest& req) {
  const std::vector<double> ns = column(curve, "train_size");
  const std::vector<double> vs = column(curve, col);
  size_t lo = 0;
  while (lo < ns.size() && ns[lo] < req.n_min) ++lo;
  size_t hi = lo;
  while (hi < ns.size() && ns[hi] <= req.n_max) ++hi;
  if (hi - lo < 2) {
    throw RuntimeFailure{"fewer than 2 points of column '" + col + "' fall in the N range"};
  }

  sld_fit_options opt;
  sld_fit_options_init(&opt);
  opt.mode = req.mode == "segmented" ? SLD_FIT_SEGMENTED
             : req.mode == "excess" ? SLD_FIT_EXCESS
                                    : SLD_FIT_SINGLE;
  opt.has_floor = req.floor.has_value() ? 1 : 0;
  opt.floor = req.floor.value_or(0.0);
  opt.region_lo = lo;
  opt.region_hi = hi;
  opt.min_seg = req.min_seg;
  sld_fit_result res;
  check(sld_fit(ns.data(), vs.data(), ns.size(), &opt, &res), "fitting " + col);

  std::vector<FitRow> rows;
  auto make = [&](const sld_powerlaw& p, const std::string& segment) {
    FitRow r;
    r.curve = curve_label;
    r.column = col;
    r.segment = segment;
    r.mode = req.mode;
    r.fit = p;
    r.n_min = ns[p.region_lo];
    r.n_max = ns[p.region_hi - 1];
    if (opt.mode == SLD_FIT_SEGMENTED) {
      r.break_n = res.break_n;
      r.evidence = res.breakpoint_evidence;
    }
    return r;
  };
  if (opt.mode == SLD_FIT_SEGMENTED) {
    rows.push_back(make(res.fit, "left"));
    rows.push_back(make(res.right, "right"));
  } else {
    rows.push_back(make(res.fit, "all"));
  }
  return rows;
}

std::optional<double> resolve_floor(const std::string& floor, std::optional<double> sigma) {
  if (floor.empty() || floor == "none") return std::nullopt;
  if (floor == "auto") {
    if (!sigma) throw UsageFailure{"--floor auto requires --sigma"};
    if (*sigma < 0.0) throw UsageFailure{"--sigma must be nonnegative"};
    double v = 0.0;
    check(sld_optimal_risk(*sigma, &v), "--floor auto");
    return v;
  }
  try {
    std::size_t pos = 0;
    const double v = std::stod(floor, &pos);
    if (pos == floor.size() && v >= 0.0 && std::isfinite(v)) return v;
  } catch (const std::exception&) {
  }
  throw UsageFailure{"--floor expects auto, none or a nonnegative number, got '" + floor + "'"};
}

struct FitArgs {
  std::string in;
  std::vector<std::string> cols;
  std::string mode;
  std::string floor;
  std::optional<double> sigma;
  int32_t min_seg = 3;
  double n_min = 0.0;
  double n_max = std::numeric_limits<double>::infinity();
  std::string out;
  bool bare = false;
};

int cmd_fit(const FitArgs& a, const std::string& cmdline) {
  FitRequest req;
  req.floor = resolve_floor(a.floor, a.sigma);
  req.mode = a.mode.empty() ? (req.floor ? "excess" : "single") : a.mode;
  if (req.mode == "excess" && !req.floor) {
    throw UsageFailure{"--mode excess needs --floor auto|<value>"};
  }
  if (req.mode == "single" && req.floor) {
    throw UsageFailure{"--mode single does not subtract a floor; use --mode excess"};
  }
  if (a.min_seg < 2) throw UsageFailure{"--min-seg must be >= 2"};
  req.min_seg = a.min_seg;
  req.n_min = a.n_min;
  req.n_max = a.n_max;

  sld_curve* raw = nullptr;
  check(sld_curve_read_csv(a.in.c_str(), a.bare ? SLD_CSV_BARE : SLD_CSV_AUTO, &raw),
        "reading " + a.in);
  CurvePtr curve(raw);
  const auto names = column_names(curve.get());
  for (const std::string& col : a.cols) {
    if (std::find(names.begin(), names.end(), col) == names.end()) {
      std::string avail;
      for (const auto& n : names) avail += (avail.empty() ? "" : ", ") + n;
      throw RuntimeFailure{"no column '" + col + "' in " + a.in + "; available: " + avail};
    }
  }
  std::vector<FitRow> rows;
  const std::string label = fs::path(a.in).stem().string();
  for (const std::string& col : a.cols) {
    auto r = fit_column(curve.get(), label, col, req);
    rows.insert(rows.end(), r.begin(), r.end());
  }
  print_fits(rows, std::cout);
  if (!a.out.empty()) {
    Manifest manifest(cmdline);
    manifest.config() = json{{"in", a.in}, {"columns", a.cols}, {"mode", req.mode},
                             {"floor", req.floor ? json(*req.floor) : json(nullptr)},
                             {"n_min", a.n_min},
                             {"n_max", std::isfinite(a.n_max) ? json(a.n_max) : json(nullptr)}};
    const fs::path out(a.out);
    if (out.has_parent_path()) fs::create_directories(out.parent_path());
    write_fits_csv(rows, out);
    manifest.add_output(out);
    manifest.write(fs::path(out.string() + ".manifest.json"));
  }
  return kExitOk;
}

// ---- plot ------------------------------------------------------------------

// Reads a fits table written by `fit --out` or `reproduce`.
std::vector<FitRow> read_fits_csv(const fs::path& path) {
  std::ifstream f(path);
  if (!f) throw RuntimeFailure{"cannot open fits file " + path.string()};
  std::string line;
  if (!std::getline(f, line)) throw RuntimeFailure{"empty fits file " + path.string()};
  const auto header = split(line, ',');
  auto idx = [&](const std::string& name) {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) {
      throw RuntimeFailure{"fits file " + path.string() + " lacks column '" + name + "'"};
    }
    return static_cast<size_t>(it - header.begin());
  };
  const size_t c_curve = idx("curve"), c_col = idx("column"), c_seg = idx("segment"),
               c_alpha = idx("alpha"), c_lb = idx("log_beta"), c_floor = idx("floor"),
               c_lo = idx("n_min"), c_hi = idx("n_max");
  std::vector<FitRow> rows;
  size_t lineno = 1;
  while (std::getline(f, line)) {
    ++lineno;
    if (line.empty()) continue;
    auto fields = split(line, ',');
    if (fields.size() < header.size() - 1) {
      throw RuntimeFailure{path.string() + ": line " + std::to_string(lineno) +
                           " has too few fields"};
    }
    fields.resize(header.size());
    try {
      FitRow r;
      r.curve = fields[c_curve];
      r.column = fields[c_col];
      r.segment = fields[c_seg];
      r.fit.alpha = std::stod(fields[c_alpha]);
      r.fit.log_beta = std::stod(fields[c_lb]);
      r.fit.floor = std::stod(fields[c_floor]);
      r.n_min = std::stod(fields[c_lo]);
      r.n_max = std::stod(fields[c_hi]);
      rows.push_back(r);
    } catch (const std::exception&) {
      throw RuntimeFailure{path.string() + ": line " + std::to_string(lineno) +
                           " has a malformed number"};
    }
  }
  return rows;
}

void plot_curve(const sld_curve* curve, const fs::path& out, const std::string& title,
                const std::string& y_label, const std::vector<std::string>& cols,
                const std::vector<FitRow>& fits) {
  std::vector<std::string> labels;
  std::vector<sld_plot_overlay> overlays;
  labels.reserve(fits.size());
  for (const FitRow& r : fits) {
    std::string label = r.column;
    if (r.segment != "all") label += " " + r.segment;
    label += " alpha=" + format_g(r.fit.alpha, 4);
    if (r.fit.floor > 0.0) label += " (+floor)";
    labels.push_back(label);
  }
  for (size_t i = 0; i < fits.size(); ++i) {
    const FitRow& r = fits[i];
    overlays.push_back(sld_plot_overlay{labels[i].c_str(), r.fit.alpha, r.fit.log_beta,
                                        r.fit.floor, r.n_min, r.n_max});
  }
  std::vector<const char*> col_ptrs;
  for (const std::string& c : cols) col_ptrs.push_back(c.c_str());
  sld_plot_options opt{};
  opt.title = title.empty() ? nullptr : title.c_str();
  opt.y_label = y_label.empty() ? nullptr : y_label.c_str();
  opt.columns = cols.empty() ? nullptr : col_ptrs.data();
  opt.n_columns = col_ptrs.size();
  opt.overlays = overlays.empty() ? nullptr : overlays.data();
  opt.n_overlays = overlays.size();
  check(sld_curve_plot_svg(curve, &opt, out.string().c_str()), "plotting " + out.string());
}

struct PlotArgs {
  std::string in;
  std::string out;
  std::string fits;
  std::string title;
  std::string y_label;
  std::vector<std::string> cols;
};

int cmd_plot(const PlotArgs& a, const std::string& cmdline) {
  sld_curve* raw = nullptr;
  check(sld_curve_read_csv(a.in.c_str(), SLD_CSV_AUTO, &raw), "reading " + a.in);
  CurvePtr curve(raw);
  if (sld_curve_num_rows(curve.get()) == 0) throw RuntimeFailure{"empty series in " + a.in};
  std::vector<FitRow> fits;
  if (!a.fits.empty()) {
    for (const FitRow& r : read_fits_csv(a.fits)) {
      if (a.cols.empty() || std::find(a.cols.begin(), a.cols.end(), r.column) != a.cols.end()) {
        fits.push_back(r);
      }
    }
  }
  const fs::path out(a.out);
  if (out.has_parent_path()) fs::create_directories(out.parent_path());
  plot_curve(curve.get(), out, a.title, a.y_label, a.cols, fits);
  Manifest manifest(cmdline);
  manifest.config() = json{{"in", a.in}, {"fits", a.fits}, {"columns", a.cols}};
  manifest.add_output(out);
  manifest.write(fs::path(out.string() + ".manifest.json"));
  std::cout << "wrote " << out.string() << '\n';
  return kExitOk;
}

// ---- reproduce -------------------------------------------------------------

fs::path locate_preset(const std::string& name, const std::string& preset_dir) {
  if (fs::exists(name) && fs::is_regular_file(name)) return name;
  std::vector<fs::path> dirs;
  if (!preset_dir.empty()) dirs.emplace_back(preset_dir);
  if (const char* env = std::getenv("SLDLAB_PRESET_DIR")) dirs.emplace_back(env);
  dirs.emplace_back(SLDLAB_PRESET_DIR);
  for (const fs::path& dir : dirs) {
    const fs::path p = dir / (name + ".json");
    if (fs::exists(p)) return p;
  }
  throw UsageFailure{"unknown preset '" + name + "' (looked in " + dirs.front().string() + ")"};
}

struct ReproduceArgs {
  std::string preset;
  std::string out;
  std::string preset_dir;
  std::string threads;
  std::optional<uint64_t> base_seed;
  std::optional<int32_t> seeds;
  bool verbose = false;
};

int cmd_reproduce(const ReproduceArgs& a, const std::string& cmdline) {
  const fs::path preset_path = locate_preset(a.preset, a.preset_dir);
  json preset;
  try {
    std::ifstream f(preset_path);
    preset = json::parse(f);
  } catch (const std::exception& e) {
    throw RuntimeFailure{"cannot parse preset " + preset_path.string() + ": " + e.what()};
  }
  const uint32_t threads = a.threads.empty() ? 0 : parse_threads(a.threads);
  const uint64_t base_seed =
      a.base_seed.value_or(preset.value("base_seed", json()).is_number_unsigned() &&
                                   !std::getenv("SLDLAB_BASE_SEED")
                               ? preset["base_seed"].get<uint64_t>()
                               : default_base_seed());
  const fs::path out_dir(a.out);
  fs::create_directories(out_dir);

  Manifest manifest(cmdline);
  manifest.set_base_seed(base_seed);
  manifest.config()["preset"] = preset;
  manifest.config()["preset_file"] = preset_path.string();

  const json defaults = preset.value("defaults", json::object());
  const json fit_cfg = preset.value("fit", json::object());
  const json plot_cfg = preset.value("plot", json::object());
  std::vector<FitRow> all_fits;
  std::vector<json> run_configs;

  for (const json& run : preset.at("runs")) {
    json cfg = defaults;
    for (auto it = run.begin(); it != run.end(); ++it) cfg[it.key()] = it.value();
    const std::string label = cfg.at("label").get<std::string>();
    const int64_t d = cfg.at("d").get<int64_t>();
    const int64_t n = cfg.at("n").get<int64_t>();
    const double sigma = cfg.at("sigma").get<double>();
    const std::string grid = cfg.at("grid").get<std::string>();
    const int32_t seeds = a.seeds.value_or(cfg.value("seeds", 5));
    const auto est_names = cfg.at("estimators").get<std::vector<std::string>>();
    const int64_t mc_test = cfg.value("mc_test", int64_t{0});
    const std::vector<int64_t> sizes = parse_grid(grid);

    if (a.verbose) std::cerr << "[" << label << "]\n";
    CurvePtr curve = run_simulation(d, n, sigma, sizes, seeds, parse_estimators(est_names),
                                    base_seed, mc_test, threads, a.verbose);
    const fs::path csv = out_dir / (label + ".csv");
    check(sld_curve_write_csv(curve.get(), csv.string().c_str()), "writing " + csv.string());
    manifest.add_output(csv);
    run_configs.push_back(sweep_json(d, n, sigma, grid, sizes, seeds, est_names, mc_test, threads));

    FitRequest req;
    req.mode = fit_cfg.value("mode", std::string("excess"));
    const std::string floor = fit_cfg.value("floor", std::string("auto"));
    req.floor = resolve_floor(floor, sigma);
    req.min_seg = fit_cfg.value("min_seg", 3);
    req.n_min = fit_cfg.value("n_min", 0.0);
    req.n_max = fit_cfg.value("n_max", std::numeric_limits<double>::infinity());
    std::vector<FitRow> fits;
    for (const std::string& col : fit_cfg.value("columns", std::vector<std::string>{})) {
      auto r = fit_column(curve.get(), label, col, req);
      fits.insert(fits.end(), r.begin(), r.end());
    }
    std::cout << "== " << label << " ==\n";
    print_fits(fits, std::cout);

    const fs::path svg = out_dir / (label + ".svg");
    const std::string title = plot_cfg.value("title", std::string()) + " " + label;
    plot_curve(curve.get(), svg, title, plot_cfg.value("y_label", std::string("Risk R(W)")), {},
               fits);
    manifest.add_output(svg);
    all_fits.insert(all_fits.end(), fits.begin(), fits.end());
  }
  manifest.config()["runs"] = run_configs;
  const fs::path fits_path = out_dir / "fits.csv";
  write_fits_csv(all_fits, fits_path);
  manifest.add_output(fits_path);
  manifest.write(out_dir / "manifest.json");
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  const std::string cmdline = command_line(argc, argv);
  CLI::App app{"sldlab: subspace denoising scaling-law laboratory"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(sld_version()));

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "run a seeded risk-vs-N sweep");
  simulate->add_option("--d", sim.d, "latent signal dimension")->capture_default_str();
  simulate->add_option("--n", sim.n, "ambient dimension")->capture_default_str();
  simulate->add_option("--sigma", sim.sigma, "noise standard deviation")->capture_default_str();
  simulate->add_option("--grid", sim.grid, "train sizes as lo:hi:points_per_decade")
      ->capture_default_str();
  simulate->add_option("--seeds", sim.seeds, "independent runs per train size")
      ->capture_default_str();
  simulate->add_option("--est", sim.est, "estimators: opt,pca,esgd,pinv")
      ->delimiter(',')
      ->capture_default_str();
  simulate->add_option("--out", sim.out, "output CSV")->required();
  simulate->add_option("--threads", sim.threads, "worker threads or 'max' (default)");
  simulate->add_option("--base-seed", sim.base_seed, "base seed (env SLDLAB_BASE_SEED)");
  simulate->add_option("--mc-test", sim.mc_test, "Monte-Carlo test samples per cell (0: off)");
  simulate->add_option("--manifest", sim.manifest, "manifest path (default <out>.manifest.json)");
  simulate->add_flag("-v,--verbose", sim.verbose, "report progress on stderr");

  FitArgs fit;
  auto* fitcmd = app.add_subcommand("fit", "fit power laws to curve columns");
  fitcmd->add_option("--in", fit.in, "curve CSV (canonical or bare)")->required();
  fitcmd->add_option("--col", fit.cols, "column(s) to fit")->delimiter(',')->required();
  fitcmd->add_option("--mode", fit.mode, "single | excess | segmented")
      ->check(CLI::IsMember({"single", "excess", "segmented"}));
  fitcmd->add_option("--floor", fit.floor, "auto | none | <value>");
  fitcmd->add_option("--sigma", fit.sigma, "noise level for --floor auto");
  fitcmd->add_option("--min-seg", fit.min_seg, "minimum points per segment")
      ->capture_default_str();
  fitcmd->add_option("--n-min", fit.n_min, "smallest N included in the fit");
  fitcmd->add_option("--n-max", fit.n_max, "largest N included in the fit");
  fitcmd->add_option("--out", fit.out, "write the fit table as CSV");
  fitcmd->add_flag("--bare", fit.bare, "read the input as a bare curve");

  PlotArgs plot;
  auto* plotcmd = app.add_subcommand("plot", "log-log SVG chart of a curve");
  plotcmd->add_option("--in", plot.in, "curve CSV")->required();
  plotcmd->add_option("--out", plot.out, "output SVG")->required();
  plotcmd->add_option("--fits", plot.fits, "fits CSV to overlay");
  plotcmd->add_option("--title", plot.title, "chart title");
  plotcmd->add_option("--y-label", plot.y_label, "y axis label");
  plotcmd->add_option("--col", plot.cols, "mean column(s) to draw")->delimiter(',');

  ReproduceArgs rep;
  auto* repcmd = app.add_subcommand("reproduce", "run a figure preset end to end");
  repcmd->add_option("preset", rep.preset, "fig4 | fig5 | fig9-d-sweep | fig9-n-sweep | file")
      ->required();
  repcmd->add_option("--out", rep.out, "output directory")->required();
  repcmd->add_option("--preset-dir", rep.preset_dir, "directory holding preset JSON files");
  repcmd->add_option("--threads", rep.threads, "worker threads or 'max' (default)");
  repcmd->add_option("--base-seed", rep.base_seed, "override the preset base seed");
  repcmd->add_option("--seeds", rep.seeds, "override the number of seeds");
  repcmd->add_flag("-v,--verbose", rep.verbose, "report progress on stderr");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*simulate) return cmd_simulate(sim, cmdline);
    if (*fitcmd) return cmd_fit(fit, cmdline);
    if (*plotcmd) return cmd_plot(plot, cmdline);
    if (*repcmd) return cmd_reproduce(rep, cmdline);
  } catch (const UsageFailure& e) {
    std::cerr << "usage error: " << e.message << "\n";
    return kExitUsage;
  } catch (const RuntimeFailure& e) {
    std::cerr << "error: " << e.message << "\n";
    return kExitRuntime;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitUsage;
}
