// Acceptance run: one PASS/FAIL line per criterion, tolerances fixed below.
//
//   sldlab_acceptance [work_dir]
//
// Criteria 2, 6 and 8 drive the command-line tool end to end (reproduce, fit,
// simulate) and take several minutes on one core. The exit status is nonzero
// when a criterion fails that is not on the known-failure list.
#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "sldlab/curve_csv.hpp"
#include "sldlab/estimators.hpp"
#include "sldlab/model.hpp"
#include "sldlab/powerlaw.hpp"
#include "sldlab/risk.hpp"
#include "sldlab/rng.hpp"
#include "sldlab/sweep.hpp"

namespace fs = std::filesystem;
using namespace sldlab;
using Eigen::MatrixXd;

namespace {

// ---- tolerances ---------------------------------------------------------

constexpr double kOptimalRiskTol = 1e-12;
constexpr double kMonteCarloSe = 3.0;
constexpr Index kMonteCarloTest = 20000;
constexpr double kCriterion1Seconds = 10.0;

constexpr double kSlopeTol = 0.15;

constexpr double kPinvOverEsgdAtN100 = 1.5;  // frozen after a pilot run (ratio ~4500)
constexpr double kFloorFactorAtN10000 = 2.0;

constexpr double kGdTol = 1e-8;
constexpr double kCriterion4Seconds = 30.0;

constexpr double kPcaSpecializedTol = 1e-10;

constexpr double kTheoryRatioSpread = 5.0;

constexpr double kNoiselessSlopeTol = 1e-10;
constexpr double kNoiselessR2Tol = 1e-12;
constexpr double kNoisySlopeTol = 0.02;
constexpr int kNoisyTrials = 1000;
constexpr double kNoisyPassFraction = 0.95;

// Criteria whose failure is understood and recorded; they still print FAIL.
const std::set<int> kKnownFailures = {2};

// ---- reporting ----------------------------------------------------------

struct Outcome {
  bool pass = true;
  std::ostringstream detail;
  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << "  violated: " << what << '\n';
    }
  }
};

std::string fmt(double v, int prec = 4) {
  std::ostringstream s;
  s.precision(prec);
  s << v;
  return s.str();
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// ---- CLI helpers --------------------------------------------------------

std::string quote(const std::string& s) { return "'" + s + "'"; }

int run_cli(const std::string& args, const fs::path& log) {
  const std::string cmd = quote(SLDLAB_CLI_PATH) + " " + args + " > " + quote(log.string()) + " 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

// column name -> alpha, from a fits table written by `sldlab fit --out`.
std::map<std::string, double> read_fit_slopes(const fs::path& path) {
  std::ifstream in(path);
  std::string line;
  std::getline(in, line);
  const auto header = split(line);
  const auto col = std::find(header.begin(), header.end(), "column") - header.begin();
  const auto alpha = std::find(header.begin(), header.end(), "alpha") - header.begin();
  std::map<std::string, double> out;
  while (std::getline(in, line)) {
    const auto cells = split(line);
    if (cells.size() == header.size()) out[cells[col]] = std::stod(cells[alpha]);
  }
  return out;
}

std::vector<CurvePoint> points_of(const RiskCurve& c, const std::string& column, double n_lo,
                                  double n_hi) {
  const std::vector<double> v = curve_column(c, column);
  std::vector<CurvePoint> pts;
  for (std::size_t i = 0; i < c.train_sizes.size(); ++i) {
    if (c.train_sizes[i] >= n_lo && c.train_sizes[i] <= n_hi) pts.push_back({c.train_sizes[i], v[i]});
  }
  return pts;
}

struct Fig5Run {
  std::string label;
  double sigma;
  double esgd_target;
  double pca_target;
};

const std::vector<Fig5Run> kFig5 = {
    {"sigma0.05", 0.05, -0.99, -1.00},
    {"sigma0.1", 0.10, -1.10, -1.00},
    {"sigma0.2", 0.20, -1.02, -0.99},
};

// ---- criteria -----------------------------------------------------------

void criterion1(Outcome& o) {
  const auto t0 = std::chrono::steady_clock::now();
  for (double sigma : {0.0, 0.05, 0.1, 0.2, 1.0}) {
    const ModelParams p{10, 1000, sigma};
    const SubspaceBasis b = sample_basis(p.n, p.d, 101);
    const RiskReport rep = risk_monte_carlo(optimal_estimator(p, b), b, p, kMonteCarloTest, 202);
    const double target = sigma * sigma / (1.0 + sigma * sigma);
    const double err = std::abs(rep.closed_form - target);
    const double z = std::abs(rep.monte_carlo_mean - rep.closed_form);
    // For sigma = 0 every per-sample loss is rounding noise around zero.
    const double allowed = std::max(kMonteCarloSe * rep.monte_carlo_se, 1e-12);
    o.detail << "  sigma=" << sigma << ": closed " << fmt(rep.closed_form, 12) << " |err| "
             << fmt(err, 2) << ", MC " << fmt(rep.monte_carlo_mean, 6) << " +- "
             << fmt(rep.monte_carlo_se, 2) << '\n';
    o.require(err <= kOptimalRiskTol, "closed form at sigma=" + fmt(sigma));
    o.require(z <= allowed, "Monte-Carlo within 3 SE at sigma=" + fmt(sigma));
  }
  const double secs = seconds_since(t0);
  o.detail << "  runtime " << fmt(secs, 3) << " s\n";
  o.require(secs < kCriterion1Seconds, "runtime < 10 s");
}

void criterion2(Outcome& o, const fs::path& rep_dir) {
  for (const Fig5Run& r : kFig5) {
    const fs::path fits = rep_dir / ("fit_" + r.label + ".csv");
    const int code = run_cli("fit --in " + quote((rep_dir / (r.label + ".csv")).string()) +
                                 " --col ESGD_M,PCA_M --mode excess --floor auto --sigma " +
                                 fmt(r.sigma) + " --n-min 100 --n-max 20000 --out " +
                                 quote(fits.string()),
                             rep_dir / ("fit_" + r.label + ".log"));
    o.require(code == 0, "sldlab fit exits 0 for " + r.label);
    if (code != 0) continue;
    const auto slopes = read_fit_slopes(fits);
    const double esgd = slopes.at("ESGD_M"), pca = slopes.at("PCA_M");
    o.detail << "  " << r.label << ": ESGD alpha " << fmt(esgd) << " (target " << r.esgd_target
             << "), PCA alpha " << fmt(pca) << " (target " << r.pca_target << ")\n";
    o.require(std::abs(esgd - r.esgd_target) <= kSlopeTol, "ESGD slope at " + r.label);
    o.require(std::abs(pca - r.pca_target) <= kSlopeTol, "PCA slope at " + r.label);
    if (r.sigma == 0.1) {
      o.require(esgd >= -1.25 && esgd <= -0.95, "sigma=0.1 ESGD alpha in [-1.25, -0.95]");
    }
  }
  // Informational: the same excess fits restricted to N >= 1000.
  for (const Fig5Run& r : kFig5) {
    const RiskCurve c = read_curve_csv(rep_dir / (r.label + ".csv"));
    const double floor = r.sigma * r.sigma / (1.0 + r.sigma * r.sigma);
    const double e = fit_excess_powerlaw(points_of(c, "ESGD_M", 1000, 20000), floor).alpha;
    const double pc = fit_excess_powerlaw(points_of(c, "PCA_M", 1000, 20000), floor).alpha;
    o.detail << "  info " << r.label << " over N in [1000, 20000]: ESGD " << fmt(e) << ", PCA "
             << fmt(pc) << '\n';
  }
}

void criterion3(Outcome& o) {
  SweepConfig cfg;
  cfg.params = ModelParams{10, 100, 0.05};
  cfg.train_sizes = default_train_grid(10, 10000, 5);
  cfg.n_seeds = 5;
  cfg.estimators = {EstimatorKind::Esgd, EstimatorKind::Pinv};
  cfg.validate();
  const double floor = optimal_risk(cfg.params);
  for (std::size_t i = 0; i < cfg.train_sizes.size(); ++i) {
    double esgd_sum = 0, pinv_sum = 0;
    bool ordered = true;
    for (int s = 0; s < cfg.n_seeds; ++s) {
      const auto v = run_cell(cfg, i, static_cast<std::size_t>(s));
      ordered = ordered && v[0] <= v[1];
      esgd_sum += v[0];
      pinv_sum += v[1];
    }
    const Index N = cfg.train_sizes[i];
    o.require(ordered, "risk(W^k_opt) <= risk(W^inf) in every cell at N=" + std::to_string(N));
    const double esgd = esgd_sum / cfg.n_seeds, pinv = pinv_sum / cfg.n_seeds;
    if (N == 100) {
      o.detail << "  N=100: PINV/ESGD = " << fmt(pinv / esgd) << '\n';
      o.require(pinv / esgd >= kPinvOverEsgdAtN100, "PINV/ESGD >= 1.5 at N=100");
    }
    if (N == 10000) {
      o.detail << "  N=10000: ESGD/floor = " << fmt(esgd / floor) << ", PINV/floor = "
               << fmt(pinv / floor) << '\n';
      o.require(esgd <= kFloorFactorAtN10000 * floor && pinv <= kFloorFactorAtN10000 * floor,
                "both within 2x of the floor at N=10000");
    }
  }
}

void criterion4(Outcome& o) {
  const auto t0 = std::chrono::steady_clock::now();
  CounterRng rng(stream_key(4, StreamRole::Perturbation));
  double worst = 0.0;
  for (int t = 0; t < 20; ++t) {
    const Index n = 6 + static_cast<Index>(rng() % 45);
    const Index d = 1 + static_cast<Index>(rng() % std::min<Index>(5, n - 1));
    const Index N = 1 + static_cast<Index>(rng() % 50);
    const std::uint64_t k = 1 + rng() % 500;
    const ModelParams p{d, n, 0.3 * rng.uniform_open_closed()};
    const Dataset ds = sample_dataset(p, sample_basis(n, d, 4000 + t), N, 5000 + t);
    const SvdCache c = svd_of(ds);
    const GdConfig cfg{default_stepsize(c), Iterations::finite(k)};
    const MatrixXd closed = gd_estimator_closed(c, ds.clean, cfg).to_dense();
    const MatrixXd iter = gd_estimator_iterative(ds, cfg).to_dense();
    const double denom = std::max(iter.norm(), 1e-300);
    worst = std::max(worst, (closed - iter).norm() / denom);
  }
  const double secs = seconds_since(t0);
  o.detail << "  worst relative Frobenius distance " << fmt(worst, 3) << ", runtime "
           << fmt(secs, 3) << " s\n";
  o.require(worst <= kGdTol, "closed form matches iteration to 1e-8");
  o.require(secs < kCriterion4Seconds, "runtime < 30 s");
}

void criterion5(Outcome& o) {
  double worst = 0.0;
  int below_d = 0;
  for (int t = 0; t < 100; ++t) {
    const ModelParams p{10, 80, 0.02 + 0.06 * (t % 5)};
    const SubspaceBasis b = sample_basis(p.n, p.d, 7000 + t);
    const Index N = 1 + (t * 7) % 200;
    if (N < p.d) ++below_d;
    const Dataset ds = sample_dataset(p, b, N, 8000 + t);
    const LinearEstimator pca = pca_estimator(svd_of(ds), p);
    const MatrixXd& u_hat = pca.as_scaled_projection()->basis;
    worst = std::max(worst, std::abs(pca_risk_specialized(u_hat, b, p) - risk_closed_form(pca, b, p)));
  }
  o.detail << "  worst |specialized - generic| " << fmt(worst, 3) << " over 100 instances ("
           << below_d << " with N < d)\n";
  o.require(below_d > 0, "instances with N < d included");
  o.require(worst <= kPcaSpecializedTol, "agreement to 1e-10");
}

void criterion6(Outcome& o, const fs::path& rep_dir) {
  const RiskCurve c = read_curve_csv(rep_dir / "sigma0.1.csv");
  const double d = 10, n = 1000, sigma = 0.1;
  const double floor = sigma * sigma / (1 + sigma * sigma);
  double lo = INFINITY, hi = 0;
  for (const CurvePoint& pt : points_of(c, "PCA_M", 100, 20000)) {
    const double ratio = (pt.value - floor) * pt.n / ((d + n * sigma * sigma) * std::log(n));
    lo = std::min(lo, ratio);
    hi = std::max(hi, ratio);
  }
  o.detail << "  ratio range [" << fmt(lo) << ", " << fmt(hi) << "], spread " << fmt(hi / lo) << '\n';
  o.require(lo > 0 && hi / lo <= kTheoryRatioSpread, "ratio varies by at most a factor 5");
}

void criterion7(Outcome& o) {
  auto logspace = [](double lo, double hi, int count) {
    std::vector<double> out(count);
    for (int i = 0; i < count; ++i) {
      out[i] = std::pow(10.0, std::log10(lo) + (std::log10(hi) - std::log10(lo)) * i / (count - 1));
    }
    return out;
  };

  std::mt19937_64 gen(77);
  std::uniform_real_distribution<double> slope(-2.0, 0.5), scale(0.01, 100.0);
  double worst_alpha = 0, worst_r2 = 0;
  for (int t = 0; t < 100; ++t) {
    const double a = slope(gen), b = scale(gen);
    std::vector<CurvePoint> pts;
    for (double n : logspace(1, 1e5, 15)) pts.push_back({n, b * std::pow(n, a)});
    const PowerLawFit f = fit_powerlaw(pts);
    worst_alpha = std::max(worst_alpha, std::abs(f.alpha - a));
    // A flat law has no variance to explain; r^2 is then 1 by convention.
    worst_r2 = std::max(worst_r2, std::abs(1.0 - f.r_squared));
  }
  o.detail << "  noiseless: worst |d alpha| " << fmt(worst_alpha, 3) << ", worst |1 - r2| "
           << fmt(worst_r2, 3) << '\n';
  o.require(worst_alpha <= kNoiselessSlopeTol, "noiseless |d alpha| <= 1e-10");
  o.require(worst_r2 <= kNoiselessR2Tol, "noiseless r2 = 1");

  std::normal_distribution<double> noise(0.0, 0.05);
  int within = 0;
  const auto ns = logspace(10, 1e4, 20);
  for (int t = 0; t < kNoisyTrials; ++t) {
    std::vector<CurvePoint> pts;
    for (double n : ns) pts.push_back({n, 0.7 * std::pow(n, -1.05) * std::exp(noise(gen))});
    if (std::abs(fit_powerlaw(pts).alpha + 1.05) <= kNoisySlopeTol) ++within;
  }
  o.detail << "  lognormal 0.05: " << within << "/" << kNoisyTrials << " within 0.02\n";
  o.require(within >= kNoisyPassFraction * kNoisyTrials, ">= 95% of noisy trials within 0.02");

  // PSNR-like curve: slope 0.0075 up to the break, 0.0029 after it.
  const auto grid = logspace(10, 1e8, 12);
  const double n_break = 30000.0, a1 = 0.0075, a2 = 0.0029, b1 = 30.0;
  const double b2 = b1 * std::pow(n_break, a1 - a2);
  std::vector<CurvePoint> pts;
  for (double n : grid) pts.push_back({n, n <= n_break ? b1 * std::pow(n, a1) : b2 * std::pow(n, a2)});
  const SegmentedFit s = fit_segmented(pts);
  std::size_t truth = 0;
  while (truth < grid.size() && grid[truth] <= n_break) ++truth;
  const long off = static_cast<long>(s.break_index) - static_cast<long>(truth);
  o.detail << "  segmented: slopes " << fmt(s.left.alpha) << " / " << fmt(s.right.alpha)
           << ", break N " << fmt(s.break_n) << " (grid offset " << off << ")\n";
  o.require(std::abs(off) <= 1, "break within one grid position");
  o.require(s.breakpoint_evidence, "breakpoint evidence reported");
}

void criterion8(Outcome& o, const fs::path& rep_dir) {
  auto simulate = [&](const Fig5Run& r, const std::string& threads) {
    const fs::path out = rep_dir / ("sim_" + r.label + "_t" + threads + ".csv");
    const int code = run_cli("simulate --d 10 --n 1000 --sigma " + fmt(r.sigma) +
                                 " --grid 1:20000:5 --seeds 5 --est opt,esgd,pca --base-seed 0" +
                                 " --threads " + threads + " --out " + quote(out.string()),
                             rep_dir / ("sim_" + r.label + "_t" + threads + ".log"));
    o.require(code == 0, "simulate exits 0 (" + r.label + ", threads " + threads + ")");
    return slurp(out);
  };
  for (const Fig5Run& r : kFig5) {
    // The reproduce run used --threads max.
    const std::string max_csv = slurp(rep_dir / (r.label + ".csv"));
    const bool same1 = !max_csv.empty() && simulate(r, "1") == max_csv;
    o.detail << "  " << r.label << ": threads 1 vs max " << (same1 ? "identical" : "DIFFER") << '\n';
    o.require(same1, "byte-identical CSV for " + r.label);
  }
  // One core makes 'max' a single worker; force real concurrency once.
  const Fig5Run& mid = kFig5[1];
  const bool same4 = simulate(mid, "4") == slurp(rep_dir / (mid.label + ".csv"));
  o.detail << "  " << mid.label << ": threads 4 vs max " << (same4 ? "identical" : "DIFFER") << '\n';
  o.require(same4, "byte-identical CSV with 4 threads");
}

}  // namespace

int main(int argc, char** argv) {
  const fs::path work = argc > 1 ? fs::path(argv[1]) : fs::temp_directory_path() / "sldlab_acceptance";
  fs::remove_all(work);
  fs::create_directories(work);
  const fs::path rep_dir = work / "fig5";

  std::cout << "sldlab acceptance, work dir " << work.string() << std::endl;
  const auto t0 = std::chrono::steady_clock::now();
  const int rep_code = run_cli("reproduce fig5 --threads max --out " + quote(rep_dir.string()),
                               work / "reproduce_fig5.log");
  std::cout << "reproduce fig5: exit " << rep_code << " in " << fmt(seconds_since(t0), 4) << " s"
            << std::endl;

  const std::vector<std::pair<int, std::function<void(Outcome&)>>> criteria = {
      {1, criterion1},
      {2, [&](Outcome& o) { criterion2(o, rep_dir); }},
      {3, criterion3},
      {4, criterion4},
      {5, criterion5},
      {6, [&](Outcome& o) { criterion6(o, rep_dir); }},
      {7, criterion7},
      {8, [&](Outcome& o) { criterion8(o, rep_dir); }},
  };
  const std::set<int> needs_reproduce = {2, 6, 8};

  int unexpected = 0;
  for (const auto& [id, fn] : criteria) {
    Outcome o;
    const auto start = std::chrono::steady_clock::now();
    if (needs_reproduce.count(id) && rep_code != 0) {
      o.require(false, "reproduce fig5 failed; see " + (work / "reproduce_fig5.log").string());
    } else {
      try {
        fn(o);
      } catch (const std::exception& e) {
        o.require(false, std::string("exception: ") + e.what());
      }
    }
    const bool known = kKnownFailures.count(id) > 0;
    std::cout << "CRITERION " << id << ": " << (o.pass ? "PASS" : "FAIL")
              << (!o.pass && known ? " (known failure)" : "") << "  [" << fmt(seconds_since(start), 3)
              << " s]\n"
              << o.detail.str() << std::flush;
    if (!o.pass && !known) ++unexpected;
  }
  std::cout << (unexpected == 0 ? "acceptance: no unexpected failures"
                                : "acceptance: " + std::to_string(unexpected) + " unexpected failure(s)")
            << std::endl;
  return unexpected == 0 ? 0 : 1;
}
