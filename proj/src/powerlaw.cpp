#include "sldlab/powerlaw.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "sldlab/error.hpp"

namespace sldlab {
namespace {

IndexRange resolve(std::span<const CurvePoint> points, std::optional<IndexRange> region) {
  const IndexRange r = region.value_or(IndexRange{0, points.size()});
  if (r.lo > r.hi || r.hi > points.size()) {
    throw Error(ErrorCode::InvalidArgument,
                "fit region [" + std::to_string(r.lo) + ", " + std::to_string(r.hi) +
                    ") is outside the " + std::to_string(points.size()) + " input points");
  }
  return r;
}

std::string index_list(const std::vector<std::size_t>& idx) {
  std::string s;
  for (std::size_t i : idx) {
    if (!s.empty()) s += ", ";
    s += std::to_string(i);
  }
  return s;
}

// Weighted OLS of log(value - floor) on log(N) over the given indices.
PowerLawFit fit_indices(std::span<const CurvePoint> points, const std::vector<std::size_t>& use,
                        double floor, std::span<const double> weights) {
  if (use.size() < 2) {
    throw Error(ErrorCode::InsufficientData,
                "power-law fit needs at least 2 usable points, got " + std::to_string(use.size()));
  }
  std::vector<std::size_t> bad;
  for (std::size_t i : use) {
    if (!(points[i].n > 0.0) || !(points[i].value - floor > 0.0) ||
        !std::isfinite(points[i].value) || !std::isfinite(points[i].n)) {
      bad.push_back(i);
    }
  }
  if (!bad.empty()) {
    throw Error(ErrorCode::Domain,
                "power-law fit needs positive N and values; offending indices: " +
                    index_list(bad));
  }
  std::vector<double> ns;
  ns.reserve(use.size());
  for (std::size_t i : use) ns.push_back(points[i].n);
  std::sort(ns.begin(), ns.end());
  if (std::adjacent_find(ns.begin(), ns.end()) != ns.end()) {
    throw Error(ErrorCode::InvalidArgument, "power-law fit needs distinct N values");
  }

  const bool weighted = !weights.empty();
  double wsum = 0.0, mx = 0.0, my = 0.0;
  for (std::size_t i : use) {
    const double w = weighted ? weights[i] : 1.0;
    wsum += w;
    mx += w * std::log(points[i].n);
    my += w * std::log(points[i].value - floor);
  }
  mx /= wsum;
  my /= wsum;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i : use) {
    const double w = weighted ? weights[i] : 1.0;
    const double dx = std::log(points[i].n) - mx;
    const double dy = std::log(points[i].value - floor) - my;
    sxx += w * dx * dx;
    sxy += w * dx * dy;
    syy += w * dy * dy;
  }
  PowerLawFit fit;
  fit.alpha = sxy / sxx;
  fit.log_beta = my - fit.alpha * mx;
  double sse = 0.0;
  for (std::size_t i : use) {
    const double w = weighted ? weights[i] : 1.0;
    const double resid =
        std::log(points[i].value - floor) - (fit.log_beta + fit.alpha * std::log(points[i].n));
    sse += w * resid * resid;
  }
  fit.sse = sse;
  fit.r_squared = syy > 0.0 ? std::clamp(1.0 - sse / syy, 0.0, 1.0) : 1.0;
  fit.n_points = use.size();
  fit.floor = floor;
  return fit;
}

std::vector<std::size_t> excess_indices(std::span<const CurvePoint> points, IndexRange r,
                                        double floor, std::vector<std::size_t>& dropped) {
  double vmax = 0.0;
  for (std::size_t i = r.lo; i < r.hi; ++i) vmax = std::max(vmax, std::abs(points[i].value));
  const double tol = 1e-12 * vmax;
  std::vector<std::size_t> keep;
  for (std::size_t i = r.lo; i < r.hi; ++i) {
    if (points[i].value - floor <= tol) {
      dropped.push_back(i);
    } else {
      keep.push_back(i);
    }
  }
  return keep;
}

}  // namespace

double PowerLawFit::beta() const { return std::exp(log_beta); }

PowerLawFit fit_powerlaw(std::span<const CurvePoint> points, std::optional<IndexRange> region,
                         std::span<const double> weights) {
  const IndexRange r = resolve(points, region);
  if (!weights.empty()) {
    if (weights.size() != points.size()) {
      throw Error(ErrorCode::InvalidArgument, "need one weight per point");
    }
    for (std::size_t i = r.lo; i < r.hi; ++i) {
      if (!(weights[i] > 0.0) || !std::isfinite(weights[i])) {
        throw Error(ErrorCode::Domain, "weights must be positive and finite");
      }
    }
  }
  std::vector<std::size_t> use;
  for (std::size_t i = r.lo; i < r.hi; ++i) use.push_back(i);
  PowerLawFit fit = fit_indices(points, use, 0.0, weights);
  fit.region = r;
  return fit;
}

PowerLawFit fit_excess_powerlaw(std::span<const CurvePoint> points, double floor,
                                std::optional<IndexRange> region) {
  if (!(floor >= 0.0) || !std::isfinite(floor)) {
    throw Error(ErrorCode::Domain, "floor must be finite and nonnegative");
  }
  const IndexRange r = resolve(points, region);
  std::vector<std::size_t> dropped;
  const std::vector<std::size_t> keep = excess_indices(points, r, floor, dropped);
  if (keep.size() < 2) {
    throw Error(ErrorCode::InsufficientData,
                std::to_string(dropped.size()) + " of " + std::to_string(r.size()) +
                    " points are at or below the floor; fewer than 2 remain");
  }
  PowerLawFit fit = fit_indices(points, keep, floor, {});
  fit.region = r;
  fit.dropped = std::move(dropped);
  return fit;
}

SegmentedFit fit_segmented(std::span<const CurvePoint> points, int min_seg,
                           std::optional<double> floor, std::optional<IndexRange> region) {
  if (min_seg < 2) throw Error(ErrorCode::InvalidArgument, "min_seg must be >= 2");
  const IndexRange r = resolve(points, region);
  const double f = floor.value_or(0.0);
  if (!(f >= 0.0) || !std::isfinite(f)) {
    throw Error(ErrorCode::Domain, "floor must be finite and nonnegative");
  }
  std::vector<std::size_t> dropped;
  const std::vector<std::size_t> use =
      floor ? excess_indices(points, r, f, dropped) : std::vector<std::size_t>{};
  std::vector<std::size_t> all;
  if (!floor) {
    for (std::size_t i = r.lo; i < r.hi; ++i) all.push_back(i);
  }
  const std::vector<std::size_t>& idx = floor ? use : all;
  const auto seg = static_cast<std::size_t>(min_seg);
  if (idx.size() < 2 * seg) {
    throw Error(ErrorCode::InsufficientData,
                "segmented fit needs at least " + std::to_string(2 * seg) +
                    " usable points, got " + std::to_string(idx.size()));
  }

  SegmentedFit best;
  bool have = false;
  for (std::size_t b = seg; b + seg <= idx.size(); ++b) {
    const std::vector<std::size_t> left(idx.begin(), idx.begin() + static_cast<long>(b));
    const std::vector<std::size_t> right(idx.begin() + static_cast<long>(b), idx.end());
    PowerLawFit lf = fit_indices(points, left, f, {});
    PowerLawFit rf = fit_indices(points, right, f, {});
    const double total = lf.sse + rf.sse;
    if (!have || total < best.total_sse) {
      have = true;
      lf.region = {idx.front(), idx[b]};
      rf.region = {idx[b], idx.back() + 1};
      best.left = std::move(lf);
      best.right = std::move(rf);
      best.break_index = idx[b];
      best.break_n = std::sqrt(points[idx[b - 1]].n * points[idx[b]].n);
      best.total_sse = total;
    }
  }
  for (PowerLawFit* side : {&best.left, &best.right}) {
    for (std::size_t i : dropped) {
      if (i >= side->region.lo && i < side->region.hi) side->dropped.push_back(i);
    }
  }
  const PowerLawFit single = fit_indices(points, idx, f, {});
  best.single_sse = single.sse;
  // When one power law already explains the data to rounding error, both SSEs
  // are noise and their ratio says nothing about a break.
  const bool single_exact = single.r_squared >= 1.0 - 1e-12;
  best.sse_improvement = best.single_sse > 0.0 && !single_exact
                             ? (best.single_sse - best.total_sse) / best.single_sse
                             : 0.0;
  best.breakpoint_evidence = best.sse_improvement >= kBreakpointEvidenceThreshold;
  return best;
}

double predict(const PowerLawFit& fit, double n) {
  if (!(n > 0.0)) throw Error(ErrorCode::Domain, "predict needs N > 0");
  return std::exp(fit.log_beta + fit.alpha * std::log(n));
}

double solve_for_n(const PowerLawFit& fit, double value) {
  if (fit.alpha == 0.0) throw Error(ErrorCode::Domain, "flat power law has no inverse");
  if (!(value > 0.0)) throw Error(ErrorCode::Domain, "target value must be positive");
  return std::exp((std::log(value) - fit.log_beta) / fit.alpha);
}

}  // namespace sldlab
