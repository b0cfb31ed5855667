#pragma once

// Power-law regression in log-log space: value ~ beta * N^alpha.
//
// alpha is the signed slope (negative for a decaying risk, positive for a
// rising PSNR). Logarithms are natural.

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace sldlab {

struct CurvePoint {
  double n = 0.0;
  double value = 0.0;
};

/// Half-open index range [lo, hi) into a point list.
struct IndexRange {
  std::size_t lo = 0;
  std::size_t hi = 0;

  std::size_t size() const noexcept { return hi - lo; }
  friend bool operator==(const IndexRange&, const IndexRange&) = default;
};

struct PowerLawFit {
  double alpha = 0.0;
  double log_beta = 0.0;
  double r_squared = 0.0;
  double sse = 0.0;                    // sum of squared log residuals
  IndexRange region;                   // input range the fit was asked to cover
  std::size_t n_points = 0;            // points actually used
  double floor = 0.0;                  // subtracted before taking logs
  std::vector<std::size_t> dropped;    // indices removed by floor subtraction

  double beta() const;
};

struct SegmentedFit {
  PowerLawFit left;
  PowerLawFit right;
  std::size_t break_index = 0;  // first input index of the right segment
  double break_n = 0.0;         // geometric mean of the straddling N values
  double total_sse = 0.0;
  double single_sse = 0.0;      // SSE of one power law over the same points
  double sse_improvement = 0.0; // (single - total) / single, 0 if single == 0
  bool breakpoint_evidence = false;
};

/// Fraction of single-fit SSE a two-segment fit must remove to count as a
/// breakpoint.
inline constexpr double kBreakpointEvidenceThreshold = 0.05;

/// Ordinary least squares of log(value) on log(N) over `region` (default: all
/// points). `weights`, when non-empty, must have one positive entry per input
/// point and turns the fit into weighted least squares.
///
/// Throws Error(Domain) naming the offending indices when a value or N in the
/// region is not positive, Error(InsufficientData) with fewer than two points
/// and Error(InvalidArgument) for duplicate N values.
PowerLawFit fit_powerlaw(std::span<const CurvePoint> points,
                         std::optional<IndexRange> region = std::nullopt,
                         std::span<const double> weights = {});

/// Subtracts `floor`, drops points whose excess is <= 1e-12 * max(value), and
/// fits the rest. Dropped indices are reported in the result.
PowerLawFit fit_excess_powerlaw(std::span<const CurvePoint> points, double floor,
                                std::optional<IndexRange> region = std::nullopt);

/// Exhaustive two-segment search minimizing total log-space SSE. Each side
/// keeps at least `min_seg` points; ties go to the earlier break.
SegmentedFit fit_segmented(std::span<const CurvePoint> points, int min_seg = 3,
                           std::optional<double> floor = std::nullopt,
                           std::optional<IndexRange> region = std::nullopt);

/// beta * N^alpha.
double predict(const PowerLawFit& fit, double n);

/// N at which predict(fit, N) == value. Throws Error(Domain) when alpha == 0
/// or value <= 0.
double solve_for_n(const PowerLawFit& fit, double value);

}  // namespace sldlab
