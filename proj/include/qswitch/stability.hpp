#pragma once

// Empirical stability: a run is stable when the least-squares slope of its
// queue length against the step index falls below a threshold.

#include <algorithm>
#include <cstddef>
#include <iterator>
#include <limits>
#include <ranges>
#include <stdexcept>
#include <vector>

#include "qswitch/simulator.hpp"

namespace qswitch {

inline constexpr double kDefaultSlopeThreshold = 1e-4;

/// OLS slope of y against x = 0, 1, ..., n-1.
///
/// The index is centred analytically (mean (n-1)/2, sum of squares
/// n(n^2-1)/12) and y is centred by a first pass, so the accumulated terms
/// stay small even for long series.
template <std::ranges::forward_range R>
double regression_slope(const R& series) {
  const auto n = static_cast<std::size_t>(std::ranges::distance(series));
  if (n < 2) throw std::domain_error("regression needs at least two points");
  const double nd = static_cast<double>(n);

  long double sum_y = 0.0L;
  for (const auto& y : series) sum_y += static_cast<long double>(y);
  const long double mean_y = sum_y / nd;
  const long double mean_x = (nd - 1.0L) / 2.0L;

  long double sxy = 0.0L;
  std::size_t x = 0;
  for (const auto& y : series) {
    sxy += (static_cast<long double>(x) - mean_x) * (static_cast<long double>(y) - mean_y);
    ++x;
  }
  const long double sxx = static_cast<long double>(nd) * (static_cast<long double>(nd) * nd - 1.0L) / 12.0L;
  return static_cast<double>(sxy / sxx);
}

enum class SlopeBasis { total, per_flow_max };

inline const char* to_string(SlopeBasis b) { return b == SlopeBasis::total ? "total" : "per_flow_max"; }

struct StabilityVerdict {
  double slope = 0.0;
  double threshold = kDefaultSlopeThreshold;
  bool stable = true;
  SlopeBasis basis = SlopeBasis::total;
};

/// stable iff slope < threshold. The total series is the default basis; the
/// per-flow basis takes the largest of the per-flow slopes and needs a trace
/// recorded with per-flow queues.
inline StabilityVerdict classify(const SimTrace& trace, double threshold = kDefaultSlopeThreshold,
                                 SlopeBasis basis = SlopeBasis::total) {
  if (trace.steps == 0) throw std::invalid_argument("cannot classify an empty trace");
  StabilityVerdict v;
  v.threshold = threshold;
  v.basis = basis;
  if (trace.steps < 2) {
    v.slope = 0.0;
  } else if (basis == SlopeBasis::total) {
    v.slope = regression_slope(trace.total);
  } else {
    if (!trace.has_per_flow()) {
      throw std::invalid_argument("per-flow basis requires a trace with per-flow queue lengths");
    }
    v.slope = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < trace.num_flows; ++i) {
      v.slope = std::max(v.slope, regression_slope(trace.flow_series(i)));
    }
    if (trace.num_flows == 0) v.slope = 0.0;
  }
  v.stable = v.slope < threshold;
  return v;
}

}  // namespace qswitch
