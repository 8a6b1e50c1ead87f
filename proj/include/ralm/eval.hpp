#pragma once

#include <vector>

#include "ralm/channel.hpp"
#include "ralm/geometry.hpp"

namespace ralm {

// Per-sample straight-line distances between prediction and truth.
std::vector<double> euclidean_errors(const std::vector<Point2D>& pred,
                                     const std::vector<Point2D>& truth);

// Empirical CDF: one step per distinct value, ascending, ending at 1.0.
std::vector<std::pair<double, double>> ecdf(const std::vector<double>& errors);

// Nearest-rank percentile: value at 1-based index ceil(p*n/100) of the
// ascending sort. 0 < p <= 100.
double percentile(std::vector<double> errors, double p);

struct MetricsSummary {
  double mse_m2 = 0.0;   // over all 2B coordinate components
  double rmse_m = 0.0;
  double mean_m = 0.0;
  double median_m = 0.0;
  double p95_m = 0.0;
};

MetricsSummary metrics_summary(const std::vector<Point2D>& pred,
                               const std::vector<Point2D>& truth);

struct Histogram {
  std::vector<double> bin_left;
  std::vector<double> bin_right;
  std::vector<size_t> counts;    // sums to the number of included samples
};

struct ResidualHistograms {
  Histogram range;   // measured - true, meters
  Histogram angle;   // wrapped, radians
};

// Measurement-error distributions over all valid (non-failure) range/angle
// observations. Bin spans default to the data extent; pass explicit spans
// to pin them.
struct HistogramSpans {
  bool use_range_span = false;
  double range_lo = 0.0, range_hi = 0.0;
  bool use_angle_span = false;
  double angle_lo = 0.0, angle_hi = 0.0;
};

ResidualHistograms residual_histograms(
    const std::vector<std::vector<Measurement>>& measurements,
    const std::vector<Point2D>& truths, const std::vector<Anchor>& anchors, int bins,
    const HistogramSpans& spans = {});

}  // namespace ralm
