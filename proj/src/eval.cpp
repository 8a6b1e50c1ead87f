#include "ralm/eval.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "ralm/errors.hpp"

namespace ralm {

std::vector<double> euclidean_errors(const std::vector<Point2D>& pred,
                                     const std::vector<Point2D>& truth) {
  if (pred.size() != truth.size()) throw std::invalid_argument("pred/truth length mismatch");
  if (pred.empty()) throw std::invalid_argument("empty prediction list");
  std::vector<double> out(pred.size());
  for (size_t i = 0; i < pred.size(); ++i) {
    out[i] = std::hypot(pred[i].x - truth[i].x, pred[i].y - truth[i].y);
  }
  return out;
}

std::vector<std::pair<double, double>> ecdf(const std::vector<double>& errors) {
  if (errors.empty()) throw std::invalid_argument("ecdf of empty list");
  std::vector<double> sorted = errors;
  std::sort(sorted.begin(), sorted.end());
  std::vector<std::pair<double, double>> out;
  const double n = static_cast<double>(sorted.size());
  for (size_t i = 0; i < sorted.size(); ++i) {
    // Last occurrence of each distinct value carries count(<= value)/n.
    if (i + 1 == sorted.size() || sorted[i + 1] != sorted[i]) {
      out.emplace_back(sorted[i], static_cast<double>(i + 1) / n);
    }
  }
  return out;
}

double percentile(std::vector<double> errors, double p) {
  if (errors.empty()) throw std::invalid_argument("percentile of empty list");
  if (!(p > 0.0 && p <= 100.0)) throw std::invalid_argument("percentile p must be in (0,100]");
  std::sort(errors.begin(), errors.end());
  const size_t rank = static_cast<size_t>(
      std::ceil(p * static_cast<double>(errors.size()) / 100.0));
  return errors[std::max<size_t>(rank, 1) - 1];
}

MetricsSummary metrics_summary(const std::vector<Point2D>& pred,
                               const std::vector<Point2D>& truth) {
  const std::vector<double> errs = euclidean_errors(pred, truth);
  MetricsSummary s;
  double sq = 0.0, sum = 0.0;
  for (double e : errs) {
    sq += e * e;
    sum += e;
  }
  s.mse_m2 = sq / static_cast<double>(2 * errs.size());
  s.rmse_m = std::sqrt(s.mse_m2);
  s.mean_m = sum / static_cast<double>(errs.size());
  s.median_m = percentile(errs, 50.0);
  s.p95_m = percentile(errs, 95.0);
  return s;
}

namespace {

Histogram build_histogram(const std::vector<double>& values, int bins, bool use_span,
                          double lo, double hi) {
  if (!use_span) {
    lo = *std::min_element(values.begin(), values.end());
    hi = *std::max_element(values.begin(), values.end());
  }
  if (hi <= lo) hi = lo + 1e-9;  // degenerate span: single spike bin
  Histogram h;
  const double width = (hi - lo) / bins;
  for (int b = 0; b < bins; ++b) {
    h.bin_left.push_back(lo + b * width);
    h.bin_right.push_back(lo + (b + 1) * width);
    h.counts.push_back(0);
  }
  for (double v : values) {
    int b = static_cast<int>(std::floor((v - lo) / width));
    b = std::clamp(b, 0, bins - 1);  // boundary and span-edge values
    ++h.counts[static_cast<size_t>(b)];
  }
  return h;
}

}  // namespace

ResidualHistograms residual_histograms(
    const std::vector<std::vector<Measurement>>& measurements,
    const std::vector<Point2D>& truths, const std::vector<Anchor>& anchors, int bins,
    const HistogramSpans& spans) {
  if (bins < 1) throw std::invalid_argument("bins must be >= 1");
  if (measurements.size() != truths.size()) {
    throw std::invalid_argument("measurements/truths length mismatch");
  }
  std::map<int, Point2D> anchor_pos;
  for (const auto& a : anchors) anchor_pos[a.id] = a.position;

  std::vector<double> range_res, angle_res;
  for (size_t i = 0; i < measurements.size(); ++i) {
    for (const Measurement& m : measurements[i]) {
      const auto it = anchor_pos.find(m.anchor_id);
      if (it == anchor_pos.end()) {
        throw std::invalid_argument("unknown anchor id " + std::to_string(m.anchor_id));
      }
      if (m.range) range_res.push_back(*m.range - true_range(truths[i], it->second));
      if (m.angle) {
        angle_res.push_back(wrap_angle(*m.angle - true_bearing(truths[i], it->second)));
      }
    }
  }
  if (range_res.empty() && angle_res.empty()) {
    throw DataError("no valid measurements to histogram");
  }

  ResidualHistograms out;
  if (!range_res.empty()) {
    out.range = build_histogram(range_res, bins, spans.use_range_span, spans.range_lo,
                                spans.range_hi);
  }
  if (!angle_res.empty()) {
    out.angle = build_histogram(angle_res, bins, spans.use_angle_span, spans.angle_lo,
                                spans.angle_hi);
  }
  return out;
}

}  // namespace ralm
