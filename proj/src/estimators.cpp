#include "ralm/estimators.hpp"

#include "ralm/errors.hpp"

namespace ralm {

ArgmaxResult argmax_position(const GridField& fused) {
  if (fused.values.empty()) throw std::invalid_argument("empty field");
  double best = 0.0;
  int bm = -1, bn = -1;
  for (int m = 0; m < fused.spec.rows; ++m) {
    for (int n = 0; n < fused.spec.cols; ++n) {
      const double v = fused.at(m, n);
      if (v > best) {  // strict: first maximum in row-major order wins ties
        best = v;
        bm = m;
        bn = n;
      }
    }
  }
  if (bm < 0) throw NumericError("all-zero likelihood field: no position information");
  return {cell_center(fused.spec, bm, bn), bm, bn};
}

Point2D weighted_centroid(const GridField& fused) {
  if (fused.values.empty()) throw std::invalid_argument("empty field");
  double sum = 0.0, sx = 0.0, sy = 0.0;
  for (int m = 0; m < fused.spec.rows; ++m) {
    for (int n = 0; n < fused.spec.cols; ++n) {
      const double w = fused.at(m, n);
      if (w <= 0.0) continue;
      const Point2D c = cell_center(fused.spec, m, n);
      sum += w;
      sx += w * c.x;
      sy += w * c.y;
    }
  }
  if (sum <= 0.0) throw NumericError("zero-sum likelihood field: no position information");
  return {sx / sum, sy / sum};
}

}  // namespace ralm
