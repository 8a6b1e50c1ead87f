#pragma once

#include "ralm/geometry.hpp"

namespace ralm {

struct ArgmaxResult {
  Point2D position;
  int row = 0;
  int col = 0;
};

// Center of the maximizing cell; ties break to the smallest (row, col)
// lexicographically. An all-zero field carries no information and throws.
ArgmaxResult argmax_position(const GridField& fused);

// Likelihood-weighted mean of cell centers; the smooth counterpart of the
// argmax (no sub-cell interpolation is done there).
Point2D weighted_centroid(const GridField& fused);

}  // namespace ralm
