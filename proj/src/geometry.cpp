#include "ralm/geometry.hpp"

#include <algorithm>
#include <string>

namespace ralm {

void CabinSpec::validate() const {
  if (!(x_min < x_max) || !(y_min < y_max)) {
    throw std::invalid_argument("cabin bounds require x_min < x_max and y_min < y_max");
  }
}

void GridSpec::validate() const {
  bounds.validate();
  if (rows < 2 || cols < 2) {
    throw std::invalid_argument("grid requires at least 2 rows and 2 columns");
  }
}

double true_range(const Point2D& tag, const Point2D& anchor) {
  return std::hypot(tag.x - anchor.x, tag.y - anchor.y);
}

double true_bearing(const Point2D& tag, const Point2D& anchor, bool* degenerate) {
  const double dx = tag.x - anchor.x;
  const double dy = tag.y - anchor.y;
  if (dx == 0.0 && dy == 0.0) {
    if (degenerate != nullptr) *degenerate = true;
    return 0.0;
  }
  if (degenerate != nullptr) *degenerate = false;
  return wrap_angle(std::atan2(dy, dx));
}

double wrap_angle(double a) {
  // remainder() lands in [-pi, pi]; fold the open end onto +pi.
  double w = std::remainder(a, 2.0 * kPi);
  if (w == -kPi) w = kPi;
  return w;
}

Point2D cell_center(const GridSpec& grid, int m, int n) {
  if (m < 0 || m >= grid.rows || n < 0 || n >= grid.cols) {
    throw std::out_of_range("cell index (" + std::to_string(m) + "," + std::to_string(n) +
                            ") outside " + std::to_string(grid.rows) + "x" +
                            std::to_string(grid.cols) + " grid");
  }
  return {grid.bounds.x_min + (n + 0.5) * grid.dx(),
          grid.bounds.y_min + (m + 0.5) * grid.dy()};
}

std::pair<int, int> containing_cell(const GridSpec& grid, const Point2D& p) {
  if (!grid.bounds.contains(p)) {
    throw std::domain_error("point (" + std::to_string(p.x) + "," + std::to_string(p.y) +
                            ") outside cabin bounds");
  }
  int n = static_cast<int>(std::floor((p.x - grid.bounds.x_min) / grid.dx()));
  int m = static_cast<int>(std::floor((p.y - grid.bounds.y_min) / grid.dy()));
  m = std::clamp(m, 0, grid.rows - 1);
  n = std::clamp(n, 0, grid.cols - 1);
  return {m, n};
}

std::vector<Anchor> default_anchors(const CabinSpec& cabin) {
  std::vector<Anchor> anchors;
  const double xs[] = {3.0, 11.0, 19.0, 27.0};
  const double ys[] = {0.2, 3.3};
  int id = 0;
  for (double y : ys) {
    for (double x : xs) {
      anchors.push_back({id++, {cabin.x_min + x / 30.0 * cabin.width(),
                                cabin.y_min + y / 3.5 * cabin.height()}});
    }
  }
  return anchors;
}

}  // namespace ralm
