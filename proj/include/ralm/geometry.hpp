#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace ralm {

inline constexpr double kPi = 3.141592653589793238462643383279502884;

struct Point2D {
  double x = 0.0;  // meters
  double y = 0.0;  // meters
};

struct Anchor {
  int id = 0;
  Point2D position;
};

// Axis-aligned cabin rectangle. Default matches a single-aisle cabin floor
// of 30 m x 3.5 m (height is not modeled, positioning is 2D).
struct CabinSpec {
  double x_min = 0.0;
  double x_max = 30.0;
  double y_min = 0.0;
  double y_max = 3.5;

  double width() const { return x_max - x_min; }
  double height() const { return y_max - y_min; }
  bool contains(const Point2D& p) const {
    return p.x >= x_min && p.x <= x_max && p.y >= y_min && p.y <= y_max;
  }
  void validate() const;
};

// Uniform M x N discretization of the cabin. Rows index y, columns index x;
// cell values live at cell centers.
struct GridSpec {
  CabinSpec bounds;
  int rows = 62;  // M, y direction
  int cols = 62;  // N, x direction

  double dx() const { return bounds.width() / cols; }
  double dy() const { return bounds.height() / rows; }
  double cell_diagonal() const { return std::hypot(dx(), dy()); }
  void validate() const;

  friend bool operator==(const GridSpec& a, const GridSpec& b) {
    return a.bounds.x_min == b.bounds.x_min && a.bounds.x_max == b.bounds.x_max &&
           a.bounds.y_min == b.bounds.y_min && a.bounds.y_max == b.bounds.y_max &&
           a.rows == b.rows && a.cols == b.cols;
  }
};

// Dense M x N field of doubles over a grid, row-major.
struct GridField {
  GridSpec spec;
  std::vector<double> values;

  GridField() = default;
  explicit GridField(const GridSpec& s, double fill = 0.0)
      : spec(s), values(static_cast<size_t>(s.rows) * s.cols, fill) {}

  double& at(int m, int n) { return values[static_cast<size_t>(m) * spec.cols + n]; }
  double at(int m, int n) const { return values[static_cast<size_t>(m) * spec.cols + n]; }
  size_t size() const { return values.size(); }
};

double true_range(const Point2D& tag, const Point2D& anchor);

// Azimuth of the tag as seen from the anchor, atan2 convention, in (-pi, pi].
// Coincident points return 0 and set *degenerate when provided.
double true_bearing(const Point2D& tag, const Point2D& anchor, bool* degenerate = nullptr);

// Wraps to (-pi, pi]; -pi maps to +pi.
double wrap_angle(double a);

Point2D cell_center(const GridSpec& grid, int m, int n);

// Cell containing p. Points on the max boundary clamp to the last cell;
// points outside the bounds throw std::domain_error.
std::pair<int, int> containing_cell(const GridSpec& grid, const Point2D& p);

// 8 anchors along both cabin walls at x = {3, 11, 19, 27}. Uniform coverage
// of an elongated cabin; override per scenario.
std::vector<Anchor> default_anchors(const CabinSpec& cabin = CabinSpec{});

}  // namespace ralm
