#include "ralm/likelihood.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace ralm {

namespace {

// Kernel values this small carry no information and only dirty the files.
constexpr double kFlushBelow = 1e-300;

double kernel(double residual, double sigma) {
  const double v = std::exp(-residual * residual / (2.0 * sigma * sigma));
  return v < kFlushBelow ? 0.0 : v;
}

}  // namespace

void ObservationSigmas::validate() const {
  if (sigma_r <= 0 || sigma_theta <= 0) {
    throw std::invalid_argument("observation sigmas must be strictly positive");
  }
}

GridField known_range_grid(const GridSpec& grid, const Anchor& anchor) {
  grid.validate();
  GridField out(grid);
  for (int m = 0; m < grid.rows; ++m) {
    for (int n = 0; n < grid.cols; ++n) {
      out.at(m, n) = true_range(cell_center(grid, m, n), anchor.position);
    }
  }
  return out;
}

GridField known_angle_grid(const GridSpec& grid, const Anchor& anchor) {
  grid.validate();
  GridField out(grid);
  for (int m = 0; m < grid.rows; ++m) {
    for (int n = 0; n < grid.cols; ++n) {
      // Degenerate (anchor-coincident) cells carry the defined-zero bearing.
      out.at(m, n) = true_bearing(cell_center(grid, m, n), anchor.position);
    }
  }
  return out;
}

LikelihoodGrid range_likelihood_grid(const GridField& known, int anchor_id, double d_hat,
                                     double sigma_r) {
  if (d_hat < 0) throw std::invalid_argument("range measurement must be non-negative");
  if (sigma_r <= 0) throw std::invalid_argument("sigma_r must be positive");
  LikelihoodGrid g{known.spec, anchor_id, MapKind::Range, GridField(known.spec), false};
  for (size_t i = 0; i < known.values.size(); ++i) {
    g.values.values[i] = kernel(known.values[i] - d_hat, sigma_r);
  }
  return g;
}

LikelihoodGrid angle_likelihood_grid(const GridField& known, int anchor_id, double theta_hat,
                                     double sigma_theta) {
  if (sigma_theta <= 0) throw std::invalid_argument("sigma_theta must be positive");
  const double t = wrap_angle(theta_hat);
  LikelihoodGrid g{known.spec, anchor_id, MapKind::Angle, GridField(known.spec), false};
  for (size_t i = 0; i < known.values.size(); ++i) {
    g.values.values[i] = kernel(wrap_angle(known.values[i] - t), sigma_theta);
  }
  return g;
}

GridField fuse_grids_log(const std::vector<LikelihoodGrid>& grids) {
  if (grids.empty()) throw std::invalid_argument("nothing to fuse: empty grid list");
  const GridSpec& spec = grids.front().grid;
  for (const auto& g : grids) {
    if (g.failure_placeholder) {
      throw std::invalid_argument("failure placeholder passed to fusion");
    }
    if (!(g.grid == spec)) throw std::invalid_argument("fused maps must share one GridSpec");
  }
  GridField acc(spec, 0.0);
  for (const auto& g : grids) {
    for (size_t i = 0; i < acc.values.size(); ++i) {
      const double v = g.values.values[i];
      acc.values[i] += v > 0.0 ? std::log(v) : -std::numeric_limits<double>::infinity();
    }
  }
  return acc;
}

GridField fuse_grids(const std::vector<LikelihoodGrid>& grids) {
  GridField lg = fuse_grids_log(grids);
  for (double& v : lg.values) v = std::exp(v);
  return lg;
}

int KnownTerms::anchor_index(int anchor_id) const {
  for (size_t k = 0; k < anchors.size(); ++k) {
    if (anchors[k].id == anchor_id) return static_cast<int>(k);
  }
  return -1;
}

KnownTerms precompute_known_terms(const GridSpec& grid, std::vector<Anchor> anchors) {
  grid.validate();
  std::sort(anchors.begin(), anchors.end(),
            [](const Anchor& a, const Anchor& b) { return a.id < b.id; });
  for (size_t k = 1; k < anchors.size(); ++k) {
    if (anchors[k].id == anchors[k - 1].id) {
      throw std::invalid_argument("duplicate anchor id " + std::to_string(anchors[k].id));
    }
  }
  KnownTerms kt;
  kt.grid = grid;
  kt.anchors = std::move(anchors);
  kt.range_known.reserve(kt.anchors.size());
  kt.angle_known.reserve(kt.anchors.size());
  for (const auto& a : kt.anchors) {
    kt.range_known.push_back(known_range_grid(grid, a));
    kt.angle_known.push_back(known_angle_grid(grid, a));
  }
  return kt;
}

SampleTensor stack_sample(const std::vector<Measurement>& measurements,
                          const KnownTerms& known, const ObservationSigmas& sigmas,
                          const Point2D& target) {
  sigmas.validate();
  const int K = static_cast<int>(known.anchors.size());
  if (static_cast<int>(measurements.size()) != K) {
    throw std::invalid_argument("expected exactly one measurement per anchor");
  }
  for (int k = 0; k < K; ++k) {
    if (measurements[k].anchor_id != known.anchors[k].id) {
      throw std::invalid_argument(
          "measurements must be sorted by anchor id with no duplicates");
    }
  }

  SampleTensor t;
  t.channels = 2 * K;
  t.height = known.grid.rows;
  t.width = known.grid.cols;
  t.values.assign(static_cast<size_t>(t.channels) * t.height * t.width, 0.0f);
  t.target = target;
  t.valid.assign(static_cast<size_t>(K) * 2, 0);

  const size_t plane = static_cast<size_t>(t.height) * t.width;
  for (int k = 0; k < K; ++k) {
    const Measurement& m = measurements[k];
    if (m.range) {
      const LikelihoodGrid g =
          range_likelihood_grid(known.range_known[k], m.anchor_id, *m.range, sigmas.sigma_r);
      float* dst = t.values.data() + 2 * k * plane;
      for (size_t i = 0; i < plane; ++i) dst[i] = static_cast<float>(g.values.values[i]);
      t.valid[2 * k] = 1;
    }
    if (m.angle) {
      const LikelihoodGrid g = angle_likelihood_grid(known.angle_known[k], m.anchor_id,
                                                     *m.angle, sigmas.sigma_theta);
      float* dst = t.values.data() + (2 * k + 1) * plane;
      for (size_t i = 0; i < plane; ++i) dst[i] = static_cast<float>(g.values.values[i]);
      t.valid[2 * k + 1] = 1;
    }
  }
  return t;
}

std::vector<LikelihoodGrid> measurement_grids(const std::vector<Measurement>& measurements,
                                              const KnownTerms& known,
                                              const ObservationSigmas& sigmas) {
  sigmas.validate();
  std::vector<LikelihoodGrid> grids;
  for (const auto& m : measurements) {
    const int k = known.anchor_index(m.anchor_id);
    if (k < 0) throw std::invalid_argument("unknown anchor id " + std::to_string(m.anchor_id));
    if (m.range) {
      grids.push_back(
          range_likelihood_grid(known.range_known[k], m.anchor_id, *m.range, sigmas.sigma_r));
    }
    if (m.angle) {
      grids.push_back(angle_likelihood_grid(known.angle_known[k], m.anchor_id, *m.angle,
                                            sigmas.sigma_theta));
    }
  }
  return grids;
}

}  // namespace ralm
