#pragma once

#include <cstdint>
#include <vector>

#include "ralm/channel.hpp"
#include "ralm/geometry.hpp"

namespace ralm {

enum class MapKind { Range, Angle };

// Gaussian kernel widths of the observation model. Defaults follow the LOS
// noise parameters; configurable per run.
struct ObservationSigmas {
  double sigma_r = 0.3;                       // m
  double sigma_theta = 0.05235987755982988;   // rad

  void validate() const;
};

// Per-anchor, per-kind likelihood field. Values lie in [0, 1] with the
// kernel peak 1 at zero residual; an all-zero field is the placeholder for
// a failed measurement and must not enter fusion.
struct LikelihoodGrid {
  GridSpec grid;
  int anchor_id = 0;
  MapKind kind = MapKind::Range;
  GridField values;
  bool failure_placeholder = false;
};

// Expected measurements under ideal conditions, one value per cell center.
GridField known_range_grid(const GridSpec& grid, const Anchor& anchor);
GridField known_angle_grid(const GridSpec& grid, const Anchor& anchor);

// exp(-(known - d_hat)^2 / (2 sigma_r^2)). Values below 1e-300 flush to 0.
LikelihoodGrid range_likelihood_grid(const GridField& known, int anchor_id, double d_hat,
                                     double sigma_r);

// Same kernel on the wrapped angle residual.
LikelihoodGrid angle_likelihood_grid(const GridField& known, int anchor_id, double theta_hat,
                                     double sigma_theta);

// Cellwise product under conditional independence, accumulated in
// log-domain. Failure placeholders are rejected; pass only valid maps.
GridField fuse_grids(const std::vector<LikelihoodGrid>& grids);

// Log-domain fusion: sum of log-likelihoods, -inf where any map is 0.
GridField fuse_grids_log(const std::vector<LikelihoodGrid>& grids);

// Known terms precomputed once per (grid, anchor set) and shared read-only.
struct KnownTerms {
  GridSpec grid;
  std::vector<Anchor> anchors;       // ascending unique ids
  std::vector<GridField> range_known;
  std::vector<GridField> angle_known;

  int anchor_index(int anchor_id) const;  // -1 if unknown
};

KnownTerms precompute_known_terms(const GridSpec& grid, std::vector<Anchor> anchors);

// Network input sample: 2K channels of M x N likelihood maps (channel 2k =
// anchor k range map, 2k+1 = its angle map, anchors ascending by id) plus
// the true position. Failed channels are exactly all-zero and flagged
// invalid in the mask. Stored single precision, matching the on-disk
// dataset payload.
struct SampleTensor {
  int channels = 0;
  int height = 0;
  int width = 0;
  std::vector<float> values;         // C x M x N, row-major
  Point2D target;
  std::vector<uint8_t> valid;        // K x 2 channel validity, same order

  float at(int c, int m, int n) const {
    return values[(static_cast<size_t>(c) * height + m) * width + n];
  }
};

// Builds one stacked sample from exactly one measurement per anchor,
// sorted by anchor id. Duplicate or unknown anchor ids are rejected.
SampleTensor stack_sample(const std::vector<Measurement>& measurements,
                          const KnownTerms& known, const ObservationSigmas& sigmas,
                          const Point2D& target);

// Valid (non-placeholder) likelihood maps for one measurement set; the
// estimation path, where failures are skipped rather than zero-filled.
std::vector<LikelihoodGrid> measurement_grids(const std::vector<Measurement>& measurements,
                                              const KnownTerms& known,
                                              const ObservationSigmas& sigmas);

}  // namespace ralm
