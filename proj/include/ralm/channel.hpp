#pragma once

#include <optional>
#include <string>

#include "ralm/geometry.hpp"
#include "ralm/rng.hpp"

namespace ralm {

enum class ChannelCondition { LOS, NLOS, Outlier, Failure };

const char* to_string(ChannelCondition c);

// Categorical stand-in for ray-traced visibility classification. The split
// is configurable per scenario; the defaults are not calibrated to any
// measured dataset.
struct ConditionModel {
  double p_los = 0.70;
  double p_nlos = 0.20;
  double p_outlier = 0.05;
  double p_failure = 0.05;

  void validate() const;  // non-negative, sums to 1 within 1e-12
};

// Ranging / angle error statistics per channel condition:
//   LOS      range  N(0, sigma_r^2)            angle  N(0, sigma_theta^2)
//   NLOS     range  LN(mu, sigma) in log-space  angle  U(-pi, pi)
//   Outlier  range  U(-d, d)                    angle  U(-pi, pi)
struct ErrorModelParams {
  double sigma_r_los = 0.3;                   // m
  double sigma_theta_los = 0.05235987755982988;  // rad (3 deg)
  double nlos_mu = 0.8;                       // log-meters
  double nlos_sigma = 1.07;                   // log-meters

  void validate() const;  // all strictly positive
};

// One tag<->anchor observation. Range and angle are both absent exactly
// when the attempt failed; the condition label is diagnostic only.
struct Measurement {
  int anchor_id = 0;
  std::optional<double> range;   // m, >= 0 when present
  std::optional<double> angle;   // rad, in (-pi, pi] when present
  ChannelCondition condition = ChannelCondition::Failure;
};

// Test hook: pins the channel condition and/or suppresses error sampling.
// Plumbing for oracle tests, not part of the measurement model.
struct ChannelOverride {
  std::optional<ChannelCondition> force_condition;
  bool zero_noise = false;
};

// Failure is tested first, mirroring the decision-tree order; surviving
// attempts are classified LOS/NLOS/Outlier with the renormalized weights.
ChannelCondition draw_condition(const ConditionModel& model, RngStream& rng);

// Additive range error for a non-failure condition; d is the true distance
// (the outlier branch draws from U(-d, d)).
double sample_range_error(ChannelCondition cond, double d, const ErrorModelParams& params,
                          RngStream& rng);

double sample_angle_error(ChannelCondition cond, const ErrorModelParams& params,
                          RngStream& rng);

// Full decision tree for one attempt. Consumes draws from `rng` in a fixed
// order (condition, range error, angle error), so one substream per
// measurement keeps parallel generation deterministic. Ranges clamp at 0.
Measurement simulate_measurement(const Point2D& tag, const Anchor& anchor,
                                 const ConditionModel& cmodel, const ErrorModelParams& params,
                                 RngStream& rng, const ChannelOverride& override_ = {});

}  // namespace ralm
