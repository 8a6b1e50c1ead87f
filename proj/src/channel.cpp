#include "ralm/channel.hpp"

#include <cmath>

namespace ralm {

const char* to_string(ChannelCondition c) {
  switch (c) {
    case ChannelCondition::LOS: return "LOS";
    case ChannelCondition::NLOS: return "NLOS";
    case ChannelCondition::Outlier: return "Outlier";
    case ChannelCondition::Failure: return "Failure";
  }
  return "?";
}

void ConditionModel::validate() const {
  if (p_los < 0 || p_nlos < 0 || p_outlier < 0 || p_failure < 0) {
    throw std::invalid_argument("condition probabilities must be non-negative");
  }
  const double sum = p_los + p_nlos + p_outlier + p_failure;
  if (std::abs(sum - 1.0) > 1e-12) {
    throw std::invalid_argument("condition probabilities must sum to 1, got " +
                                std::to_string(sum));
  }
}

void ErrorModelParams::validate() const {
  if (sigma_r_los <= 0 || sigma_theta_los <= 0 || nlos_mu <= 0 || nlos_sigma <= 0) {
    throw std::invalid_argument("error model parameters must be strictly positive");
  }
}

ChannelCondition draw_condition(const ConditionModel& model, RngStream& rng) {
  if (rng.next_double() < model.p_failure) return ChannelCondition::Failure;
  const double valid = model.p_los + model.p_nlos + model.p_outlier;
  const double u = rng.next_double() * valid;
  if (u < model.p_los) return ChannelCondition::LOS;
  if (u < model.p_los + model.p_nlos) return ChannelCondition::NLOS;
  return ChannelCondition::Outlier;
}

double sample_range_error(ChannelCondition cond, double d, const ErrorModelParams& params,
                          RngStream& rng) {
  switch (cond) {
    case ChannelCondition::LOS:
      return rng.normal(0.0, params.sigma_r_los);
    case ChannelCondition::NLOS:
      return rng.lognormal(params.nlos_mu, params.nlos_sigma);
    case ChannelCondition::Outlier:
      return rng.uniform(-d, d);
    case ChannelCondition::Failure:
      break;
  }
  throw std::logic_error("sample_range_error called with Failure condition");
}

double sample_angle_error(ChannelCondition cond, const ErrorModelParams& params,
                          RngStream& rng) {
  switch (cond) {
    case ChannelCondition::LOS:
      return rng.normal(0.0, params.sigma_theta_los);
    case ChannelCondition::NLOS:
    case ChannelCondition::Outlier:
      return rng.uniform(-kPi, kPi);
    case ChannelCondition::Failure:
      break;
  }
  throw std::logic_error("sample_angle_error called with Failure condition");
}

Measurement simulate_measurement(const Point2D& tag, const Anchor& anchor,
                                 const ConditionModel& cmodel, const ErrorModelParams& params,
                                 RngStream& rng, const ChannelOverride& override_) {
  const ChannelCondition cond =
      override_.force_condition ? *override_.force_condition : draw_condition(cmodel, rng);

  Measurement meas;
  meas.anchor_id = anchor.id;
  meas.condition = cond;
  if (cond == ChannelCondition::Failure) return meas;

  const double d = true_range(tag, anchor.position);
  const double theta = true_bearing(tag, anchor.position);
  const double eps_r = override_.zero_noise ? 0.0 : sample_range_error(cond, d, params, rng);
  const double eps_a = override_.zero_noise ? 0.0 : sample_angle_error(cond, params, rng);

  meas.range = std::max(0.0, d + eps_r);
  meas.angle = wrap_angle(theta + eps_a);
  return meas;
}

}  // namespace ralm
