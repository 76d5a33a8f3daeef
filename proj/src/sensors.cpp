#include "auv/sensors.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace auv {

Rng make_rng(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
  return Rng(seq);
}

namespace {

Vec3 gaussian3(Rng& rng, double sigma) {
  if (sigma <= 0.0) return Vec3::Zero();
  std::normal_distribution<double> n(0.0, sigma);
  const double x = n(rng);
  const double y = n(rng);
  const double z = n(rng);
  return {x, y, z};
}

double gaussian(Rng& rng, double sigma) {
  if (sigma <= 0.0) return 0.0;
  std::normal_distribution<double> n(0.0, sigma);
  return n(rng);
}

double elapsed(std::optional<double>& last, double now) {
  const double dt = last ? std::max(0.0, now - *last) : 0.0;
  last = now;
  return dt;
}

}  // namespace

ImuReading ImuModel::sample(const SimState& truth, Rng& rng) {
  const bool first = !last_time_;
  const double dt = elapsed(last_time_, truth.time);
  if (first) heading_bias_ = gaussian(rng, noise_.heading_bias_sigma);
  if (noise_.gyro_bias_walk_sigma > 0.0 && dt > 0.0) {
    bias_ += gaussian3(rng, noise_.gyro_bias_walk_sigma * std::sqrt(dt));
  }
  if (noise_.heading_bias_walk_sigma > 0.0 && dt > 0.0) {
    heading_bias_ += gaussian(rng, noise_.heading_bias_walk_sigma * std::sqrt(dt));
  }

  ImuReading r;
  r.timestamp = truth.time;
  const Quat& q = truth.pose.orientation;
  Quat reported = q;
  if (heading_bias_ != 0.0) reported = Quat(Eigen::AngleAxisd(heading_bias_, Vec3::UnitZ())) * q;
  r.orientation = noise_.orientation_sigma > 0.0
                      ? normalized(reported * quat_exp(gaussian3(rng, noise_.orientation_sigma)))
                      : reported;
  r.angular_rate = truth.twist.angular + bias_ + gaussian3(rng, noise_.gyro_noise_sigma);
  const Vec3 gravity_body = q.conjugate() * Vec3(0.0, 0.0, kGravity);
  const Vec3 specific_force =
      truth.linear_accel + truth.twist.angular.cross(truth.twist.linear) - gravity_body;
  r.linear_accel = specific_force + gaussian3(rng, noise_.accel_noise_sigma);
  return r;
}

DepthReading sample_depth(const SimState& truth, const DepthNoiseParams& noise, Rng& rng) {
  const double d = truth.pose.position.z() + gaussian(rng, noise.sigma);
  return {std::max(d, -0.5), truth.time};
}

DvlReading sample_dvl(const SimState& truth, const Environment& env, const DvlNoiseParams& noise,
                      Rng& rng) {
  DvlReading r;
  r.timestamp = truth.time;
  r.altitude = env.seabed_depth - truth.pose.position.z();
  r.bottom_lock = r.altitude >= noise.min_range && r.altitude <= noise.max_range;
  const Vec3& v = truth.twist.linear;
  const double sigma = noise.sigma0 + noise.sigma_scale * v.norm();
  // Draw even without lock so the stream does not depend on geometry.
  const Vec3 n = gaussian3(rng, sigma);
  r.velocity = r.bottom_lock ? Vec3(v + n) : Vec3::Zero();
  return r;
}

DvlReading DvlModel::sample(const SimState& truth, const Environment& env, Rng& rng) {
  if (!scale_error_) scale_error_ = gaussian(rng, noise_.scale_error_sigma);
  DvlReading r = sample_dvl(truth, env, noise_, rng);
  if (r.bottom_lock) r.velocity *= 1.0 + *scale_error_;
  return r;
}

Mat6 ExternalOdomModel::reported_covariance() const {
  const double bias_sigma = drift_.bias_walk_sigma > 0.0
      ? std::min(drift_.bias_bound,
                 drift_.bias_walk_sigma * std::sqrt(0.5 * drift_.bias_time_constant))
      : 0.0;
  Mat6 c = Mat6::Zero();
  const double pos_var = drift_.position_sigma * drift_.position_sigma + bias_sigma * bias_sigma;
  const double rot_var = drift_.orientation_sigma * drift_.orientation_sigma;
  c.diagonal() << pos_var, pos_var, pos_var, rot_var, rot_var, rot_var;
  // Keep the matrix invertible when the model is noise-free.
  c.diagonal() = c.diagonal().cwiseMax(1e-12);
  return c;
}

std::optional<ExternalOdomReading> ExternalOdomModel::sample(const SimState& truth, Rng& rng) {
  const double dt = elapsed(last_time_, truth.time);
  if (dt > 0.0 && drift_.bias_walk_sigma > 0.0) {
    const double a = drift_.bias_time_constant > 0.0 ? std::exp(-dt / drift_.bias_time_constant) : 1.0;
    bias_ = a * bias_ + gaussian3(rng, drift_.bias_walk_sigma * std::sqrt(dt));
  }
  const double bound = std::max(0.0, drift_.bias_bound);
  bias_ = bias_.cwiseMax(-bound).cwiseMin(bound);

  const Vec3 white_p = gaussian3(rng, drift_.position_sigma);
  const Vec3 white_r = gaussian3(rng, drift_.orientation_sigma);
  bool delivered = true;
  if (drift_.availability < 1.0) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    delivered = u(rng) < drift_.availability;
  }
  if (!delivered) return std::nullopt;

  ExternalOdomReading r;
  r.timestamp = truth.time;
  r.pose.position = truth.pose.position + bias_ + white_p;
  r.pose.orientation = drift_.orientation_sigma > 0.0
                           ? normalized(truth.pose.orientation * quat_exp(white_r))
                           : truth.pose.orientation;
  r.covariance = reported_covariance();
  return r;
}

std::int64_t period_in_ticks(double rate_hz, double base_rate_hz) {
  if (!(rate_hz > 0.0) || !(base_rate_hz > 0.0)) throw std::invalid_argument("rates must be positive");
  const double ratio = base_rate_hz / rate_hz;
  const auto n = static_cast<std::int64_t>(std::llround(ratio));
  if (n < 1 || std::abs(ratio - static_cast<double>(n)) > 1e-9) {
    throw std::invalid_argument("rate does not divide the base tick rate");
  }
  return n;
}

}  // namespace auv
