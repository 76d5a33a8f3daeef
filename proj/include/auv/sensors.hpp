#pragma once

// Stochastic sensor models sampled from simulator ground truth.

#include <cstdint>
#include <optional>
#include <random>

#include "auv/vehicle.hpp"

namespace auv {

using Rng = std::mt19937_64;

/// Independent, reproducible stream derived from a master seed.
Rng make_rng(std::uint64_t seed, std::uint64_t stream);

struct ImuReading {
  Quat orientation = Quat::Identity();
  Vec3 angular_rate = Vec3::Zero();
  Vec3 linear_accel = Vec3::Zero();  // specific force, body frame
  double timestamp = 0.0;
};

struct DepthReading {
  double depth = 0.0;
  double timestamp = 0.0;
};

struct DvlReading {
  Vec3 velocity = Vec3::Zero();  // meaningful only with bottom_lock
  double altitude = 0.0;
  bool bottom_lock = false;
  double timestamp = 0.0;
};

struct ExternalOdomReading {
  Pose pose;
  Mat6 covariance = Mat6::Identity();  // [position, orientation error] ordering
  double timestamp = 0.0;
};

struct ImuNoiseParams {
  double orientation_sigma = 0.0;    // rad per axis, white
  double gyro_noise_sigma = 0.0;     // rad/s per sample, white
  double gyro_bias_walk_sigma = 0.0; // rad/s/sqrt(s)
  double accel_noise_sigma = 0.0;    // m/s^2 per sample
  double heading_bias_sigma = 0.0;      // rad, constant AHRS heading offset drawn once
  double heading_bias_walk_sigma = 0.0; // rad/sqrt(s), slow heading wander
};

struct DepthNoiseParams {
  double sigma = 0.0;
};

struct DvlNoiseParams {
  double sigma0 = 0.0;       // m/s
  double sigma_scale = 0.0;  // dimensionless, multiplies |v|
  double min_range = 0.05;
  double max_range = 50.0;
  double scale_error_sigma = 0.0;  // per-unit scale factor error drawn once per model
};

struct OdomDriftParams {
  double position_sigma = 0.0;        // m, white
  double orientation_sigma = 0.0;     // rad, white
  double bias_bound = 0.0;            // m, per-axis clamp on the slowly varying bias
  double bias_walk_sigma = 0.0;       // m/sqrt(s)
  double bias_time_constant = 60.0;   // s, Gauss-Markov correlation time
  double availability = 1.0;          // probability a due reading is delivered
};

/// Gyro bias is a random walk, so the model carries state between samples.
class ImuModel {
 public:
  explicit ImuModel(ImuNoiseParams noise) : noise_(noise) {}

  ImuReading sample(const SimState& truth, Rng& rng);
  const Vec3& gyro_bias() const { return bias_; }
  double heading_bias() const { return heading_bias_; }

 private:
  ImuNoiseParams noise_;
  Vec3 bias_ = Vec3::Zero();
  double heading_bias_ = 0.0;
  std::optional<double> last_time_;
};

DepthReading sample_depth(const SimState& truth, const DepthNoiseParams& noise, Rng& rng);

DvlReading sample_dvl(const SimState& truth, const Environment& env, const DvlNoiseParams& noise,
                      Rng& rng);

/// DVL with a scale factor error fixed at the first sample.
class DvlModel {
 public:
  explicit DvlModel(DvlNoiseParams noise) : noise_(noise) {}

  DvlReading sample(const SimState& truth, const Environment& env, Rng& rng);
  double scale_error() const { return scale_error_.value_or(0.0); }

 private:
  DvlNoiseParams noise_;
  std::optional<double> scale_error_;
};

/// Synthetic stand-in for visual odometry: bounded bias, white noise and
/// random dropouts. Returns nullopt for a dropped reading.
class ExternalOdomModel {
 public:
  explicit ExternalOdomModel(OdomDriftParams drift) : drift_(drift) {}

  std::optional<ExternalOdomReading> sample(const SimState& truth, Rng& rng);
  const Vec3& bias() const { return bias_; }
  Mat6 reported_covariance() const;

 private:
  OdomDriftParams drift_;
  Vec3 bias_ = Vec3::Zero();
  std::optional<double> last_time_;
};

/// Fires every `period_ticks` simulator ticks starting at tick 0.
struct SensorSchedule {
  std::int64_t period_ticks = 1;
  bool due(std::int64_t tick) const { return period_ticks > 0 && tick % period_ticks == 0; }
};

/// Converts a rate in Hz into a tick period; throws when the rate does not
/// divide the base tick rate.
std::int64_t period_in_ticks(double rate_hz, double base_rate_hz);

}  // namespace auv
