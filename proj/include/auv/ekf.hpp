#pragma once

// Error-state EKF for dead reckoning.
//
// State (9): world position, orientation error angles about a reference
// quaternion (true = ref * exp(err)), body-frame linear velocity. The mean
// error angles are folded into the reference after every update, so between
// updates they are zero.

#include <string>

#include "auv/sensors.hpp"

namespace auv {

using Vec9 = Eigen::Matrix<double, 9, 1>;
using Mat9 = Eigen::Matrix<double, 9, 9>;

namespace ekf_index {
constexpr int kPos = 0;
constexpr int kAtt = 3;
constexpr int kVel = 6;
}  // namespace ekf_index

struct EkfState {
  Vec9 mean = Vec9::Zero();
  Quat reference = Quat::Identity();
  Mat9 covariance = Mat9::Identity();
  double timestamp = 0.0;

  Vec3 position() const { return mean.segment<3>(ekf_index::kPos); }
  Vec3 velocity() const { return mean.segment<3>(ekf_index::kVel); }
  Quat orientation() const;
  Pose pose() const { return {position(), orientation()}; }
};

struct EkfConfig {
  // Continuous-time process noise densities (variance per second).
  double q_position = 1e-6;
  double q_attitude = 1e-6;
  double q_velocity = 1e-3;
  /// Integrate the accelerometer in the velocity prediction; false gives a
  /// constant-velocity model driven by process noise only.
  bool use_accelerometer = true;
  double imu_orientation_sigma = 0.01;  // rad, used as measurement noise
  double depth_sigma = 0.02;            // m
  double dvl_sigma0 = 0.01;             // m/s
  double dvl_sigma_scale = 0.0;
  double gate_depth = 9.0;
  double gate_dvl = 11.34;   // chi2(3), 99 %
  double gate_imu = 16.27;
  double gate_odom = 16.27;
  double initial_position_sigma = 0.1;
  double initial_attitude_sigma = 0.02;
  double initial_velocity_sigma = 0.05;
  /// Schmidt consider update for north/east position: IMU, depth and DVL
  /// updates leave those two states and their variance untouched. Meant for
  /// pure dead reckoning, where nothing observes horizontal position.
  bool consider_horizontal_position = false;
};

enum class UpdateOutcome { kAccepted, kGated, kNoLock, kOutOfOrder, kInvalid };

const char* to_string(UpdateOutcome o);

class EkfError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct UpdateResult {
  EkfState state;
  UpdateOutcome outcome = UpdateOutcome::kAccepted;
  double nis = 0.0;  // normalized innovation squared

  bool accepted() const { return outcome == UpdateOutcome::kAccepted; }
};

EkfState make_initial_state(const Pose& pose, const Vec3& body_velocity, const EkfConfig& cfg,
                            double timestamp);

/// Propagates by dt using the IMU angular rate; throws EkfError when the IMU
/// sample is older than the state.
EkfState predict(const EkfState& state, const ImuReading& imu, double dt, const EkfConfig& cfg);

// With consider_horizontal set, the gain rows for north/east position are
// zeroed (see EkfConfig::consider_horizontal_position).
UpdateResult update_imu_orientation(const EkfState& state, const ImuReading& imu, double sigma,
                                    double gate, bool consider_horizontal = false);
UpdateResult update_depth(const EkfState& state, const DepthReading& z, double variance,
                          double gate = 9.0, bool consider_horizontal = false);
UpdateResult update_dvl(const EkfState& state, const DvlReading& v, const Mat3& r,
                        double gate = 11.34, bool consider_horizontal = false);
UpdateResult update_external_odom(const EkfState& state, const ExternalOdomReading& o,
                                  double gate = 16.27);

/// Measurement noise for a DVL reading with speed-dependent sigma.
Mat3 dvl_noise(const DvlReading& v, const EkfConfig& cfg);

/// Error vector truth - estimate in the filter's error coordinates.
Vec9 estimation_error(const EkfState& est, const Pose& truth_pose, const Vec3& truth_velocity);
double nees(const EkfState& est, const Pose& truth_pose, const Vec3& truth_velocity);

/// Trace of the north/east position covariance block.
double horizontal_covariance_trace(const EkfState& s);

/// Finite, symmetric and without meaningfully negative eigenvalues.
bool covariance_valid(const Mat9& p);

/// Owns one filter instance and routes time-ordered sensor data into it.
class DeadReckoner {
 public:
  DeadReckoner(EkfConfig cfg, const Pose& initial_pose, double t0);
  DeadReckoner(EkfConfig cfg, const EkfState& initial);

  /// Predicts to the sample time with the trapezoidal average of this and
  /// the previous sample, then fuses the reported orientation.
  void on_imu(const ImuReading& imu);
  UpdateOutcome on_depth(const DepthReading& d);
  UpdateOutcome on_dvl(const DvlReading& v);
  UpdateOutcome on_external_odom(const ExternalOdomReading& o);

  const EkfState& state() const { return state_; }
  const Vec3& last_angular_rate() const { return last_rate_; }
  bool initialized() const { return have_imu_; }
  double last_imu_time() const { return last_imu_time_; }
  const EkfConfig& config() const { return cfg_; }

 private:
  EkfConfig cfg_;
  EkfState state_;
  Vec3 last_rate_ = Vec3::Zero();
  Vec3 last_accel_ = Vec3::Zero();
  bool have_imu_ = false;
  double last_imu_time_ = 0.0;
};

}  // namespace auv
