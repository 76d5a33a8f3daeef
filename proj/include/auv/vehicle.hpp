#pragma once

// Rigid-body vehicle model: parameters, hydrostatics, thruster mixing and a
// fixed-step RK4 integrator.

#include <array>
#include <stdexcept>
#include <string>
#include <vector>

#include "auv/frames.hpp"

namespace auv {

constexpr std::size_t kThrusterCount = 8;
constexpr double kGravity = 9.81;

using ThrustVector = Eigen::Matrix<double, kThrusterCount, 1>;
using MixerMatrix = Eigen::Matrix<double, 6, kThrusterCount>;

struct Thruster {
  Vec3 position = Vec3::Zero();  // body frame, relative to CoG
  Vec3 axis = Vec3::UnitX();     // unit direction of positive thrust
  double max_thrust = 40.0;      // N, symmetric
};

struct VehicleParams {
  double mass = 11.5;
  Mat3 inertia = Mat3::Identity() * 0.16;
  Vec6 added_mass = Vec6::Zero();
  Vec6 linear_damping = Vec6::Zero();
  Vec6 quadratic_damping = Vec6::Zero();
  double weight = 112.8;
  double buoyancy = 112.8;
  Vec3 cob_offset = Vec3::Zero();  // centre of buoyancy relative to CoG, body frame
  std::vector<Thruster> thrusters;
  double thruster_time_constant = 0.1;  // s, 0 = instantaneous
  double max_linear_speed = 3.0;        // m/s
  double max_angular_rate = 3.0;        // rad/s
};

struct Environment {
  Vec3 current = Vec3::Zero();  // world frame, m/s
  double water_density = 1025.0;
  double seabed_depth = 20.0;
};

struct SimState {
  Pose pose;
  Twist twist;
  double time = 0.0;
  ThrustVector thrust = ThrustVector::Zero();  // realized thruster forces after lag
  Vec3 linear_accel = Vec3::Zero();            // body-frame dv/dt at the end of the last step
};

class SimError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Default geometry for the heavy (8-thruster) frame: four 45-degree vectored
/// horizontal thrusters and four vertical ones. Offsets are an approximation.
std::vector<Thruster> heavy_frame_thrusters();
VehicleParams default_vehicle();

/// Column i = [axis_i ; position_i x axis_i]. Works for any thruster count.
Eigen::Matrix<double, 6, Eigen::Dynamic> allocation_matrix(const std::vector<Thruster>& thrusters);
int matrix_rank(const Eigen::Matrix<double, 6, Eigen::Dynamic>& m, double tol = 1e-9);

/// Checked mixer for the 8-thruster configuration; throws SimError when the
/// geometry cannot realize 6-DoF control.
MixerMatrix mixer_matrix(const VehicleParams& params);

/// Gravity and buoyancy expressed as a body-frame wrench acting on the vehicle.
Wrench restoring_wrench(const Pose& pose, const VehicleParams& params);

/// 6x6 rigid-body plus added mass.
Mat6 mass_matrix(const VehicleParams& params);

/// Body-frame acceleration [dv; dw] for the given state and realized thrust.
Vec6 body_acceleration(const Pose& pose, const Twist& twist, const ThrustVector& thrust,
                       const Environment& env, const VehicleParams& params);

/// Advances one fixed RK4 step. Commands are saturated to max_thrust and
/// filtered through the first-order thruster lag before integration.
SimState step(const SimState& state, const ThrustVector& commanded, const Environment& env,
              const VehicleParams& params, double dt);

/// Kinetic energy 0.5 nu^T M nu.
double kinetic_energy(const Twist& twist, const VehicleParams& params);

}  // namespace auv
