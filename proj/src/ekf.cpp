#include "auv/ekf.hpp"

#include <cmath>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

namespace auv {

using namespace ekf_index;

const char* to_string(UpdateOutcome o) {
  switch (o) {
    case UpdateOutcome::kAccepted: return "accepted";
    case UpdateOutcome::kGated: return "gated";
    case UpdateOutcome::kNoLock: return "no-lock";
    case UpdateOutcome::kOutOfOrder: return "out-of-order";
    case UpdateOutcome::kInvalid: return "invalid";
  }
  return "unknown";
}

Quat EkfState::orientation() const {
  return normalized(reference * quat_exp(mean.segment<3>(kAtt)));
}

namespace {

void symmetrize(Mat9& p) { p = 0.5 * (p + p.transpose()).eval(); }

// Moves the attitude error into the reference quaternion.
void inject(EkfState& s) {
  const Vec3 err = s.mean.segment<3>(kAtt);
  if (err.isZero(0.0)) return;
  s.reference = normalized(s.reference * quat_exp(err));
  s.mean.segment<3>(kAtt).setZero();
  Mat9 g = Mat9::Identity();
  g.block<3, 3>(kAtt, kAtt) -= 0.5 * skew(err);
  s.covariance = g * s.covariance * g.transpose();
  symmetrize(s.covariance);
}

template <int M>
UpdateResult kalman_update(const EkfState& prior, const Eigen::Matrix<double, M, 9>& h,
                           const Eigen::Matrix<double, M, 1>& innovation,
                           const Eigen::Matrix<double, M, M>& r, double gate,
                           bool consider_horizontal = false) {
  UpdateResult res{prior, UpdateOutcome::kAccepted, 0.0};
  if (!innovation.allFinite() || !r.allFinite()) {
    res.outcome = UpdateOutcome::kInvalid;
    return res;
  }
  const Eigen::Matrix<double, M, M> s = h * prior.covariance * h.transpose() + r;
  const Eigen::LDLT<Eigen::Matrix<double, M, M>> s_ldlt(s);
  if (s_ldlt.info() != Eigen::Success) {
    res.outcome = UpdateOutcome::kInvalid;
    return res;
  }
  res.nis = innovation.dot(s_ldlt.solve(innovation));
  if (!(res.nis <= gate)) {
    res.outcome = UpdateOutcome::kGated;
    return res;
  }
  Eigen::Matrix<double, 9, M> k = s_ldlt.solve(h * prior.covariance.transpose()).transpose();
  // The Joseph form below stays exact for a suboptimal gain.
  if (consider_horizontal) k.template topRows<2>().setZero();
  EkfState& post = res.state;
  post.mean = prior.mean + k * innovation;
  const Mat9 i_kh = Mat9::Identity() - k * h;
  post.covariance = i_kh * prior.covariance * i_kh.transpose() + k * r * k.transpose();
  symmetrize(post.covariance);
  inject(post);
  return res;
}

Vec3 attitude_innovation(const EkfState& s, const Quat& measured) {
  return quat_log(s.reference.conjugate() * measured) - s.mean.segment<3>(kAtt);
}

}  // namespace

EkfState make_initial_state(const Pose& pose, const Vec3& body_velocity, const EkfConfig& cfg,
                            double timestamp) {
  EkfState s;
  s.mean.segment<3>(kPos) = pose.position;
  s.mean.segment<3>(kVel) = body_velocity;
  s.reference = normalized(pose.orientation);
  s.covariance.setZero();
  const double ps = cfg.initial_position_sigma * cfg.initial_position_sigma;
  const double as = cfg.initial_attitude_sigma * cfg.initial_attitude_sigma;
  const double vs = cfg.initial_velocity_sigma * cfg.initial_velocity_sigma;
  s.covariance.diagonal() << ps, ps, ps, as, as, as, vs, vs, vs;
  s.timestamp = timestamp;
  return s;
}

EkfState predict(const EkfState& state, const ImuReading& imu, double dt, const EkfConfig& cfg) {
  if (imu.timestamp < state.timestamp) throw EkfError("out-of-order IMU sample");
  if (!(dt >= 0.0) || !std::isfinite(dt)) throw EkfError("dt must be finite and non-negative");
  if (dt == 0.0) return state;

  EkfState s = state;
  inject(s);
  const Vec3& w = imu.angular_rate;
  const Mat3 r = s.reference.toRotationMatrix();
  const Vec3 v = s.mean.segment<3>(kVel);

  // Body-frame velocity kinematics, dv/dt = f + R^T g - w x v, integrated
  // through the world frame where gravity is constant: u = R v and
  // du/dt = R f + g, with R f taken at the midpoint rotation. Without the
  // accelerometer the specific force is taken to cancel gravity exactly.
  const Quat delta = quat_exp(w * dt);
  const Mat3 delta_t = delta.toRotationMatrix().transpose();
  const Vec3 g(0.0, 0.0, kGravity);
  Vec3 dv_world = Vec3::Zero();  // change of u over the step
  Vec3 f_mid = Vec3::Zero();     // specific force in the start-of-step body frame
  if (cfg.use_accelerometer) {
    f_mid = quat_exp(0.5 * w * dt) * imu.linear_accel;
    dv_world = (r * f_mid + g) * dt;
  }
  const Mat3 r_new = r * delta.toRotationMatrix();
  s.mean.segment<3>(kPos) += r * v * dt + 0.5 * dv_world * dt;
  s.mean.segment<3>(kVel) = r_new.transpose() * (r * v + dv_world);
  s.reference = normalized(s.reference * delta);

  Mat9 f = Mat9::Identity();
  f.block<3, 3>(kPos, kAtt) = -r * skew(v * dt + 0.5 * f_mid * dt * dt);
  f.block<3, 3>(kPos, kVel) = r * dt;
  f.block<3, 3>(kAtt, kAtt) = delta_t;
  if (cfg.use_accelerometer) f.block<3, 3>(kVel, kAtt) = delta_t * skew(r.transpose() * g) * dt;
  f.block<3, 3>(kVel, kVel) = delta_t;

  Vec9 q;
  q << Vec3::Constant(cfg.q_position), Vec3::Constant(cfg.q_attitude),
      Vec3::Constant(cfg.q_velocity);
  s.covariance = f * s.covariance * f.transpose();
  s.covariance.diagonal() += q * dt;
  symmetrize(s.covariance);
  s.timestamp = state.timestamp + dt;
  return s;
}

UpdateResult update_imu_orientation(const EkfState& state, const ImuReading& imu, double sigma,
                                    double gate, bool consider_horizontal) {
  if (imu.timestamp < state.timestamp) return {state, UpdateOutcome::kOutOfOrder, 0.0};
  Eigen::Matrix<double, 3, 9> h = Eigen::Matrix<double, 3, 9>::Zero();
  h.block<3, 3>(0, kAtt).setIdentity();
  const Mat3 r = Mat3::Identity() * (sigma * sigma);
  return kalman_update<3>(state, h, attitude_innovation(state, imu.orientation), r, gate,
                          consider_horizontal);
}

UpdateResult update_depth(const EkfState& state, const DepthReading& z, double variance,
                          double gate, bool consider_horizontal) {
  if (!(variance > 0.0)) throw EkfError("depth variance must be positive");
  if (z.timestamp < state.timestamp) return {state, UpdateOutcome::kOutOfOrder, 0.0};
  Eigen::Matrix<double, 1, 9> h = Eigen::Matrix<double, 1, 9>::Zero();
  h(0, kPos + 2) = 1.0;
  Eigen::Matrix<double, 1, 1> y;
  y << z.depth - state.mean(kPos + 2);
  Eigen::Matrix<double, 1, 1> r;
  r << variance;
  return kalman_update<1>(state, h, y, r, gate, consider_horizontal);
}

UpdateResult update_dvl(const EkfState& state, const DvlReading& v, const Mat3& r, double gate,
                        bool consider_horizontal) {
  if (!v.bottom_lock) return {state, UpdateOutcome::kNoLock, 0.0};
  if (v.timestamp < state.timestamp) return {state, UpdateOutcome::kOutOfOrder, 0.0};
  Eigen::Matrix<double, 3, 9> h = Eigen::Matrix<double, 3, 9>::Zero();
  h.block<3, 3>(0, kVel).setIdentity();
  const Vec3 y = v.velocity - state.mean.segment<3>(kVel);
  return kalman_update<3>(state, h, y, r, gate, consider_horizontal);
}

UpdateResult update_external_odom(const EkfState& state, const ExternalOdomReading& o,
                                  double gate) {
  if (o.timestamp < state.timestamp) return {state, UpdateOutcome::kOutOfOrder, 0.0};
  Eigen::Matrix<double, 6, 9> h = Eigen::Matrix<double, 6, 9>::Zero();
  h.block<3, 3>(0, kPos).setIdentity();
  h.block<3, 3>(3, kAtt).setIdentity();
  Vec6 y;
  y << o.pose.position - state.mean.segment<3>(kPos), attitude_innovation(state, o.pose.orientation);
  return kalman_update<6>(state, h, y, o.covariance, gate);
}

Mat3 dvl_noise(const DvlReading& v, const EkfConfig& cfg) {
  const double sigma = cfg.dvl_sigma0 + cfg.dvl_sigma_scale * v.velocity.norm();
  return Mat3::Identity() * (sigma * sigma);
}

Vec9 estimation_error(const EkfState& est, const Pose& truth_pose, const Vec3& truth_velocity) {
  Vec9 e;
  e.segment<3>(kPos) = truth_pose.position - est.position();
  e.segment<3>(kAtt) = quat_log(est.reference.conjugate() * truth_pose.orientation) -
                       est.mean.segment<3>(kAtt);
  e.segment<3>(kVel) = truth_velocity - est.velocity();
  return e;
}

double nees(const EkfState& est, const Pose& truth_pose, const Vec3& truth_velocity) {
  const Vec9 e = estimation_error(est, truth_pose, truth_velocity);
  return e.dot(est.covariance.ldlt().solve(e));
}

double horizontal_covariance_trace(const EkfState& s) {
  return s.covariance(kPos, kPos) + s.covariance(kPos + 1, kPos + 1);
}

bool covariance_valid(const Mat9& p) {
  if (!p.allFinite()) return false;
  if ((p - p.transpose()).cwiseAbs().maxCoeff() >= 1e-9) return false;
  const Eigen::SelfAdjointEigenSolver<Mat9> es(p, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff() >= -1e-12;
}

DeadReckoner::DeadReckoner(EkfConfig cfg, const Pose& initial_pose, double t0)
    : cfg_(cfg), state_(make_initial_state(initial_pose, Vec3::Zero(), cfg, t0)) {}

DeadReckoner::DeadReckoner(EkfConfig cfg, const EkfState& initial) : cfg_(cfg), state_(initial) {}

void DeadReckoner::on_imu(const ImuReading& imu) {
  const double dt = imu.timestamp - state_.timestamp;
  // Trapezoidal rule over the interval: average this sample with the last.
  ImuReading mid = imu;
  if (have_imu_) {
    mid.angular_rate = 0.5 * (last_rate_ + imu.angular_rate);
    mid.linear_accel = 0.5 * (last_accel_ + imu.linear_accel);
  }
  state_ = predict(state_, mid, dt, cfg_);
  const auto r = update_imu_orientation(state_, imu, cfg_.imu_orientation_sigma, cfg_.gate_imu,
                                        cfg_.consider_horizontal_position);
  if (r.accepted()) state_ = r.state;
  last_rate_ = imu.angular_rate;
  last_accel_ = imu.linear_accel;
  have_imu_ = true;
  last_imu_time_ = imu.timestamp;
}

UpdateOutcome DeadReckoner::on_depth(const DepthReading& d) {
  const auto r = update_depth(state_, d, cfg_.depth_sigma * cfg_.depth_sigma, cfg_.gate_depth,
                              cfg_.consider_horizontal_position);
  if (r.accepted()) state_ = r.state;
  return r.outcome;
}

UpdateOutcome DeadReckoner::on_dvl(const DvlReading& v) {
  const auto r = update_dvl(state_, v, dvl_noise(v, cfg_), cfg_.gate_dvl, cfg_.consider_horizontal_position);
  if (r.accepted()) state_ = r.state;
  return r.outcome;
}

UpdateOutcome DeadReckoner::on_external_odom(const ExternalOdomReading& o) {
  const auto r = update_external_odom(state_, o, cfg_.gate_odom);
  if (r.accepted()) state_ = r.state;
  return r.outcome;
}

}  // namespace auv
