#pragma once

#include <Eigen/Dense>

#include "auvlab/dynamics.hpp"

namespace auvlab {

enum class ActionMode {
  kVelocity3,  ///< 3-dof desired-velocity command, tracked by a low-level loop
  kRaw6,       ///< 6-dof wrench command as a fraction of the actuator caps
};

inline int action_dim(ActionMode mode) {
  return mode == ActionMode::kVelocity3 ? 3 : 6;
}

/// Gains of the action pipeline: the smoothing/rate-limit shaping applied
/// to every policy output, plus the velocity-tracking and attitude-keeping
/// loops behind the velocity interface.
struct ControllerGains {
  double velocity_scale = 0.75;   ///< workspace units/s at |a| = 1
  double smoothing = 0.20;        ///< low-pass weight on the previous action
  double rate_limit = 0.35;       ///< max |a - a_prev| before smoothing
  Eigen::Vector3d velocity_gain = Eigen::Vector3d::Constant(60.0);
  Eigen::Vector2d attitude_gain = Eigen::Vector2d::Constant(5.0);
  Eigen::Vector3d rate_gain = Eigen::Vector3d::Constant(2.0);
  double raw_scale = 0.18;        ///< fraction of cap per unit raw action
};

/// Rate-limits the commanded change, then low-passes toward the previous
/// executed action.  Output stays in [-1, 1] and within
/// (1 - smoothing) * rate_limit of a_prev per step.
inline Eigen::VectorXd smooth_and_limit(const Eigen::VectorXd& a,
                                        const Eigen::VectorXd& a_prev,
                                        const ControllerGains& gains) {
  const Eigen::VectorXd step = (a - a_prev)
                                   .cwiseMax(-gains.rate_limit)
                                   .cwiseMin(gains.rate_limit);
  const Eigen::VectorXd a_delta = a_prev + step;
  return ((1.0 - gains.smoothing) * a_delta + gains.smoothing * a_prev)
      .cwiseMax(-1.0)
      .cwiseMin(1.0);
}

/// Velocity interface: the action selects a desired world-frame velocity
/// v_des = velocity_scale * a.  Force tracks it in the body frame; the
/// moment holds roll/pitch level and damps body rates.  Yaw is left free.
inline Vector6d velocity_to_wrench(const Eigen::Vector3d& a_exec,
                                   const RigidBodyState& state,
                                   const ControllerGains& gains,
                                   const RigidBodyParams& params) {
  const Eigen::Matrix3d r = body_to_world(state.attitude);
  const Eigen::Vector3d v_des = gains.velocity_scale * a_exec;
  const Eigen::Vector3d v_world = r * state.nu.head<3>();
  const Eigen::Vector3d force =
      gains.velocity_gain.cwiseProduct(r.transpose() * (v_des - v_world));

  Eigen::Vector3d moment;
  moment.x() = -gains.attitude_gain.x() * state.attitude.x();
  moment.y() = -gains.attitude_gain.y() * state.attitude.y();
  moment.z() = 0.0;
  moment -= gains.rate_gain.cwiseProduct(state.nu.tail<3>());

  Vector6d tau;
  tau.head<3>() = force;
  tau.tail<3>() = moment;
  return tau.cwiseMax(-params.wrench_cap).cwiseMin(params.wrench_cap);
}

/// Raw interface: each action component commands a fixed fraction of the
/// corresponding actuator cap.
inline Vector6d raw_wrench(const Vector6d& a6, const ControllerGains& gains,
                           const RigidBodyParams& params) {
  const Vector6d tau = gains.raw_scale * a6.cwiseProduct(params.wrench_cap);
  return tau.cwiseMax(-params.wrench_cap).cwiseMin(params.wrench_cap);
}

/// Dispatches on the configured interface; a_exec must already be the
/// smoothed executed action of the right dimension.
inline Vector6d action_to_wrench(const Eigen::VectorXd& a_exec,
                                 const RigidBodyState& state, ActionMode mode,
                                 const ControllerGains& gains,
                                 const RigidBodyParams& params) {
  if (mode == ActionMode::kVelocity3) {
    return velocity_to_wrench(a_exec.head<3>(), state, gains, params);
  }
  return raw_wrench(a_exec.head<6>(), gains, params);
}

}  // namespace auvlab
