#pragma once

#include <cmath>
#include <stdexcept>

#include <Eigen/Dense>

namespace auvlab {

using Vector6d = Eigen::Matrix<double, 6, 1>;
using Matrix6d = Eigen::Matrix<double, 6, 6>;

/// Thrown when the pitch guard band around +-pi/2 is violated by a direct
/// kinematics query.  The integrator itself never throws this; it clamps
/// pitch and reports the clamp through its step result instead.
struct PitchSingularity : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Thrown when a state or input wrench stops being finite.
struct NonFiniteState : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Pose (world position + roll/pitch/yaw) and body-frame velocity
/// nu = [u, v, w, p, q, r] of one vehicle.
struct RigidBodyState {
  Eigen::Vector3d position = Eigen::Vector3d::Zero();
  Eigen::Vector3d attitude = Eigen::Vector3d::Zero();  ///< [phi, theta, psi]
  Vector6d nu = Vector6d::Zero();
};

/// Physical constants of the vehicle model plus the integration settings.
///
/// The defaults describe a ~32 kg torpedo-shaped vehicle: diagonal rigid
/// body + added mass, linear plus quadratic drag on the translational
/// axes, linear drag on the rotational ones, and a gravity/buoyancy
/// restoring moment that rights roll and pitch.  Positions live in a
/// dimensionless workspace; `world_scale` converts body-frame metres per
/// second into workspace units per second when positions are advanced.
struct RigidBodyParams {
  Vector6d inertia;        ///< diag(M) = rigid-body + added mass, kg / kg m^2
  Vector6d damping_linear;
  Vector6d damping_quadratic;
  double restoring_gain = 12.0;  ///< N m per unit sin(roll), sin(pitch)
  Vector6d wrench_cap;           ///< per-axis |tau| limit, N / N m
  Vector6d velocity_cap;         ///< per-axis |nu| limit, m/s / rad/s
  double dt = 0.1;               ///< integration step, s
  double world_scale = 1.0;      ///< workspace units per metre
  double pitch_guard = 0.05;     ///< rad kept clear of +-pi/2

  static RigidBodyParams defaults() {
    RigidBodyParams p;
    p.inertia << 33.9, 66.9, 66.9, 0.28, 8.6, 8.6;
    p.damping_linear << 4.0, 8.0, 10.0, 0.8, 3.0, 2.5;
    p.damping_quadratic << 18.0, 30.0, 35.0, 0.0, 0.0, 0.0;
    p.wrench_cap << 35.0, 20.0, 20.0, 8.0, 10.0, 10.0;
    p.velocity_cap << 1.5, 0.5, 0.5, 1.2, 1.2, 1.2;
    return p;
  }
};

inline Eigen::Matrix3d skew(const Eigen::Vector3d& v) {
  Eigen::Matrix3d s;
  s << 0, -v.z(), v.y(), v.z(), 0, -v.x(), -v.y(), v.x(), 0;
  return s;
}

inline double wrap_angle(double a) {
  double y = std::fmod(a + M_PI, 2.0 * M_PI);
  if (y <= 0.0) y += 2.0 * M_PI;
  return y - M_PI;  // (-pi, pi]
}

/// Body-to-world rotation for ZYX (yaw-pitch-roll) Euler angles.
inline Eigen::Matrix3d body_to_world(const Eigen::Vector3d& attitude) {
  const double phi = attitude.x(), theta = attitude.y(), psi = attitude.z();
  return (Eigen::AngleAxisd(psi, Eigen::Vector3d::UnitZ()) *
          Eigen::AngleAxisd(theta, Eigen::Vector3d::UnitY()) *
          Eigen::AngleAxisd(phi, Eigen::Vector3d::UnitX()))
      .toRotationMatrix();
}

/// 6x6 kinematic map eta_dot = J(eta) nu: block-diagonal rotation for the
/// linear part and the Euler angle rate matrix for the angular part.
/// Throws PitchSingularity inside the guard band around pitch = +-pi/2,
/// where the angle-rate map blows up.
inline Matrix6d kinematic_transform(const Eigen::Vector3d& attitude,
                                    double pitch_guard = 0.05) {
  const double phi = attitude.x(), theta = attitude.y();
  if (std::abs(theta) >= M_PI / 2.0 - pitch_guard) {
    throw PitchSingularity("pitch too close to +-pi/2 for Euler rates");
  }
  const double sphi = std::sin(phi), cphi = std::cos(phi);
  const double ttheta = std::tan(theta), ctheta = std::cos(theta);
  Eigen::Matrix3d t;
  t << 1, sphi * ttheta, cphi * ttheta,  //
      0, cphi, -sphi,                    //
      0, sphi / ctheta, cphi / ctheta;
  Matrix6d j = Matrix6d::Zero();
  j.topLeftCorner<3, 3>() = body_to_world(attitude);
  j.bottomRightCorner<3, 3>() = t;
  return j;
}

/// Coriolis/centripetal matrix for a diagonal inertia matrix, in the
/// standard skew block form.  C(nu) is skew-symmetric, so it moves energy
/// between axes without adding any.
inline Matrix6d coriolis_matrix(const Vector6d& nu,
                                const RigidBodyParams& params) {
  const Eigen::Vector3d a =
      params.inertia.head<3>().cwiseProduct(nu.head<3>());
  const Eigen::Vector3d b =
      params.inertia.tail<3>().cwiseProduct(nu.tail<3>());
  Matrix6d c = Matrix6d::Zero();
  c.topRightCorner<3, 3>() = -skew(a);
  c.bottomLeftCorner<3, 3>() = -skew(a);
  c.bottomRightCorner<3, 3>() = -skew(b);
  return c;
}

/// Hydrodynamic drag D(nu), diagonal with linear + quadratic terms.  The
/// opposing wrench is -damping_matrix(nu) * nu.
inline Matrix6d damping_matrix(const Vector6d& nu,
                               const RigidBodyParams& params) {
  return (params.damping_linear +
          params.damping_quadratic.cwiseProduct(nu.cwiseAbs()))
      .asDiagonal();
}

/// Restoring wrench acting on the body: a moment that pushes roll and
/// pitch back toward level.  The vehicle is neutrally buoyant, so there
/// is no net linear restoring force.
inline Vector6d restoring_wrench(const Eigen::Vector3d& attitude,
                                 const RigidBodyParams& params) {
  Vector6d g = Vector6d::Zero();
  g(3) = -params.restoring_gain * std::sin(attitude.x());
  g(4) = -params.restoring_gain * std::sin(attitude.y());
  return g;
}

/// Kinetic energy 0.5 nu^T M nu, used by energy-dissipation checks.
inline double kinetic_energy(const Vector6d& nu,
                             const RigidBodyParams& params) {
  return 0.5 * nu.dot(params.inertia.cwiseProduct(nu));
}

struct DynamicsStepResult {
  RigidBodyState state;
  bool pitch_clamped = false;
  Vector6d applied_wrench = Vector6d::Zero();  ///< tau after the caps
};

/// One semi-implicit Euler step of
///   M nu_dot + C(nu) nu + D(nu) nu = tau + w + g_restore(eta).
///
/// Order of operations, all of which the tests pin down:
///   1. clamp tau per axis to wrench_cap, add the disturbance w,
///   2. nu_dot from the force balance at the current state,
///   3. nu += dt * nu_dot, then clip nu to velocity_cap,
///   4. eta += dt * J(eta) * nu using the updated nu (linear part scaled
///      by world_scale),
///   5. wrap angles to (-pi, pi] and clamp pitch inside the guard band.
inline DynamicsStepResult step_dynamics(const RigidBodyState& state,
                                        const Vector6d& tau,
                                        const Vector6d& disturbance,
                                        const RigidBodyParams& params) {
  if (!state.position.allFinite() || !state.attitude.allFinite() ||
      !state.nu.allFinite() || !tau.allFinite() ||
      !disturbance.allFinite()) {
    throw NonFiniteState("non-finite dynamics input");
  }

  DynamicsStepResult out;
  out.applied_wrench =
      tau.cwiseMax(-params.wrench_cap).cwiseMin(params.wrench_cap);

  const Vector6d rhs = out.applied_wrench + disturbance +
                       restoring_wrench(state.attitude, params) -
                       coriolis_matrix(state.nu, params) * state.nu -
                       damping_matrix(state.nu, params) * state.nu;
  const Vector6d nu_dot = rhs.cwiseQuotient(params.inertia);

  Vector6d nu = state.nu + params.dt * nu_dot;
  nu = nu.cwiseMax(-params.velocity_cap).cwiseMin(params.velocity_cap);

  out.state.nu = nu;
  out.state.position =
      state.position +
      params.dt * params.world_scale * (body_to_world(state.attitude) * nu.head<3>());

  const Eigen::Matrix3d t =
      kinematic_transform(state.attitude, 0.0).bottomRightCorner<3, 3>();
  Eigen::Vector3d attitude = state.attitude + params.dt * (t * nu.tail<3>());
  attitude.x() = wrap_angle(attitude.x());
  attitude.y() = wrap_angle(attitude.y());
  attitude.z() = wrap_angle(attitude.z());

  const double pitch_limit = M_PI / 2.0 - params.pitch_guard;
  if (std::abs(attitude.y()) > pitch_limit) {
    attitude.y() = std::copysign(pitch_limit, attitude.y());
    out.pitch_clamped = true;
  }
  out.state.attitude = attitude;

  if (!out.state.nu.allFinite() || !out.state.position.allFinite()) {
    throw NonFiniteState("non-finite dynamics output");
  }
  return out;
}

}  // namespace auvlab
