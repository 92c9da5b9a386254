#pragma once

#include <vector>

#include "mpcc_il/common.hpp"

namespace mpcc_il {

// 8-dimensional quadrotor state: 3D position, planar velocity, attitude.
struct QuadState {
  Vec3 p = Vec3::Zero();   // position [m]
  Vec2 v = Vec2::Zero();   // x,y velocity [m/s]
  double roll = 0.0;       // [rad]
  double pitch = 0.0;      // [rad]
  double yaw = 0.0;        // [rad]

  Eigen::Matrix<double, 8, 1> to_vector() const;
  static QuadState from_vector(const Eigen::Matrix<double, 8, 1>& x);
  bool finite() const;
};

// Commands accepted by the plant: vertical rate, desired roll/pitch, yaw rate.
struct ControlInput {
  double vz = 0.0;            // [m/s]
  double roll_cmd = 0.0;      // [rad]
  double pitch_cmd = 0.0;     // [rad]
  double yaw_rate_cmd = 0.0;  // [rad/s]

  Vec4 to_vector() const { return Vec4(vz, roll_cmd, pitch_cmd, yaw_rate_cmd); }
  static ControlInput from_vector(const Vec4& u) {
    return ControlInput{u[0], u[1], u[2], u[3]};
  }
  bool finite() const {
    return std::isfinite(vz) && std::isfinite(roll_cmd) &&
           std::isfinite(pitch_cmd) && std::isfinite(yaw_rate_cmd);
  }
};

// Symmetric box on the control input.
struct InputLimits {
  double vz_max = 1.0;            // [m/s]
  double roll_cmd_max = 0.4;      // [rad]
  double pitch_cmd_max = 0.4;     // [rad]
  double yaw_rate_max = 1.5;      // [rad/s]

  Vec4 upper() const {
    return Vec4(vz_max, roll_cmd_max, pitch_cmd_max, yaw_rate_max);
  }
  Vec4 lower() const { return -upper(); }
  ControlInput clip(const ControlInput& u) const {
    return ControlInput{clamp(u.vz, -vz_max, vz_max),
                        clamp(u.roll_cmd, -roll_cmd_max, roll_cmd_max),
                        clamp(u.pitch_cmd, -pitch_cmd_max, pitch_cmd_max),
                        clamp(u.yaw_rate_cmd, -yaw_rate_max, yaw_rate_max)};
  }
};

struct StateLimits {
  double roll_max = 0.4;   // [rad]
  double pitch_max = 0.4;  // [rad]
};

// Discrete-time model parameters. Attitude uses the exact low-pass form
// alpha = exp(-Ts/tau); position and velocity use forward Euler.
struct ModelParams {
  double gravity = 9.81;   // [m/s^2]
  double drag = 0.3;       // linear drag coefficient [1/s]
  double ts = 0.1;         // sampling time [s]
  double alpha = 0.85;     // discretized attitude constant
  double tau = 0.0;        // attitude time constant [s], consistent with alpha
  Vec2 wind = Vec2::Zero();  // constant plant-side acceleration [m/s^2]
  InputLimits input_limits;
  StateLimits state_limits;

  static ModelParams from_alpha(double alpha, double ts = 0.1);
  static ModelParams from_tau(double tau, double ts = 0.1);
};

// One discrete step. The input is clipped to the input box before use.
// Throws NumericalError on non-finite input and SingularityError if roll or
// pitch leaves (-pi/2, pi/2).
QuadState step(const QuadState& x, const ControlInput& u,
               const ModelParams& params);

// Iterated step; result has inputs.size() + 1 entries including the initial
// state. Errors carry the failing step index.
std::vector<QuadState> rollout(const QuadState& x0,
                               const std::vector<ControlInput>& inputs,
                               const ModelParams& params);

// Analytic Jacobians of step with respect to state (8x8) and input (8x4),
// valid for inputs inside the box.
void linearize(const QuadState& x, const ControlInput& u,
               const ModelParams& params, Eigen::Matrix<double, 8, 8>& A,
               Eigen::Matrix<double, 8, 4>& B);

// Copy of params with the attitude constant replaced (tau kept consistent).
// Used to build supervisor models that mismatch the plant.
ModelParams perturb_params(const ModelParams& params, double alpha_used);

}  // namespace mpcc_il
