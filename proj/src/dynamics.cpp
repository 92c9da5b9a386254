#include "mpcc_il/dynamics.hpp"

#include <cmath>
#include <string>

namespace mpcc_il {

Eigen::Matrix<double, 8, 1> QuadState::to_vector() const {
  Eigen::Matrix<double, 8, 1> x;
  x << p.x(), p.y(), p.z(), v.x(), v.y(), roll, pitch, yaw;
  return x;
}

QuadState QuadState::from_vector(const Eigen::Matrix<double, 8, 1>& x) {
  QuadState s;
  s.p = x.head<3>();
  s.v = x.segment<2>(3);
  s.roll = x[5];
  s.pitch = x[6];
  s.yaw = x[7];
  return s;
}

bool QuadState::finite() const { return to_vector().allFinite(); }

ModelParams ModelParams::from_alpha(double alpha, double ts) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw InvalidInputError("alpha must lie in (0, 1)");
  }
  if (!(ts > 0.0)) throw InvalidInputError("ts must be positive");
  ModelParams p;
  p.ts = ts;
  p.alpha = alpha;
  p.tau = -ts / std::log(alpha);
  return p;
}

ModelParams ModelParams::from_tau(double tau, double ts) {
  if (!(tau > 0.0)) throw InvalidInputError("tau must be positive");
  if (!(ts > 0.0)) throw InvalidInputError("ts must be positive");
  ModelParams p;
  p.ts = ts;
  p.tau = tau;
  p.alpha = std::exp(-ts / tau);
  return p;
}

QuadState step(const QuadState& x, const ControlInput& u_raw,
               const ModelParams& params) {
  if (!x.finite() || !u_raw.finite()) {
    throw NumericalError("non-finite state or input in step");
  }
  const ControlInput u = params.input_limits.clip(u_raw);
  const double ts = params.ts;
  const double a = params.alpha;

  QuadState n;
  n.roll = a * x.roll + (1.0 - a) * u.roll_cmd;
  n.pitch = a * x.pitch + (1.0 - a) * u.pitch_cmd;
  n.yaw = x.yaw + ts * u.yaw_rate_cmd;

  const double c = std::cos(x.yaw);
  const double s = std::sin(x.yaw);
  const Vec2 body(-std::tan(x.roll), std::tan(x.pitch));
  const Vec2 accel(c * body.x() - s * body.y(), s * body.x() + c * body.y());
  n.v = x.v + ts * (params.gravity * accel - params.drag * x.v + params.wind);

  n.p = x.p + ts * Vec3(x.v.x(), x.v.y(), u.vz);

  if (std::abs(n.roll) >= kPi / 2.0 || std::abs(n.pitch) >= kPi / 2.0) {
    throw SingularityError("roll or pitch reached the tan singularity");
  }
  return n;
}

std::vector<QuadState> rollout(const QuadState& x0,
                               const std::vector<ControlInput>& inputs,
                               const ModelParams& params) {
  if (inputs.empty()) throw InvalidInputError("rollout needs inputs");
  std::vector<QuadState> traj;
  traj.reserve(inputs.size() + 1);
  traj.push_back(x0);
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    try {
      traj.push_back(step(traj.back(), inputs[i], params));
    } catch (const Error& e) {
      throw NumericalError("rollout failed at step " + std::to_string(i) +
                           ": " + e.what());
    }
  }
  return traj;
}

void linearize(const QuadState& x, const ControlInput& u,
               const ModelParams& params, Eigen::Matrix<double, 8, 8>& A,
               Eigen::Matrix<double, 8, 4>& B) {
  (void)u;
  if (std::abs(x.roll) >= kPi / 2.0 || std::abs(x.pitch) >= kPi / 2.0) {
    throw SingularityError("linearize at the tan singularity");
  }
  const double ts = params.ts;
  const double a = params.alpha;
  const double g = params.gravity;
  const double c = std::cos(x.yaw);
  const double s = std::sin(x.yaw);
  const double sec2_roll = 1.0 / (std::cos(x.roll) * std::cos(x.roll));
  const double sec2_pitch = 1.0 / (std::cos(x.pitch) * std::cos(x.pitch));

  A.setZero();
  B.setZero();

  // Position rows: p+ = p + ts [vx, vy, vz_cmd].
  A.block<3, 3>(0, 0).setIdentity();
  A(0, 3) = ts;
  A(1, 4) = ts;
  B(2, 0) = ts;

  // Velocity rows: v+ = v + ts (g R(yaw) [-tan(roll), tan(pitch)] - drag v).
  A(3, 3) = 1.0 - ts * params.drag;
  A(4, 4) = 1.0 - ts * params.drag;
  A(3, 5) = ts * g * (-c) * sec2_roll;
  A(4, 5) = ts * g * (-s) * sec2_roll;
  A(3, 6) = ts * g * (-s) * sec2_pitch;
  A(4, 6) = ts * g * c * sec2_pitch;
  const double bx = -std::tan(x.roll);
  const double by = std::tan(x.pitch);
  A(3, 7) = ts * g * (-s * bx - c * by);
  A(4, 7) = ts * g * (c * bx - s * by);

  // Attitude rows.
  A(5, 5) = a;
  A(6, 6) = a;
  A(7, 7) = 1.0;
  B(5, 1) = 1.0 - a;
  B(6, 2) = 1.0 - a;
  B(7, 3) = ts;
}

ModelParams perturb_params(const ModelParams& params, double alpha_used) {
  if (!(alpha_used > 0.0 && alpha_used < 1.0)) {
    throw InvalidInputError("perturbed alpha must lie in (0, 1)");
  }
  ModelParams out = params;
  out.alpha = alpha_used;
  out.tau = -params.ts / std::log(alpha_used);
  return out;
}

}  // namespace mpcc_il
