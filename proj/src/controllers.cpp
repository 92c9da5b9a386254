#include "mpcc_il/controllers.hpp"

#include <cmath>

namespace mpcc_il {

void MpccWeights::validate() const {
  if (contour < 0.0 || lag < 0.0 || progress < 0.0 || follow < 0.0) {
    throw ConfigError("MPCC weights must be non-negative");
  }
  if (!(input_penalty.minCoeff() > 0.0)) {
    throw ConfigError("input penalty diagonal must be positive");
  }
  if (horizon < 2) throw ConfigError("horizon must be >= 2");
  if (!(nu_dot_max > 0.0)) throw ConfigError("nu_dot_max must be positive");
}

namespace {

// Quadrotor state augmented with the path parameter.
class AugmentedQuadModel : public TransitionModel {
 public:
  explicit AugmentedQuadModel(const ModelParams& params) : params_(params) {}

  int state_dim() const override { return 9; }
  int input_dim() const override { return 5; }

  VecX next(const VecX& y, const VecX& w) const override {
    const QuadState x = QuadState::from_vector(y.head<8>());
    const ControlInput u = ControlInput::from_vector(w.head<4>());
    VecX out(9);
    out.head<8>() = step(x, u, params_).to_vector();
    out[8] = y[8] + params_.ts * w[4];
    return out;
  }

  void jacobians(const VecX& y, const VecX& w, MatX& A,
                 MatX& B) const override {
    Eigen::Matrix<double, 8, 8> a8;
    Eigen::Matrix<double, 8, 4> b8;
    linearize(QuadState::from_vector(y.head<8>()),
              ControlInput::from_vector(w.head<4>()), params_, a8, b8);
    A.setZero(9, 9);
    A.topLeftCorner(8, 8) = a8;
    A(8, 8) = 1.0;
    B.setZero(9, 5);
    B.topLeftCorner(8, 4) = b8;
    B(8, 4) = params_.ts;
  }

 private:
  ModelParams params_;
};

class QuadOnlyModel : public TransitionModel {
 public:
  explicit QuadOnlyModel(const ModelParams& params) : params_(params) {}

  int state_dim() const override { return 8; }
  int input_dim() const override { return 4; }

  VecX next(const VecX& y, const VecX& w) const override {
    const QuadState x = QuadState::from_vector(y);
    return step(x, ControlInput::from_vector(w), params_).to_vector();
  }

  void jacobians(const VecX& y, const VecX& w, MatX& A,
                 MatX& B) const override {
    Eigen::Matrix<double, 8, 8> a8;
    Eigen::Matrix<double, 8, 4> b8;
    linearize(QuadState::from_vector(y), ControlInput::from_vector(w),
              params_, a8, b8);
    A = a8;
    B = b8;
  }

 private:
  ModelParams params_;
};

class MpccStageCost : public StageCost {
 public:
  MpccStageCost(const SplinePath& path, const MpccWeights& weights,
                const AvoidanceCost* avoid,
                const std::vector<QuadState>* follow_targets)
      : path_(path),
        weights_(weights),
        avoid_(avoid),
        follow_(follow_targets),
        sqrt_contour_(std::sqrt(weights.contour)),
        sqrt_lag_(std::sqrt(weights.lag)),
        sqrt_end_(std::sqrt(weights.path_end_weight)),
        sqrt_follow_(std::sqrt(weights.follow)),
        sqrt_r_(weights.input_penalty.cwiseSqrt()) {}

  void residuals(int k, const VecX& y, const VecX* w, VecX& r, MatX* Jy,
                 MatX* Jw) const override {
    const bool has_input = w != nullptr;
    const int n_avoid =
        avoid_ != nullptr ? static_cast<int>(avoid_->obstacles.size()) : 0;
    const int m = 3 + 1 + 1 + (has_input ? 4 : 0) + n_avoid +
                  (follow_ != nullptr ? 8 : 0);
    r.setZero(m);
    if (Jy != nullptr) Jy->setZero(m, 9);
    if (Jw != nullptr) Jw->setZero(m, 5);

    const Vec3 p = y.head<3>();
    const double nu = y[8];
    const ContouringApprox ca = path_.contouring_lag_approx(p, nu);

    int row = 0;
    // Contouring error vector.
    r.segment<3>(row) = sqrt_contour_ * ca.contour_vec;
    if (Jy != nullptr) {
      Jy->block<3, 3>(row, 0) = sqrt_contour_ * ca.dcontour_vec_dp;
      Jy->block<3, 1>(row, 8) = sqrt_contour_ * ca.dcontour_vec_dnu;
    }
    row += 3;

    // Signed lag error.
    r[row] = sqrt_lag_ * ca.lag_signed;
    if (Jy != nullptr) {
      Jy->block<1, 3>(row, 0) = sqrt_lag_ * ca.dlag_signed_dp.transpose();
      (*Jy)(row, 8) = sqrt_lag_ * ca.dlag_signed_dnu;
    }
    row += 1;

    // Soft upper bound on the path parameter.
    const double excess = nu - path_.length();
    if (excess > 0.0) {
      r[row] = sqrt_end_ * excess;
      if (Jy != nullptr) (*Jy)(row, 8) = sqrt_end_;
    }
    row += 1;

    if (has_input) {
      for (int i = 0; i < 4; ++i) {
        r[row + i] = sqrt_r_[i] * (*w)[i];
        if (Jw != nullptr) (*Jw)(row + i, i) = sqrt_r_[i];
      }
      row += 4;
    }

    for (int i = 0; i < n_avoid; ++i) {
      const Obstacle& ob = avoid_->obstacles[static_cast<std::size_t>(i)];
      const double gap = avoid_->onset - ob.signed_distance(p);
      if (gap > 0.0) {
        const double sw = std::sqrt(avoid_->weight);
        r[row + i] = sw * gap;
        if (Jy != nullptr) {
          Jy->block<1, 3>(row + i, 0) =
              -sw * ob.signed_distance_gradient(p).transpose();
        }
      }
    }
    row += n_avoid;

    if (follow_ != nullptr) {
      const auto& target = (*follow_)[static_cast<std::size_t>(k)];
      r.segment<8>(row) =
          sqrt_follow_ * (y.head<8>() - target.to_vector());
      if (Jy != nullptr) {
        Jy->block<8, 8>(row, 0) =
            sqrt_follow_ * Eigen::Matrix<double, 8, 8>::Identity();
      }
      row += 8;
    }
  }

  double extra_cost(int k, const VecX* w, VecX* grad_w) const override {
    (void)k;
    if (w == nullptr) return 0.0;
    if (grad_w != nullptr) (*grad_w)[4] -= weights_.progress;
    return -weights_.progress * (*w)[4];
  }

 private:
  const SplinePath& path_;
  const MpccWeights& weights_;
  const AvoidanceCost* avoid_;
  const std::vector<QuadState>* follow_;
  double sqrt_contour_;
  double sqrt_lag_;
  double sqrt_end_;
  double sqrt_follow_;
  Vec4 sqrt_r_;
};

class TrackStageCost : public StageCost {
 public:
  TrackStageCost(const TimedReference& reference, int start_index,
                 const MpccWeights& weights,
                 const std::vector<QuadState>* follow_targets,
                 double follow_weight)
      : reference_(reference),
        start_(start_index),
        weights_(weights),
        follow_(follow_targets),
        sqrt_follow_(std::sqrt(follow_weight)),
        sqrt_q_(weights.track_q.cwiseSqrt()),
        sqrt_r_(weights.input_penalty.cwiseSqrt()) {}

  void residuals(int k, const VecX& y, const VecX* w, VecX& r, MatX* Jy,
                 MatX* Jw) const override {
    const bool has_input = w != nullptr;
    const int m = 8 + (has_input ? 4 : 0) + (follow_ != nullptr ? 8 : 0);
    r.setZero(m);
    if (Jy != nullptr) Jy->setZero(m, 8);
    if (Jw != nullptr) Jw->setZero(m, 4);

    const auto ref = reference_.at_or_last(start_ + k).to_vector();
    int row = 0;
    for (int i = 0; i < 8; ++i) {
      r[row + i] = sqrt_q_[i] * (y[i] - ref[i]);
      if (Jy != nullptr) (*Jy)(row + i, i) = sqrt_q_[i];
    }
    row += 8;

    if (has_input) {
      for (int i = 0; i < 4; ++i) {
        r[row + i] = sqrt_r_[i] * (*w)[i];
        if (Jw != nullptr) (*Jw)(row + i, i) = sqrt_r_[i];
      }
      row += 4;
    }

    if (follow_ != nullptr) {
      const auto& target = (*follow_)[static_cast<std::size_t>(k)];
      r.segment<8>(row) = sqrt_follow_ * (y - target.to_vector());
      if (Jy != nullptr) {
        Jy->block<8, 8>(row, 0) =
            sqrt_follow_ * Eigen::Matrix<double, 8, 8>::Identity();
      }
      row += 8;
    }
  }

 private:
  const TimedReference& reference_;
  int start_;
  const MpccWeights& weights_;
  const std::vector<QuadState>* follow_;
  double sqrt_follow_;
  Eigen::Matrix<double, 8, 1> sqrt_q_;
  Vec4 sqrt_r_;
};

std::vector<VecX> shifted_warm_augmented(const MpccSolution* warm, int n) {
  std::vector<VecX> out;
  if (warm == nullptr || static_cast<int>(warm->inputs.size()) != n) return out;
  out.resize(n);
  for (int k = 0; k < n; ++k) {
    const int src = std::min(k + 1, n - 1);
    VecX w(5);
    w.head<4>() = warm->inputs[static_cast<std::size_t>(src)].to_vector();
    w[4] = warm->nu_dot[src];
    out[static_cast<std::size_t>(k)] = w;
  }
  return out;
}

MpccSolution unpack_augmented(const OcpSolution& sol) {
  const int n = static_cast<int>(sol.inputs.size());
  MpccSolution out;
  out.states.reserve(n + 1);
  out.nu.resize(n + 1);
  out.nu_dot.resize(n);
  for (int k = 0; k <= n; ++k) {
    out.states.push_back(
        QuadState::from_vector(sol.states[static_cast<std::size_t>(k)].head<8>()));
    out.nu[k] = sol.states[static_cast<std::size_t>(k)][8];
  }
  out.inputs.reserve(n);
  for (int k = 0; k < n; ++k) {
    out.inputs.push_back(ControlInput::from_vector(
        sol.inputs[static_cast<std::size_t>(k)].head<4>()));
    out.nu_dot[k] = sol.inputs[static_cast<std::size_t>(k)][4];
  }
  out.cost = sol.cost;
  out.kkt_residual = sol.kkt_residual;
  out.iterations = sol.iterations;
  out.converged = sol.converged;
  out.solve_time = sol.solve_time;
  return out;
}

MpccSolution solve_mpcc_impl(const QuadState& state, double nu0,
                             const SplinePath& path,
                             const MpccWeights& weights,
                             const ModelParams& model,
                             const MpccSolution* warm,
                             const AvoidanceCost* avoid,
                             const std::vector<QuadState>* follow_targets) {
  weights.validate();
  if (!state.finite()) throw NumericalError("non-finite state in mpcc_solve");
  const int n = weights.horizon;

  AugmentedQuadModel dyn(model);
  MpccStageCost cost(path, weights, avoid, follow_targets);

  VecX y0(9);
  y0.head<8>() = state.to_vector();
  y0[8] = clamp(nu0, 0.0, path.length());

  VecX w_lb(5), w_ub(5);
  w_ub.head<4>() = model.input_limits.upper();
  w_lb.head<4>() = model.input_limits.lower();
  w_lb[4] = 0.0;
  w_ub[4] = weights.nu_dot_max;

  SqpSolver solver(weights.solver);
  const OcpSolution sol = solver.solve(dyn, cost, y0, n,
                                       shifted_warm_augmented(warm, n), w_lb,
                                       w_ub);
  return unpack_augmented(sol);
}

}  // namespace

MpccSolution mpcc_solve(const QuadState& state, double nu0,
                        const SplinePath& path, const MpccWeights& weights,
                        const ModelParams& model, const MpccSolution* warm,
                        const AvoidanceCost* avoid) {
  return solve_mpcc_impl(state, nu0, path, weights, model, warm, avoid,
                         nullptr);
}

std::vector<QuadState> rollout_policy(const MlpPolicy& policy,
                                      const QuadState& state,
                                      const World& world, double t0,
                                      const ModelParams& model, int horizon,
                                      double vz_est, const YawGains& gains) {
  std::vector<QuadState> states;
  states.reserve(horizon + 1);
  states.push_back(state);
  double vz = vz_est;
  for (int k = 0; k < horizon; ++k) {
    const double t = t0 + k * model.ts;
    const Observation obs = observe(states.back(), world, t, vz);
    const VecX features = obs.to_vector().head(policy.input_dim());
    const VecX out = policy.forward(features);
    ControlInput u;
    u.vz = out[0];
    u.roll_cmd = out[1];
    u.pitch_cmd = out[2];
    u.yaw_rate_cmd =
        yaw_pd(states.back(), setpoint(world, t).heading, gains,
               model.input_limits.yaw_rate_max);
    states.push_back(step(states.back(), u, model));
    vz = clamp(u.vz, -model.input_limits.vz_max, model.input_limits.vz_max);
  }
  return states;
}

MpccSolution onpolicy_mpcc_solve(const QuadState& state, double nu0,
                                 const SplinePath& path,
                                 const MpccWeights& weights,
                                 const ModelParams& model,
                                 const MlpPolicy& policy, const World& world,
                                 const MpccSolution* warm, double vz_est) {
  if (weights.follow == 0.0) {
    return mpcc_solve(state, nu0, path, weights, model, warm, nullptr);
  }
  const std::vector<QuadState> targets = rollout_policy(
      policy, state, world, world.time, model, weights.horizon, vz_est);
  return solve_mpcc_impl(state, nu0, path, weights, model, warm, nullptr,
                         &targets);
}

MpccSolution mpc_track_solve(const QuadState& state,
                             const TimedReference& reference, int start_index,
                             const MpccWeights& weights,
                             const ModelParams& model, const MlpPolicy* policy,
                             double follow_weight, const World* world,
                             const MpccSolution* warm, double vz_est) {
  weights.validate();
  if (!state.finite()) throw NumericalError("non-finite state");
  if (reference.states.empty()) throw InvalidInputError("empty reference");
  const int n = weights.horizon;

  std::vector<QuadState> targets;
  const std::vector<QuadState>* targets_ptr = nullptr;
  if (policy != nullptr && follow_weight > 0.0) {
    if (world == nullptr) {
      throw InvalidInputError("policy rollout needs the world");
    }
    targets = rollout_policy(*policy, state, *world, world->time, model, n,
                             vz_est);
    targets_ptr = &targets;
  }

  QuadOnlyModel dyn(model);
  TrackStageCost cost(reference, start_index, weights, targets_ptr,
                      follow_weight);

  std::vector<VecX> warm_inputs;
  if (warm != nullptr && static_cast<int>(warm->inputs.size()) == n) {
    warm_inputs.resize(n);
    for (int k = 0; k < n; ++k) {
      const int src = std::min(k + 1, n - 1);
      warm_inputs[static_cast<std::size_t>(k)] =
          warm->inputs[static_cast<std::size_t>(src)].to_vector();
    }
  }

  SqpSolver solver(weights.solver);
  const OcpSolution sol =
      solver.solve(dyn, cost, state.to_vector(), n, warm_inputs,
                   model.input_limits.lower(), model.input_limits.upper());

  MpccSolution out;
  const int m = static_cast<int>(sol.inputs.size());
  out.nu.setZero(m + 1);
  out.nu_dot.setZero(m);
  for (int k = 0; k <= m; ++k) {
    out.states.push_back(
        QuadState::from_vector(sol.states[static_cast<std::size_t>(k)]));
  }
  for (int k = 0; k < m; ++k) {
    out.inputs.push_back(
        ControlInput::from_vector(sol.inputs[static_cast<std::size_t>(k)]));
  }
  out.cost = sol.cost;
  out.kkt_residual = sol.kkt_residual;
  out.iterations = sol.iterations;
  out.converged = sol.converged;
  out.solve_time = sol.solve_time;
  return out;
}

TimedReference offline_traj_opt(const SplinePath& path,
                                const std::vector<Obstacle>& obstacles,
                                double speed, const ModelParams& model,
                                const MpccWeights& weights, bool* converged) {
  if (!(path.length() > 0.0)) throw InvalidInputError("empty path");
  if (!(speed > 0.0)) throw InvalidInputError("speed must be positive");

  // One long horizon covering the full path; the sampling time is coarsened
  // when needed to cap the problem size.
  const int stage_cap = 240;
  double ts_off = model.ts;
  int n = static_cast<int>(std::ceil(1.2 * path.length() / (speed * ts_off)));
  if (n > stage_cap) {
    n = stage_cap;
    ts_off = 1.2 * path.length() / (speed * n);
  }
  ModelParams coarse = model;
  coarse.ts = ts_off;
  coarse.alpha = std::exp(-ts_off / model.tau);

  MpccWeights w = weights;
  w.horizon = n;
  w.nu_dot_max = std::max(weights.nu_dot_max, 1.5 * speed);
  w.solver.max_iters = std::max(weights.solver.max_iters, 150);

  const PathFrame f0 = path.frame(0.0);
  QuadState start;
  start.p = f0.point;
  start.yaw = f0.heading;

  AvoidanceCost avoid;
  avoid.obstacles = obstacles;

  // Seed with uniform progress at the requested speed.
  MpccSolution seed;
  seed.inputs.assign(n, ControlInput{});
  seed.nu_dot = VecX::Constant(n, speed);
  seed.nu.setZero(n + 1);
  const MpccSolution sol =
      solve_mpcc_impl(start, 0.0, path, w, coarse, &seed, &avoid, nullptr);

  const bool reached_end = sol.nu[n] > 0.95 * path.length();
  if (converged != nullptr) *converged = sol.converged && reached_end;

  // Geometric path of the solution, subsampled and re-timed at constant
  // speed on the original sampling grid.
  std::vector<Vec3> pts;
  pts.push_back(sol.states.front().p);
  for (const QuadState& s : sol.states) {
    if ((s.p - pts.back()).norm() > 0.25) pts.push_back(s.p);
  }
  if ((sol.states.back().p - pts.back()).norm() > 1e-6) {
    pts.push_back(sol.states.back().p);
  }
  if (pts.size() < 2) pts.push_back(pts.back() + Vec3(1e-3, 0, 0));
  const SplinePath geom = SplinePath::from_points(pts);

  TimedReference ref;
  ref.ts = model.ts;
  const int steps =
      static_cast<int>(std::ceil(geom.length() / (speed * model.ts)));
  std::vector<Vec3> positions(static_cast<std::size_t>(steps) + 1);
  std::vector<double> headings(static_cast<std::size_t>(steps) + 1);
  for (int i = 0; i <= steps; ++i) {
    const double nu = std::min(speed * model.ts * i, geom.length());
    const PathFrame f = geom.frame(nu);
    positions[static_cast<std::size_t>(i)] = f.point;
    headings[static_cast<std::size_t>(i)] = f.heading;
  }

  ref.states.resize(positions.size());
  for (std::size_t i = 0; i < positions.size(); ++i) {
    QuadState s;
    s.p = positions[i];
    const std::size_t j = std::min(i, positions.size() - 2);
    s.v = (positions[j + 1] - positions[j]).head<2>() / model.ts;
    s.yaw = headings[i];
    ref.states[i] = s;
  }
  // Attitude from the planar acceleration the model needs to produce it.
  for (std::size_t i = 0; i + 1 < ref.states.size(); ++i) {
    const Vec2 accel = (ref.states[i + 1].v - ref.states[i].v) / model.ts +
                       model.drag * ref.states[i].v;
    const double c = std::cos(ref.states[i].yaw);
    const double s = std::sin(ref.states[i].yaw);
    const Vec2 body(c * accel.x() + s * accel.y(),
                    -s * accel.x() + c * accel.y());
    ref.states[i].roll = clamp(std::atan(-body.x() / model.gravity),
                               -model.state_limits.roll_max,
                               model.state_limits.roll_max);
    ref.states[i].pitch = clamp(std::atan(body.y() / model.gravity),
                                -model.state_limits.pitch_max,
                                model.state_limits.pitch_max);
  }
  if (ref.states.size() > 1) {
    ref.states.back().roll = ref.states[ref.states.size() - 2].roll;
    ref.states.back().pitch = ref.states[ref.states.size() - 2].pitch;
  }

  ref.inputs.resize(ref.states.size() - 1);
  const double a = model.alpha;
  for (std::size_t i = 0; i + 1 < ref.states.size(); ++i) {
    const QuadState& cur = ref.states[i];
    const QuadState& nxt = ref.states[i + 1];
    ControlInput u;
    u.vz = (nxt.p.z() - cur.p.z()) / model.ts;
    u.roll_cmd = (nxt.roll - a * cur.roll) / (1.0 - a);
    u.pitch_cmd = (nxt.pitch - a * cur.pitch) / (1.0 - a);
    u.yaw_rate_cmd = wrap_angle(nxt.yaw - cur.yaw) / model.ts;
    ref.inputs[i] = model.input_limits.clip(u);
  }
  return ref;
}

ControlInput apf_step(const QuadState& state, const World& world, double t,
                      const ApfParams& params) {
  const Setpoint sp = setpoint(world, t);

  Vec3 grad = 2.0 * params.attraction * (state.p - sp.point);
  for (const Obstacle& ob : world.obstacles) {
    const double d = std::max(ob.signed_distance(state.p), 0.05);
    if (d >= params.influence) continue;
    const double coef = -2.0 * params.repulsion *
                        (1.0 / d - 1.0 / params.influence) / (d * d);
    grad += coef * ob.signed_distance_gradient(state.p);
  }

  const double norm = grad.norm();
  if (norm < 1e-9) return ControlInput{};

  const Vec3 v_des = -params.reference_speed * grad / norm;
  const Vec2 accel =
      params.velocity_gain * (v_des.head<2>() - Vec2(state.v.x(), state.v.y()));
  const double c = std::cos(state.yaw);
  const double s = std::sin(state.yaw);
  const Vec2 body(c * accel.x() + s * accel.y(),
                  -s * accel.x() + c * accel.y());

  ControlInput u;
  u.vz = v_des.z();
  u.roll_cmd = std::atan(-body.x() / 9.81);
  u.pitch_cmd = std::atan(body.y() / 9.81);
  return u;  // clipped by the plant; yaw handled by the harness
}

// --- Controllers -------------------------------------------------------

MpccPathController::MpccPathController(SplinePath path, MpccWeights weights,
                                       ModelParams model,
                                       std::optional<AvoidanceCost> avoid)
    : path_(std::move(path)),
      weights_(weights),
      model_(model),
      avoid_(std::move(avoid)) {}

ControlInput MpccPathController::act(const QuadState& state,
                                     const World& world, double t,
                                     const Observation& obs) {
  (void)world;
  (void)t;
  (void)obs;
  std::optional<double> hint;
  if (has_last_) hint = last_.nu[1];
  nu_ = path_.closest_point(state.p, hint).nu;
  last_ = mpcc_solve(state, nu_, path_, weights_, model_,
                     has_last_ ? &last_ : nullptr,
                     avoid_.has_value() ? &*avoid_ : nullptr);
  has_last_ = true;
  diags_.push_back(SolveDiagnostics{step_++, last_.cost, last_.iterations,
                                    last_.solve_time, last_.kkt_residual});
  return last_.first_input();
}

OnPolicyMpccController::OnPolicyMpccController(SplinePath path,
                                               MpccWeights weights,
                                               ModelParams model,
                                               const MlpPolicy* policy)
    : path_(std::move(path)),
      weights_(weights),
      model_(model),
      policy_(policy) {}

ControlInput OnPolicyMpccController::act(const QuadState& state,
                                         const World& world, double t,
                                         const Observation& obs) {
  (void)obs;
  std::optional<double> hint;
  if (has_last_) hint = last_.nu[1];
  nu_ = path_.closest_point(state.p, hint).nu;
  World timed = world;
  timed.time = t;
  last_ = onpolicy_mpcc_solve(state, nu_, path_, weights_, model_, *policy_,
                              timed, has_last_ ? &last_ : nullptr, vz_est_);
  has_last_ = true;
  diags_.push_back(SolveDiagnostics{step_++, last_.cost, last_.iterations,
                                    last_.solve_time, last_.kkt_residual});
  const ControlInput u = last_.first_input();
  vz_est_ = clamp(u.vz, -model_.input_limits.vz_max, model_.input_limits.vz_max);
  return u;
}

MpcTrackController::MpcTrackController(TimedReference reference,
                                       MpccWeights weights, ModelParams model,
                                       const MlpPolicy* policy,
                                       double follow_weight)
    : reference_(std::move(reference)),
      weights_(weights),
      model_(model),
      policy_(policy),
      follow_weight_(follow_weight) {}

ControlInput MpcTrackController::act(const QuadState& state,
                                     const World& world, double t,
                                     const Observation& obs) {
  (void)obs;
  const int index = static_cast<int>(std::lround(t / reference_.ts));
  World timed = world;
  timed.time = t;
  last_ = mpc_track_solve(state, reference_, index, weights_, model_, policy_,
                          follow_weight_, &timed,
                          has_last_ ? &last_ : nullptr, vz_est_);
  has_last_ = true;
  diags_.push_back(SolveDiagnostics{step_++, last_.cost, last_.iterations,
                                    last_.solve_time, last_.kkt_residual});
  const ControlInput u = last_.first_input();
  vz_est_ = clamp(u.vz, -model_.input_limits.vz_max, model_.input_limits.vz_max);
  return u;
}

ControlInput PolicyController::act(const QuadState& state, const World& world,
                                   double t, const Observation& obs) {
  (void)state;
  (void)world;
  (void)t;
  const VecX features = obs.to_vector().head(policy_->input_dim());
  const VecX out = policy_->forward(features);
  ControlInput u;
  u.vz = out[0];
  u.roll_cmd = out[1];
  u.pitch_cmd = out[2];
  return u;
}

ControlInput ApfController::act(const QuadState& state, const World& world,
                                double t, const Observation& obs) {
  (void)obs;
  return apf_step(state, world, t, params_);
}

}  // namespace mpcc_il
