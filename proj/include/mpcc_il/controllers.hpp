#pragma once

#include <memory>
#include <optional>
#include <vector>

#include "mpcc_il/policy.hpp"
#include "mpcc_il/solver.hpp"
#include "mpcc_il/world.hpp"

namespace mpcc_il {

struct MpccWeights {
  double contour = 25.0;        // off-policy default; on-policy runs lower
  double lag = 100.0;
  double progress = 1.0;
  Vec4 input_penalty = Vec4::Constant(0.1);  // diagonal R
  double follow = 1.0;          // policy-following weight (on-policy)
  int horizon = 20;
  double nu_dot_max = 2.0;      // progress rate bound [m/s]
  double path_end_weight = 1e4; // soft penalty holding nu <= path length
  Eigen::Matrix<double, 8, 1> track_q =
      (Eigen::Matrix<double, 8, 1>() << 1, 1, 1, 1, 1, 0, 0, 0).finished();
  SolverOptions solver;

  void validate() const;
};

// Soft collision cost: weight * max(0, onset - distance)^2 per obstacle.
struct AvoidanceCost {
  std::vector<Obstacle> obstacles;
  double onset = 3.0;   // [m]
  double weight = 10.0;
};

struct MpccSolution {
  std::vector<QuadState> states;   // N+1
  std::vector<ControlInput> inputs;  // N
  VecX nu;                         // N+1
  VecX nu_dot;                     // N
  double cost = 0.0;
  double kkt_residual = 0.0;
  int iterations = 0;
  bool converged = false;
  double solve_time = 0.0;  // [s]

  ControlInput first_input() const { return inputs.at(0); }
};

// Path-following solve. The previous solution, when supplied, warm starts
// the solver shifted by one stage.
MpccSolution mpcc_solve(const QuadState& state, double nu0,
                        const SplinePath& path, const MpccWeights& weights,
                        const ModelParams& model,
                        const MpccSolution* warm = nullptr,
                        const AvoidanceCost* avoid = nullptr);

// Policy states over the horizon, produced by rolling the policy out through
// the model with observations computed at the predicted states. The yaw
// channel follows the same heading PD used at deployment.
std::vector<QuadState> rollout_policy(const MlpPolicy& policy,
                                      const QuadState& state,
                                      const World& world, double t0,
                                      const ModelParams& model, int horizon,
                                      double vz_est = 0.0,
                                      const YawGains& gains = {});

// Path-following solve with the policy-following cost added; reduces to
// mpcc_solve when weights.follow == 0.
MpccSolution onpolicy_mpcc_solve(const QuadState& state, double nu0,
                                 const SplinePath& path,
                                 const MpccWeights& weights,
                                 const ModelParams& model,
                                 const MlpPolicy& policy, const World& world,
                                 const MpccSolution* warm = nullptr,
                                 double vz_est = 0.0);

// Time-parametrized reference for the tracking baseline.
struct TimedReference {
  std::vector<QuadState> states;
  std::vector<ControlInput> inputs;  // states.size() - 1 entries
  double ts = 0.1;

  const QuadState& at_or_last(int index) const {
    if (states.empty()) throw InvalidInputError("empty reference");
    const int i = std::clamp(index, 0, static_cast<int>(states.size()) - 1);
    return states[static_cast<std::size_t>(i)];
  }
};

// Trajectory-tracking solve: sum |x_k - xref_k|^2_Q + u'Ru, optionally with
// the policy-following term. `start_index` aligns the reference with the
// current time step.
MpccSolution mpc_track_solve(const QuadState& state,
                             const TimedReference& reference, int start_index,
                             const MpccWeights& weights,
                             const ModelParams& model,
                             const MlpPolicy* policy = nullptr,
                             double follow_weight = 0.0,
                             const World* world = nullptr,
                             const MpccSolution* warm = nullptr,
                             double vz_est = 0.0);

// Full-path optimization with avoidance, re-timed at constant speed; the
// reference the MPC baseline tracks.
TimedReference offline_traj_opt(const SplinePath& path,
                                const std::vector<Obstacle>& obstacles,
                                double speed, const ModelParams& model,
                                const MpccWeights& weights,
                                bool* converged = nullptr);

struct ApfParams {
  double attraction = 1.0;
  double repulsion = 1.0;
  double influence = 1.5;       // [m]
  double reference_speed = 1.3; // [m/s]
  double velocity_gain = 3.0;   // maps velocity error to attitude commands
};

// Gradient-following baseline: constant-speed reference along the negated
// potential gradient, mapped to inputs by a proportional velocity law.
ControlInput apf_step(const QuadState& state, const World& world, double t,
                      const ApfParams& params);

// --- Episode-facing controller interface ------------------------------

struct SolveDiagnostics {
  int step = 0;
  double cost = 0.0;
  int iterations = 0;
  double solve_time = 0.0;
  double kkt_residual = 0.0;
};

class Controller {
 public:
  virtual ~Controller() = default;
  // The yaw-rate channel of the returned input is replaced by the harness.
  virtual ControlInput act(const QuadState& state, const World& world,
                           double t, const Observation& obs) = 0;
  virtual const char* name() const = 0;
  virtual const std::vector<SolveDiagnostics>& diagnostics() const {
    static const std::vector<SolveDiagnostics> kEmpty;
    return kEmpty;
  }
};

// MPCC following a fixed path (an example path or the guidance itself),
// with warm starts chained across steps.
class MpccPathController : public Controller {
 public:
  MpccPathController(SplinePath path, MpccWeights weights, ModelParams model,
                     std::optional<AvoidanceCost> avoid = std::nullopt);

  ControlInput act(const QuadState& state, const World& world, double t,
                   const Observation& obs) override;
  const char* name() const override { return "mpcc"; }
  const std::vector<SolveDiagnostics>& diagnostics() const override {
    return diags_;
  }

  const MpccSolution& last_solution() const { return last_; }
  double current_nu() const { return nu_; }

 private:
  SplinePath path_;
  MpccWeights weights_;
  ModelParams model_;
  std::optional<AvoidanceCost> avoid_;
  MpccSolution last_;
  bool has_last_ = false;
  double nu_ = 0.0;
  int step_ = 0;
  std::vector<SolveDiagnostics> diags_;
};

// Exploration controller: on-policy MPCC around an example path.
class OnPolicyMpccController : public Controller {
 public:
  OnPolicyMpccController(SplinePath path, MpccWeights weights,
                         ModelParams model, const MlpPolicy* policy);

  ControlInput act(const QuadState& state, const World& world, double t,
                   const Observation& obs) override;
  const char* name() const override { return "onpolicy-mpcc"; }
  const std::vector<SolveDiagnostics>& diagnostics() const override {
    return diags_;
  }

 private:
  SplinePath path_;
  MpccWeights weights_;
  ModelParams model_;
  const MlpPolicy* policy_;
  MpccSolution last_;
  bool has_last_ = false;
  double nu_ = 0.0;
  double vz_est_ = 0.0;
  int step_ = 0;
  std::vector<SolveDiagnostics> diags_;
};

// Trajectory-tracking MPC, optionally blended with the policy for the
// baseline exploration variant.
class MpcTrackController : public Controller {
 public:
  MpcTrackController(TimedReference reference, MpccWeights weights,
                     ModelParams model, const MlpPolicy* policy = nullptr,
                     double follow_weight = 0.0);

  ControlInput act(const QuadState& state, const World& world, double t,
                   const Observation& obs) override;
  const char* name() const override { return "mpc"; }
  const std::vector<SolveDiagnostics>& diagnostics() const override {
    return diags_;
  }

 private:
  TimedReference reference_;
  MpccWeights weights_;
  ModelParams model_;
  const MlpPolicy* policy_;
  double follow_weight_;
  MpccSolution last_;
  bool has_last_ = false;
  double vz_est_ = 0.0;
  int step_ = 0;
  std::vector<SolveDiagnostics> diags_;
};

// Learned policy, consuming a prefix of the observation vector when trained
// on reduced inputs.
class PolicyController : public Controller {
 public:
  explicit PolicyController(const MlpPolicy* policy) : policy_(policy) {}

  ControlInput act(const QuadState& state, const World& world, double t,
                   const Observation& obs) override;
  const char* name() const override { return "policy"; }

 private:
  const MlpPolicy* policy_;
};

class ApfController : public Controller {
 public:
  explicit ApfController(ApfParams params) : params_(params) {}

  ControlInput act(const QuadState& state, const World& world, double t,
                   const Observation& obs) override;
  const char* name() const override { return "apf"; }

 private:
  ApfParams params_;
};

}  // namespace mpcc_il
