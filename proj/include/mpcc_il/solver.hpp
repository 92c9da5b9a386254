#pragma once

#include <vector>

#include "mpcc_il/common.hpp"

namespace mpcc_il {

// Box-constrained QP: minimize 0.5 x'Hx + g'x subject to lb <= x <= ub.
// Projected-Newton active-set iteration; H must be positive definite.
VecX box_qp(const MatX& H, const VecX& g, const VecX& lb, const VecX& ub,
            const VecX& x0, int max_iters = 100, double grad_tol = 1e-10);

// Discrete transition y+ = F(y, w) with Jacobians. States are eliminated by
// rollout, so the solver keeps the dynamics feasible at every iterate.
class TransitionModel {
 public:
  virtual ~TransitionModel() = default;
  virtual int state_dim() const = 0;
  virtual int input_dim() const = 0;
  virtual VecX next(const VecX& y, const VecX& w) const = 0;
  virtual void jacobians(const VecX& y, const VecX& w, MatX& A,
                         MatX& B) const = 0;
};

// Stage cost in least-squares form: sum_k |r_k|^2 + linear terms. Residuals
// exist for every stage k = 0..N; the input pointer is null at k = N.
class StageCost {
 public:
  virtual ~StageCost() = default;
  // Fills r and, when the Jacobian pointers are non-null, Jy (m x nx) and
  // Jw (m x nw). Residual size may vary per stage.
  virtual void residuals(int k, const VecX& y, const VecX* w, VecX& r,
                         MatX* Jy, MatX* Jw) const = 0;
  // Smooth non-residual cost terms (e.g. a linear progress reward); returns
  // the value and accumulates the input gradient when grad_w is non-null.
  virtual double extra_cost(int k, const VecX* w, VecX* grad_w) const {
    (void)k;
    (void)w;
    (void)grad_w;
    return 0.0;
  }
};

struct SolverOptions {
  int max_iters = 50;
  double stationarity_tol = 1e-6;
  double reg_init = 1e-6;
  double reg_max = 1e10;
  int line_search_max = 16;
  double armijo = 1e-4;
};

struct OcpSolution {
  std::vector<VecX> states;  // N+1 entries, dynamics-consistent
  std::vector<VecX> inputs;  // N entries
  double cost = 0.0;
  double kkt_residual = 0.0;
  int iterations = 0;
  bool converged = false;
  double solve_time = 0.0;  // [s]
};

// Gauss-Newton SQP over the input sequence with exact rollouts. Box bounds
// on the inputs are handled by the QP step; a Levenberg term keeps the
// Gauss-Newton Hessian positive definite.
class SqpSolver {
 public:
  explicit SqpSolver(SolverOptions options = {}) : options_(options) {}

  const SolverOptions& options() const { return options_; }

  OcpSolution solve(const TransitionModel& model, const StageCost& cost,
                    const VecX& y0, int horizon,
                    const std::vector<VecX>& warm_inputs, const VecX& w_lb,
                    const VecX& w_ub) const;

  // Total objective of an input sequence (states from rollout). Shared with
  // tests that cross-check against exhaustive search.
  static double evaluate(const TransitionModel& model, const StageCost& cost,
                         const VecX& y0, const std::vector<VecX>& inputs);

  // Exact gradient of `evaluate` with respect to the stacked inputs.
  static VecX gradient(const TransitionModel& model, const StageCost& cost,
                       const VecX& y0, const std::vector<VecX>& inputs);

 private:
  SolverOptions options_;
};

}  // namespace mpcc_il
