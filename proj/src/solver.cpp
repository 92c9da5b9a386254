#include "mpcc_il/solver.hpp"

#include <Eigen/Cholesky>
#include <chrono>
#include <cmath>

namespace mpcc_il {

namespace {

double qp_value(const MatX& H, const VecX& g, const VecX& x) {
  return 0.5 * x.dot(H * x) + g.dot(x);
}

struct Rollout {
  std::vector<VecX> states;  // N+1
  double cost = 0.0;
};

Rollout roll(const TransitionModel& model, const StageCost& cost,
             const VecX& y0, const std::vector<VecX>& inputs) {
  const int n = static_cast<int>(inputs.size());
  Rollout out;
  out.states.resize(n + 1);
  out.states[0] = y0;
  VecX r;
  for (int k = 0; k < n; ++k) {
    cost.residuals(k, out.states[k], &inputs[k], r, nullptr, nullptr);
    out.cost += r.squaredNorm() + cost.extra_cost(k, &inputs[k], nullptr);
    out.states[k + 1] = model.next(out.states[k], inputs[k]);
  }
  cost.residuals(n, out.states[n], nullptr, r, nullptr, nullptr);
  out.cost += r.squaredNorm() + cost.extra_cost(n, nullptr, nullptr);
  return out;
}

}  // namespace

VecX box_qp(const MatX& H, const VecX& g, const VecX& lb, const VecX& ub,
            const VecX& x0, int max_iters, double grad_tol) {
  const int n = static_cast<int>(g.size());
  VecX x = x0.cwiseMax(lb).cwiseMin(ub);
  const double eps = 1e-10;

  for (int it = 0; it < max_iters; ++it) {
    const VecX grad = H * x + g;

    std::vector<int> free_idx;
    free_idx.reserve(n);
    for (int i = 0; i < n; ++i) {
      const bool at_lower = x[i] <= lb[i] + eps && grad[i] > 0.0;
      const bool at_upper = x[i] >= ub[i] - eps && grad[i] < 0.0;
      if (!at_lower && !at_upper) free_idx.push_back(i);
    }
    if (free_idx.empty()) break;

    double gnorm = 0.0;
    for (int i : free_idx) gnorm = std::max(gnorm, std::abs(grad[i]));
    if (gnorm < grad_tol) break;

    const int nf = static_cast<int>(free_idx.size());
    MatX Hff(nf, nf);
    VecX rhs(nf);
    for (int a = 0; a < nf; ++a) {
      rhs[a] = grad[free_idx[a]];
      for (int b = 0; b < nf; ++b) Hff(a, b) = H(free_idx[a], free_idx[b]);
    }
    Eigen::LLT<MatX> llt(Hff);
    VecX step_f;
    if (llt.info() == Eigen::Success) {
      step_f = -llt.solve(rhs);
    } else {
      step_f = -rhs;  // gradient fallback; H is regularized upstream
    }

    VecX dir = VecX::Zero(n);
    for (int a = 0; a < nf; ++a) dir[free_idx[a]] = step_f[a];

    const double expected = rhs.dot(step_f);
    const double base = qp_value(H, g, x);
    double t = 1.0;
    VecX cand;
    bool accepted = false;
    for (int ls = 0; ls < 24; ++ls) {
      cand = (x + t * dir).cwiseMax(lb).cwiseMin(ub);
      if (qp_value(H, g, cand) <= base + 0.1 * t * expected) {
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    if (!accepted) break;
    if ((cand - x).lpNorm<Eigen::Infinity>() < 1e-14) {
      x = cand;
      break;
    }
    x = cand;
  }
  return x;
}

double SqpSolver::evaluate(const TransitionModel& model, const StageCost& cost,
                           const VecX& y0,
                           const std::vector<VecX>& inputs) {
  return roll(model, cost, y0, inputs).cost;
}

VecX SqpSolver::gradient(const TransitionModel& model, const StageCost& cost,
                         const VecX& y0, const std::vector<VecX>& inputs) {
  const int n = static_cast<int>(inputs.size());
  const int nx = model.state_dim();
  const int nw = model.input_dim();
  const int nvar = n * nw;

  std::vector<VecX> states(n + 1);
  states[0] = y0;
  for (int k = 0; k < n; ++k) states[k + 1] = model.next(states[k], inputs[k]);

  // Forward sensitivities Phi_k = d y_k / d w, lower block-triangular.
  MatX phi = MatX::Zero(nx, nvar);
  VecX grad = VecX::Zero(nvar);
  MatX A(nx, nx), B(nx, nw);
  VecX r;
  MatX Jy, Jw;
  VecX extra_grad(nw);

  for (int k = 0; k <= n; ++k) {
    const VecX* w = k < n ? &inputs[k] : nullptr;
    cost.residuals(k, states[k], w, r, &Jy, &Jw);
    if (r.size() > 0) {
      grad.noalias() += 2.0 * phi.transpose() * (Jy.transpose() * r);
      if (w != nullptr && Jw.size() > 0) {
        grad.segment(k * nw, nw).noalias() += 2.0 * Jw.transpose() * r;
      }
    }
    extra_grad.setZero();
    cost.extra_cost(k, w, w != nullptr ? &extra_grad : nullptr);
    if (w != nullptr) grad.segment(k * nw, nw) += extra_grad;

    if (k < n) {
      model.jacobians(states[k], inputs[k], A, B);
      phi = A * phi;
      phi.block(0, k * nw, nx, nw) += B;
    }
  }
  return grad;
}

OcpSolution SqpSolver::solve(const TransitionModel& model,
                             const StageCost& cost, const VecX& y0,
                             int horizon,
                             const std::vector<VecX>& warm_inputs,
                             const VecX& w_lb, const VecX& w_ub) const {
  const auto t_start = std::chrono::steady_clock::now();
  const int n = horizon;
  const int nx = model.state_dim();
  const int nw = model.input_dim();
  const int nvar = n * nw;

  std::vector<VecX> inputs(n);
  for (int k = 0; k < n; ++k) {
    VecX w = k < static_cast<int>(warm_inputs.size()) ? warm_inputs[k]
                                                      : VecX::Zero(nw);
    inputs[k] = w.cwiseMax(w_lb).cwiseMin(w_ub);
  }

  Rollout current = roll(model, cost, y0, inputs);
  double reg = options_.reg_init;
  double kkt = std::numeric_limits<double>::infinity();
  bool converged = false;
  int iters = 0;

  VecX r;
  MatX Jy, Jw;
  VecX extra_grad(nw);

  for (; iters < options_.max_iters; ++iters) {
    // Build the stacked residual Jacobian through the rollout chain.
    MatX phi = MatX::Zero(nx, nvar);
    MatX A(nx, nx), B(nx, nw);
    MatX JtJ = MatX::Zero(nvar, nvar);
    VecX grad = VecX::Zero(nvar);

    for (int k = 0; k <= n; ++k) {
      const VecX* w = k < n ? &inputs[k] : nullptr;
      cost.residuals(k, current.states[k], w, r, &Jy, &Jw);
      if (r.size() > 0) {
        MatX Jrow = Jy * phi;  // m x nvar
        if (w != nullptr && Jw.size() > 0) {
          Jrow.block(0, k * nw, r.size(), nw) += Jw;
        }
        JtJ.noalias() += 2.0 * Jrow.transpose() * Jrow;
        grad.noalias() += 2.0 * Jrow.transpose() * r;
      }
      extra_grad.setZero();
      cost.extra_cost(k, w, w != nullptr ? &extra_grad : nullptr);
      if (w != nullptr) grad.segment(k * nw, nw) += extra_grad;

      if (k < n) {
        model.jacobians(current.states[k], inputs[k], A, B);
        phi = A * phi;
        phi.block(0, k * nw, nx, nw) += B;
      }
    }

    // Projected-gradient stationarity over the box.
    kkt = 0.0;
    for (int k = 0; k < n; ++k) {
      for (int i = 0; i < nw; ++i) {
        const double g = grad[k * nw + i];
        const double xi = inputs[k][i];
        double viol = g;
        if (xi <= w_lb[i] + 1e-10) viol = std::min(g, 0.0);
        if (xi >= w_ub[i] - 1e-10) viol = std::max(g, 0.0);
        kkt = std::max(kkt, std::abs(viol));
      }
    }
    if (kkt <= options_.stationarity_tol) {
      converged = true;
      break;
    }

    // Box QP on the Gauss-Newton model around the current iterate.
    bool stepped = false;
    while (reg <= options_.reg_max) {
      MatX H = JtJ;
      H.diagonal().array() += reg;

      VecX lb(nvar), ub(nvar), flat(nvar);
      for (int k = 0; k < n; ++k) {
        lb.segment(k * nw, nw) = w_lb - inputs[k];
        ub.segment(k * nw, nw) = w_ub - inputs[k];
        flat.segment(k * nw, nw) = inputs[k];
      }
      const VecX delta = box_qp(H, grad, lb, ub, VecX::Zero(nvar));
      const double model_decrease = grad.dot(delta);
      if (delta.lpNorm<Eigen::Infinity>() < 1e-14 || model_decrease > 0.0) {
        reg *= 10.0;
        continue;
      }

      double t = 1.0;
      bool accepted = false;
      std::vector<VecX> cand(n);
      for (int ls = 0; ls < options_.line_search_max; ++ls) {
        for (int k = 0; k < n; ++k) {
          cand[k] = (inputs[k] + t * delta.segment(k * nw, nw))
                        .cwiseMax(w_lb)
                        .cwiseMin(w_ub);
        }
        const Rollout trial = roll(model, cost, y0, cand);
        if (trial.cost <= current.cost + options_.armijo * t * model_decrease) {
          inputs = cand;
          current = trial;
          accepted = true;
          break;
        }
        t *= 0.5;
      }
      if (accepted) {
        stepped = true;
        if (t >= 1.0) reg = std::max(reg * 0.2, options_.reg_init);
        else if (t < 0.25) reg *= 2.0;
        break;
      }
      reg *= 10.0;
    }
    if (!stepped) break;  // regularization exhausted; report best iterate
  }

  OcpSolution sol;
  sol.states = current.states;
  sol.inputs = inputs;
  sol.cost = current.cost;
  sol.kkt_residual = kkt;
  sol.iterations = iters;
  sol.converged = converged;
  sol.solve_time =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start)
          .count();
  return sol;
}

}  // namespace mpcc_il
