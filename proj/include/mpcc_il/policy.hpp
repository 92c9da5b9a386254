#pragma once

#include <string>
#include <vector>

#include "mpcc_il/common.hpp"

namespace mpcc_il {

struct TrainConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  int batch_size = 64;
  int epochs = 200;
  std::uint64_t seed = 0;

  void validate() const;
};

struct TrainReport {
  double initial_loss = 0.0;
  double final_loss = 0.0;
  int steps = 0;
};

// Fully connected softplus network with a linear output layer. Inputs are
// standardized with per-feature statistics fit once and then frozen.
class MlpPolicy {
 public:
  MlpPolicy() = default;

  // Weights ~ Normal(0, init_std^2), biases zero, identity normalization.
  static MlpPolicy init(std::uint64_t seed,
                        const std::vector<int>& layer_sizes = {45, 30, 30, 3},
                        double init_std = 0.01);

  int input_dim() const { return layers_.empty() ? 0 : (int)layers_[0].W.cols(); }
  int output_dim() const { return layers_.empty() ? 0 : (int)layers_.back().W.rows(); }

  // Throws PolicyOutputError when the output is non-finite and
  // InvalidInputError on dimension mismatch or non-finite input.
  VecX forward(const VecX& obs) const;

  // Per-feature standardization from a sample of observations; first call
  // wins, later calls are ignored (statistics stay frozen).
  void fit_normalization(const std::vector<VecX>& observations);
  bool normalization_fitted() const { return norm_fitted_; }
  const VecX& norm_mean() const { return norm_mean_; }
  const VecX& norm_scale() const { return norm_scale_; }

  // Mean over rows of |pi(o_j) - u_j|^2.
  double mse_loss(const MatX& obs, const MatX& targets) const;

  // Adam on the MSE loss, warm-started from the current weights.
  TrainReport train(const MatX& obs, const MatX& targets,
                    const TrainConfig& config);

  // Loss and parameter gradient on a batch (exposed for gradient checks).
  double loss_and_gradient(const MatX& obs, const MatX& targets,
                           std::vector<MatX>& grad_w,
                           std::vector<VecX>& grad_b) const;

  // Plain-text checkpoint with hex floats; round trips bit-exactly.
  void save(const std::string& path) const;
  static MlpPolicy load(const std::string& path);

  std::vector<int> layer_sizes() const;

  struct Layer {
    MatX W;
    VecX b;
  };
  const std::vector<Layer>& layers() const { return layers_; }
  std::vector<Layer>& mutable_layers() { return layers_; }

 private:
  VecX normalize(const VecX& obs) const;

  std::vector<Layer> layers_;
  VecX norm_mean_;
  VecX norm_scale_;
  bool norm_fitted_ = false;
};

inline double softplus(double x) {
  return x > 30.0 ? x : std::log1p(std::exp(x));
}
inline double softplus_derivative(double x) {
  return 1.0 / (1.0 + std::exp(-x));
}

}  // namespace mpcc_il
