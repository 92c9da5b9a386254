#include "mpcc_il/policy.hpp"

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace mpcc_il {

void TrainConfig::validate() const {
  if (!(learning_rate >= 0.0)) throw ConfigError("learning rate must be >= 0");
  if (!(beta1 > 0.0 && beta1 < 1.0) || !(beta2 > 0.0 && beta2 < 1.0)) {
    throw ConfigError("Adam decay rates must lie in (0, 1)");
  }
  if (batch_size < 1) throw ConfigError("batch size must be >= 1");
  if (epochs < 1) throw ConfigError("epochs must be >= 1");
}

MlpPolicy MlpPolicy::init(std::uint64_t seed,
                          const std::vector<int>& layer_sizes,
                          double init_std) {
  if (layer_sizes.size() < 2) {
    throw InvalidInputError("policy needs at least input and output layers");
  }
  Rng rng(mix_seed(seed, 0x706f6c69637900ULL));
  MlpPolicy p;
  p.layers_.resize(layer_sizes.size() - 1);
  for (std::size_t l = 0; l + 1 < layer_sizes.size(); ++l) {
    auto& layer = p.layers_[l];
    layer.W.resize(layer_sizes[l + 1], layer_sizes[l]);
    for (int r = 0; r < layer.W.rows(); ++r) {
      for (int c = 0; c < layer.W.cols(); ++c) {
        layer.W(r, c) = rng.normal(0.0, init_std);
      }
    }
    layer.b = VecX::Zero(layer_sizes[l + 1]);
  }
  p.norm_mean_ = VecX::Zero(layer_sizes[0]);
  p.norm_scale_ = VecX::Ones(layer_sizes[0]);
  return p;
}

std::vector<int> MlpPolicy::layer_sizes() const {
  std::vector<int> sizes;
  if (layers_.empty()) return sizes;
  sizes.push_back(static_cast<int>(layers_[0].W.cols()));
  for (const auto& l : layers_) sizes.push_back(static_cast<int>(l.W.rows()));
  return sizes;
}

VecX MlpPolicy::normalize(const VecX& obs) const {
  return (obs - norm_mean_).cwiseQuotient(norm_scale_);
}

VecX MlpPolicy::forward(const VecX& obs) const {
  if (obs.size() != input_dim()) {
    throw InvalidInputError("observation dimension mismatch");
  }
  if (!obs.allFinite()) throw InvalidInputError("non-finite observation");
  VecX a = normalize(obs);
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    a = layers_[l].W * a + layers_[l].b;
    if (l + 1 < layers_.size()) {
      for (int i = 0; i < a.size(); ++i) a[i] = softplus(a[i]);
    }
  }
  if (!a.allFinite()) throw PolicyOutputError("policy produced non-finite output");
  return a;
}

void MlpPolicy::fit_normalization(const std::vector<VecX>& observations) {
  if (norm_fitted_) return;
  if (observations.empty()) {
    throw InvalidInputError("cannot fit normalization on an empty set");
  }
  const int dim = input_dim();
  VecX mean = VecX::Zero(dim);
  for (const VecX& o : observations) {
    if (o.size() != dim) throw InvalidInputError("observation dim mismatch");
    mean += o;
  }
  mean /= static_cast<double>(observations.size());
  VecX var = VecX::Zero(dim);
  for (const VecX& o : observations) var += (o - mean).cwiseAbs2();
  var /= static_cast<double>(observations.size());
  norm_mean_ = mean;
  norm_scale_ = var.cwiseSqrt().cwiseMax(1e-6);
  norm_fitted_ = true;
}

double MlpPolicy::mse_loss(const MatX& obs, const MatX& targets) const {
  if (obs.rows() == 0) throw InvalidInputError("empty batch");
  if (obs.rows() != targets.rows()) throw InvalidInputError("batch mismatch");
  double total = 0.0;
  for (int i = 0; i < obs.rows(); ++i) {
    total += (forward(obs.row(i).transpose()) - targets.row(i).transpose())
                 .squaredNorm();
  }
  return total / static_cast<double>(obs.rows());
}

double MlpPolicy::loss_and_gradient(const MatX& obs, const MatX& targets,
                                    std::vector<MatX>& grad_w,
                                    std::vector<VecX>& grad_b) const {
  const int n = static_cast<int>(obs.rows());
  if (n == 0) throw InvalidInputError("empty batch");
  const std::size_t nl = layers_.size();
  grad_w.resize(nl);
  grad_b.resize(nl);
  for (std::size_t l = 0; l < nl; ++l) {
    grad_w[l] = MatX::Zero(layers_[l].W.rows(), layers_[l].W.cols());
    grad_b[l] = VecX::Zero(layers_[l].b.size());
  }

  double loss = 0.0;
  std::vector<VecX> acts(nl + 1);    // post-activation values
  std::vector<VecX> preacts(nl);     // pre-activation values
  for (int i = 0; i < n; ++i) {
    acts[0] = normalize(obs.row(i).transpose());
    for (std::size_t l = 0; l < nl; ++l) {
      preacts[l] = layers_[l].W * acts[l] + layers_[l].b;
      if (l + 1 < nl) {
        acts[l + 1] = preacts[l];
        for (int j = 0; j < acts[l + 1].size(); ++j) {
          acts[l + 1][j] = softplus(acts[l + 1][j]);
        }
      } else {
        acts[l + 1] = preacts[l];
      }
    }
    const VecX err = acts[nl] - targets.row(i).transpose();
    loss += err.squaredNorm();

    VecX delta = 2.0 * err;  // d loss_i / d preact_last
    for (std::size_t l = nl; l-- > 0;) {
      grad_w[l].noalias() += delta * acts[l].transpose();
      grad_b[l] += delta;
      if (l > 0) {
        delta = layers_[l].W.transpose() * delta;
        for (int j = 0; j < delta.size(); ++j) {
          delta[j] *= softplus_derivative(preacts[l - 1][j]);
        }
      }
    }
  }
  const double inv_n = 1.0 / static_cast<double>(n);
  for (std::size_t l = 0; l < nl; ++l) {
    grad_w[l] *= inv_n;
    grad_b[l] *= inv_n;
  }
  return loss * inv_n;
}

TrainReport MlpPolicy::train(const MatX& obs, const MatX& targets,
                             const TrainConfig& config) {
  config.validate();
  const int n = static_cast<int>(obs.rows());
  if (n == 0) throw InvalidInputError("cannot train on an empty dataset");

  TrainReport report;
  report.initial_loss = mse_loss(obs, targets);

  const std::size_t nl = layers_.size();
  std::vector<MatX> m_w(nl), v_w(nl), g_w;
  std::vector<VecX> m_b(nl), v_b(nl), g_b;
  for (std::size_t l = 0; l < nl; ++l) {
    m_w[l] = MatX::Zero(layers_[l].W.rows(), layers_[l].W.cols());
    v_w[l] = m_w[l];
    m_b[l] = VecX::Zero(layers_[l].b.size());
    v_b[l] = m_b[l];
  }

  Rng rng(mix_seed(config.seed, 0x747261696e00ULL));
  std::vector<int> order(n);
  for (int i = 0; i < n; ++i) order[i] = i;

  int t = 0;
  double last_loss = report.initial_loss;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    rng.shuffle(order);
    for (int start = 0; start < n; start += config.batch_size) {
      const int bs = std::min(config.batch_size, n - start);
      MatX bx(bs, obs.cols()), by(bs, targets.cols());
      for (int i = 0; i < bs; ++i) {
        bx.row(i) = obs.row(order[start + i]);
        by.row(i) = targets.row(order[start + i]);
      }
      last_loss = loss_and_gradient(bx, by, g_w, g_b);
      if (!std::isfinite(last_loss) || last_loss > 1e6) {
        throw TrainingDivergedError("training diverged at step " +
                                    std::to_string(t) +
                                    " loss=" + std::to_string(last_loss));
      }
      ++t;
      const double corr1 = 1.0 - std::pow(config.beta1, t);
      const double corr2 = 1.0 - std::pow(config.beta2, t);
      for (std::size_t l = 0; l < nl; ++l) {
        m_w[l] = config.beta1 * m_w[l] + (1.0 - config.beta1) * g_w[l];
        v_w[l] = config.beta2 * v_w[l] +
                 (1.0 - config.beta2) * g_w[l].cwiseAbs2().matrix();
        m_b[l] = config.beta1 * m_b[l] + (1.0 - config.beta1) * g_b[l];
        v_b[l] = config.beta2 * v_b[l] +
                 (1.0 - config.beta2) * g_b[l].cwiseAbs2().matrix();
        const MatX mw_hat = m_w[l] / corr1;
        const MatX vw_hat = v_w[l] / corr2;
        const VecX mb_hat = m_b[l] / corr1;
        const VecX vb_hat = v_b[l] / corr2;
        layers_[l].W -=
            config.learning_rate *
            (mw_hat.array() / (vw_hat.array().sqrt() + config.epsilon))
                .matrix();
        layers_[l].b -=
            config.learning_rate *
            (mb_hat.array() / (vb_hat.array().sqrt() + config.epsilon))
                .matrix();
      }
    }
  }
  report.final_loss = mse_loss(obs, targets);
  report.steps = t;
  return report;
}

namespace {

void write_vec(std::FILE* f, const VecX& v) {
  for (int i = 0; i < v.size(); ++i) std::fprintf(f, " %a", v[i]);
  std::fprintf(f, "\n");
}

}  // namespace

void MlpPolicy::save(const std::string& path) const {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (f == nullptr) throw Error("cannot open checkpoint for writing: " + path);
  std::fprintf(f, "mpcc_il_policy v1\n");
  const auto sizes = layer_sizes();
  std::fprintf(f, "layers %zu\n", sizes.size());
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    std::fprintf(f, "%s%d", i == 0 ? "" : " ", sizes[i]);
  }
  std::fprintf(f, "\n");
  std::fprintf(f, "normalized %d\n", norm_fitted_ ? 1 : 0);
  std::fprintf(f, "mean");
  write_vec(f, norm_mean_);
  std::fprintf(f, "scale");
  write_vec(f, norm_scale_);
  for (const auto& layer : layers_) {
    std::fprintf(f, "W %ld %ld\n", static_cast<long>(layer.W.rows()),
                 static_cast<long>(layer.W.cols()));
    for (int r = 0; r < layer.W.rows(); ++r) {
      for (int c = 0; c < layer.W.cols(); ++c) {
        std::fprintf(f, "%s%a", c == 0 ? "" : " ", layer.W(r, c));
      }
      std::fprintf(f, "\n");
    }
    std::fprintf(f, "b");
    write_vec(f, layer.b);
  }
  std::fclose(f);
}

MlpPolicy MlpPolicy::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open checkpoint: " + path);
  std::string magic, version;
  in >> magic >> version;
  if (magic != "mpcc_il_policy" || version != "v1") {
    throw Error("unrecognized checkpoint format: " + path);
  }
  std::string key;
  std::size_t n_sizes = 0;
  in >> key >> n_sizes;
  if (key != "layers" || n_sizes < 2) throw Error("corrupt checkpoint header");
  std::vector<int> sizes(n_sizes);
  for (auto& s : sizes) in >> s;

  MlpPolicy p;
  int normalized = 0;
  in >> key >> normalized;
  if (key != "normalized") throw Error("corrupt checkpoint");
  p.norm_fitted_ = normalized != 0;

  auto read_vec = [&in](VecX& v, int dim) {
    v.resize(dim);
    std::string tok;
    for (int i = 0; i < dim; ++i) {
      in >> tok;
      v[i] = std::strtod(tok.c_str(), nullptr);
    }
  };
  in >> key;
  read_vec(p.norm_mean_, sizes[0]);
  in >> key;
  read_vec(p.norm_scale_, sizes[0]);

  p.layers_.resize(n_sizes - 1);
  std::string tok;
  for (std::size_t l = 0; l + 1 < n_sizes; ++l) {
    long rows = 0, cols = 0;
    in >> key >> rows >> cols;
    if (key != "W" || rows != sizes[l + 1] || cols != sizes[l]) {
      throw Error("corrupt checkpoint layer " + std::to_string(l));
    }
    p.layers_[l].W.resize(rows, cols);
    for (long r = 0; r < rows; ++r) {
      for (long c = 0; c < cols; ++c) {
        in >> tok;
        p.layers_[l].W(r, c) = std::strtod(tok.c_str(), nullptr);
      }
    }
    in >> key;
    read_vec(p.layers_[l].b, static_cast<int>(rows));
  }
  if (!in) throw Error("truncated checkpoint: " + path);
  return p;
}

}  // namespace mpcc_il
