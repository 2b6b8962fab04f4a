#include "neurodream/adam.hpp"

#include <cmath>

#include "neurodream/errors.hpp"

namespace neurodream {

Adam::Adam(std::size_t n_params, double learning_rate, AdamConfig cfg)
    : cfg_(cfg), learning_rate_(learning_rate), m_(n_params, 0.0), v_(n_params, 0.0) {
  if (!(learning_rate > 0.0)) throw ConfigError("adam: learning rate must be > 0");
  if (!(cfg.beta1 >= 0.0 && cfg.beta1 < 1.0) || !(cfg.beta2 >= 0.0 && cfg.beta2 < 1.0)) {
    throw ConfigError("adam: betas must be in [0,1)");
  }
  if (!(cfg.epsilon > 0.0)) throw ConfigError("adam: epsilon must be > 0");
}

void Adam::step(std::span<double> params, std::span<const double> gradient) {
  if (params.size() != m_.size() || gradient.size() != m_.size()) {
    throw ConfigError("adam: parameter/gradient size mismatch");
  }
  ++t_;
  const double bias1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
  const double bias2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
  for (std::size_t k = 0; k < params.size(); ++k) {
    const double g = gradient[k];
    m_[k] = cfg_.beta1 * m_[k] + (1.0 - cfg_.beta1) * g;
    v_[k] = cfg_.beta2 * v_[k] + (1.0 - cfg_.beta2) * g * g;
    const double m_hat = m_[k] / bias1;
    const double v_hat = v_[k] / bias2;
    params[k] -= learning_rate_ * m_hat / (std::sqrt(v_hat) + cfg_.epsilon);
  }
}

void Adam::restore(std::vector<double> m, std::vector<double> v, std::uint64_t t) {
  if (m.size() != m_.size() || v.size() != v_.size()) {
    throw ConfigError("adam: restored state has the wrong size");
  }
  m_ = std::move(m);
  v_ = std::move(v);
  t_ = t;
}

}  // namespace neurodream
