#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace neurodream {

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// Adaptive-moment optimizer over a flat parameter vector.
class Adam {
 public:
  Adam() = default;
  Adam(std::size_t n_params, double learning_rate, AdamConfig cfg = {});

  // params -= lr * m_hat / (sqrt(v_hat) + eps), with `gradient` the loss gradient.
  void step(std::span<double> params, std::span<const double> gradient);

  double learning_rate() const { return learning_rate_; }
  const AdamConfig& config() const { return cfg_; }
  std::uint64_t steps() const { return t_; }
  std::span<const double> first_moment() const { return m_; }
  std::span<const double> second_moment() const { return v_; }

  // Restores optimizer state from a checkpoint.
  void restore(std::vector<double> m, std::vector<double> v, std::uint64_t t);

 private:
  AdamConfig cfg_;
  double learning_rate_ = 0.0;
  std::vector<double> m_;
  std::vector<double> v_;
  std::uint64_t t_ = 0;
};

}  // namespace neurodream
