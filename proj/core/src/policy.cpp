#include "neurodream/policy.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "neurodream/errors.hpp"

namespace neurodream::policy {

ActivityFilter::ActivityFilter(std::size_t n_neurons, double alpha)
    : alpha_(alpha), sbar_(n_neurons, 0.0) {
  if (!(alpha >= 0.0 && alpha < 1.0)) throw ConfigError("filter alpha must be in [0,1)");
}

std::span<const double> ActivityFilter::update(const substrate::SpikeCounts& counts) {
  if (counts.counts.size() != sbar_.size()) {
    throw ConfigError("activity filter: count vector has the wrong length");
  }
  if (alpha_ == 0.0) {
    std::copy(counts.counts.begin(), counts.counts.end(), sbar_.begin());
  } else {
    for (std::size_t k = 0; k < sbar_.size(); ++k) {
      sbar_[k] = alpha_ * sbar_[k] + (1.0 - alpha_) * counts.counts[k];
    }
  }
  return sbar_;
}

void ActivityFilter::reset() { std::fill(sbar_.begin(), sbar_.end(), 0.0); }

PolicyReadout init_policy(std::uint64_t seed, std::size_t n_neurons, double learning_rate,
                          double init_std, AdamConfig adam) {
  PolicyReadout r{Matrix(pong::kNumActions, n_neurons),
                  Adam(pong::kNumActions * n_neurons, learning_rate, adam)};
  Rng rng(seed);
  std::normal_distribution<double> normal(0.0, init_std);
  for (auto& w : r.weights.flat()) w = normal(rng);
  return r;
}

Probabilities logits(std::span<const double> sbar, const PolicyReadout& readout) {
  if (sbar.size() != readout.weights.cols()) {
    throw ConfigError("policy: activity length does not match readout");
  }
  Probabilities y{};
  for (int k = 0; k < pong::kNumActions; ++k) {
    const auto w = readout.weights.row(k);
    double acc = 0.0;
    for (std::size_t i = 0; i < sbar.size(); ++i) acc += w[i] * sbar[i];
    y[k] = acc;
  }
  for (double v : y) {
    if (!std::isfinite(v)) throw NumericalError("policy: non-finite logit");
  }
  return y;
}

Probabilities softmax(const Probabilities& y) {
  const double top = *std::max_element(y.begin(), y.end());
  Probabilities p{};
  double sum = 0.0;
  for (std::size_t k = 0; k < y.size(); ++k) {
    p[k] = std::exp(y[k] - top);
    sum += p[k];
  }
  for (double& v : p) v /= sum;
  return p;
}

Probabilities policy_forward(std::span<const double> sbar, const PolicyReadout& readout) {
  return softmax(logits(sbar, readout));
}

pong::Action sample_action(const Probabilities& pi, Rng& rng) {
  const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  double cumulative = 0.0;
  for (int k = 0; k < pong::kNumActions - 1; ++k) {
    cumulative += pi[k];
    if (u < cumulative) return pong::action_from_index(k);
  }
  // Last action absorbs rounding, unless it has no mass at all.
  for (int k = pong::kNumActions - 1; k >= 0; --k) {
    if (pi[k] > 0.0) return pong::action_from_index(k);
  }
  return pong::Action::kStay;
}

double entropy(const Probabilities& pi) {
  double h = 0.0;
  for (double p : pi) {
    if (p > 0.0) h -= p * std::log(p);
  }
  return h;
}

EligibilityAccumulator::EligibilityAccumulator(std::size_t n_neurons, double gamma)
    : gamma_(gamma),
      trace_(pong::kNumActions, n_neurons),
      delta_(pong::kNumActions, n_neurons) {
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw ConfigError("policy: gamma must be in [0,1]");
}

void EligibilityAccumulator::accumulate(std::span<const double> sbar, const Probabilities& pi,
                                        pong::Action action, double reward) {
  if (sbar.size() != trace_.cols()) {
    throw ConfigError("policy: activity length does not match accumulator");
  }
  const int a = pong::action_index(action);
  for (int k = 0; k < pong::kNumActions; ++k) {
    const double score = pi[k] - (k == a ? 1.0 : 0.0);
    auto e = trace_.row(k);
    auto d = delta_.row(k);
    for (std::size_t i = 0; i < sbar.size(); ++i) {
      e[i] = gamma_ * e[i] + score * sbar[i];
      d[i] += reward * e[i];
    }
  }
  ++frames_;
}

void EligibilityAccumulator::reset() {
  trace_.fill(0.0);
  delta_.fill(0.0);
  frames_ = 0;
}

void apply_policy_update(PolicyReadout& readout, EligibilityAccumulator& acc) {
  const auto grad = acc.delta().flat();
  if (!acc.delta().all_finite()) {
    throw NumericalError("policy: non-finite gradient after " +
                         std::to_string(acc.frames()) + " frames");
  }
  const bool any = std::any_of(grad.begin(), grad.end(), [](double g) { return g != 0.0; });
  if (any) readout.optimizer.step(readout.weights.flat(), grad);
  acc.reset();
}

}  // namespace neurodream::policy
