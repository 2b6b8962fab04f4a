#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "neurodream/adam.hpp"
#include "neurodream/matrix.hpp"
#include "neurodream/pong.hpp"
#include "neurodream/seeds.hpp"
#include "neurodream/substrate.hpp"

namespace neurodream::policy {

using Probabilities = std::array<double, pong::kNumActions>;

// Per-neuron activity fed to the readouts. With alpha = 0 this is the raw
// window spike count; otherwise sbar <- alpha * sbar + (1 - alpha) * counts.
class ActivityFilter {
 public:
  explicit ActivityFilter(std::size_t n_neurons, double alpha = 0.0);

  std::span<const double> update(const substrate::SpikeCounts& counts);
  void reset();

  std::span<const double> values() const { return sbar_; }
  double alpha() const { return alpha_; }

 private:
  double alpha_;
  std::vector<double> sbar_;
};

// Softmax readout R^pi (3 x n) with its optimizer.
struct PolicyReadout {
  Matrix weights;
  Adam optimizer;
};

PolicyReadout init_policy(std::uint64_t seed, std::size_t n_neurons, double learning_rate,
                          double init_std = 0.1, AdamConfig adam = {});

// Logits y_k = sum_i R_ki sbar_i. Throws NumericalError on non-finite input.
Probabilities logits(std::span<const double> sbar, const PolicyReadout& readout);

// Max-subtracted softmax.
Probabilities softmax(const Probabilities& y);

Probabilities policy_forward(std::span<const double> sbar, const PolicyReadout& readout);

pong::Action sample_action(const Probabilities& pi, Rng& rng);

// Shannon entropy in nats, with 0 ln 0 = 0.
double entropy(const Probabilities& pi);

// Online form of the discounted policy-gradient sum:
//   e     <- gamma * e + (pi - onehot(a)) sbar^T
//   delta <- delta + r * e
// After a game, `delta` is the gradient of -sum_t R_t ln pi_t(a_t) with
// R_t the discounted return from frame t.
class EligibilityAccumulator {
 public:
  EligibilityAccumulator(std::size_t n_neurons, double gamma);

  void accumulate(std::span<const double> sbar, const Probabilities& pi, pong::Action action,
                  double reward);
  void reset();

  const Matrix& trace() const { return trace_; }
  const Matrix& delta() const { return delta_; }
  double gamma() const { return gamma_; }
  int frames() const { return frames_; }

 private:
  double gamma_;
  Matrix trace_;
  Matrix delta_;
  int frames_ = 0;
};

// Adam step on the accumulated gradient, then resets the accumulator. A
// gradient that is identically zero leaves the readout and optimizer state
// untouched. Throws NumericalError on a non-finite gradient.
void apply_policy_update(PolicyReadout& readout, EligibilityAccumulator& acc);

struct FrameRecord {
  std::vector<double> sbar;
  Probabilities pi{};
  pong::Action action = pong::Action::kStay;
  double reward = 0.0;
  friend bool operator==(const FrameRecord&, const FrameRecord&) = default;
};

struct EpisodeTrace {
  std::vector<FrameRecord> frames;
  friend bool operator==(const EpisodeTrace&, const EpisodeTrace&) = default;
};

}  // namespace neurodream::policy
