#pragma once

#include <array>
#include <span>
#include <vector>

#include "neurodream/encoding.hpp"
#include "neurodream/matrix.hpp"
#include "neurodream/policy.hpp"
#include "neurodream/pong.hpp"
#include "neurodream/substrate.hpp"

namespace neurodream::world_model {

// Linear state-change and reward readouts of the model network.
struct ModelReadout {
  Matrix state_weights;                // 4 x n
  std::vector<double> reward_weights;  // n
  double eta_state = 2e-3;
  double eta_reward = 4e-4;
  // Loss balancing coefficients. They scale the squared-error loss but are
  // folded into the learning rates, so the update rule never reads them.
  double c_state = 1.0;
  double c_reward = 1.0;
};

ModelReadout init_model(std::size_t n_neurons, double eta_state, double eta_reward);

struct ModelPrediction {
  std::array<double, pong::kNumStateVariables> delta_state{};
  double reward = 0.0;
};

ModelPrediction model_forward(std::span<const double> sbar, const ModelReadout& readout);

struct PredictionError {
  double state_sq = 0.0;   // sum over the 4 state outputs
  double reward_sq = 0.0;
};

// One plain gradient step moving the prediction toward the targets:
//   R^xi_k += eta_state  (target_k - pred_k) sbar
//   R^r    += eta_reward (target_r - pred_r) sbar
// Returns the squared errors before the step.
PredictionError model_update(ModelReadout& readout, std::span<const double> sbar,
                             const ModelPrediction& predicted,
                             const std::array<double, pong::kNumStateVariables>& target_delta,
                             double target_reward);

struct DreamOptions {
  bool clamp_reward = false;      // clamp dreamed reward to [-1, 1]
  bool absolute_targets = false;  // readout predicts the next state itself
};

struct DreamStep {
  pong::GameState next;
  double reward = 0.0;
  std::vector<double> sbar;  // model activity of this step
};

// Encodes (state, action), runs one model window, and applies the predicted
// change, clamping every variable to [0,1].
DreamStep dream_step(const pong::GameState& current, pong::Action action,
                     substrate::Substrate& model, policy::ActivityFilter& filter,
                     const ModelReadout& readout, const encoding::PopulationCodeConfig& enc,
                     Rng& rng, DreamOptions options = {});

}  // namespace neurodream::world_model
