#include "neurodream/world_model.hpp"

#include <algorithm>
#include <cmath>

#include "neurodream/errors.hpp"

namespace neurodream::world_model {

ModelReadout init_model(std::size_t n_neurons, double eta_state, double eta_reward) {
  if (!(eta_state > 0.0) || !(eta_reward > 0.0)) {
    throw ConfigError("world model: learning rates must be > 0");
  }
  ModelReadout r;
  r.state_weights = Matrix(pong::kNumStateVariables, n_neurons, 0.0);
  r.reward_weights.assign(n_neurons, 0.0);
  r.eta_state = eta_state;
  r.eta_reward = eta_reward;
  return r;
}

ModelPrediction model_forward(std::span<const double> sbar, const ModelReadout& readout) {
  if (sbar.size() != readout.state_weights.cols() ||
      sbar.size() != readout.reward_weights.size()) {
    throw ConfigError("world model: activity length does not match readout");
  }
  ModelPrediction p;
  for (int k = 0; k < pong::kNumStateVariables; ++k) {
    const auto w = readout.state_weights.row(k);
    double acc = 0.0;
    for (std::size_t i = 0; i < sbar.size(); ++i) acc += w[i] * sbar[i];
    p.delta_state[k] = acc;
  }
  double r = 0.0;
  for (std::size_t i = 0; i < sbar.size(); ++i) r += readout.reward_weights[i] * sbar[i];
  p.reward = r;
  return p;
}

PredictionError model_update(ModelReadout& readout, std::span<const double> sbar,
                             const ModelPrediction& predicted,
                             const std::array<double, pong::kNumStateVariables>& target_delta,
                             double target_reward) {
  if (sbar.size() != readout.reward_weights.size()) {
    throw ConfigError("world model: activity length does not match readout");
  }
  PredictionError err;
  for (int k = 0; k < pong::kNumStateVariables; ++k) {
    const double e = target_delta[k] - predicted.delta_state[k];
    err.state_sq += e * e;
    if (e == 0.0) continue;
    auto w = readout.state_weights.row(k);
    const double scale = readout.eta_state * e;
    for (std::size_t i = 0; i < sbar.size(); ++i) w[i] += scale * sbar[i];
  }
  const double e = target_reward - predicted.reward;
  err.reward_sq = e * e;
  if (e != 0.0) {
    const double scale = readout.eta_reward * e;
    for (std::size_t i = 0; i < sbar.size(); ++i) readout.reward_weights[i] += scale * sbar[i];
  }
  if (!std::isfinite(err.state_sq) || !std::isfinite(err.reward_sq)) {
    throw NumericalError("world model: non-finite prediction error");
  }
  return err;
}

DreamStep dream_step(const pong::GameState& current, pong::Action action,
                     substrate::Substrate& model, policy::ActivityFilter& filter,
                     const ModelReadout& readout, const encoding::PopulationCodeConfig& enc,
                     Rng& rng, DreamOptions options) {
  const auto rates = encoding::encode_state_action(current, action, enc);
  const auto trains = encoding::rates_to_trains(rates, enc, rng);
  const auto sbar = filter.update(model.run_window(trains, enc.window_us));
  const ModelPrediction pred = model_forward(sbar, readout);

  DreamStep out;
  auto next = current.as_array();
  for (int k = 0; k < pong::kNumStateVariables; ++k) {
    const double raw = options.absolute_targets ? pred.delta_state[k]
                                                : next[k] + pred.delta_state[k];
    if (!std::isfinite(raw)) throw NumericalError("world model: non-finite dreamed state");
    next[k] = std::clamp(raw, 0.0, 1.0);
  }
  out.next = pong::GameState::from_array(next);
  out.reward = options.clamp_reward ? std::clamp(pred.reward, -1.0, 1.0) : pred.reward;
  if (!std::isfinite(out.reward)) throw NumericalError("world model: non-finite reward");
  out.sbar.assign(sbar.begin(), sbar.end());
  return out;
}

}  // namespace neurodream::world_model
