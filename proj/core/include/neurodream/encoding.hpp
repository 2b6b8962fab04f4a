#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "neurodream/pong.hpp"
#include "neurodream/seeds.hpp"

namespace neurodream::encoding {

// Gaussian population code. Each state variable owns `generators_per_variable`
// spike generators; the bump's center tracks the variable's value.
struct PopulationCodeConfig {
  int generators_per_variable = 10;
  double sigma = 1.5;                  // in generator-index units
  double peak_spikes_per_window = 5.0;
  std::uint32_t window_us = 10000;

  void validate() const;
  int state_generators() const { return pong::kNumStateVariables * generators_per_variable; }
};

struct SpikeTrain {
  std::uint32_t generator_id = 0;
  std::vector<std::uint32_t> timestamps_us;  // strictly increasing, < window
};

// Expected spike counts, populations ordered (paddle_agent, paddle_opp,
// ball_x, ball_y). Throws ConfigError for values outside [0,1].
std::vector<double> encode_state(const pong::GameState& state,
                                 const PopulationCodeConfig& cfg);

// Gaussian profile of a single value; writes `cfg.generators_per_variable` entries.
void encode_value(double value, const PopulationCodeConfig& cfg, std::span<double> out);

// One-hot over the three action generators.
std::vector<double> encode_action(pong::Action action, const PopulationCodeConfig& cfg);

// State rates followed by action rates (model-network input).
std::vector<double> encode_state_action(const pong::GameState& state, pong::Action action,
                                        const PopulationCodeConfig& cfg);

// Evenly spaced timestamps for `count` spikes within the window:
// t_j = window/(2 count) + j window/count, rounded to the nearest microsecond.
std::vector<std::uint32_t> even_spacing(std::uint32_t count, std::uint32_t window_us);

// Stochastic rounding of each expected count (floor plus one extra spike with
// probability equal to the fractional part), then even spacing. Generator ids
// are the rate indices; zero-count generators get an empty train.
std::vector<SpikeTrain> rates_to_trains(std::span<const double> rates,
                                        const PopulationCodeConfig& cfg, Rng& rng);

std::uint64_t count_events(std::span<const SpikeTrain> trains);

}  // namespace neurodream::encoding
