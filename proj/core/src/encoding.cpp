#include "neurodream/encoding.hpp"

#include <cmath>
#include <string>

#include "neurodream/errors.hpp"

namespace neurodream::encoding {

void PopulationCodeConfig::validate() const {
  if (generators_per_variable < 2) {
    throw ConfigError("encoding: generators_per_variable must be >= 2");
  }
  if (!(sigma > 0.0)) throw ConfigError("encoding: sigma must be > 0");
  if (!(peak_spikes_per_window >= 1.0)) {
    throw ConfigError("encoding: peak_spikes_per_window must be >= 1");
  }
  if (window_us == 0) throw ConfigError("encoding: window_us must be > 0");
  if (2.0 * peak_spikes_per_window > window_us) {
    throw ConfigError("encoding: peak rate too high for microsecond resolution");
  }
}

void encode_value(double value, const PopulationCodeConfig& cfg, std::span<double> out) {
  if (!(value >= 0.0 && value <= 1.0)) {
    throw ConfigError("encoding: value outside [0,1]: " + std::to_string(value));
  }
  const int g = cfg.generators_per_variable;
  const double center = value * (g - 1);
  const double inv_two_var = 1.0 / (2.0 * cfg.sigma * cfg.sigma);
  for (int j = 0; j < g; ++j) {
    const double d = j - center;
    out[j] = cfg.peak_spikes_per_window * std::exp(-d * d * inv_two_var);
  }
}

std::vector<double> encode_state(const pong::GameState& state,
                                 const PopulationCodeConfig& cfg) {
  const auto g = static_cast<std::size_t>(cfg.generators_per_variable);
  std::vector<double> rates(pong::kNumStateVariables * g);
  const auto values = state.as_array();
  for (std::size_t v = 0; v < values.size(); ++v) {
    encode_value(values[v], cfg, std::span<double>(rates).subspan(v * g, g));
  }
  return rates;
}

std::vector<double> encode_action(pong::Action action, const PopulationCodeConfig& cfg) {
  std::vector<double> rates(pong::kNumActions, 0.0);
  rates[pong::action_index(action)] = cfg.peak_spikes_per_window;
  return rates;
}

std::vector<double> encode_state_action(const pong::GameState& state, pong::Action action,
                                        const PopulationCodeConfig& cfg) {
  auto rates = encode_state(state, cfg);
  const auto a = encode_action(action, cfg);
  rates.insert(rates.end(), a.begin(), a.end());
  return rates;
}

std::vector<std::uint32_t> even_spacing(std::uint32_t count, std::uint32_t window_us) {
  std::vector<std::uint32_t> ts;
  ts.reserve(count);
  const double spacing = static_cast<double>(window_us) / count;
  for (std::uint32_t j = 0; j < count; ++j) {
    ts.push_back(static_cast<std::uint32_t>(std::lround(spacing * (j + 0.5))));
  }
  return ts;
}

std::vector<SpikeTrain> rates_to_trains(std::span<const double> rates,
                                        const PopulationCodeConfig& cfg, Rng& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<SpikeTrain> trains(rates.size());
  for (std::size_t g = 0; g < rates.size(); ++g) {
    const double c = rates[g];
    if (!(c >= 0.0) || !std::isfinite(c)) {
      throw ConfigError("encoding: negative or non-finite rate");
    }
    const double whole = std::floor(c);
    auto count = static_cast<std::uint32_t>(whole);
    // Always draw so the stream position does not depend on the rates.
    if (unit(rng) < c - whole) ++count;
    trains[g].generator_id = static_cast<std::uint32_t>(g);
    if (count > 0) trains[g].timestamps_us = even_spacing(count, cfg.window_us);
  }
  return trains;
}

std::uint64_t count_events(std::span<const SpikeTrain> trains) {
  std::uint64_t n = 0;
  for (const auto& t : trains) n += t.timestamps_us.size();
  return n;
}

}  // namespace neurodream::encoding
