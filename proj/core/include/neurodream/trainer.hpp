#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "neurodream/adam.hpp"
#include "neurodream/encoding.hpp"
#include "neurodream/policy.hpp"
#include "neurodream/pong.hpp"
#include "neurodream/substrate.hpp"
#include "neurodream/world_model.hpp"

namespace neurodream {

enum class Mode { kBaseline, kDreaming };

// Virtual (hardware) time per frame: input update plus readout wait.
inline constexpr double kVirtualFrameSecondsAgentOnly = 18.4e-3;
inline constexpr double kVirtualFrameSecondsWithModel = 36.8e-3;

struct CalibrationConfig {
  bool enabled = true;
  substrate::CalibrationTarget target;
  int max_steps = 40;
  int probe_games = 1;
  // Used instead of calibrating when `enabled` is false.
  double agent_efficacy = 0.0;
  double model_efficacy = 0.0;
};

struct TrainConfig {
  Mode mode = Mode::kDreaming;
  int games = 2000;
  int t_awake = 100;
  int t_dream = 50;
  double gamma = 0.998;
  // Policy learning rate; when unset the mode's default is used.
  std::optional<double> eta_policy;
  double eta_policy_baseline = 4e-3;
  double eta_policy_dreaming = 2e-3;
  double eta_state = 2e-3;
  double eta_reward = 4e-4;
  double policy_init_std = 0.1;
  AdamConfig adam;
  int runs = 10;
  std::uint64_t seed = 1;
  double filter_alpha = 0.0;
  bool clamp_dream_reward = false;
  bool absolute_model_targets = false;

  pong::PongPhysics physics;
  encoding::PopulationCodeConfig encoding;
  // Shared by both networks; the variant is set per network.
  substrate::SubstrateConfig substrate;
  CalibrationConfig calibration;

  double policy_learning_rate() const {
    if (eta_policy) return *eta_policy;
    return mode == Mode::kBaseline ? eta_policy_baseline : eta_policy_dreaming;
  }
  substrate::SubstrateConfig substrate_for(substrate::Variant variant) const;
  void validate() const;  // throws ConfigError
};

struct GameRecord {
  int game = 0;  // 1-based
  double total_return = 0.0;
  double mean_entropy = 0.0;     // awake frames
  double model_state_loss = 0.0;  // mean per frame of the per-variable squared error
  double model_reward_loss = 0.0;
  double dream_return = 0.0;  // sum of dreamed rewards
  double dream_entropy = 0.0;
};

struct CalibrationSummary {
  double efficacy = 0.0;
  double factor = 0.0;
  int probes = 0;
};

struct RunMetrics {
  std::uint64_t run_id = 0;
  Mode mode = Mode::kDreaming;
  std::vector<GameRecord> games;
  std::vector<double> frame_state_loss;
  std::vector<double> frame_reward_loss;
  CalibrationSummary agent_calibration;
  std::optional<CalibrationSummary> model_calibration;
  std::uint64_t real_frames = 0;
  std::uint64_t dream_frames = 0;
  std::uint64_t policy_updates = 0;
  std::uint64_t model_updates = 0;
  double wall_calibration_s = 0.0;
  double wall_awake_s = 0.0;
  double wall_dream_s = 0.0;
  double virtual_time_s = 0.0;

  std::vector<double> returns() const;
  std::vector<double> entropies() const;
};

// The run's substrate of the given variant, built from its seed stream.
substrate::Substrate build_network(const TrainConfig& cfg, std::uint64_t run_id,
                                   substrate::Variant variant);

// Probe windows for calibrating the run's substrate of `variant`.
std::vector<std::vector<encoding::SpikeTrain>> calibration_windows(const TrainConfig& cfg,
                                                                   std::uint64_t run_id,
                                                                   substrate::Variant variant);

// Calibrates (or, when disabled, pins and measures) the substrate's efficacy
// exactly as a Trainer does. Throws CalibrationError; the probe trace goes to
// `trace_out` when given.
CalibrationSummary calibrate_network(const TrainConfig& cfg, std::uint64_t run_id,
                                     substrate::Substrate& s,
                                     std::vector<substrate::CalibrationProbe>* trace_out = nullptr);

// One training run: environment, substrates, readouts and the run's random
// streams. Substrates are calibrated at construction.
class Trainer {
 public:
  Trainer(const TrainConfig& cfg, std::uint64_t run_id);

  // Plays one real game. With a model network, its readouts are trained on
  // every frame. The policy is updated once after the game.
  policy::EpisodeTrace awake_game(GameRecord& record);

  // Plays one game on the learned model from `start`; only the policy learns.
  void dream_game(const pong::GameState& start, GameRecord& record);

  // awake_game followed, in dreaming mode, by dream_game from a uniformly drawn
  // state of the awake game.
  GameRecord play_iteration();

  const TrainConfig& config() const { return cfg_; }
  const RunMetrics& metrics() const { return metrics_; }
  RunMetrics take_metrics();

  const policy::PolicyReadout& policy_readout() const { return policy_; }
  const world_model::ModelReadout* model_readout() const {
    return model_ ? &model_readout_ : nullptr;
  }
  policy::PolicyReadout& mutable_policy() { return policy_; }
  world_model::ModelReadout& mutable_model_readout() { return model_readout_; }
  substrate::Substrate& agent_substrate() { return agent_; }
  substrate::Substrate* model_substrate() { return model_ ? &*model_ : nullptr; }

 private:
  TrainConfig cfg_;
  std::uint64_t run_id_;
  RunMetrics metrics_;
  pong::PongEnv env_;
  substrate::Substrate agent_;
  std::optional<substrate::Substrate> model_;
  policy::PolicyReadout policy_;
  world_model::ModelReadout model_readout_;
  policy::EligibilityAccumulator acc_;
  policy::ActivityFilter agent_filter_;
  policy::ActivityFilter model_filter_;
  Rng env_rng_;
  Rng encoding_rng_;
  Rng action_rng_;
  Rng dream_rng_;
  std::vector<pong::GameState> awake_states_;
  int games_played_ = 0;
};

using GameCallback = std::function<void(const GameRecord&)>;

// Builds, calibrates and trains for `cfg.games` iterations. `on_game` is called
// after every iteration. Throws CalibrationError or NumericalError.
RunMetrics train_run(const TrainConfig& cfg, std::uint64_t run_id,
                     const GameCallback& on_game = {});

// Trailing mean; entry j covers games j .. j + window - 1 (so the first value
// belongs to game `window`). Empty if fewer than `window` games.
std::vector<double> sliding_return(std::span<const double> returns, std::size_t window = 50);

struct AggregateSeries {
  std::vector<double> mean;
  std::vector<double> stddev;  // population standard deviation
  std::vector<double> p80;     // linear interpolation between order statistics
};

// Per-index statistics across runs over the common prefix length.
AggregateSeries aggregate_runs(std::span<const std::vector<double>> runs);

// Percentile (0..100) with linear interpolation between order statistics.
double percentile(std::vector<double> values, double pct);

}  // namespace neurodream
