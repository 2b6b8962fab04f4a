#include "neurodream/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

#include "neurodream/errors.hpp"

namespace neurodream {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

const TrainConfig& validated(const TrainConfig& cfg) {
  cfg.validate();
  return cfg;
}

pong::PongPhysics game_physics(const TrainConfig& cfg) {
  pong::PongPhysics p = cfg.physics;
  p.frames_per_game = cfg.t_awake;
  return p;
}

}  // namespace

substrate::SubstrateConfig TrainConfig::substrate_for(substrate::Variant variant) const {
  substrate::SubstrateConfig s = substrate;
  s.variant = variant;
  s.state_generators = encoding.state_generators();
  s.action_generators = pong::kNumActions;
  return s;
}

void TrainConfig::validate() const {
  if (games < 1 || t_awake < 1 || t_dream < 1) {
    throw ConfigError("train: games, t_awake and t_dream must be >= 1");
  }
  if (runs < 1) throw ConfigError("train: runs must be >= 1");
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw ConfigError("train: gamma must be in [0,1]");
  if (!(policy_learning_rate() > 0.0) || !(eta_state > 0.0) || !(eta_reward > 0.0)) {
    throw ConfigError("train: learning rates must be > 0");
  }
  if (!(policy_init_std >= 0.0)) throw ConfigError("train: policy_init_std must be >= 0");
  if (!(filter_alpha >= 0.0 && filter_alpha < 1.0)) {
    throw ConfigError("train: filter alpha must be in [0,1)");
  }
  if (calibration.probe_games < 1) throw ConfigError("train: probe_games must be >= 1");
  physics.validate();
  encoding.validate();
  substrate_for(substrate::Variant::kModel).validate();
  if (encoding.window_us % substrate.sim_dt_us != 0) {
    throw ConfigError("train: window must be a multiple of the simulation step");
  }
}

std::vector<double> RunMetrics::returns() const {
  std::vector<double> r;
  r.reserve(games.size());
  for (const auto& g : games) r.push_back(g.total_return);
  return r;
}

std::vector<double> RunMetrics::entropies() const {
  std::vector<double> r;
  r.reserve(games.size());
  for (const auto& g : games) r.push_back(g.mean_entropy);
  return r;
}

substrate::Substrate build_network(const TrainConfig& cfg, std::uint64_t run_id,
                                   substrate::Variant variant) {
  const Stream stream = variant == substrate::Variant::kAgent ? Stream::kAgentSubstrate
                                                              : Stream::kModelSubstrate;
  return substrate::Substrate(cfg.substrate_for(variant), derive_seed(cfg.seed, run_id, stream));
}

std::vector<std::vector<encoding::SpikeTrain>> calibration_windows(const TrainConfig& cfg,
                                                                   std::uint64_t run_id,
                                                                   substrate::Variant variant) {
  return substrate::make_probe_game(variant, cfg.encoding, game_physics(cfg),
                                    cfg.calibration.probe_games * cfg.t_awake,
                                    derive_seed(cfg.seed, run_id, Stream::kProbe));
}

CalibrationSummary calibrate_network(const TrainConfig& cfg, std::uint64_t run_id,
                                     substrate::Substrate& s,
                                     std::vector<substrate::CalibrationProbe>* trace_out) {
  const auto variant = s.config().variant;
  const auto windows = calibration_windows(cfg, run_id, variant);
  CalibrationSummary summary;
  if (cfg.calibration.enabled) {
    const auto result = substrate::calibrate_efficacy(
        s, windows, cfg.encoding.window_us, cfg.calibration.target, cfg.calibration.max_steps,
        trace_out);
    summary.efficacy = result.efficacy;
    summary.factor = result.factor;
    summary.probes = static_cast<int>(result.trace.size());
  } else {
    const double fixed = variant == substrate::Variant::kAgent ? cfg.calibration.agent_efficacy
                                                               : cfg.calibration.model_efficacy;
    s.set_core_efficacy(fixed);
    summary.efficacy = fixed;
    summary.factor = substrate::measure_integration_factor(s, windows, cfg.encoding.window_us);
  }
  return summary;
}

Trainer::Trainer(const TrainConfig& cfg, std::uint64_t run_id)
    : cfg_(validated(cfg)),
      run_id_(run_id),
      env_(game_physics(cfg)),
      agent_(build_network(cfg, run_id, substrate::Variant::kAgent)),
      policy_(policy::init_policy(derive_seed(cfg.seed, run_id, Stream::kPolicyInit),
                                  cfg.substrate.n_neurons, cfg.policy_learning_rate(),
                                  cfg.policy_init_std, cfg.adam)),
      model_readout_(world_model::init_model(cfg.substrate.n_neurons, cfg.eta_state,
                                             cfg.eta_reward)),
      acc_(cfg.substrate.n_neurons, cfg.gamma),
      agent_filter_(cfg.substrate.n_neurons, cfg.filter_alpha),
      model_filter_(cfg.substrate.n_neurons, cfg.filter_alpha),
      env_rng_(make_rng(cfg.seed, run_id, Stream::kEnvironment)),
      encoding_rng_(make_rng(cfg.seed, run_id, Stream::kEncoding)),
      action_rng_(make_rng(cfg.seed, run_id, Stream::kActionSampling)),
      dream_rng_(make_rng(cfg.seed, run_id, Stream::kDreamStart)) {
  metrics_.run_id = run_id;
  metrics_.mode = cfg.mode;
  if (cfg.mode == Mode::kDreaming) {
    model_.emplace(build_network(cfg, run_id, substrate::Variant::kModel));
  }
  const auto t0 = Clock::now();
  metrics_.agent_calibration = calibrate_network(cfg_, run_id_, agent_);
  if (model_) metrics_.model_calibration = calibrate_network(cfg_, run_id_, *model_);
  metrics_.wall_calibration_s = seconds_since(t0);
}

policy::EpisodeTrace Trainer::awake_game(GameRecord& record) {
  const auto t0 = Clock::now();
  const auto& enc = cfg_.encoding;
  pong::GameState state = env_.reset(env_rng_());
  acc_.reset();
  agent_filter_.reset();
  model_filter_.reset();
  awake_states_.clear();

  policy::EpisodeTrace trace;
  trace.frames.reserve(static_cast<std::size_t>(cfg_.t_awake));
  double entropy_sum = 0.0;
  double state_loss = 0.0;
  double reward_loss = 0.0;
  record.total_return = 0.0;

  for (int f = 0; f < cfg_.t_awake; ++f) {
    awake_states_.push_back(state);
    const auto trains = encoding::rates_to_trains(encoding::encode_state(state, enc), enc,
                                                  encoding_rng_);
    const auto sbar = agent_filter_.update(agent_.run_window(trains, enc.window_us));
    const auto pi = policy::policy_forward(sbar, policy_);
    const auto action = policy::sample_action(pi, action_rng_);
    const pong::StepOutcome out = env_.step(action);

    if (model_) {
      const auto model_trains = encoding::rates_to_trains(
          encoding::encode_state_action(state, action, enc), enc, encoding_rng_);
      const auto sbar_m = model_filter_.update(model_->run_window(model_trains, enc.window_us));
      const auto pred = world_model::model_forward(sbar_m, model_readout_);
      std::array<double, pong::kNumStateVariables> target{};
      const auto before = state.as_array();
      const auto after = out.next_state.as_array();
      for (int k = 0; k < pong::kNumStateVariables; ++k) {
        target[k] = cfg_.absolute_model_targets ? after[k] : after[k] - before[k];
      }
      const auto err = world_model::model_update(model_readout_, sbar_m, pred, target,
                                                 static_cast<double>(out.reward));
      const double s_loss = err.state_sq / pong::kNumStateVariables;
      state_loss += s_loss;
      reward_loss += err.reward_sq;
      metrics_.frame_state_loss.push_back(s_loss);
      metrics_.frame_reward_loss.push_back(err.reward_sq);
      ++metrics_.model_updates;
    }

    acc_.accumulate(sbar, pi, action, out.reward);
    entropy_sum += policy::entropy(pi);
    record.total_return += out.reward;
    trace.frames.push_back({std::vector<double>(sbar.begin(), sbar.end()), pi, action,
                            static_cast<double>(out.reward)});
    state = out.next_state;
  }
  policy::apply_policy_update(policy_, acc_);
  ++metrics_.policy_updates;
  metrics_.real_frames += static_cast<std::uint64_t>(cfg_.t_awake);

  record.mean_entropy = entropy_sum / cfg_.t_awake;
  if (model_) {
    record.model_state_loss = state_loss / cfg_.t_awake;
    record.model_reward_loss = reward_loss / cfg_.t_awake;
    if (!std::isfinite(record.model_state_loss) || !std::isfinite(record.model_reward_loss)) {
      throw NumericalError("trainer: non-finite model loss");
    }
  }
  metrics_.wall_awake_s += seconds_since(t0);
  return trace;
}

void Trainer::dream_game(const pong::GameState& start, GameRecord& record) {
  if (!model_) throw ConfigError("trainer: dreaming requires a model network");
  const auto t0 = Clock::now();
  const auto& enc = cfg_.encoding;
  const world_model::DreamOptions options{cfg_.clamp_dream_reward, cfg_.absolute_model_targets};
  acc_.reset();
  agent_filter_.reset();
  model_filter_.reset();

  pong::GameState state = start;
  double entropy_sum = 0.0;
  record.dream_return = 0.0;
  for (int f = 0; f < cfg_.t_dream; ++f) {
    const auto trains = encoding::rates_to_trains(encoding::encode_state(state, enc), enc,
                                                  encoding_rng_);
    const auto sbar = agent_filter_.update(agent_.run_window(trains, enc.window_us));
    const auto pi = policy::policy_forward(sbar, policy_);
    const auto action = policy::sample_action(pi, action_rng_);
    const auto step = world_model::dream_step(state, action, *model_, model_filter_,
                                              model_readout_, enc, encoding_rng_, options);
    acc_.accumulate(sbar, pi, action, step.reward);
    entropy_sum += policy::entropy(pi);
    record.dream_return += step.reward;
    state = step.next;
  }
  policy::apply_policy_update(policy_, acc_);
  ++metrics_.policy_updates;
  metrics_.dream_frames += static_cast<std::uint64_t>(cfg_.t_dream);
  record.dream_entropy = entropy_sum / cfg_.t_dream;
  metrics_.wall_dream_s += seconds_since(t0);
}

GameRecord Trainer::play_iteration() {
  GameRecord record;
  record.game = ++games_played_;
  awake_game(record);
  if (model_) {
    std::uniform_int_distribution<std::size_t> pick(0, awake_states_.size() - 1);
    dream_game(awake_states_[pick(dream_rng_)], record);
  }
  metrics_.games.push_back(record);
  const double per_frame =
      model_ ? kVirtualFrameSecondsWithModel : kVirtualFrameSecondsAgentOnly;
  metrics_.virtual_time_s =
      static_cast<double>(metrics_.real_frames + metrics_.dream_frames) * per_frame;
  return record;
}

RunMetrics Trainer::take_metrics() { return std::move(metrics_); }

RunMetrics train_run(const TrainConfig& cfg, std::uint64_t run_id, const GameCallback& on_game) {
  Trainer trainer(cfg, run_id);
  for (int g = 0; g < cfg.games; ++g) {
    const GameRecord record = trainer.play_iteration();
    if (on_game) on_game(record);
  }
  return trainer.take_metrics();
}

std::vector<double> sliding_return(std::span<const double> returns, std::size_t window) {
  std::vector<double> out;
  if (window == 0 || returns.size() < window) return out;
  out.reserve(returns.size() - window + 1);
  for (std::size_t end = window; end <= returns.size(); ++end) {
    // Summed per window so every value is independent of accumulated drift.
    const double sum = std::accumulate(returns.begin() + static_cast<std::ptrdiff_t>(end - window),
                                       returns.begin() + static_cast<std::ptrdiff_t>(end), 0.0);
    out.push_back(sum / static_cast<double>(window));
  }
  return out;
}

double percentile(std::vector<double> values, double pct) {
  if (values.empty()) throw ConfigError("percentile of an empty set");
  std::sort(values.begin(), values.end());
  const double pos = pct / 100.0 * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

AggregateSeries aggregate_runs(std::span<const std::vector<double>> runs) {
  AggregateSeries out;
  if (runs.empty()) return out;
  std::size_t length = runs.front().size();
  for (const auto& r : runs) length = std::min(length, r.size());
  const auto n = static_cast<double>(runs.size());
  std::vector<double> column(runs.size());
  for (std::size_t j = 0; j < length; ++j) {
    double sum = 0.0;
    for (std::size_t r = 0; r < runs.size(); ++r) {
      column[r] = runs[r][j];
      sum += column[r];
    }
    const double mean = sum / n;
    double ss = 0.0;
    for (double v : column) ss += (v - mean) * (v - mean);
    out.mean.push_back(mean);
    out.stddev.push_back(std::sqrt(ss / n));
    out.p80.push_back(percentile(column, 80.0));
  }
  return out;
}

}  // namespace neurodream
