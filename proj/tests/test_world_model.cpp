#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <sstream>

#include "neurodream/checkpoint.hpp"
#include "neurodream/errors.hpp"
#include "neurodream/trainer.hpp"
#include "neurodream/world_model.hpp"

namespace nd = neurodream;
namespace wm = neurodream::world_model;
using nd::pong::Action;
using nd::pong::GameState;

namespace {

std::vector<double> random_counts(nd::Rng& rng, std::size_t n, int max = 5) {
  std::uniform_int_distribution<int> d(0, max);
  std::vector<double> s(n);
  for (auto& x : s) x = d(rng);
  return s;
}

nd::TrainConfig small_dreaming_config() {
  nd::TrainConfig cfg;
  cfg.mode = nd::Mode::kDreaming;
  cfg.seed = 4;
  return cfg;
}

}  // namespace

TEST(ModelForward, ZeroWeightsPredictNothing) {
  const auto r = wm::init_model(6, 2e-3, 4e-4);
  const auto p = wm::model_forward(std::vector<double>{1, 2, 3, 4, 5, 6}, r);
  for (double d : p.delta_state) EXPECT_EQ(d, 0.0);
  EXPECT_EQ(p.reward, 0.0);
}

TEST(ModelForward, OneHotRowSelectsNeuron) {
  auto r = wm::init_model(4, 2e-3, 4e-4);
  r.state_weights(2, 1) = 1.0;
  const auto p = wm::model_forward(std::vector<double>{7, 3, 9, 1}, r);
  EXPECT_EQ(p.delta_state[2], 3.0);
  EXPECT_EQ(p.delta_state[0], 0.0);
}

TEST(ModelForward, MatchesNaiveDotProduct) {
  nd::Rng rng(2);
  std::normal_distribution<double> w(0.0, 1.0);
  auto r = wm::init_model(30, 2e-3, 4e-4);
  for (auto& x : r.state_weights.flat()) x = w(rng);
  for (auto& x : r.reward_weights) x = w(rng);
  const auto s = random_counts(rng, 30);
  const auto p = wm::model_forward(s, r);
  for (std::size_t k = 0; k < 4; ++k) {
    long double acc = 0.0L;
    for (std::size_t i = 0; i < 30; ++i) acc += static_cast<long double>(r.state_weights(k, i)) * s[i];
    EXPECT_NEAR(p.delta_state[k], static_cast<double>(acc), 1e-12);
  }
  long double acc = 0.0L;
  for (std::size_t i = 0; i < 30; ++i) acc += static_cast<long double>(r.reward_weights[i]) * s[i];
  EXPECT_NEAR(p.reward, static_cast<double>(acc), 1e-12);
}

TEST(ModelForward, RejectsShapeMismatch) {
  const auto r = wm::init_model(4, 2e-3, 4e-4);
  EXPECT_THROW(wm::model_forward(std::vector<double>(5, 1.0), r), nd::ConfigError);
  EXPECT_THROW(wm::init_model(4, 0.0, 4e-4), nd::ConfigError);
}

TEST(ModelUpdate, ExactPredictionIsFixedPoint) {
  nd::Rng rng(3);
  auto r = wm::init_model(8, 2e-3, 4e-4);
  std::normal_distribution<double> w(0.0, 0.1);
  for (auto& x : r.state_weights.flat()) x = w(rng);
  const auto s = random_counts(rng, 8);
  const auto p = wm::model_forward(s, r);
  const auto before = r.state_weights;
  const auto err = wm::model_update(r, s, p, p.delta_state, p.reward);
  EXPECT_EQ(r.state_weights, before);
  EXPECT_EQ(err.state_sq, 0.0);
  EXPECT_EQ(err.reward_sq, 0.0);
}

TEST(ModelUpdate, SignMovesPredictionTowardTarget) {
  auto r = wm::init_model(2, 0.1, 0.1);
  const std::vector<double> s{1.0, 2.0};
  wm::model_update(r, s, wm::model_forward(s, r), {0.5, -0.5, 0.0, 0.0}, 1.0);
  // R += eta (target - pred) sbar with pred = 0.
  EXPECT_DOUBLE_EQ(r.state_weights(0, 1), 0.1 * 0.5 * 2.0);
  EXPECT_DOUBLE_EQ(r.state_weights(1, 0), -0.1 * 0.5);
  EXPECT_DOUBLE_EQ(r.reward_weights[1], 0.1 * 2.0);
}

TEST(ModelUpdate, OneNeuronConvergesGeometrically) {
  // sbar = 1: e_{n+1} = (1 - eta) e_n.
  const double eta = 0.05;
  auto r = wm::init_model(1, eta, eta);
  const std::vector<double> s{1.0};
  const double target = 0.8;
  for (int n = 0; n < 50; ++n) {
    const auto p = wm::model_forward(s, r);
    const double expected_err = target * std::pow(1.0 - eta, n);
    EXPECT_NEAR(target - p.reward, expected_err, 1e-12);
    EXPECT_NEAR(target - p.delta_state[0], expected_err, 1e-12);
    wm::model_update(r, s, p, {target, 0, 0, 0}, target);
  }
}

TEST(ModelUpdateProperty, ErrorDecreasesBelowStabilityBound) {
  nd::Rng rng(4);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::uniform_real_distribution<double> frac(0.05, 0.95);
  for (int trial = 0; trial < 200; ++trial) {
    const auto s = random_counts(rng, 20, 4);
    double sq = 0.0;
    for (double x : s) sq += x * x;
    if (sq == 0.0) continue;
    const double eta = frac(rng) * 2.0 / sq;
    auto r = wm::init_model(20, eta, eta);
    for (auto& x : r.state_weights.flat()) x = u(rng);
    for (auto& x : r.reward_weights) x = u(rng);
    const std::array<double, 4> target{u(rng), u(rng), u(rng), u(rng)};
    const double target_r = u(rng);
    const auto before = wm::model_update(r, s, wm::model_forward(s, r), target, target_r);
    const auto p = wm::model_forward(s, r);
    double after = 0.0;
    for (int k = 0; k < 4; ++k) after += (target[k] - p.delta_state[k]) * (target[k] - p.delta_state[k]);
    if (before.state_sq > 0.0) {
      EXPECT_LT(after, before.state_sq);
    }
    if (before.reward_sq > 0.0) {
      EXPECT_LT((target_r - p.reward) * (target_r - p.reward), before.reward_sq);
    }
  }
}

TEST(ModelForwardProperty, Linear) {
  nd::Rng rng(5);
  std::normal_distribution<double> w(0.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    auto r = wm::init_model(16, 2e-3, 4e-4);
    for (auto& x : r.state_weights.flat()) x = w(rng);
    for (auto& x : r.reward_weights) x = w(rng);
    const auto s1 = random_counts(rng, 16);
    const auto s2 = random_counts(rng, 16);
    const double a = w(rng);
    const double b = w(rng);
    std::vector<double> mix(16);
    for (std::size_t i = 0; i < 16; ++i) mix[i] = a * s1[i] + b * s2[i];
    const auto p1 = wm::model_forward(s1, r);
    const auto p2 = wm::model_forward(s2, r);
    const auto pm = wm::model_forward(mix, r);
    for (int k = 0; k < 4; ++k) EXPECT_NEAR(pm.delta_state[k], a * p1.delta_state[k] + b * p2.delta_state[k], 1e-10);
    EXPECT_NEAR(pm.reward, a * p1.reward + b * p2.reward, 1e-10);
  }
}

TEST(DreamStep, ZeroReadoutKeepsState) {
  const auto cfg = small_dreaming_config();
  auto model = nd::build_network(cfg, 0, nd::substrate::Variant::kModel);
  model.set_core_efficacy(1.0);
  nd::policy::ActivityFilter filter(model.n_neurons());
  const auto readout = wm::init_model(model.n_neurons(), 2e-3, 4e-4);
  nd::Rng rng(1);
  const GameState s{0.3, 0.6, 0.2, 0.9};
  const auto step = wm::dream_step(s, Action::kUp, model, filter, readout, cfg.encoding, rng);
  EXPECT_EQ(step.next, s);
  EXPECT_EQ(step.reward, 0.0);
  EXPECT_EQ(step.sbar.size(), model.n_neurons());
}

TEST(DreamStep, ClampsToUnitInterval) {
  const auto cfg = small_dreaming_config();
  auto model = nd::build_network(cfg, 0, nd::substrate::Variant::kModel);
  model.set_core_efficacy(4.0);
  nd::policy::ActivityFilter filter(model.n_neurons());
  auto readout = wm::init_model(model.n_neurons(), 2e-3, 4e-4);
  readout.state_weights.row(0)[0] = 0.0;
  for (auto& x : readout.state_weights.row(2)) x = 10.0;
  for (auto& x : readout.state_weights.row(3)) x = -10.0;
  for (auto& x : readout.reward_weights) x = 3.0;
  nd::Rng rng(1);
  const GameState s{0.5, 0.5, 0.9, 0.1};
  const auto step = wm::dream_step(s, Action::kUp, model, filter, readout, cfg.encoding, rng);
  ASSERT_GT(std::accumulate(step.sbar.begin(), step.sbar.end(), 0.0), 0.0);
  EXPECT_EQ(step.next.ball_x, 1.0);
  EXPECT_EQ(step.next.ball_y, 0.0);
  EXPECT_GT(step.reward, 1.0);  // raw by default
  const auto clamped = wm::dream_step(s, Action::kUp, model, filter, readout, cfg.encoding, rng,
                                      {.clamp_reward = true});
  EXPECT_EQ(clamped.reward, 1.0);
}

TEST(DreamStep, ReproducesTrainedConstantVelocity) {
  // Train on a constant-velocity transition from random states, then compare
  // dream_step against the true next state.
  const auto cfg = small_dreaming_config();
  auto model = nd::build_network(cfg, 0, nd::substrate::Variant::kModel);
  nd::calibrate_network(cfg, 0, model);
  nd::policy::ActivityFilter filter(model.n_neurons());
  auto readout = wm::init_model(model.n_neurons(), cfg.eta_state, cfg.eta_reward);
  const std::array<double, 4> velocity{0.0, 0.0, 0.04, -0.04};
  nd::Rng rng(8);
  std::uniform_real_distribution<double> u(0.1, 0.9);
  std::uniform_int_distribution<int> act(0, 2);
  for (int n = 0; n < 3000; ++n) {
    const GameState s{u(rng), u(rng), u(rng), u(rng)};
    const auto a = nd::pong::action_from_index(act(rng));
    const auto trains = nd::encoding::rates_to_trains(
        nd::encoding::encode_state_action(s, a, cfg.encoding), cfg.encoding, rng);
    const auto sbar = filter.update(model.run_window(trains, cfg.encoding.window_us));
    wm::model_update(readout, sbar, wm::model_forward(sbar, readout), velocity, 0.0);
  }
  double mse = 0.0;
  const int probes = 200;
  for (int n = 0; n < probes; ++n) {
    const GameState s{u(rng), u(rng), u(rng), u(rng)};
    const auto step = wm::dream_step(s, nd::pong::action_from_index(act(rng)), model, filter,
                                     readout, cfg.encoding, rng);
    const auto got = step.next.as_array();
    const auto now = s.as_array();
    for (int k = 0; k < 4; ++k) {
      const double e = got[k] - (now[k] + velocity[k]);
      mse += e * e / 4.0;
    }
  }
  EXPECT_LT(mse / probes, 1e-3);
}

TEST(Checkpoint, ModelRoundTrip) {
  nd::Rng rng(9);
  auto r = wm::init_model(5, 2e-3, 4e-4);
  std::normal_distribution<double> w(0.0, 1.0);
  for (auto& x : r.state_weights.flat()) x = w(rng);
  for (auto& x : r.reward_weights) x = w(rng);
  std::stringstream buf;
  nd::checkpoint::write_model(buf, r);
  const auto back = nd::checkpoint::read_model(buf);
  EXPECT_EQ(back.state_weights, r.state_weights);
  EXPECT_EQ(back.reward_weights, r.reward_weights);
  EXPECT_EQ(back.eta_state, 2e-3);
  EXPECT_EQ(back.eta_reward, 4e-4);
  EXPECT_EQ(back.c_state, 1.0);
}

TEST(ModelLearning, FirstDreamWithZeroReadoutLeavesPolicyUnchanged) {
  // With both readouts at their zero initialization every dreamed reward is 0,
  // so the dreamed game cannot move the policy.
  auto cfg = small_dreaming_config();
  cfg.games = 1;
  nd::Trainer trainer(cfg, 0);
  const auto weights = trainer.policy_readout().weights;
  nd::GameRecord rec;
  trainer.dream_game({0.5, 0.5, 0.5, 0.5}, rec);
  EXPECT_EQ(rec.dream_return, 0.0);
  EXPECT_EQ(trainer.policy_readout().weights, weights);
  EXPECT_EQ(trainer.policy_readout().optimizer.steps(), 0u);
}
