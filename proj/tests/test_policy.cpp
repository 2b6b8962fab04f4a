#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <sstream>

#include "neurodream/checkpoint.hpp"
#include "neurodream/errors.hpp"
#include "neurodream/policy.hpp"

namespace nd = neurodream;
namespace pol = neurodream::policy;
using nd::pong::Action;

namespace {

struct Episode {
  std::vector<std::vector<double>> sbar;
  std::vector<Action> actions;
  std::vector<double> rewards;
};

Episode random_episode(nd::Rng& rng, std::size_t n, int frames) {
  Episode ep;
  std::uniform_int_distribution<int> counts(0, 6);
  std::uniform_int_distribution<int> act(0, 2);
  std::uniform_int_distribution<int> rew(-1, 1);
  for (int t = 0; t < frames; ++t) {
    std::vector<double> s(n);
    for (auto& x : s) x = counts(rng);
    ep.sbar.push_back(std::move(s));
    ep.actions.push_back(nd::pong::action_from_index(act(rng)));
    ep.rewards.push_back(rew(rng) * (t % 3 == 0 ? 1.0 : 0.0));
  }
  return ep;
}

// -sum_t G_t ln pi_t(a_t) with G_t the discounted return from t.
double surrogate_loss(const pol::PolicyReadout& r, const Episode& ep, double gamma) {
  const int T = static_cast<int>(ep.rewards.size());
  double loss = 0.0;
  for (int t = 0; t < T; ++t) {
    double g = 0.0;
    for (int k = T - 1; k >= t; --k) g = ep.rewards[k] + gamma * g;
    const auto pi = pol::policy_forward(ep.sbar[t], r);
    loss -= g * std::log(pi[nd::pong::action_index(ep.actions[t])]);
  }
  return loss;
}

nd::Matrix accumulate_episode(const pol::PolicyReadout& r, const Episode& ep, double gamma) {
  pol::EligibilityAccumulator acc(r.weights.cols(), gamma);
  for (std::size_t t = 0; t < ep.rewards.size(); ++t) {
    acc.accumulate(ep.sbar[t], pol::policy_forward(ep.sbar[t], r), ep.actions[t], ep.rewards[t]);
  }
  return acc.delta();
}

}  // namespace

TEST(Softmax, Examples) {
  const auto p = pol::softmax({std::log(2.0), 0.0, 0.0});
  EXPECT_NEAR(p[0], 0.5, 1e-15);
  EXPECT_NEAR(p[1], 0.25, 1e-15);
  EXPECT_NEAR(p[2], 0.25, 1e-15);
  const auto u = pol::softmax({0.0, 0.0, 0.0});
  for (double v : u) EXPECT_NEAR(v, 1.0 / 3.0, 1e-15);
}

TEST(Softmax, LargeLogitsStayFinite) {
  const auto p = pol::softmax({1000.0, 0.0, -1000.0});
  EXPECT_EQ(p[0], 1.0);
  EXPECT_EQ(p[2], 0.0);
}

TEST(SoftmaxProperty, ShiftInvariantAndNormalized) {
  nd::Rng rng(1);
  std::uniform_real_distribution<double> u(-20.0, 20.0);
  for (int i = 0; i < 1000; ++i) {
    const pol::Probabilities y{u(rng), u(rng), u(rng)};
    const double c = u(rng);
    const auto a = pol::softmax(y);
    const auto b = pol::softmax({y[0] + c, y[1] + c, y[2] + c});
    double sum = 0.0;
    for (int k = 0; k < 3; ++k) {
      EXPECT_NEAR(a[k], b[k], 1e-12);
      EXPECT_GE(a[k], 0.0);
      sum += a[k];
    }
    EXPECT_NEAR(sum, 1.0, 1e-12);
  }
}

TEST(Entropy, Examples) {
  EXPECT_NEAR(pol::entropy({1.0 / 3, 1.0 / 3, 1.0 / 3}), std::log(3.0), 1e-15);
  EXPECT_EQ(pol::entropy({1.0, 0.0, 0.0}), 0.0);
  EXPECT_NEAR(pol::entropy({0.5, 0.25, 0.25}), 1.5 * std::log(2.0), 1e-15);
}

TEST(Sampling, FrequenciesMatchProbabilities) {
  nd::Rng rng(5);
  const pol::Probabilities pi{0.2, 0.5, 0.3};
  std::array<int, 3> hits{};
  const int n = 30000;
  for (int i = 0; i < n; ++i) ++hits[nd::pong::action_index(pol::sample_action(pi, rng))];
  for (int k = 0; k < 3; ++k) EXPECT_NEAR(static_cast<double>(hits[k]) / n, pi[k], 0.02);
}

TEST(Sampling, NeverPicksZeroMassAction) {
  nd::Rng rng(6);
  for (int i = 0; i < 1000; ++i) {
    EXPECT_EQ(pol::sample_action({0.0, 1.0, 0.0}, rng), Action::kDown);
  }
}

TEST(PolicyInit, NormalWithStdPointOne) {
  const auto r = pol::init_policy(9, 510, 4e-3);
  ASSERT_EQ(r.weights.rows(), 3u);
  ASSERT_EQ(r.weights.cols(), 510u);
  double sum = 0.0;
  double sq = 0.0;
  for (double w : r.weights.flat()) {
    sum += w;
    sq += w * w;
  }
  const double n = static_cast<double>(r.weights.size());
  EXPECT_NEAR(sum / n, 0.0, 0.01);
  EXPECT_NEAR(std::sqrt(sq / n - (sum / n) * (sum / n)), 0.1, 0.005);
  EXPECT_EQ(pol::init_policy(9, 510, 4e-3).weights, r.weights);
}

TEST(ActivityFilter, RawCountsAndSmoothing) {
  pol::ActivityFilter raw(3);
  const nd::substrate::SpikeCounts c{{1, 0, 4}};
  const auto s = raw.update(c);
  EXPECT_EQ(std::vector<double>(s.begin(), s.end()), (std::vector<double>{1, 0, 4}));
  pol::ActivityFilter smooth(3, 0.5);
  smooth.update(c);
  const auto t = smooth.update(c);
  EXPECT_DOUBLE_EQ(t[2], 3.0);  // 0.5 * 2 + 0.5 * 4
  EXPECT_THROW(pol::ActivityFilter(3, 1.0), nd::ConfigError);
}

TEST(Eligibility, SingleFrameHandComputation) {
  // pi = (1/2, 1/4, 1/4), a = Up, sbar = (2, 0), r = 1:
  // delta = (pi - e_up) sbar^T = [(-1, 0), (0.5, 0), (0.5, 0)].
  pol::EligibilityAccumulator acc(2, 0.9);
  acc.accumulate(std::vector<double>{2.0, 0.0}, {0.5, 0.25, 0.25}, Action::kUp, 1.0);
  EXPECT_DOUBLE_EQ(acc.delta()(0, 0), -1.0);
  EXPECT_DOUBLE_EQ(acc.delta()(1, 0), 0.5);
  EXPECT_DOUBLE_EQ(acc.delta()(2, 0), 0.5);
  EXPECT_EQ(acc.delta()(0, 1), 0.0);
}

TEST(Eligibility, TwoFrameDiscounting) {
  // Frame 0 has no reward, frame 1 reward 2: delta = 2 (gamma e0 + e1).
  pol::EligibilityAccumulator acc(1, 0.5);
  acc.accumulate(std::vector<double>{1.0}, {0.5, 0.25, 0.25}, Action::kUp, 0.0);
  EXPECT_EQ(acc.delta()(0, 0), 0.0);
  acc.accumulate(std::vector<double>{3.0}, {0.2, 0.2, 0.6}, Action::kStay, 2.0);
  EXPECT_DOUBLE_EQ(acc.delta()(0, 0), 2.0 * (0.5 * -0.5 + 0.2 * 3.0));
  EXPECT_DOUBLE_EQ(acc.delta()(2, 0), 2.0 * (0.5 * 0.25 + -0.4 * 3.0));
  EXPECT_EQ(acc.frames(), 2);
  acc.reset();
  EXPECT_EQ(acc.delta()(0, 0), 0.0);
  EXPECT_EQ(acc.trace()(2, 0), 0.0);
}

TEST(EligibilityProperty, MatchesFiniteDifferenceOfSurrogateLoss) {
  nd::Rng rng(17);
  const double gamma = 0.95;
  for (int trial = 0; trial < 20; ++trial) {
    auto r = pol::init_policy(100 + trial, 5, 1e-3, 0.3);
    const auto ep = random_episode(rng, 5, 30);
    const auto delta = accumulate_episode(r, ep, gamma);
    const double h = 1e-6;
    for (std::size_t k = 0; k < 3; ++k) {
      for (std::size_t i = 0; i < 5; ++i) {
        const double w = r.weights(k, i);
        r.weights(k, i) = w + h;
        const double up = surrogate_loss(r, ep, gamma);
        r.weights(k, i) = w - h;
        const double down = surrogate_loss(r, ep, gamma);
        r.weights(k, i) = w;
        const double fd = (up - down) / (2 * h);
        EXPECT_NEAR(delta(k, i), fd, 1e-6 * std::max(1.0, std::abs(fd)));
      }
    }
  }
}

TEST(EligibilityProperty, MatchesExplicitDoubleSum) {
  nd::Rng rng(18);
  const double gamma = 0.9;
  for (int trial = 0; trial < 20; ++trial) {
    const auto r = pol::init_policy(200 + trial, 4, 1e-3);
    const auto ep = random_episode(rng, 4, 40);
    const auto delta = accumulate_episode(r, ep, gamma);
    for (std::size_t k = 0; k < 3; ++k) {
      for (std::size_t i = 0; i < 4; ++i) {
        double expected = 0.0;
        for (std::size_t t = 0; t < ep.rewards.size(); ++t) {
          for (std::size_t tau = 0; tau <= t; ++tau) {
            const auto pi = pol::policy_forward(ep.sbar[tau], r);
            const double score =
                pi[k] - (static_cast<int>(k) == nd::pong::action_index(ep.actions[tau]) ? 1.0 : 0.0);
            expected += ep.rewards[t] * std::pow(gamma, static_cast<double>(t - tau)) * score *
                        ep.sbar[tau][i];
          }
        }
        EXPECT_NEAR(delta(k, i), expected, 1e-9 * std::max(1.0, std::abs(expected)));
      }
    }
  }
}

TEST(Adam, FirstStepHandComputation) {
  // t = 1: m_hat = g, v_hat = g^2, so the step is -lr * g / (|g| + eps).
  nd::Adam adam(2, 0.1);
  std::vector<double> p{1.0, -1.0};
  const std::vector<double> g{2.0, -0.5};
  adam.step(p, g);
  EXPECT_NEAR(p[0], 1.0 - 0.1 * 2.0 / (2.0 + 1e-8), 1e-15);
  EXPECT_NEAR(p[1], -1.0 + 0.1 * 0.5 / (0.5 + 1e-8), 1e-15);
  EXPECT_EQ(adam.steps(), 1u);
}

TEST(Adam, SecondStepHandComputation) {
  nd::Adam adam(1, 0.01, {0.9, 0.999, 1e-8});
  std::vector<double> p{0.0};
  adam.step(p, std::vector<double>{1.0});
  const double after_one = p[0];
  adam.step(p, std::vector<double>{3.0});
  const double m = 0.9 * 0.1 + 0.1 * 3.0;
  const double v = 0.999 * 0.001 + 0.001 * 9.0;
  const double m_hat = m / (1 - 0.81);
  const double v_hat = v / (1 - 0.999 * 0.999);
  EXPECT_NEAR(p[0], after_one - 0.01 * m_hat / (std::sqrt(v_hat) + 1e-8), 1e-15);
}

TEST(Adam, RejectsBadConfig) {
  EXPECT_THROW(nd::Adam(1, 0.0), nd::ConfigError);
  EXPECT_THROW(nd::Adam(1, 0.1, {1.0, 0.999, 1e-8}), nd::ConfigError);
  nd::Adam a(2, 0.1);
  std::vector<double> p(3);
  EXPECT_THROW(a.step(p, p), nd::ConfigError);
}

TEST(PolicyUpdate, MovesTowardRewardedAction) {
  auto r = pol::init_policy(1, 2, 0.01);
  const std::vector<double> s{1.0, 2.0};
  const auto before = pol::policy_forward(s, r)[0];
  pol::EligibilityAccumulator acc(2, 0.9);
  acc.accumulate(s, pol::policy_forward(s, r), Action::kUp, 1.0);
  pol::apply_policy_update(r, acc);
  EXPECT_GT(pol::policy_forward(s, r)[0], before);
  EXPECT_EQ(acc.frames(), 0);
}

TEST(PolicyUpdate, ZeroGradientSkipsAdamStep) {
  auto r = pol::init_policy(1, 2, 0.01);
  const auto weights = r.weights;
  pol::EligibilityAccumulator acc(2, 0.9);
  acc.accumulate(std::vector<double>{1.0, 1.0}, {0.3, 0.3, 0.4}, Action::kUp, 0.0);
  pol::apply_policy_update(r, acc);
  EXPECT_EQ(r.weights, weights);
  EXPECT_EQ(r.optimizer.steps(), 0u);
}

TEST(PolicyUpdate, NonFiniteGradientThrows) {
  auto r = pol::init_policy(1, 1, 0.01);
  pol::EligibilityAccumulator acc(1, 0.9);
  acc.accumulate(std::vector<double>{std::numeric_limits<double>::infinity()}, {0.3, 0.3, 0.4},
                 Action::kUp, 1.0);
  EXPECT_THROW(pol::apply_policy_update(r, acc), nd::NumericalError);
  const std::vector<double> bad{std::nan("")};
  EXPECT_THROW(pol::policy_forward(bad, r), nd::NumericalError);
}

TEST(Checkpoint, PolicyRoundTrip) {
  auto r = pol::init_policy(3, 7, 0.004, 0.1, {0.8, 0.99, 1e-7});
  pol::EligibilityAccumulator acc(7, 0.9);
  acc.accumulate(std::vector<double>(7, 1.0), {0.3, 0.3, 0.4}, Action::kDown, -1.0);
  pol::apply_policy_update(r, acc);
  std::stringstream buf;
  nd::checkpoint::write_policy(buf, r);
  const auto back = nd::checkpoint::read_policy(buf);
  EXPECT_EQ(back.weights, r.weights);
  EXPECT_EQ(back.optimizer.learning_rate(), 0.004);
  EXPECT_EQ(back.optimizer.config().beta1, 0.8);
  EXPECT_EQ(back.optimizer.steps(), 1u);
  const auto m0 = r.optimizer.first_moment();
  const auto m1 = back.optimizer.first_moment();
  EXPECT_TRUE(std::equal(m0.begin(), m0.end(), m1.begin(), m1.end()));
}

TEST(Checkpoint, RejectsTruncatedAndWrongKind) {
  const auto r = pol::init_policy(3, 4, 0.004);
  std::stringstream buf;
  nd::checkpoint::write_policy(buf, r);
  std::string bytes = buf.str();
  std::istringstream truncated(bytes.substr(0, bytes.size() - 3));
  EXPECT_THROW(nd::checkpoint::read_policy(truncated), nd::ConfigError);
  std::istringstream as_model(bytes);
  EXPECT_THROW(nd::checkpoint::read_model(as_model), nd::ConfigError);
  bytes[0] = 'X';
  std::istringstream bad_magic(bytes);
  EXPECT_THROW(nd::checkpoint::read_policy(bad_magic), nd::ConfigError);
}
