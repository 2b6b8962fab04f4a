#include "neurodream/pong.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "neurodream/errors.hpp"

namespace neurodream::pong {

namespace {

bool in_unit(double v) { return std::isfinite(v) && v >= 0.0 && v <= 1.0; }

double move_paddle(double y, Action a, double speed) {
  switch (a) {
    case Action::kUp:
      return std::min(1.0, y + speed);
    case Action::kDown:
      return std::max(0.0, y - speed);
    case Action::kStay:
      break;
  }
  return y;
}

}  // namespace

bool GameState::valid() const {
  return in_unit(paddle_agent_y) && in_unit(paddle_opp_y) && in_unit(ball_x) &&
         in_unit(ball_y);
}

Action action_from_index(int index) {
  if (index < 0 || index >= kNumActions) {
    throw ConfigError("action index out of range: " + std::to_string(index));
  }
  return static_cast<Action>(index);
}

void PongPhysics::validate() const {
  if (!(ball_speed > 0.0) || !(paddle_speed > 0.0) || !(opp_speed > 0.0)) {
    throw ConfigError("pong: speeds must be > 0");
  }
  if (!(ball_speed < 0.5)) {
    throw ConfigError("pong: ball_speed must be < 0.5 court per frame");
  }
  if (!(paddle_half_height > 0.0 && paddle_half_height < 0.5)) {
    throw ConfigError("pong: paddle_half_height must be in (0, 0.5)");
  }
  if (!(opp_dead_band >= 0.0)) {
    throw ConfigError("pong: opp_dead_band must be >= 0");
  }
  if (frames_per_game < 1) {
    throw ConfigError("pong: frames_per_game must be >= 1");
  }
}

Velocity draw_heading(Rng& rng, double speed) {
  const auto heading = std::uniform_int_distribution<int>(0, 3)(rng);
  return {(heading & 1) ? speed : -speed, (heading & 2) ? speed : -speed};
}

Action opponent_move(const GameState& state, const PongPhysics& physics) {
  const double error = state.ball_y - state.paddle_opp_y;
  if (error > physics.opp_dead_band) return Action::kUp;
  if (error < -physics.opp_dead_band) return Action::kDown;
  return Action::kStay;
}

Transition advance(const GameState& state, Velocity velocity, Action action,
                   const PongPhysics& physics, Velocity serve) {
  if (!state.valid()) {
    throw ConfigError("pong: state outside [0,1]^4");
  }
  Transition t;
  GameState& s = t.next_state;
  s = state;
  s.paddle_agent_y = move_paddle(state.paddle_agent_y, action, physics.paddle_speed);
  s.paddle_opp_y = move_paddle(state.paddle_opp_y, opponent_move(state, physics),
                               physics.opp_speed);

  Velocity v = velocity;
  double x = state.ball_x + v.dx;
  double y = state.ball_y + v.dy;
  if (y < 0.0) {
    y = -y;
    v.dy = -v.dy;
  } else if (y > 1.0) {
    y = 2.0 - y;
    v.dy = -v.dy;
  }

  if (x >= 1.0) {
    if (std::abs(y - s.paddle_agent_y) <= physics.paddle_half_height) {
      x = 2.0 - x;
      v.dx = -v.dx;
    } else {
      t.reward = -1;
    }
  } else if (x <= 0.0) {
    if (std::abs(y - s.paddle_opp_y) <= physics.paddle_half_height) {
      x = -x;
      v.dx = -v.dx;
    } else {
      t.reward = +1;
    }
  }

  if (t.reward != 0) {
    t.point_scored = true;
    x = 0.5;
    y = 0.5;
    v = serve;
  }
  s.ball_x = std::clamp(x, 0.0, 1.0);
  s.ball_y = std::clamp(y, 0.0, 1.0);
  t.velocity = v;
  return t;
}

PongEnv::PongEnv(PongPhysics physics) : physics_(physics) { physics_.validate(); }

GameState PongEnv::reset(std::uint64_t seed) {
  rng_.seed(seed);
  state_ = GameState{};
  velocity_ = draw_heading(rng_, physics_.ball_speed);
  frame_ = 0;
  return state_;
}

StepOutcome PongEnv::step(Action action) {
  const double sign = std::uniform_int_distribution<int>(0, 1)(rng_) ? 1.0 : -1.0;
  const Velocity serve{physics_.ball_speed, sign * physics_.ball_speed};
  const Transition t = advance(state_, velocity_, action, physics_, serve);
  state_ = t.next_state;
  velocity_ = t.velocity;
  ++frame_;
  StepOutcome out;
  out.next_state = state_;
  out.reward = t.reward;
  out.terminal = frame_ >= physics_.frames_per_game ||
                 (physics_.point_terminal && t.point_scored);
  return out;
}

}  // namespace neurodream::pong
