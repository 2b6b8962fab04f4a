#pragma once

#include <array>
#include <cstdint>

#include "neurodream/seeds.hpp"

namespace neurodream::pong {

// Court coordinates are normalized to [0,1]. The agent defends the plane
// x = 1, the opponent the plane x = 0. "Up" increases y.
struct GameState {
  double paddle_agent_y = 0.5;
  double paddle_opp_y = 0.5;
  double ball_x = 0.5;
  double ball_y = 0.5;

  std::array<double, 4> as_array() const {
    return {paddle_agent_y, paddle_opp_y, ball_x, ball_y};
  }
  static GameState from_array(const std::array<double, 4>& v) {
    return {v[0], v[1], v[2], v[3]};
  }
  bool valid() const;

  friend bool operator==(const GameState&, const GameState&) = default;
};

inline constexpr int kNumStateVariables = 4;

enum class Action : int { kUp = 0, kDown = 1, kStay = 2 };
inline constexpr int kNumActions = 3;

inline constexpr int action_index(Action a) { return static_cast<int>(a); }
Action action_from_index(int index);

struct PongPhysics {
  double ball_speed = 0.04;
  double paddle_speed = 0.04;
  double paddle_half_height = 0.1;
  double opp_speed = 0.02;
  // Opponent stays put while |ball_y - paddle_opp_y| <= this.
  double opp_dead_band = 0.01;
  int frames_per_game = 100;
  bool point_terminal = false;

  // Throws ConfigError.
  void validate() const;
};

// Hidden ball velocity; not part of the observation.
struct Velocity {
  double dx = 0.0;
  double dy = 0.0;
  friend bool operator==(const Velocity&, const Velocity&) = default;
};

struct StepOutcome {
  GameState next_state;
  int reward = 0;  // -1, 0 or +1
  bool terminal = false;
};

// One of the four diagonal headings, chosen uniformly.
Velocity draw_heading(Rng& rng, double speed);

Action opponent_move(const GameState& state, const PongPhysics& physics);

struct Transition {
  GameState next_state;
  Velocity velocity;
  int reward = 0;
  bool point_scored = false;
};

// Pure one-frame transition. `serve` is the ball velocity used if a point is
// scored this frame (the ball is re-centered). Throws ConfigError when `state`
// violates the GameState invariants.
Transition advance(const GameState& state, Velocity velocity, Action action,
                   const PongPhysics& physics, Velocity serve);

// Stateful environment: owns the hidden velocity, the serve generator and the
// frame counter. After a point the ball is served from the center toward the
// agent with a random vertical sign.
class PongEnv {
 public:
  explicit PongEnv(PongPhysics physics = {});

  GameState reset(std::uint64_t seed);
  StepOutcome step(Action action);

  const GameState& state() const { return state_; }
  Velocity velocity() const { return velocity_; }
  int frame() const { return frame_; }
  const PongPhysics& physics() const { return physics_; }

 private:
  PongPhysics physics_;
  GameState state_;
  Velocity velocity_;
  Rng rng_;
  int frame_ = 0;
};

}  // namespace neurodream::pong
