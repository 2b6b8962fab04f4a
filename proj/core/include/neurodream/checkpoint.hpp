#pragma once

#include <iosfwd>

#include "neurodream/policy.hpp"
#include "neurodream/world_model.hpp"

namespace neurodream::checkpoint {

// Little-endian binary layout:
//   "NDCK" u32 version u32 kind (1 policy, 2 model)
//   policy: matrix weights, f64 learning rate, f64 beta1, beta2, epsilon,
//           u64 adam steps, vector m, vector v
//   model:  matrix state_weights, vector reward_weights, f64 eta_state,
//           eta_reward, c_state, c_reward
// where matrix = u32 rows u32 cols f64[rows*cols] and vector = u64 n f64[n].
inline constexpr std::uint32_t kVersion = 1;

void write_policy(std::ostream& out, const policy::PolicyReadout& readout);
policy::PolicyReadout read_policy(std::istream& in);  // throws ConfigError

void write_model(std::ostream& out, const world_model::ModelReadout& readout);
world_model::ModelReadout read_model(std::istream& in);  // throws ConfigError

}  // namespace neurodream::checkpoint
