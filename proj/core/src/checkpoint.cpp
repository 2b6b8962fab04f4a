#include "neurodream/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <istream>
#include <ostream>

#include "neurodream/errors.hpp"

namespace neurodream::checkpoint {

namespace {

constexpr char kMagic[4] = {'N', 'D', 'C', 'K'};
constexpr std::uint32_t kKindPolicy = 1;
constexpr std::uint32_t kKindModel = 2;
// Guards against allocating from a corrupt length field.
constexpr std::uint64_t kMaxElements = 1ull << 28;

void put_u(std::ostream& out, std::uint64_t value, int bytes) {
  for (int b = 0; b < bytes; ++b) out.put(static_cast<char>((value >> (8 * b)) & 0xFF));
}

void put_f64(std::ostream& out, double value) { put_u(out, std::bit_cast<std::uint64_t>(value), 8); }

void put_vector(std::ostream& out, std::span<const double> values) {
  put_u(out, values.size(), 8);
  for (double v : values) put_f64(out, v);
}

void put_matrix(std::ostream& out, const Matrix& m) {
  put_u(out, m.rows(), 4);
  put_u(out, m.cols(), 4);
  for (double v : m.flat()) put_f64(out, v);
}

std::uint64_t get_u(std::istream& in, int bytes) {
  std::uint64_t value = 0;
  for (int b = 0; b < bytes; ++b) {
    const int c = in.get();
    if (c == std::char_traits<char>::eof()) throw ConfigError("checkpoint: truncated file");
    value |= static_cast<std::uint64_t>(static_cast<unsigned char>(c)) << (8 * b);
  }
  return value;
}

double get_f64(std::istream& in) { return std::bit_cast<double>(get_u(in, 8)); }

std::vector<double> get_vector(std::istream& in) {
  const std::uint64_t n = get_u(in, 8);
  if (n > kMaxElements) throw ConfigError("checkpoint: vector length out of range");
  std::vector<double> v(n);
  for (auto& x : v) x = get_f64(in);
  return v;
}

Matrix get_matrix(std::istream& in) {
  const auto rows = get_u(in, 4);
  const auto cols = get_u(in, 4);
  if (rows * cols > kMaxElements) throw ConfigError("checkpoint: matrix size out of range");
  Matrix m(rows, cols);
  for (auto& x : m.flat()) x = get_f64(in);
  return m;
}

void put_header(std::ostream& out, std::uint32_t kind) {
  out.write(kMagic, sizeof(kMagic));
  put_u(out, kVersion, 4);
  put_u(out, kind, 4);
}

void check_header(std::istream& in, std::uint32_t kind) {
  char magic[4] = {};
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(magic)) != 0) {
    throw ConfigError("checkpoint: bad magic");
  }
  if (get_u(in, 4) != kVersion) throw ConfigError("checkpoint: unsupported version");
  if (get_u(in, 4) != kind) throw ConfigError("checkpoint: wrong checkpoint kind");
}

}  // namespace

void write_policy(std::ostream& out, const policy::PolicyReadout& readout) {
  put_header(out, kKindPolicy);
  put_matrix(out, readout.weights);
  const Adam& adam = readout.optimizer;
  put_f64(out, adam.learning_rate());
  put_f64(out, adam.config().beta1);
  put_f64(out, adam.config().beta2);
  put_f64(out, adam.config().epsilon);
  put_u(out, adam.steps(), 8);
  put_vector(out, adam.first_moment());
  put_vector(out, adam.second_moment());
}

policy::PolicyReadout read_policy(std::istream& in) {
  check_header(in, kKindPolicy);
  policy::PolicyReadout r;
  r.weights = get_matrix(in);
  const double lr = get_f64(in);
  AdamConfig cfg;
  cfg.beta1 = get_f64(in);
  cfg.beta2 = get_f64(in);
  cfg.epsilon = get_f64(in);
  const std::uint64_t steps = get_u(in, 8);
  auto m = get_vector(in);
  auto v = get_vector(in);
  if (m.size() != r.weights.size() || v.size() != r.weights.size()) {
    throw ConfigError("checkpoint: optimizer state does not match the weights");
  }
  r.optimizer = Adam(r.weights.size(), lr, cfg);
  r.optimizer.restore(std::move(m), std::move(v), steps);
  return r;
}

void write_model(std::ostream& out, const world_model::ModelReadout& readout) {
  put_header(out, kKindModel);
  put_matrix(out, readout.state_weights);
  put_vector(out, readout.reward_weights);
  put_f64(out, readout.eta_state);
  put_f64(out, readout.eta_reward);
  put_f64(out, readout.c_state);
  put_f64(out, readout.c_reward);
}

world_model::ModelReadout read_model(std::istream& in) {
  check_header(in, kKindModel);
  world_model::ModelReadout r;
  r.state_weights = get_matrix(in);
  r.reward_weights = get_vector(in);
  if (r.reward_weights.size() != r.state_weights.cols()) {
    throw ConfigError("checkpoint: reward readout does not match the state readout");
  }
  r.eta_state = get_f64(in);
  r.eta_reward = get_f64(in);
  r.c_state = get_f64(in);
  r.c_reward = get_f64(in);
  return r;
}

}  // namespace neurodream::checkpoint
