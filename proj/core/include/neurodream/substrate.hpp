#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "neurodream/encoding.hpp"
#include "neurodream/seeds.hpp"

namespace neurodream::substrate {

inline constexpr std::size_t kCoreSize = 256;
inline constexpr std::size_t kNumCores = 2;
inline constexpr std::size_t kMaxFanIn = 64;
inline constexpr int kStateFanIn = 8;
inline constexpr int kMaxParallel = 4;

enum class Variant { kAgent, kModel };

// Time constants in seconds. Membrane potential is dimensionless; the
// efficacy is the synaptic-current increment per single connection event, in
// potential units per second.
struct NeuronParams {
  double tau_mem = 20e-3;
  double tau_syn = 10e-3;
  double v_thresh = 1.0;
  double v_reset = 0.0;
  double refractory = 1e-3;
  double core_efficacy = 0.0;

  void validate() const;
};

struct SubstrateConfig {
  std::size_t n_neurons = 510;
  Variant variant = Variant::kAgent;
  int state_generators = 40;
  int action_generators = 3;  // used by the model variant only
  double mismatch_cv = 0.2;
  NeuronParams base;
  std::uint32_t sim_dt_us = 100;
  bool reset_each_window = false;

  void validate() const;
  int total_generators() const {
    return state_generators + (variant == Variant::kModel ? action_generators : 0);
  }
};

struct Edge {
  std::uint32_t pre = 0;   // generator id
  std::uint32_t post = 0;  // hidden neuron
  std::uint8_t parallel = 1;
  friend bool operator==(const Edge&, const Edge&) = default;
};

struct Connectivity {
  std::vector<Edge> edges;  // grouped by post neuron, in build order
};

// Multiplicative mismatch factors drawn at build time.
struct Mismatch {
  double tau_mem = 1.0;
  double tau_syn = 1.0;
  double v_thresh = 1.0;
};

struct SpikeCounts {
  std::vector<std::uint32_t> counts;
  std::uint64_t total() const;
};

// Ratio of emitted hidden spikes to incoming generator events. Throws
// ConfigError when `in_event_count` is 0.
double integration_factor(const SpikeCounts& out_counts, std::uint64_t in_event_count);
double integration_factor(std::uint64_t out_total, std::uint64_t in_event_count);

// Simulated mixed-signal hidden layer. Neurons 0..255 sit on core 0 and the
// rest on core 1; every neuron on a core uses that core's efficacy. Membrane,
// synaptic and refractory state persist across windows unless
// `reset_each_window` is set. Not safe for concurrent use.
class Substrate {
 public:
  // build_substrate: throws ConfigError when a fan-in or capacity constraint
  // would be violated.
  Substrate(const SubstrateConfig& cfg, std::uint64_t seed);

  SpikeCounts run_window(std::span<const encoding::SpikeTrain> trains,
                         std::uint32_t window_us);

  // Straightforward per-neuron integration of the same dynamics at `fine_dt_us`
  // (which must be <= sim_dt_us / 10). Test oracle.
  SpikeCounts reference_run_window(std::span<const encoding::SpikeTrain> trains,
                                   std::uint32_t window_us, std::uint32_t fine_dt_us);

  void reset_state();

  void set_core_efficacy(double efficacy);             // all cores
  void set_core_efficacy(std::size_t core, double efficacy);
  double core_efficacy(std::size_t core) const { return core_efficacy_.at(core); }

  std::size_t n_neurons() const { return cfg_.n_neurons; }
  std::size_t core_of(std::size_t neuron) const { return neuron / kCoreSize; }
  const SubstrateConfig& config() const { return cfg_; }
  const Connectivity& connectivity() const { return connectivity_; }
  const std::vector<Mismatch>& mismatch() const { return mismatch_; }

  // Effective per-neuron parameters (base times mismatch; efficacy per core).
  NeuronParams neuron_params(std::size_t neuron) const;

  std::span<const double> membrane() const { return v_; }
  std::span<const double> synaptic_current() const { return i_; }

  // Little-endian packed records {u32 neuron, u8 field, f64 value}; see README.
  void dump(std::ostream& out) const;

 private:
  void build(std::uint64_t seed);
  void rebuild_fanout_weights();
  void bucket_events(std::span<const encoding::SpikeTrain> trains, std::uint32_t window_us,
                     std::uint32_t dt_us, std::vector<std::uint32_t>& offsets,
                     std::vector<std::uint32_t>& generators) const;

  SubstrateConfig cfg_;
  Connectivity connectivity_;
  std::vector<Mismatch> mismatch_;
  std::vector<double> core_efficacy_;

  // Per-neuron derived constants for sim_dt_us.
  std::vector<double> mem_decay_;
  std::vector<double> syn_decay_;
  std::vector<double> v_thresh_;

  // Generator -> (neuron, parallel * efficacy) in CSR form.
  std::vector<std::uint32_t> fanout_offsets_;
  std::vector<std::uint32_t> fanout_neuron_;
  std::vector<std::uint8_t> fanout_parallel_;
  std::vector<double> fanout_weight_;

  // Dynamic state.
  std::vector<double> v_;
  std::vector<double> i_;
  std::vector<double> refractory_left_us_;

  // Scratch.
  std::vector<double> spike_scratch_;
  std::vector<std::uint32_t> step_offsets_;
  std::vector<std::uint32_t> step_generators_;
};

// Bisection over the shared efficacy until the integration factor over the
// probe windows lies in [lo, hi].
struct CalibrationTarget {
  double lo = 0.45;
  double hi = 0.58;
};

struct CalibrationProbe {
  double efficacy = 0.0;
  double factor = 0.0;
};

struct CalibrationResult {
  double efficacy = 0.0;
  double factor = 0.0;
  bool monotone = true;  // every evaluated pair was ordered consistently
  std::vector<CalibrationProbe> trace;
};

// Expected-count windows from one random-action rollout of the environment,
// converted to spike trains. Model variant windows also carry the action.
std::vector<std::vector<encoding::SpikeTrain>> make_probe_game(
    Variant variant, const encoding::PopulationCodeConfig& enc,
    const pong::PongPhysics& physics, int frames, std::uint64_t seed);

// Measures the factor for the current efficacy; dynamic state is reset first.
double measure_integration_factor(
    Substrate& substrate, std::span<const std::vector<encoding::SpikeTrain>> windows,
    std::uint32_t window_us);

// Throws ConfigError unless 0 < lo < hi < 1, and CalibrationError
// (carrying the closest factor seen) if the band is not reached within
// `max_steps` bisection steps. On success the substrate holds the found
// efficacy with its dynamic state reset. The result's trace is also attached
// to `trace_out` when given, including on failure.
CalibrationResult calibrate_efficacy(
    Substrate& substrate, std::span<const std::vector<encoding::SpikeTrain>> windows,
    std::uint32_t window_us, CalibrationTarget target = {}, int max_steps = 40,
    std::vector<CalibrationProbe>* trace_out = nullptr);

}  // namespace neurodream::substrate
