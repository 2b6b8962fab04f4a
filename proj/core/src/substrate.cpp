#include "neurodream/substrate.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numeric>
#include <ostream>
#include <string>

#include "neurodream/errors.hpp"

namespace neurodream::substrate {

namespace {

enum DumpField : std::uint8_t {
  kFieldTauMem = 1,
  kFieldTauSyn = 2,
  kFieldVThresh = 3,
  kFieldEdgePre = 4,
  kFieldEdgeParallel = 5,
  kFieldEfficacy = 6,
};

void put_le(std::ostream& out, std::uint64_t value, int bytes) {
  for (int b = 0; b < bytes; ++b) {
    out.put(static_cast<char>((value >> (8 * b)) & 0xFF));
  }
}

void put_record(std::ostream& out, std::uint32_t neuron, DumpField field, double value) {
  put_le(out, neuron, 4);
  put_le(out, field, 1);
  std::uint64_t bits = 0;
  static_assert(sizeof(bits) == sizeof(value));
  std::memcpy(&bits, &value, sizeof(bits));
  put_le(out, bits, 8);
}

std::int64_t to_us(double seconds) { return std::llround(seconds * 1e6); }

}  // namespace

void NeuronParams::validate() const {
  if (!(tau_mem > 0.0) || !(tau_syn > 0.0)) {
    throw ConfigError("substrate: time constants must be > 0");
  }
  if (!(v_thresh > v_reset)) throw ConfigError("substrate: v_thresh must exceed v_reset");
  if (!(refractory >= 0.0)) throw ConfigError("substrate: refractory must be >= 0");
  if (!(core_efficacy >= 0.0) || !std::isfinite(core_efficacy)) {
    throw ConfigError("substrate: core_efficacy must be finite and >= 0");
  }
}

void SubstrateConfig::validate() const {
  base.validate();
  if (n_neurons == 0 || n_neurons > kCoreSize * kNumCores) {
    throw ConfigError("substrate: n_neurons must be in [1, " +
                      std::to_string(kCoreSize * kNumCores) + "]");
  }
  if (state_generators < kStateFanIn) {
    throw ConfigError("substrate: need at least 8 state generators for fan-in 8");
  }
  const int fan_in = kStateFanIn + (variant == Variant::kModel ? action_generators : 0);
  if (fan_in > static_cast<int>(kMaxFanIn)) {
    throw ConfigError("substrate: fan-in " + std::to_string(fan_in) + " exceeds 64");
  }
  if (action_generators < 0) throw ConfigError("substrate: negative action_generators");
  if (!(mismatch_cv >= 0.0) || !std::isfinite(mismatch_cv)) {
    throw ConfigError("substrate: mismatch_cv must be finite and >= 0");
  }
  if (sim_dt_us == 0) throw ConfigError("substrate: sim_dt_us must be > 0");
}

std::uint64_t SpikeCounts::total() const {
  return std::accumulate(counts.begin(), counts.end(), std::uint64_t{0});
}

double integration_factor(std::uint64_t out_total, std::uint64_t in_event_count) {
  if (in_event_count == 0) {
    throw ConfigError("integration factor: no incoming events");
  }
  return static_cast<double>(out_total) / static_cast<double>(in_event_count);
}

double integration_factor(const SpikeCounts& out_counts, std::uint64_t in_event_count) {
  return integration_factor(out_counts.total(), in_event_count);
}

Substrate::Substrate(const SubstrateConfig& cfg, std::uint64_t seed) : cfg_(cfg) {
  cfg_.validate();
  build(seed);
}

void Substrate::build(std::uint64_t seed) {
  Rng rng(seed);
  const std::size_t n = cfg_.n_neurons;
  const auto n_state = static_cast<std::uint32_t>(cfg_.state_generators);
  std::uniform_int_distribution<int> parallel_dist(1, kMaxParallel);

  // Partial Fisher-Yates per neuron: 8 distinct state generators.
  std::vector<std::uint32_t> pool(n_state);
  const bool model = cfg_.variant == Variant::kModel;
  connectivity_.edges.reserve(n * (kStateFanIn + (model ? cfg_.action_generators : 0)));
  for (std::uint32_t post = 0; post < n; ++post) {
    std::iota(pool.begin(), pool.end(), 0u);
    for (std::uint32_t k = 0; k < kStateFanIn; ++k) {
      std::uniform_int_distribution<std::uint32_t> pick(k, n_state - 1);
      std::swap(pool[k], pool[pick(rng)]);
      connectivity_.edges.push_back(
          {pool[k], post, static_cast<std::uint8_t>(parallel_dist(rng))});
    }
    if (model) {
      for (int a = 0; a < cfg_.action_generators; ++a) {
        connectivity_.edges.push_back({n_state + static_cast<std::uint32_t>(a), post,
                                       static_cast<std::uint8_t>(parallel_dist(rng))});
      }
    }
  }

  mismatch_.assign(n, Mismatch{});
  if (cfg_.mismatch_cv > 0.0) {
    // Lognormal with unit mean and the requested coefficient of variation.
    const double s = std::sqrt(std::log1p(cfg_.mismatch_cv * cfg_.mismatch_cv));
    std::lognormal_distribution<double> factor(-0.5 * s * s, s);
    for (auto& m : mismatch_) {
      m.tau_mem = factor(rng);
      m.tau_syn = factor(rng);
      m.v_thresh = factor(rng);
    }
  }

  const double dt = cfg_.sim_dt_us * 1e-6;
  mem_decay_.resize(n);
  syn_decay_.resize(n);
  v_thresh_.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    mem_decay_[k] = std::exp(-dt / (cfg_.base.tau_mem * mismatch_[k].tau_mem));
    syn_decay_[k] = std::exp(-dt / (cfg_.base.tau_syn * mismatch_[k].tau_syn));
    v_thresh_[k] = cfg_.base.v_thresh * mismatch_[k].v_thresh;
  }

  // CSR fan-out by generator.
  const auto n_gen = static_cast<std::size_t>(cfg_.total_generators());
  fanout_offsets_.assign(n_gen + 1, 0);
  for (const auto& e : connectivity_.edges) ++fanout_offsets_[e.pre + 1];
  std::partial_sum(fanout_offsets_.begin(), fanout_offsets_.end(), fanout_offsets_.begin());
  fanout_neuron_.resize(connectivity_.edges.size());
  fanout_parallel_.resize(connectivity_.edges.size());
  std::vector<std::uint32_t> cursor(fanout_offsets_.begin(), fanout_offsets_.end() - 1);
  for (const auto& e : connectivity_.edges) {
    const auto slot = cursor[e.pre]++;
    fanout_neuron_[slot] = e.post;
    fanout_parallel_[slot] = e.parallel;
  }

  core_efficacy_.assign(kNumCores, cfg_.base.core_efficacy);
  rebuild_fanout_weights();

  v_.assign(n, cfg_.base.v_reset);
  i_.assign(n, 0.0);
  refractory_left_us_.assign(n, 0.0);
}

void Substrate::rebuild_fanout_weights() {
  fanout_weight_.resize(fanout_neuron_.size());
  for (std::size_t s = 0; s < fanout_neuron_.size(); ++s) {
    fanout_weight_[s] = fanout_parallel_[s] * core_efficacy_[core_of(fanout_neuron_[s])];
  }
}

void Substrate::reset_state() {
  std::fill(v_.begin(), v_.end(), cfg_.base.v_reset);
  std::fill(i_.begin(), i_.end(), 0.0);
  std::fill(refractory_left_us_.begin(), refractory_left_us_.end(), 0.0);
}

void Substrate::set_core_efficacy(double efficacy) {
  for (std::size_t c = 0; c < kNumCores; ++c) set_core_efficacy(c, efficacy);
}

void Substrate::set_core_efficacy(std::size_t core, double efficacy) {
  if (!(efficacy >= 0.0) || !std::isfinite(efficacy)) {
    throw ConfigError("substrate: efficacy must be finite and >= 0");
  }
  core_efficacy_.at(core) = efficacy;
  rebuild_fanout_weights();
}

NeuronParams Substrate::neuron_params(std::size_t neuron) const {
  NeuronParams p = cfg_.base;
  p.tau_mem *= mismatch_.at(neuron).tau_mem;
  p.tau_syn *= mismatch_[neuron].tau_syn;
  p.v_thresh *= mismatch_[neuron].v_thresh;
  p.core_efficacy = core_efficacy_[core_of(neuron)];
  return p;
}

void Substrate::bucket_events(std::span<const encoding::SpikeTrain> trains,
                              std::uint32_t window_us, std::uint32_t dt_us,
                              std::vector<std::uint32_t>& offsets,
                              std::vector<std::uint32_t>& generators) const {
  const std::uint32_t n_steps = window_us / dt_us;
  const auto n_gen = static_cast<std::uint32_t>(cfg_.total_generators());
  offsets.assign(n_steps + 1, 0);
  for (const auto& train : trains) {
    if (train.generator_id >= n_gen) {
      throw ConfigError("substrate: unknown generator id " +
                        std::to_string(train.generator_id));
    }
    for (auto ts : train.timestamps_us) {
      if (ts >= window_us) throw ConfigError("substrate: spike timestamp outside window");
      ++offsets[ts / dt_us + 1];
    }
  }
  std::partial_sum(offsets.begin(), offsets.end(), offsets.begin());
  generators.resize(offsets.back());
  std::vector<std::uint32_t> cursor(offsets.begin(), offsets.end() - 1);
  for (const auto& train : trains) {
    for (auto ts : train.timestamps_us) generators[cursor[ts / dt_us]++] = train.generator_id;
  }
}

SpikeCounts Substrate::run_window(std::span<const encoding::SpikeTrain> trains,
                                  std::uint32_t window_us) {
  const std::uint32_t dt_us = cfg_.sim_dt_us;
  if (window_us % dt_us != 0) {
    throw ConfigError("substrate: window must be a multiple of sim_dt_us");
  }
  if (cfg_.reset_each_window) reset_state();
  bucket_events(trains, window_us, dt_us, step_offsets_, step_generators_);

  const std::size_t n = cfg_.n_neurons;
  const double dt = dt_us * 1e-6;
  const double v_reset = cfg_.base.v_reset;

  spike_scratch_.assign(n, 0.0);
  double* __restrict v = v_.data();
  double* __restrict cur = i_.data();
  double* __restrict refr = refractory_left_us_.data();
  double* __restrict spikes = spike_scratch_.data();
  const double* md = mem_decay_.data();
  const double* sd = syn_decay_.data();
  const double* th = v_thresh_.data();
  const double refractory_us = static_cast<double>(to_us(cfg_.base.refractory));
  const double step_us = dt_us;

  const std::uint32_t n_steps = window_us / dt_us;
  for (std::uint32_t step = 0; step < n_steps; ++step) {
    for (std::size_t k = 0; k < n; ++k) cur[k] *= sd[k];
    for (auto e = step_offsets_[step]; e < step_offsets_[step + 1]; ++e) {
      const auto g = step_generators_[e];
      for (auto s = fanout_offsets_[g]; s < fanout_offsets_[g + 1]; ++s) {
        cur[fanout_neuron_[s]] += fanout_weight_[s];
      }
    }
    for (std::size_t k = 0; k < n; ++k) {
      const bool active = refr[k] <= 0.0;
      const double vk = active ? v[k] * md[k] + cur[k] * dt : v[k];
      const bool spike = active & (vk >= th[k]);
      const double refr_next = std::max(refr[k] - step_us, 0.0);
      v[k] = spike ? v_reset : vk;
      refr[k] = spike ? refractory_us : refr_next;
      spikes[k] += spike ? 1.0 : 0.0;
    }
  }

  SpikeCounts out;
  out.counts.resize(n);
  for (std::size_t k = 0; k < n; ++k) out.counts[k] = static_cast<std::uint32_t>(spikes[k]);
  return out;
}

SpikeCounts Substrate::reference_run_window(std::span<const encoding::SpikeTrain> trains,
                                            std::uint32_t window_us,
                                            std::uint32_t fine_dt_us) {
  if (fine_dt_us == 0 || fine_dt_us * 10 > cfg_.sim_dt_us) {
    throw ConfigError("substrate: reference step must be <= sim_dt_us / 10");
  }
  if (window_us % fine_dt_us != 0) {
    throw ConfigError("substrate: window must be a multiple of the reference step");
  }
  if (cfg_.reset_each_window) reset_state();
  const auto n_gen = static_cast<std::uint32_t>(cfg_.total_generators());
  for (const auto& train : trains) {
    if (train.generator_id >= n_gen) throw ConfigError("substrate: unknown generator id");
    for (auto ts : train.timestamps_us) {
      if (ts >= window_us) throw ConfigError("substrate: spike timestamp outside window");
    }
  }

  const double dt = fine_dt_us * 1e-6;
  const std::size_t n = cfg_.n_neurons;
  SpikeCounts out;
  out.counts.assign(n, 0);
  for (std::uint32_t t0 = 0; t0 < window_us; t0 += fine_dt_us) {
    for (std::size_t k = 0; k < n; ++k) {
      const NeuronParams p = neuron_params(k);
      i_[k] *= std::exp(-dt / p.tau_syn);
    }
    for (const auto& train : trains) {
      for (auto ts : train.timestamps_us) {
        if (ts < t0 || ts >= t0 + fine_dt_us) continue;
        for (const auto& e : connectivity_.edges) {
          if (e.pre == train.generator_id) {
            i_[e.post] += e.parallel * core_efficacy_[core_of(e.post)];
          }
        }
      }
    }
    for (std::size_t k = 0; k < n; ++k) {
      const NeuronParams p = neuron_params(k);
      if (refractory_left_us_[k] > 0.0) {
        refractory_left_us_[k] = std::max(0.0, refractory_left_us_[k] - fine_dt_us);
        continue;
      }
      v_[k] = v_[k] * std::exp(-dt / p.tau_mem) + i_[k] * dt;
      if (v_[k] >= p.v_thresh) {
        ++out.counts[k];
        v_[k] = p.v_reset;
        refractory_left_us_[k] = static_cast<double>(to_us(p.refractory));
      }
    }
  }
  return out;
}

void Substrate::dump(std::ostream& out) const {
  for (std::uint32_t k = 0; k < cfg_.n_neurons; ++k) {
    put_record(out, k, kFieldTauMem, mismatch_[k].tau_mem);
    put_record(out, k, kFieldTauSyn, mismatch_[k].tau_syn);
    put_record(out, k, kFieldVThresh, mismatch_[k].v_thresh);
    put_record(out, k, kFieldEfficacy, core_efficacy_[core_of(k)]);
  }
  for (const auto& e : connectivity_.edges) {
    put_record(out, e.post, kFieldEdgePre, e.pre);
    put_record(out, e.post, kFieldEdgeParallel, e.parallel);
  }
}

std::vector<std::vector<encoding::SpikeTrain>> make_probe_game(
    Variant variant, const encoding::PopulationCodeConfig& enc,
    const pong::PongPhysics& physics, int frames, std::uint64_t seed) {
  Rng rng(seed);
  pong::PongEnv env(physics);
  env.reset(rng());
  std::uniform_int_distribution<int> random_action(0, pong::kNumActions - 1);
  std::vector<std::vector<encoding::SpikeTrain>> windows;
  windows.reserve(static_cast<std::size_t>(frames));
  for (int f = 0; f < frames; ++f) {
    const auto action = pong::action_from_index(random_action(rng));
    const auto rates = variant == Variant::kModel
                           ? encoding::encode_state_action(env.state(), action, enc)
                           : encoding::encode_state(env.state(), enc);
    windows.push_back(encoding::rates_to_trains(rates, enc, rng));
    env.step(action);
  }
  return windows;
}

double measure_integration_factor(
    Substrate& substrate, std::span<const std::vector<encoding::SpikeTrain>> windows,
    std::uint32_t window_us) {
  substrate.reset_state();
  std::uint64_t out = 0;
  std::uint64_t in = 0;
  for (const auto& w : windows) {
    out += substrate.run_window(w, window_us).total();
    in += encoding::count_events(w);
  }
  substrate.reset_state();
  return integration_factor(out, in);
}

CalibrationResult calibrate_efficacy(
    Substrate& substrate, std::span<const std::vector<encoding::SpikeTrain>> windows,
    std::uint32_t window_us, CalibrationTarget target, int max_steps,
    std::vector<CalibrationProbe>* trace_out) {
  if (!(target.lo > 0.0 && target.lo < target.hi && target.hi < 1.0)) {
    throw ConfigError("calibration: target band must satisfy 0 < lo < hi < 1");
  }
  if (max_steps < 1) throw ConfigError("calibration: max_steps must be >= 1");

  CalibrationResult result;
  auto in_band = [&](double f) { return f >= target.lo && f <= target.hi; };
  auto evaluate = [&](double efficacy) {
    substrate.set_core_efficacy(efficacy);
    const double f = measure_integration_factor(substrate, windows, window_us);
    result.trace.push_back({efficacy, f});
    if (trace_out) trace_out->push_back({efficacy, f});
    return f;
  };
  auto finish = [&](double efficacy, double f) {
    substrate.set_core_efficacy(efficacy);
    substrate.reset_state();
    result.efficacy = efficacy;
    result.factor = f;
    auto sorted = result.trace;
    std::stable_sort(sorted.begin(), sorted.end(),
                     [](const auto& a, const auto& b) { return a.efficacy < b.efficacy; });
    for (std::size_t k = 1; k < sorted.size(); ++k) {
      if (sorted[k].factor < sorted[k - 1].factor) result.monotone = false;
    }
    return result;
  };

  double lo = 0.0;
  double hi = substrate.config().base.core_efficacy > 0.0
                  ? substrate.config().base.core_efficacy
                  : 1.0;
  double f_hi = evaluate(hi);
  // Bracket: double until the factor reaches the band's lower edge.
  constexpr int kMaxDoublings = 64;
  for (int d = 0; f_hi < target.lo && d < kMaxDoublings; ++d) {
    lo = hi;
    hi *= 2.0;
    f_hi = evaluate(hi);
  }
  if (in_band(f_hi)) return finish(hi, f_hi);

  for (int step = 0; step < max_steps && f_hi >= target.lo; ++step) {
    const double mid = 0.5 * (lo + hi);
    const double f = evaluate(mid);
    if (in_band(f)) return finish(mid, f);
    (f < target.lo ? lo : hi) = mid;
  }

  // Report the probe closest to the band.
  double best = result.trace.front().factor;
  auto distance = [&](double f) {
    return f < target.lo ? target.lo - f : (f > target.hi ? f - target.hi : 0.0);
  };
  for (const auto& p : result.trace) {
    if (distance(p.factor) < distance(best)) best = p.factor;
  }
  substrate.reset_state();
  throw CalibrationError("calibration: integration factor band [" +
                             std::to_string(target.lo) + ", " + std::to_string(target.hi) +
                             "] not reached; closest factor " + std::to_string(best),
                         best);
}

}  // namespace neurodream::substrate
