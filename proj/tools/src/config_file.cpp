#include "neurodream_cli/config_file.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <sstream>

#include "neurodream/errors.hpp"

namespace neurodream::cli {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

[[noreturn]] void bad_value(std::string_view key, std::string_view value, const char* expected) {
  throw ConfigError("config: " + std::string(key) + " = '" + std::string(value) +
                    "' is not " + expected);
}

double parse_double(std::string_view key, std::string_view s) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) bad_value(key, s, "a number");
  return v;
}

template <typename Int>
Int parse_int(std::string_view key, std::string_view s) {
  Int v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) bad_value(key, s, "an integer");
  return v;
}

bool parse_bool(std::string_view key, std::string_view s) {
  if (s == "true" || s == "1") return true;
  if (s == "false" || s == "0") return false;
  bad_value(key, s, "true or false");
}

struct Entry {
  std::string key;
  std::function<std::string(const Settings&)> get;
  std::function<void(Settings&, std::string_view key, std::string_view value)> set;
};

std::string to_text(double v) { return format_double(v); }
std::string to_text(bool v) { return v ? "true" : "false"; }
template <typename Int>
std::string to_text(Int v) {
  return std::to_string(v);
}

void from_text(std::string_view k, std::string_view v, double& out) { out = parse_double(k, v); }
void from_text(std::string_view k, std::string_view v, bool& out) { out = parse_bool(k, v); }
template <typename Int>
void from_text(std::string_view k, std::string_view v, Int& out) {
  out = parse_int<Int>(k, v);
}

// `access` is a generic lambda returning a reference into Settings.
template <typename Access>
Entry field(std::string key, Access access) {
  return {std::move(key), [access](const Settings& s) { return to_text(access(s)); },
          [access](Settings& s, std::string_view k, std::string_view v) {
            from_text(k, v, access(s));
          }};
}

#define ND_KEY(name, path) field(name, [](auto& s) -> auto& { return s.path; })

std::vector<Entry> make_entries() {
  std::vector<Entry> e;
  e.push_back({"mode",
               [](const Settings& s) {
                 return std::string(s.train.mode == Mode::kBaseline ? "baseline" : "dreaming");
               },
               [](Settings& s, std::string_view k, std::string_view v) {
                 if (v == "baseline") {
                   s.train.mode = Mode::kBaseline;
                 } else if (v == "dreaming") {
                   s.train.mode = Mode::kDreaming;
                 } else {
                   bad_value(k, v, "baseline or dreaming");
                 }
               }});
  e.push_back(ND_KEY("games", train.games));
  e.push_back(ND_KEY("runs", train.runs));
  e.push_back(ND_KEY("seed", train.seed));
  e.push_back({"out", [](const Settings& s) { return s.runner.out; },
               [](Settings& s, std::string_view, std::string_view v) { s.runner.out = v; }});
  e.push_back({"threads", [](const Settings& s) { return std::to_string(s.runner.threads); },
               [](Settings& s, std::string_view k, std::string_view v) {
                 s.runner.threads = parse_int<int>(k, v);
                 if (s.runner.threads < 1) bad_value(k, v, "a positive integer");
               }});
  e.push_back(ND_KEY("t_awake", train.t_awake));
  e.push_back(ND_KEY("t_dream", train.t_dream));
  e.push_back(ND_KEY("gamma", train.gamma));
  e.push_back({"eta_policy",
               [](const Settings& s) {
                 return s.train.eta_policy ? format_double(*s.train.eta_policy)
                                           : std::string("auto");
               },
               [](Settings& s, std::string_view k, std::string_view v) {
                 if (v == "auto") {
                   s.train.eta_policy.reset();
                 } else {
                   s.train.eta_policy = parse_double(k, v);
                 }
               }});
  e.push_back(ND_KEY("eta_policy_baseline", train.eta_policy_baseline));
  e.push_back(ND_KEY("eta_policy_dreaming", train.eta_policy_dreaming));
  e.push_back(ND_KEY("eta_state", train.eta_state));
  e.push_back(ND_KEY("eta_reward", train.eta_reward));
  e.push_back(ND_KEY("policy_init_std", train.policy_init_std));
  e.push_back(ND_KEY("filter_alpha", train.filter_alpha));
  e.push_back(ND_KEY("clamp_dream_reward", train.clamp_dream_reward));
  e.push_back(ND_KEY("absolute_model_targets", train.absolute_model_targets));

  e.push_back(ND_KEY("adam.beta1", train.adam.beta1));
  e.push_back(ND_KEY("adam.beta2", train.adam.beta2));
  e.push_back(ND_KEY("adam.epsilon", train.adam.epsilon));

  e.push_back(ND_KEY("physics.ball_speed", train.physics.ball_speed));
  e.push_back(ND_KEY("physics.paddle_speed", train.physics.paddle_speed));
  e.push_back(ND_KEY("physics.paddle_half_height", train.physics.paddle_half_height));
  e.push_back(ND_KEY("physics.opp_speed", train.physics.opp_speed));
  e.push_back(ND_KEY("physics.opp_dead_band", train.physics.opp_dead_band));
  e.push_back(ND_KEY("physics.point_terminal", train.physics.point_terminal));

  e.push_back(ND_KEY("encoding.generators_per_variable", train.encoding.generators_per_variable));
  e.push_back(ND_KEY("encoding.sigma", train.encoding.sigma));
  e.push_back(ND_KEY("encoding.peak_spikes_per_window", train.encoding.peak_spikes_per_window));
  e.push_back(ND_KEY("encoding.window_us", train.encoding.window_us));

  e.push_back(ND_KEY("substrate.n_neurons", train.substrate.n_neurons));
  e.push_back(ND_KEY("substrate.mismatch_cv", train.substrate.mismatch_cv));
  e.push_back(ND_KEY("substrate.sim_dt_us", train.substrate.sim_dt_us));
  e.push_back(ND_KEY("substrate.reset_each_window", train.substrate.reset_each_window));
  e.push_back(ND_KEY("substrate.tau_mem", train.substrate.base.tau_mem));
  e.push_back(ND_KEY("substrate.tau_syn", train.substrate.base.tau_syn));
  e.push_back(ND_KEY("substrate.v_thresh", train.substrate.base.v_thresh));
  e.push_back(ND_KEY("substrate.v_reset", train.substrate.base.v_reset));
  e.push_back(ND_KEY("substrate.refractory", train.substrate.base.refractory));
  e.push_back(ND_KEY("substrate.core_efficacy", train.substrate.base.core_efficacy));

  e.push_back(ND_KEY("calibration.enabled", train.calibration.enabled));
  e.push_back(ND_KEY("calibration.lo", train.calibration.target.lo));
  e.push_back(ND_KEY("calibration.hi", train.calibration.target.hi));
  e.push_back(ND_KEY("calibration.max_steps", train.calibration.max_steps));
  e.push_back(ND_KEY("calibration.probe_games", train.calibration.probe_games));
  e.push_back(ND_KEY("calibration.agent_efficacy", train.calibration.agent_efficacy));
  e.push_back(ND_KEY("calibration.model_efficacy", train.calibration.model_efficacy));
  return e;
}

#undef ND_KEY

const std::vector<Entry>& entries() {
  static const std::vector<Entry> table = make_entries();
  return table;
}

}  // namespace

std::string format_double(double value) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, ptr);
}

std::vector<std::pair<std::string, std::string>> parse_config_text(std::string_view text) {
  std::vector<std::pair<std::string, std::string>> out;
  int line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
    }
    const auto key = trim(line.substr(0, eq));
    const auto value = trim(line.substr(eq + 1));
    if (key.empty()) {
      throw ConfigError("config line " + std::to_string(line_no) + ": empty key");
    }
    out.emplace_back(std::string(key), std::string(value));
  }
  return out;
}

void apply_setting(Settings& settings, std::string_view key, std::string_view value) {
  for (const auto& entry : entries()) {
    if (entry.key == key) {
      entry.set(settings, key, value);
      return;
    }
  }
  throw ConfigError("config: unknown key '" + std::string(key) + "'");
}

void apply_override(Settings& settings, std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos) {
    throw ConfigError("--set expects key=value, got '" + std::string(assignment) + "'");
  }
  apply_setting(settings, trim(assignment.substr(0, eq)), trim(assignment.substr(eq + 1)));
}

void load_config_file(Settings& settings, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  for (const auto& [key, value] : parse_config_text(buffer.str())) {
    try {
      apply_setting(settings, key, value);
    } catch (const ConfigError& e) {
      throw ConfigError(path + ": " + e.what());
    }
  }
}

std::string serialize_config(const Settings& settings) {
  std::string out;
  for (const auto& entry : entries()) {
    out += entry.key;
    out += " = ";
    out += entry.get(settings);
    out += '\n';
  }
  return out;
}

std::vector<std::string> config_keys() {
  std::vector<std::string> keys;
  for (const auto& entry : entries()) keys.push_back(entry.key);
  return keys;
}

}  // namespace neurodream::cli
