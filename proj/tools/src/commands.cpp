#include "neurodream_cli/commands.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#include "neurodream/checkpoint.hpp"
#include "neurodream/errors.hpp"
#include "neurodream_cli/manifest.hpp"
#include "neurodream_cli/metrics_csv.hpp"
#include "neurodream_cli/svg_plot.hpp"

namespace neurodream::cli {

namespace fs = std::filesystem;

namespace {

std::string run_dir_name(std::uint64_t run_id) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "run_%03llu", static_cast<unsigned long long>(run_id));
  return buf;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw ConfigError("cannot write " + path.string());
}

std::ofstream open_binary(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path.string());
  return out;
}

std::string run_summary(const RunMetrics& m) {
  std::string s;
  auto line = [&](const std::string& key, const std::string& value) {
    s += key + " = " + value + "\n";
  };
  line("run_id", std::to_string(m.run_id));
  line("games", std::to_string(m.games.size()));
  line("agent.efficacy", format_double(m.agent_calibration.efficacy));
  line("agent.integration_factor", format_double(m.agent_calibration.factor));
  if (m.model_calibration) {
    line("model.efficacy", format_double(m.model_calibration->efficacy));
    line("model.integration_factor", format_double(m.model_calibration->factor));
  }
  line("real_frames", std::to_string(m.real_frames));
  line("dream_frames", std::to_string(m.dream_frames));
  line("policy_updates", std::to_string(m.policy_updates));
  line("model_updates", std::to_string(m.model_updates));
  line("virtual_time_s", format_double(m.virtual_time_s));
  line("wall_calibration_s", format_double(m.wall_calibration_s));
  line("wall_awake_s", format_double(m.wall_awake_s));
  line("wall_dream_s", format_double(m.wall_dream_s));
  return s;
}

struct RunOutcome {
  std::exception_ptr error;
  bool completed = false;
};

// Runs one training run into `dir`, stopping early once `cancel` is set.
RunOutcome execute_run(const TrainConfig& cfg, std::uint64_t run_id, const fs::path& dir,
                       const std::atomic<bool>& cancel) {
  try {
    std::ofstream csv(dir / "metrics.csv", std::ios::binary);
    if (!csv) throw ConfigError("cannot write " + (dir / "metrics.csv").string());
    write_metrics_header(csv);
    csv.flush();

    Trainer trainer(cfg, run_id);
    MetricsStream stream(run_id, trainer.model_readout() != nullptr);
    for (int g = 0; g < cfg.games; ++g) {
      if (cancel.load()) return {};
      const GameRecord record = trainer.play_iteration();
      write_metrics_row(csv, stream.next(record));
      csv.flush();
    }

    write_text(dir / "summary.txt", run_summary(trainer.metrics()));
    auto policy_out = open_binary(dir / "policy.ckpt");
    checkpoint::write_policy(policy_out, trainer.policy_readout());
    auto agent_out = open_binary(dir / "agent_substrate.bin");
    trainer.agent_substrate().dump(agent_out);
    if (const auto* model = trainer.model_readout()) {
      auto model_out = open_binary(dir / "model.ckpt");
      checkpoint::write_model(model_out, *model);
      auto model_sub = open_binary(dir / "model_substrate.bin");
      trainer.model_substrate()->dump(model_sub);
    }
    return {nullptr, true};
  } catch (...) {
    return {std::current_exception(), false};
  }
}

std::string status_of(const RunOutcome& outcome) {
  if (!outcome.error) return outcome.completed ? "ok" : "cancelled";
  try {
    std::rethrow_exception(outcome.error);
  } catch (const CalibrationError&) {
    return "calibration_failed";
  } catch (const NumericalError&) {
    return "numerical_abort";
  } catch (...) {
    return "error";
  }
}

void merge_metrics(const fs::path& root, const std::vector<RunEntry>& runs) {
  std::ofstream out(root / "metrics.csv", std::ios::binary);
  if (!out) throw ConfigError("cannot write " + (root / "metrics.csv").string());
  write_metrics_header(out);
  for (const auto& r : runs) {
    std::ifstream in(root / r.dir / "metrics.csv", std::ios::binary);
    std::string line;
    int skip = 2;  // schema and header
    while (std::getline(in, line)) {
      if (skip > 0) {
        --skip;
        continue;
      }
      out << line << '\n';
    }
  }
}

// An inverted band is a config error; one outside (0,1) cannot be calibrated.
int check_calibration_band(const TrainConfig& cfg, std::ostream& err) {
  if (!cfg.calibration.enabled) return kExitOk;
  const auto& band = cfg.calibration.target;
  if (!(band.lo < band.hi)) {
    err << "error: calibration band needs lo < hi\n";
    return kExitConfig;
  }
  if (!(band.lo > 0.0 && band.hi < 1.0)) {
    err << "error: target band [" << format_double(band.lo) << ", " << format_double(band.hi)
        << "] is unreachable: calibration requires 0 < lo < hi < 1\n";
    err << "bisection trace (efficacy, factor): none, bisection not started\n";
    return kExitCalibration;
  }
  return kExitOk;
}

}  // namespace

std::string resolve_out_dir(const RunnerSettings& runner) {
  if (!runner.out.empty()) return runner.out;
  if (const char* env = std::getenv("NEURODREAM_OUT"); env != nullptr && *env != '\0') {
    return env;
  }
  return "out";
}

int cmd_train(Settings settings, std::ostream& log, std::ostream& err) {
  settings.runner.out = resolve_out_dir(settings.runner);
  const TrainConfig& cfg = settings.train;
  try {
    cfg.validate();
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  }
  if (const int code = check_calibration_band(cfg, err); code != kExitOk) return code;

  const fs::path root(settings.runner.out);
  Manifest manifest;
  manifest.config_text = serialize_config(settings);
  manifest.seed = cfg.seed;
  manifest.started = utc_timestamp();
  try {
    fs::create_directories(root);
    write_text(root / "config.txt", manifest.config_text);
    for (int r = 0; r < cfg.runs; ++r) {
      RunEntry entry;
      entry.run_id = static_cast<std::uint64_t>(r);
      entry.dir = run_dir_name(entry.run_id);
      fs::create_directories(root / entry.dir);
      write_text(root / entry.dir / "config.txt", manifest.config_text);
      manifest.runs.push_back(entry);
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  }

  const auto n_runs = static_cast<std::size_t>(cfg.runs);
  std::vector<RunOutcome> outcomes(n_runs);
  std::atomic<std::size_t> next{0};
  std::atomic<bool> cancel{false};
  std::mutex log_mutex;
  auto worker = [&]() {
    for (std::size_t r = next++; r < n_runs; r = next++) {
      auto& entry = manifest.runs[r];
      entry.started = utc_timestamp();
      {
        std::lock_guard lock(log_mutex);
        log << "run " << r << ": started\n";
      }
      outcomes[r] = execute_run(cfg, entry.run_id, root / entry.dir, cancel);
      entry.finished = utc_timestamp();
      entry.status = status_of(outcomes[r]);
      if (outcomes[r].error) cancel = true;  // stop the other runs early
      std::lock_guard lock(log_mutex);
      log << "run " << r << ": " << entry.status << '\n';
    }
  };
  const std::size_t n_threads = std::min(static_cast<std::size_t>(settings.runner.threads), n_runs);
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < n_threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  manifest.finished = utc_timestamp();
  try {
    merge_metrics(root, manifest.runs);
    write_text(root / "manifest.txt", render_manifest(manifest));
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  }

  for (std::size_t r = 0; r < n_runs; ++r) {
    const auto& error = outcomes[r].error;
    if (!error) continue;
    try {
      std::rethrow_exception(error);
    } catch (const CalibrationError& e) {
      err << "run " << r << ": " << e.what() << '\n';
      return kExitCalibration;
    } catch (const NumericalError& e) {
      err << "run " << r << ": numerical abort: " << e.what() << '\n';
      return kExitNumerical;
    } catch (const std::exception& e) {
      err << "run " << r << ": " << e.what() << '\n';
      return kExitConfig;
    }
  }
  log << "wrote " << (root / "metrics.csv").string() << '\n';
  return kExitOk;
}

PlotInput parse_plot_input(const std::string& arg) {
  const auto eq = arg.find('=');
  if (eq != std::string::npos) return {arg.substr(0, eq), arg.substr(eq + 1)};
  const fs::path p(arg);
  std::string label = p.parent_path().filename().string();
  if (label.empty()) label = p.stem().string();
  return {label, arg};
}

int cmd_plot(const std::vector<PlotInput>& inputs, const std::string& out_dir, std::ostream& log,
             std::ostream& err) {
  if (inputs.empty()) {
    err << "error: plot needs at least one metrics file\n";
    return kExitConfig;
  }
  std::vector<PlotSeries> returns;
  std::vector<PlotSeries> entropy;
  for (const auto& input : inputs) {
    try {
      std::ifstream in(input.path, std::ios::binary);
      if (!in) throw ConfigError("cannot read metrics file");
      const auto runs = split_runs(read_metrics(in));
      if (runs.empty()) throw ConfigError("no data rows");
      std::vector<std::vector<double>> sliding;
      std::vector<std::vector<double>> entropies;
      for (const auto& run : runs) {
        sliding.push_back(sliding_return(run.returns, kSlidingWindow));
        entropies.push_back(run.entropies);
      }
      returns.push_back({input.label, static_cast<int>(kSlidingWindow), aggregate_runs(sliding)});
      entropy.push_back({input.label, 1, aggregate_runs(entropies)});
    } catch (const ConfigError& e) {
      err << "error: " << input.path << ": " << e.what() << '\n';
      return kExitConfig;
    }
  }
  try {
    fs::create_directories(out_dir);
    PlotStyle style;
    style.title = "Average return over the last 50 games";
    style.y_label = "return";
    write_text(fs::path(out_dir) / "returns.svg", render_plot(returns, style));
    style.title = "Mean policy entropy per game";
    style.y_label = "entropy (nats)";
    write_text(fs::path(out_dir) / "entropy.svg", render_plot(entropy, style));
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  }
  log << "wrote " << (fs::path(out_dir) / "returns.svg").string() << " and "
      << (fs::path(out_dir) / "entropy.svg").string() << '\n';
  return kExitOk;
}

int cmd_calibrate(const Settings& settings, const std::string& overlay_path, std::ostream& log,
                  std::ostream& err, CalibrationReport* report) {
  TrainConfig cfg = settings.train;
  cfg.calibration.enabled = true;
  try {
    cfg.validate();
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  }

  if (const int code = check_calibration_band(cfg, err); code != kExitOk) return code;

  CalibrationReport result;
  std::vector<substrate::Variant> variants = {substrate::Variant::kAgent};
  if (cfg.mode == Mode::kDreaming) variants.push_back(substrate::Variant::kModel);
  for (const auto variant : variants) {
    const char* name = variant == substrate::Variant::kAgent ? "agent" : "model";
    std::vector<substrate::CalibrationProbe> trace;
    try {
      auto network = build_network(cfg, 0, variant);
      const auto summary = calibrate_network(cfg, 0, network, &trace);
      log << name << ": integration factor " << format_double(summary.factor)
          << " at core efficacy " << format_double(summary.efficacy) << " (" << summary.probes
          << " probes)\n";
      if (variant == substrate::Variant::kAgent) {
        result.agent_efficacy = summary.efficacy;
        result.agent_factor = summary.factor;
      } else {
        result.model_efficacy = summary.efficacy;
        result.model_factor = summary.factor;
      }
    } catch (const CalibrationError& e) {
      err << "error: " << name << ": " << e.what() << '\n';
      err << "bisection trace (efficacy, factor):\n";
      for (const auto& p : trace) {
        err << "  " << format_double(p.efficacy) << ", " << format_double(p.factor) << '\n';
      }
      if (report) *report = result;
      return kExitCalibration;
    } catch (const ConfigError& e) {
      err << "error: " << e.what() << '\n';
      return kExitConfig;
    }
  }
  if (report) *report = result;

  if (!overlay_path.empty()) {
    std::string text = "# core efficacies found for seed " + std::to_string(cfg.seed) + "\n";
    text += "calibration.enabled = false\n";
    text += "calibration.agent_efficacy = " + format_double(result.agent_efficacy) + "\n";
    if (result.model_efficacy) {
      text += "calibration.model_efficacy = " + format_double(*result.model_efficacy) + "\n";
    }
    try {
      write_text(overlay_path, text);
    } catch (const ConfigError& e) {
      err << "error: " << e.what() << '\n';
      return kExitConfig;
    }
    log << "wrote " << overlay_path << '\n';
  }
  return kExitOk;
}

}  // namespace neurodream::cli
