#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "neurodream/errors.hpp"
#include "neurodream_cli/commands.hpp"
#include "neurodream_cli/config_file.hpp"

namespace cli = neurodream::cli;

namespace {

struct SharedFlags {
  std::string config_path;
  std::string mode;
  std::vector<std::string> overrides;
  std::optional<int> games;
  std::optional<int> runs;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  std::string out;
};

void add_shared_flags(CLI::App* cmd, SharedFlags& f) {
  cmd->add_option("--config", f.config_path, "flat key = value config file");
  cmd->add_option("--mode", f.mode, "baseline or dreaming")
      ->check(CLI::IsMember({"baseline", "dreaming"}));
  cmd->add_option("--games", f.games, "games per run");
  cmd->add_option("--runs", f.runs, "independent runs");
  cmd->add_option("--seed", f.seed, "master seed");
  cmd->add_option("--set", f.overrides, "key=value override (repeatable)");
}

// File first, then named flags, then --set in order.
cli::Settings resolve(const SharedFlags& f) {
  cli::Settings s;
  if (!f.config_path.empty()) cli::load_config_file(s, f.config_path);
  if (!f.mode.empty()) cli::apply_setting(s, "mode", f.mode);
  if (f.games) s.train.games = *f.games;
  if (f.runs) s.train.runs = *f.runs;
  if (f.seed) s.train.seed = *f.seed;
  if (f.threads) s.runner.threads = *f.threads;
  if (!f.out.empty()) s.runner.out = f.out;
  for (const auto& o : f.overrides) cli::apply_override(s, o);
  return s;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spiking-network Pong agent trained with and without dreaming"};
  app.require_subcommand(1);

  SharedFlags train_flags;
  auto* train = app.add_subcommand("train", "train agents and write metrics");
  add_shared_flags(train, train_flags);
  train->add_option("--out", train_flags.out, "output directory (default $NEURODREAM_OUT or out)");
  train->add_option("--threads", train_flags.threads, "runs trained in parallel");

  std::vector<std::string> plot_inputs;
  std::string plot_out = ".";
  auto* plot = app.add_subcommand("plot", "render return and entropy plots from metrics files");
  plot->add_option("inputs", plot_inputs, "metrics.csv files, optionally label=path")->required();
  plot->add_option("--out", plot_out, "directory for returns.svg and entropy.svg");

  SharedFlags cal_flags;
  std::string overlay;
  auto* calibrate = app.add_subcommand("calibrate", "calibrate the substrate core efficacy");
  add_shared_flags(calibrate, cal_flags);
  calibrate->add_option("--overlay", overlay, "write the found efficacies to this config overlay");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : cli::kExitConfig;
  }

  try {
    if (*train) return cli::cmd_train(resolve(train_flags), std::cout, std::cerr);
    if (*calibrate) {
      return cli::cmd_calibrate(resolve(cal_flags), overlay, std::cout, std::cerr);
    }
    if (*plot) {
      std::vector<cli::PlotInput> inputs;
      for (const auto& arg : plot_inputs) inputs.push_back(cli::parse_plot_input(arg));
      return cli::cmd_plot(inputs, plot_out, std::cout, std::cerr);
    }
  } catch (const neurodream::ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return cli::kExitConfig;
  } catch (const neurodream::CalibrationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return cli::kExitCalibration;
  } catch (const neurodream::NumericalError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return cli::kExitNumerical;
  }
  return cli::kExitConfig;
}
