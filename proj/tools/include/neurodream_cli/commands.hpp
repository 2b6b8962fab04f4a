#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "neurodream_cli/config_file.hpp"

namespace neurodream::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitConfig = 1,
  kExitCalibration = 2,
  kExitNumerical = 3,
};

// Output root: explicit setting, then $NEURODREAM_OUT, then "out".
std::string resolve_out_dir(const RunnerSettings& runner);

// Layout under the output root:
//   config.txt  manifest.txt  metrics.csv
//   run_NNN/{config.txt, metrics.csv, summary.txt, policy.ckpt, model.ckpt,
//            agent_substrate.bin, model_substrate.bin}
int cmd_train(Settings settings, std::ostream& log, std::ostream& err);

struct PlotInput {
  std::string label;
  std::string path;
};

// "label=path" or a bare path (label from the parent directory name).
PlotInput parse_plot_input(const std::string& arg);

// Writes returns.svg and entropy.svg into `out_dir`.
int cmd_plot(const std::vector<PlotInput>& inputs, const std::string& out_dir, std::ostream& log,
             std::ostream& err);

struct CalibrationReport {
  double agent_efficacy = 0.0;
  double agent_factor = 0.0;
  std::optional<double> model_efficacy;
  std::optional<double> model_factor;
};

// Calibrates the run-0 substrates of the configured mode and writes an overlay
// pinning the found efficacies. `report`, when given, receives the values.
int cmd_calibrate(const Settings& settings, const std::string& overlay_path, std::ostream& log,
                  std::ostream& err, CalibrationReport* report = nullptr);

}  // namespace neurodream::cli
