#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "neurodream/trainer.hpp"

namespace neurodream::cli {

// Settings outside TrainConfig that the CLI also reads from the config file.
struct RunnerSettings {
  std::string out;  // empty: NEURODREAM_OUT, then "out"
  int threads = 1;
};

struct Settings {
  TrainConfig train;
  RunnerSettings runner;
};

// Parses flat `key = value` text. `#` starts a comment, blank lines are
// ignored, a repeated key keeps the last value. Throws ConfigError naming the
// line on malformed input.
std::vector<std::pair<std::string, std::string>> parse_config_text(std::string_view text);

// Throws ConfigError for unknown keys or unparsable values.
void apply_setting(Settings& settings, std::string_view key, std::string_view value);

// "key=value" as given to --set.
void apply_override(Settings& settings, std::string_view assignment);

void load_config_file(Settings& settings, const std::string& path);

// Every key with its effective value, one `key = value` per line, in a fixed
// order. Parsing this text back reproduces the settings exactly.
std::string serialize_config(const Settings& settings);

// All recognised keys, in serialization order.
std::vector<std::string> config_keys();

// Shortest decimal that parses back to the same double.
std::string format_double(double value);

}  // namespace neurodream::cli
