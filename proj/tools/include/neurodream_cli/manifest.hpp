#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace neurodream::cli {

// SHA-1 of "blob <size>\0<content>", as `git hash-object` computes it.
std::string git_blob_sha1(std::string_view content);

// Current UTC time as 2026-01-31T12:00:00Z.
std::string utc_timestamp();

struct RunEntry {
  std::uint64_t run_id = 0;
  std::string dir;  // relative to the output root
  std::string started;
  std::string finished;
  std::string status;  // ok, calibration_failed, numerical_abort, cancelled
};

struct Manifest {
  std::string config_text;  // serialized effective config
  std::uint64_t seed = 0;
  std::string started;
  std::string finished;
  std::vector<RunEntry> runs;
};

// Flat text: `key = value` header lines, one `run.<id>.<field>` group per run,
// then the config snapshot with every key prefixed by `config.`.
std::string render_manifest(const Manifest& manifest);

}  // namespace neurodream::cli
