#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "neurodream/trainer.hpp"

namespace neurodream::cli {

inline constexpr const char* kMetricsSchema = "# neurodream-metrics v1";
inline constexpr const char* kMetricsHeader =
    "run_id,game,return,sliding_return,entropy,model_state_loss,model_reward_loss";
inline constexpr std::size_t kSlidingWindow = 50;

// Optional columns are written empty: sliding_return before game 50, model
// losses in baseline mode.
struct MetricsRow {
  std::uint64_t run_id = 0;
  int game = 0;
  double total_return = 0.0;
  std::optional<double> sliding_return;
  double entropy = 0.0;
  std::optional<double> model_state_loss;
  std::optional<double> model_reward_loss;
};

void write_metrics_header(std::ostream& out);
void write_metrics_row(std::ostream& out, const MetricsRow& row);

// Rejects a missing schema line, wrong header, wrong field count or
// unparsable numbers with a ConfigError naming the 1-based line.
std::vector<MetricsRow> read_metrics(std::istream& in);

// Builds CSV rows incrementally from per-game records; the sliding value is
// the same as sliding_return() over the returns seen so far.
class MetricsStream {
 public:
  MetricsStream(std::uint64_t run_id, bool with_model);
  MetricsRow next(const GameRecord& record);

 private:
  std::uint64_t run_id_;
  bool with_model_;
  std::vector<double> returns_;
};

struct RunSeries {
  std::uint64_t run_id = 0;
  std::vector<double> returns;
  std::vector<double> entropies;
};

// Groups rows by run id (ascending); games must be 1, 2, ... within a run.
std::vector<RunSeries> split_runs(const std::vector<MetricsRow>& rows);

}  // namespace neurodream::cli
