#include "neurodream_cli/metrics_csv.hpp"

#include <charconv>
#include <istream>
#include <map>
#include <ostream>
#include <string_view>

#include "neurodream/errors.hpp"
#include "neurodream_cli/config_file.hpp"

namespace neurodream::cli {

namespace {

void put_optional(std::ostream& out, const std::optional<double>& v) {
  if (v) out << format_double(*v);
}

[[noreturn]] void bad_row(std::size_t line, const std::string& why) {
  throw ConfigError("metrics line " + std::to_string(line) + ": " + why);
}

template <typename T>
T parse_field(std::string_view s, std::size_t line, const char* column) {
  T v{};
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) {
    bad_row(line, std::string("bad ") + column + " '" + std::string(s) + "'");
  }
  return v;
}

std::optional<double> parse_optional(std::string_view s, std::size_t line, const char* column) {
  if (s.empty()) return std::nullopt;
  return parse_field<double>(s, line, column);
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    fields.push_back(line.substr(start, comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return fields;
}

}  // namespace

void write_metrics_header(std::ostream& out) {
  out << kMetricsSchema << '\n' << kMetricsHeader << '\n';
}

void write_metrics_row(std::ostream& out, const MetricsRow& row) {
  out << row.run_id << ',' << row.game << ',' << format_double(row.total_return) << ',';
  put_optional(out, row.sliding_return);
  out << ',' << format_double(row.entropy) << ',';
  put_optional(out, row.model_state_loss);
  out << ',';
  put_optional(out, row.model_reward_loss);
  out << '\n';
}

std::vector<MetricsRow> read_metrics(std::istream& in) {
  std::vector<MetricsRow> rows;
  std::string line;
  std::size_t line_no = 0;
  auto next_line = [&]() {
    if (!std::getline(in, line)) return false;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return true;
  };
  if (!next_line() || line != kMetricsSchema) bad_row(1, "missing schema line");
  if (!next_line() || line != kMetricsHeader) bad_row(2, "unexpected header");
  while (next_line()) {
    if (line.empty()) continue;
    const auto f = split(line);
    if (f.size() != 7) bad_row(line_no, "expected 7 fields, got " + std::to_string(f.size()));
    MetricsRow row;
    row.run_id = parse_field<std::uint64_t>(f[0], line_no, "run_id");
    row.game = parse_field<int>(f[1], line_no, "game");
    row.total_return = parse_field<double>(f[2], line_no, "return");
    row.sliding_return = parse_optional(f[3], line_no, "sliding_return");
    row.entropy = parse_field<double>(f[4], line_no, "entropy");
    row.model_state_loss = parse_optional(f[5], line_no, "model_state_loss");
    row.model_reward_loss = parse_optional(f[6], line_no, "model_reward_loss");
    rows.push_back(row);
  }
  return rows;
}

MetricsStream::MetricsStream(std::uint64_t run_id, bool with_model)
    : run_id_(run_id), with_model_(with_model) {}

MetricsRow MetricsStream::next(const GameRecord& record) {
  returns_.push_back(record.total_return);
  MetricsRow row;
  row.run_id = run_id_;
  row.game = record.game;
  row.total_return = record.total_return;
  row.entropy = record.mean_entropy;
  if (returns_.size() >= kSlidingWindow) {
    const std::span<const double> tail(returns_.data() + returns_.size() - kSlidingWindow,
                                       kSlidingWindow);
    row.sliding_return = sliding_return(tail, kSlidingWindow).front();
  }
  if (with_model_) {
    row.model_state_loss = record.model_state_loss;
    row.model_reward_loss = record.model_reward_loss;
  }
  return row;
}

std::vector<RunSeries> split_runs(const std::vector<MetricsRow>& rows) {
  std::map<std::uint64_t, RunSeries> by_run;
  for (const auto& row : rows) {
    auto& series = by_run[row.run_id];
    series.run_id = row.run_id;
    if (row.game != static_cast<int>(series.returns.size()) + 1) {
      throw ConfigError("metrics: run " + std::to_string(row.run_id) + " has game " +
                        std::to_string(row.game) + " out of order");
    }
    series.returns.push_back(row.total_return);
    series.entropies.push_back(row.entropy);
  }
  std::vector<RunSeries> out;
  for (auto& [id, series] : by_run) out.push_back(std::move(series));
  return out;
}

}  // namespace neurodream::cli
