#pragma once

#include <chrono>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "explorium/agent.hpp"

namespace explorium {

inline constexpr const char* kMetricsHeader =
    "step,episode,episode_reward,running_avg_100,epsilon,q_loss_mean,model_loss,uncertainty_mean,nD_mean,wall_ms";

struct MetricsRow {
  std::uint64_t step = 0;
  std::uint64_t episode = 0;
  double episode_reward = 0.0;
  double running_avg_100 = 0.0;
  double epsilon = 0.0;
  double q_loss_mean = 0.0;  // NaN when no update happened during the episode
  double model_loss = 0.0;
  double uncertainty_mean = 0.0;
  double nD_mean = 0.0;
  std::uint64_t wall_ms = 0;
};

/// Decimal text for CSV cells; non-finite values print as "nan"/"inf"/"-inf".
std::string csv_number(double v);

std::string to_csv(const MetricsRow& row);
/// Throws FormatError when the line does not have the declared columns and types.
MetricsRow parse_metrics_row(const std::string& line);

/// Mean of the last (up to) 100 completed episode rewards.
class RunningAverage {
 public:
  explicit RunningAverage(std::size_t window = 100) : window_(window) {}
  double push(double v);
  double value() const;
  std::size_t count() const { return values_.size(); }

 private:
  std::size_t window_;
  std::deque<double> values_;
  double sum_ = 0.0;
};

/// Builds the metrics row summarising one finished episode.
MetricsRow summarize_episode(const EpisodeRecord& rec, std::uint64_t step, std::uint64_t episode, double running_avg,
                             std::uint64_t wall_ms);

std::string diagnostics_header(std::size_t n_actions);
std::string to_csv(const Selection& sel);

/// Line-buffered text file that fails loudly on I/O errors.
class CsvFile {
 public:
  CsvFile(const std::filesystem::path& path, const std::string& header);
  void write_line(const std::string& line);
  void flush();

 private:
  std::filesystem::path path_;
  std::ofstream out_;
};

/// Milliseconds since construction, or always 0 in strict mode so files stay
/// byte-identical across runs.
class WallClock {
 public:
  explicit WallClock(bool frozen) : frozen_(frozen), start_(std::chrono::steady_clock::now()) {}
  std::uint64_t elapsed_ms() const;

 private:
  bool frozen_;
  std::chrono::steady_clock::time_point start_;
};

}  // namespace explorium
