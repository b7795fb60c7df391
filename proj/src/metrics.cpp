#include "explorium/metrics.hpp"

#include <charconv>
#include <cmath>
#include <limits>
#include <sstream>

namespace explorium {

namespace {

double mean_or_nan(double sum, std::uint64_t count) {
  return count == 0 ? std::numeric_limits<double>::quiet_NaN() : sum / static_cast<double>(count);
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

double cell_double(const std::string& s) {
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) throw FormatError("metrics: bad number '" + s + "'");
  return v;
}

std::uint64_t cell_u64(const std::string& s) {
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty()) {
    throw FormatError("metrics: bad integer '" + s + "'");
  }
  return v;
}

}  // namespace

std::string csv_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return format_double(v);
}

std::string to_csv(const MetricsRow& r) {
  std::string s = std::to_string(r.step) + "," + std::to_string(r.episode);
  for (double v : {r.episode_reward, r.running_avg_100, r.epsilon, r.q_loss_mean, r.model_loss, r.uncertainty_mean,
                   r.nD_mean}) {
    s += "," + csv_number(v);
  }
  return s + "," + std::to_string(r.wall_ms);
}

MetricsRow parse_metrics_row(const std::string& line) {
  const auto cells = split_csv(line);
  if (cells.size() != 10) throw FormatError("metrics: expected 10 columns, got " + std::to_string(cells.size()));
  MetricsRow r;
  r.step = cell_u64(cells[0]);
  r.episode = cell_u64(cells[1]);
  r.episode_reward = cell_double(cells[2]);
  r.running_avg_100 = cell_double(cells[3]);
  r.epsilon = cell_double(cells[4]);
  r.q_loss_mean = cell_double(cells[5]);
  r.model_loss = cell_double(cells[6]);
  r.uncertainty_mean = cell_double(cells[7]);
  r.nD_mean = cell_double(cells[8]);
  r.wall_ms = cell_u64(cells[9]);
  return r;
}

double RunningAverage::push(double v) {
  values_.push_back(v);
  if (values_.size() > window_) values_.pop_front();
  // Summed afresh each time so long runs do not accumulate rounding drift.
  sum_ = 0.0;
  for (double x : values_) sum_ += x;
  return value();
}

double RunningAverage::value() const {
  return values_.empty() ? 0.0 : sum_ / static_cast<double>(values_.size());
}

MetricsRow summarize_episode(const EpisodeRecord& rec, std::uint64_t step, std::uint64_t episode, double running_avg,
                             std::uint64_t wall_ms) {
  MetricsRow row;
  row.step = step;
  row.episode = episode;
  row.episode_reward = rec.reward;
  row.running_avg_100 = running_avg;
  row.epsilon = rec.epsilon;
  row.q_loss_mean = mean_or_nan(rec.q_loss_sum, rec.q_loss_count);
  row.model_loss = mean_or_nan(rec.model_loss_sum, rec.model_loss_count);
  row.uncertainty_mean = mean_or_nan(rec.uncertainty_sum, rec.selections);
  row.nD_mean = mean_or_nan(rec.visits_sum, rec.selections);
  row.wall_ms = wall_ms;
  return row;
}

std::string diagnostics_header(std::size_t n_actions) {
  std::string s = "step,action";
  for (const char* prefix : {"mu_", "sigma_", "nD_"}) {
    for (std::size_t a = 0; a < n_actions; ++a) s += "," + std::string(prefix) + std::to_string(a);
  }
  return s + ",epsilon,score_chosen";
}

std::string to_csv(const Selection& sel) {
  std::string s = std::to_string(sel.step) + "," + std::to_string(sel.action);
  for (double v : sel.mu) s += "," + csv_number(v);
  for (double v : sel.sigma) s += "," + csv_number(v);
  if (sel.nD.empty()) {
    for (std::size_t a = 0; a < sel.mu.size(); ++a) s += ",nan";
  } else {
    for (double v : sel.nD) s += "," + csv_number(v);
  }
  return s + "," + csv_number(sel.epsilon) + "," + csv_number(sel.score_chosen);
}

CsvFile::CsvFile(const std::filesystem::path& path, const std::string& header) : path_(path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  out_.open(path, std::ios::binary | std::ios::trunc);
  if (!out_) throw Error("cannot open " + path.string() + " for writing");
  write_line(header);
}

void CsvFile::write_line(const std::string& line) {
  out_ << line << '\n';
  if (!out_) throw Error("write failed: " + path_.string());
}

void CsvFile::flush() {
  out_.flush();
  if (!out_) throw Error("write failed: " + path_.string());
}

std::uint64_t WallClock::elapsed_ms() const {
  if (frozen_) return 0;
  const auto d = std::chrono::steady_clock::now() - start_;
  return static_cast<std::uint64_t>(std::chrono::duration_cast<std::chrono::milliseconds>(d).count());
}

}  // namespace explorium
