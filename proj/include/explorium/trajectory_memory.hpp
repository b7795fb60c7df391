#pragma once

#include <cstddef>
#include <cstdint>
#include <deque>
#include <span>

#include "explorium/preprocess.hpp"

namespace explorium {

/// Similarity of two frames on the raw 0..255 pixel scale:
///   k(x, y) = exp(-(1/sigma) * sum_j min(max((x_j - y_j)^2 - delta, 0), 1))
/// Each pixel contributes at most 1, so exp(-P/sigma) <= k <= 1.
double frame_kernel(std::span<const std::uint8_t> x, std::span<const std::uint8_t> y, double delta, double sigma);
double frame_kernel(const Frame& x, const Frame& y, double delta, double sigma);

/// Ring buffer of the d most recently visited frames; n_D(s) = sum_i k(s, s_i)
/// estimates how often s was visited recently.
class TrajectoryMemory {
 public:
  explicit TrajectoryMemory(std::size_t capacity = 20, double delta = 50.0, double sigma = 100.0);

  void push(FramePtr frame);
  void clear() { frames_.clear(); }

  double visit_frequency(const Frame& query) const;

  std::size_t size() const { return frames_.size(); }
  std::size_t capacity() const { return capacity_; }
  double delta() const { return delta_; }
  double sigma() const { return sigma_; }
  const std::deque<FramePtr>& frames() const { return frames_; }

 private:
  std::size_t capacity_;
  double delta_;
  double sigma_;
  std::deque<FramePtr> frames_;
};

}  // namespace explorium
