#include "explorium/trajectory_memory.hpp"

#include <cmath>

#include "explorium/error.hpp"

namespace explorium {

double frame_kernel(std::span<const std::uint8_t> x, std::span<const std::uint8_t> y, double delta, double sigma) {
  if (x.size() != y.size()) throw ConfigurationError("kernel: frame size mismatch");
  double total = 0.0;
  for (std::size_t j = 0; j < x.size(); ++j) {
    const double d = static_cast<double>(x[j]) - static_cast<double>(y[j]);
    const double excess = d * d - delta;
    if (excess > 0.0) total += excess < 1.0 ? excess : 1.0;
  }
  return std::exp(-total / sigma);
}

double frame_kernel(const Frame& x, const Frame& y, double delta, double sigma) {
  if (x.height != y.height || x.width != y.width) throw ConfigurationError("kernel: frame shape mismatch");
  return frame_kernel(std::span<const std::uint8_t>(x.pixels), std::span<const std::uint8_t>(y.pixels), delta,
                      sigma);
}

TrajectoryMemory::TrajectoryMemory(std::size_t capacity, double delta, double sigma)
    : capacity_(capacity), delta_(delta), sigma_(sigma) {
  if (capacity_ == 0) throw ConfigurationError("trajectory memory capacity must be positive");
  if (!(delta_ > 0.0) || !(sigma_ > 0.0)) throw ConfigurationError("kernel delta and sigma must be positive");
}

void TrajectoryMemory::push(FramePtr frame) {
  if (!frame) throw ContractViolation("null frame pushed into trajectory memory");
  frames_.push_back(std::move(frame));
  while (frames_.size() > capacity_) frames_.pop_front();
}

double TrajectoryMemory::visit_frequency(const Frame& query) const {
  double n = 0.0;
  for (const auto& f : frames_) n += frame_kernel(query, *f, delta_, sigma_);
  return n;
}

}  // namespace explorium
