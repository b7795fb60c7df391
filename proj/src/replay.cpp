#include "explorium/replay.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

#include "explorium/error.hpp"

namespace explorium {

ReplayMemory::ReplayMemory(std::size_t capacity) : capacity_(capacity) {
  if (capacity_ == 0) throw ConfigurationError("replay capacity must be positive");
  buffer_.reserve(std::min<std::size_t>(capacity_, 1 << 16));
}

void ReplayMemory::push(Transition t) {
  if (count_ < capacity_) {
    buffer_.push_back(std::move(t));
    ++count_;
    return;
  }
  buffer_[head_] = std::move(t);
  head_ = (head_ + 1) % capacity_;
}

const Transition& ReplayMemory::at(std::size_t i) const {
  if (i >= count_) throw std::out_of_range("replay index " + std::to_string(i));
  return buffer_[(head_ + i) % count_];
}

std::vector<std::size_t> ReplayMemory::sample_indices(std::size_t batch, Rng& rng) const {
  if (count_ == 0) throw ContractViolation("sampling from empty replay memory");
  std::vector<std::size_t> idx(batch);
  for (auto& i : idx) i = static_cast<std::size_t>(rng.below(count_));
  return idx;
}

}  // namespace explorium
