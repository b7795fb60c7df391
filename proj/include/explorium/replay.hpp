#pragma once

#include <cstddef>
#include <vector>

#include "explorium/preprocess.hpp"
#include "explorium/rng.hpp"

namespace explorium {

struct Transition {
  FrameStack state;
  ActionId action = 0;
  double reward = 0.0;
  FrameStack next_state;
  bool done = false;
};

/// Fixed-capacity FIFO ring of transitions.
class ReplayMemory {
 public:
  explicit ReplayMemory(std::size_t capacity);

  void push(Transition t);
  std::size_t size() const { return count_; }
  std::size_t capacity() const { return capacity_; }

  /// i-th oldest transition still held.
  const Transition& at(std::size_t i) const;

  /// Uniform sample with replacement; indices are in at() order.
  std::vector<std::size_t> sample_indices(std::size_t batch, Rng& rng) const;

 private:
  std::size_t capacity_;
  std::vector<Transition> buffer_;
  std::size_t head_ = 0;  // next write slot once full
  std::size_t count_ = 0;
};

}  // namespace explorium
