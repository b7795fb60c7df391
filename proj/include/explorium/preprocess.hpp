#pragma once

#include <cstddef>
#include <deque>
#include <memory>
#include <span>
#include <vector>

#include "explorium/gridworld.hpp"
#include "explorium/tensor.hpp"

namespace explorium {

struct PreprocessConfig {
  std::size_t frame_skip = 4;
  std::size_t max_over = 4;
  std::size_t stack_m = 4;
  bool operator==(const PreprocessConfig&) const = default;
};

using FramePtr = std::shared_ptr<const Frame>;

/// Pixelwise maximum over the last `max_over` frames of `window`. A short
/// window is filled by repeating its earliest frame. Frames are already
/// grayscale, so no color conversion happens.
Frame max_pool(std::span<const Frame> window, std::size_t max_over);

/// The m most recent preprocessed frames, oldest first. Frames are shared, so
/// copies are cheap.
class FrameStack {
 public:
  FrameStack() = default;
  explicit FrameStack(std::vector<FramePtr> frames);

  std::size_t depth() const { return frames_.size(); }
  std::size_t height() const { return frames_.empty() ? 0 : frames_.front()->height; }
  std::size_t width() const { return frames_.empty() ? 0 : frames_.front()->width; }
  const Frame& frame(std::size_t i) const { return *frames_.at(i); }
  const FramePtr& newest() const { return frames_.back(); }
  const std::vector<FramePtr>& frames() const { return frames_; }

  /// Drops the oldest frame and appends `frame`.
  FrameStack pushed(FramePtr frame) const;

  /// [m, H, W] with pixels scaled to [0, 1].
  Tensor<float> to_tensor() const;
  void write_to(float* dst) const;

  bool operator==(const FrameStack& other) const;

 private:
  std::vector<FramePtr> frames_;
};

/// Stacks the last m frames of `history`, padding at the front by repeating
/// the first frame.
FrameStack stack_frames(std::span<const FramePtr> history, std::size_t m);

/// Batches stacks into [B, m, H, W].
Tensor<float> stack_batch(std::span<const FrameStack* const> stacks);

Tensor<float> frame_to_tensor(const Frame& frame);

/// Rounds [0, 1] model-space pixels to 8 bits. Values outside are clamped.
Frame quantize_frame(std::span<const float> pixels, std::size_t height, std::size_t width);

/// Wraps a GridWorld with frame skipping, max pooling and stacking.
class PreprocessedEnv {
 public:
  struct Step {
    double reward = 0.0;
    bool done = false;
    FramePtr frame;
  };

  PreprocessedEnv(GridWorld world, PreprocessConfig config);

  void reset();
  Step step(ActionId action);

  const GridWorld& world() const { return world_; }
  GridWorld& world() { return world_; }
  const PreprocessConfig& config() const { return config_; }
  const FrameStack& stack() const { return stack_; }
  const FramePtr& latest_frame() const { return stack_.newest(); }
  std::size_t n_actions() const { return world_.n_actions(); }

 private:
  GridWorld world_;
  PreprocessConfig config_;
  std::deque<Frame> raw_;
  FrameStack stack_;
};

}  // namespace explorium
