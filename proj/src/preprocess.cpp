#include "explorium/preprocess.hpp"

#include <algorithm>
#include <cmath>

#include "explorium/error.hpp"

namespace explorium {

Frame max_pool(std::span<const Frame> window, std::size_t max_over) {
  if (window.empty()) throw ConfigurationError("max_pool: empty window");
  if (max_over == 0) throw ConfigurationError("max_pool: max_over must be >= 1");
  const std::size_t n = std::min(window.size(), max_over);
  const auto recent = window.subspan(window.size() - n);
  std::vector<const Frame*> filled(max_over - n, &recent.front());
  for (const auto& f : recent) filled.push_back(&f);

  Frame out = *filled.front();
  for (const Frame* f : filled) {
    if (f->height != out.height || f->width != out.width) throw ConfigurationError("max_pool: frame size mismatch");
    for (std::size_t i = 0; i < out.pixels.size(); ++i) out.pixels[i] = std::max(out.pixels[i], f->pixels[i]);
  }
  return out;
}

FrameStack::FrameStack(std::vector<FramePtr> frames) : frames_(std::move(frames)) {
  if (frames_.empty()) throw ConfigurationError("frame stack needs at least one frame");
  for (const auto& f : frames_) {
    if (!f || f->height != frames_.front()->height || f->width != frames_.front()->width) {
      throw ConfigurationError("frame stack: inconsistent frames");
    }
  }
}

FrameStack FrameStack::pushed(FramePtr frame) const {
  std::vector<FramePtr> next(frames_.begin() + 1, frames_.end());
  next.push_back(std::move(frame));
  return FrameStack(std::move(next));
}

void FrameStack::write_to(float* dst) const {
  for (const auto& f : frames_) {
    for (auto p : f->pixels) *dst++ = static_cast<float>(p) / 255.0f;
  }
}

Tensor<float> FrameStack::to_tensor() const {
  Tensor<float> t({depth(), height(), width()});
  write_to(t.data());
  return t;
}

bool FrameStack::operator==(const FrameStack& other) const {
  if (frames_.size() != other.frames_.size()) return false;
  for (std::size_t i = 0; i < frames_.size(); ++i) {
    if (*frames_[i] != *other.frames_[i]) return false;
  }
  return true;
}

FrameStack stack_frames(std::span<const FramePtr> history, std::size_t m) {
  if (history.empty()) throw ConfigurationError("stack_frames: empty history");
  if (m == 0) throw ConfigurationError("stack_frames: m must be >= 1");
  const std::size_t n = std::min(history.size(), m);
  const auto recent = history.subspan(history.size() - n);
  std::vector<FramePtr> frames(m - n, recent.front());
  frames.insert(frames.end(), recent.begin(), recent.end());
  return FrameStack(std::move(frames));
}

Tensor<float> stack_batch(std::span<const FrameStack* const> stacks) {
  if (stacks.empty()) throw ConfigurationError("stack_batch: empty batch");
  const auto& first = *stacks.front();
  Tensor<float> t({stacks.size(), first.depth(), first.height(), first.width()});
  const std::size_t per = first.depth() * first.height() * first.width();
  for (std::size_t b = 0; b < stacks.size(); ++b) {
    const auto& s = *stacks[b];
    if (s.depth() != first.depth() || s.height() != first.height() || s.width() != first.width()) {
      throw ConfigurationError("stack_batch: inconsistent stacks");
    }
    s.write_to(t.data() + b * per);
  }
  return t;
}

Tensor<float> frame_to_tensor(const Frame& frame) {
  Tensor<float> t({1, frame.height, frame.width});
  for (std::size_t i = 0; i < frame.pixels.size(); ++i) t[i] = static_cast<float>(frame.pixels[i]) / 255.0f;
  return t;
}

Frame quantize_frame(std::span<const float> pixels, std::size_t height, std::size_t width) {
  if (pixels.size() != height * width) throw ConfigurationError("quantize_frame: size mismatch");
  Frame f(height, width);
  for (std::size_t i = 0; i < pixels.size(); ++i) {
    const float v = std::clamp(pixels[i], 0.0f, 1.0f);
    f.pixels[i] = static_cast<std::uint8_t>(std::lround(v * 255.0f));
  }
  return f;
}

PreprocessedEnv::PreprocessedEnv(GridWorld world, PreprocessConfig config)
    : world_(std::move(world)), config_(config) {
  if (config_.frame_skip == 0 || config_.max_over == 0 || config_.stack_m == 0) {
    throw ConfigurationError("preprocess settings must all be >= 1");
  }
  reset();
}

void PreprocessedEnv::reset() {
  world_.reset();
  raw_.clear();
  raw_.push_back(world_.render());
  std::vector<Frame> window(raw_.begin(), raw_.end());
  auto first = std::make_shared<const Frame>(max_pool(window, config_.max_over));
  const FramePtr history[] = {first};
  stack_ = stack_frames(history, config_.stack_m);
}

PreprocessedEnv::Step PreprocessedEnv::step(ActionId action) {
  Step out;
  for (std::size_t i = 0; i < config_.frame_skip && !out.done; ++i) {
    auto r = world_.step(action);
    out.reward += r.reward;
    out.done = r.done;
    raw_.push_back(std::move(r.frame));
    while (raw_.size() > config_.max_over) raw_.pop_front();
  }
  std::vector<Frame> window(raw_.begin(), raw_.end());
  out.frame = std::make_shared<const Frame>(max_pool(window, config_.max_over));
  stack_ = stack_.pushed(out.frame);
  return out;
}

}  // namespace explorium
