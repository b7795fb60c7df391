#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace explorium {

using ActionId = std::size_t;

/// Action ids. The first five are always available; the diagonals are
/// enabled when the world is configured with more than five actions.
enum Action : ActionId {
  kUp = 0,
  kDown = 1,
  kLeft = 2,
  kRight = 3,
  kNoop = 4,
  kUpLeft = 5,
  kUpRight = 6,
  kDownLeft = 7,
  kDownRight = 8,
};
inline constexpr std::size_t kMaxActions = 9;

/// Fixed gray levels per entity class.
namespace gray {
inline constexpr std::uint8_t kFloor = 0;
inline constexpr std::uint8_t kGhost = 90;
inline constexpr std::uint8_t kPellet = 128;
inline constexpr std::uint8_t kAgent = 200;
inline constexpr std::uint8_t kWall = 255;
}  // namespace gray

/// Reward constants of the pellet world.
namespace reward {
inline constexpr double kPellet = 1.0;
inline constexpr double kGhost = -5.0;
inline constexpr double kClear = 10.0;
}  // namespace reward

struct Cell {
  int row = 0;
  int col = 0;
  bool operator==(const Cell&) const = default;
};

/// Grayscale image, 8 bits per pixel, row-major.
struct Frame {
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<std::uint8_t> pixels;

  Frame() = default;
  Frame(std::size_t h, std::size_t w, std::uint8_t fill = 0) : height(h), width(w), pixels(h * w, fill) {}

  std::uint8_t& at(std::size_t r, std::size_t c) { return pixels[r * width + c]; }
  std::uint8_t at(std::size_t r, std::size_t c) const { return pixels[r * width + c]; }
  std::size_t size() const { return pixels.size(); }
  bool operator==(const Frame&) const = default;
};

/// Parsed level map. Characters: '#' wall, '.' pellet, 'P' agent start,
/// 'G' ghost start, ' ' floor. Shorter rows are padded with floor.
struct Level {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<bool> walls;
  std::vector<bool> pellets;
  std::optional<Cell> agent;
  std::optional<Cell> ghost;
};

Level parse_level(const std::string& text);

/// Built-in maps: "open" (size x size room), "maze", "corridor", "toy6".
std::string builtin_level(const std::string& name, std::size_t size = 10);

/// Resolves "builtin:<name>" or reads a level file.
Level load_level(const std::string& spec, std::size_t size = 10);

struct RenderConfig {
  std::size_t cell_px = 3;
  std::size_t frame_height = 0;  // 0 = rows * cell_px
  std::size_t frame_width = 0;   // 0 = cols * cell_px
};

struct StepResult {
  double reward = 0.0;
  bool done = false;
  Frame frame;
};

/// Deterministic pellet-collection gridworld. The ghost patrols its row,
/// bouncing off walls.
class GridWorld {
 public:
  explicit GridWorld(Level level, std::size_t n_actions = 5, RenderConfig render = {}, std::uint64_t rng_seed = 0);

  /// Restores the initial level.
  void reset();

  StepResult step(ActionId action);
  Frame render() const;

  std::size_t rows() const { return level_.rows; }
  std::size_t cols() const { return level_.cols; }
  std::size_t n_actions() const { return n_actions_; }
  std::size_t frame_height() const { return frame_h_; }
  std::size_t frame_width() const { return frame_w_; }
  const std::optional<Cell>& agent() const { return agent_; }
  const std::optional<Cell>& ghost() const { return ghost_; }
  std::size_t pellets_remaining() const { return pellets_left_; }
  std::size_t initial_pellets() const { return initial_pellets_; }
  std::size_t step_count() const { return steps_; }
  bool done() const { return done_; }
  std::uint64_t rng_seed() const { return rng_seed_; }
  bool is_wall(Cell c) const;
  bool has_pellet(Cell c) const;

  /// Moves the agent without stepping time; for tests and scripted starts.
  void place_agent(Cell c);

 private:
  bool inside(Cell c) const;
  std::size_t index(Cell c) const { return static_cast<std::size_t>(c.row) * level_.cols + c.col; }
  void move_ghost();

  Level level_;
  std::size_t n_actions_;
  RenderConfig render_;
  std::size_t frame_h_ = 0;
  std::size_t frame_w_ = 0;
  std::uint64_t rng_seed_;

  std::vector<bool> pellets_;
  std::optional<Cell> agent_;
  std::optional<Cell> ghost_;
  int ghost_dir_ = 1;
  std::size_t pellets_left_ = 0;
  std::size_t initial_pellets_ = 0;
  std::size_t steps_ = 0;
  bool done_ = false;
};

}  // namespace explorium
