#include "explorium/gridworld.hpp"

#include <fstream>
#include <sstream>

#include "explorium/error.hpp"

namespace explorium {
namespace {

constexpr Cell kMoves[kMaxActions] = {
    {-1, 0}, {1, 0}, {0, -1}, {0, 1}, {0, 0}, {-1, -1}, {-1, 1}, {1, -1}, {1, 1},
};

const char* const kMaze =
    "##########\n"
    "#P.......#\n"
    "#.##.###.#\n"
    "#........#\n"
    "#.#.##.#.#\n"
    "#...G....#\n"
    "#.##.###.#\n"
    "#........#\n"
    "#........#\n"
    "##########\n";

// Small starting room, a bare corridor, and a pellet cluster behind it.
const char* const kCorridor =
    "##########\n"
    "#P.#######\n"
    "#..#######\n"
    "#..      #\n"
    "#..##### #\n"
    "######## #\n"
    "####.....#\n"
    "####.....#\n"
    "####.....#\n"
    "##########\n";

const char* const kToy6 =
    "######\n"
    "#P   #\n"
    "#    #\n"
    "#    #\n"
    "#   ##\n"
    "######\n";

}  // namespace

Level parse_level(const std::string& text) {
  std::vector<std::string> lines;
  std::stringstream ss(text);
  std::string line;
  while (std::getline(ss, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  while (!lines.empty() && lines.back().empty()) lines.pop_back();
  if (lines.empty()) throw ConfigurationError("level is empty");

  Level level;
  level.rows = lines.size();
  for (const auto& l : lines) level.cols = std::max(level.cols, l.size());
  if (level.cols == 0) throw ConfigurationError("level has no columns");
  level.walls.assign(level.rows * level.cols, false);
  level.pellets.assign(level.rows * level.cols, false);
  for (std::size_t r = 0; r < level.rows; ++r) {
    for (std::size_t c = 0; c < lines[r].size(); ++c) {
      const std::size_t i = r * level.cols + c;
      const Cell cell{static_cast<int>(r), static_cast<int>(c)};
      switch (lines[r][c]) {
        case '#': level.walls[i] = true; break;
        case '.': level.pellets[i] = true; break;
        case ' ': break;
        case 'P':
          if (level.agent) throw ConfigurationError("level has more than one agent start");
          level.agent = cell;
          break;
        case 'G':
          if (level.ghost) throw ConfigurationError("level has more than one ghost start");
          level.ghost = cell;
          break;
        default:
          throw ConfigurationError("level: unexpected character '" + std::string(1, lines[r][c]) + "' at row " +
                                   std::to_string(r) + " col " + std::to_string(c));
      }
    }
  }
  return level;
}

std::string builtin_level(const std::string& name, std::size_t size) {
  if (name == "maze") return kMaze;
  if (name == "corridor") return kCorridor;
  if (name == "toy6") return kToy6;
  if (name == "open") {
    if (size < 3) throw ConfigurationError("open level needs size >= 3");
    std::string out;
    for (std::size_t r = 0; r < size; ++r) {
      for (std::size_t c = 0; c < size; ++c) {
        const bool border = r == 0 || c == 0 || r + 1 == size || c + 1 == size;
        out += border ? '#' : (r == 1 && c == 1 ? 'P' : '.');
      }
      out += '\n';
    }
    return out;
  }
  throw ConfigurationError("unknown builtin level '" + name + "'");
}

Level load_level(const std::string& spec, std::size_t size) {
  constexpr std::string_view prefix = "builtin:";
  if (spec.rfind(prefix, 0) == 0) return parse_level(builtin_level(spec.substr(prefix.size()), size));
  std::ifstream in(spec);
  if (!in) throw ConfigurationError("cannot read level file '" + spec + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_level(buf.str());
}

GridWorld::GridWorld(Level level, std::size_t n_actions, RenderConfig render, std::uint64_t rng_seed)
    : level_(std::move(level)), n_actions_(n_actions), render_(render), rng_seed_(rng_seed) {
  if (n_actions_ < 2 || n_actions_ > kMaxActions) {
    throw ConfigurationError("action count must be in [2, 9], got " + std::to_string(n_actions_));
  }
  if (render_.cell_px == 0) throw ConfigurationError("cell_px must be positive");
  const std::size_t natural_h = level_.rows * render_.cell_px;
  const std::size_t natural_w = level_.cols * render_.cell_px;
  frame_h_ = render_.frame_height ? render_.frame_height : natural_h;
  frame_w_ = render_.frame_width ? render_.frame_width : natural_w;
  if (frame_h_ < natural_h || frame_w_ < natural_w) {
    throw ConfigurationError("frame " + std::to_string(frame_h_) + "x" + std::to_string(frame_w_) +
                             " too small for level of " + std::to_string(natural_h) + "x" + std::to_string(natural_w) +
                             " pixels");
  }
  for (auto cell : {level_.agent, level_.ghost}) {
    if (cell && level_.walls[index(*cell)]) throw ConfigurationError("level start position inside a wall");
  }
  reset();
}

void GridWorld::reset() {
  pellets_ = level_.pellets;
  agent_ = level_.agent;
  ghost_ = level_.ghost;
  if (agent_) pellets_[index(*agent_)] = false;
  ghost_dir_ = 1;
  pellets_left_ = 0;
  for (bool p : pellets_) pellets_left_ += p ? 1 : 0;
  initial_pellets_ = pellets_left_;
  steps_ = 0;
  done_ = false;
}

bool GridWorld::inside(Cell c) const {
  return c.row >= 0 && c.col >= 0 && static_cast<std::size_t>(c.row) < level_.rows &&
         static_cast<std::size_t>(c.col) < level_.cols;
}

bool GridWorld::is_wall(Cell c) const { return !inside(c) || level_.walls[index(c)]; }

bool GridWorld::has_pellet(Cell c) const { return inside(c) && pellets_[index(c)]; }

void GridWorld::place_agent(Cell c) {
  if (is_wall(c)) throw ConfigurationError("cannot place agent inside a wall");
  agent_ = c;
}

void GridWorld::move_ghost() {
  if (!ghost_) return;
  Cell next{ghost_->row, ghost_->col + ghost_dir_};
  if (is_wall(next)) {
    ghost_dir_ = -ghost_dir_;
    next = {ghost_->row, ghost_->col + ghost_dir_};
    if (is_wall(next)) return;
  }
  ghost_ = next;
}

StepResult GridWorld::step(ActionId action) {
  if (action >= n_actions_) {
    throw ConfigurationError("invalid action id " + std::to_string(action) + " (have " + std::to_string(n_actions_) +
                             ")");
  }
  if (!agent_) throw ConfigurationError("level has no agent");
  if (done_) throw ContractViolation("step() on a finished episode; call reset()");

  StepResult result;
  ++steps_;
  const Cell target{agent_->row + kMoves[action].row, agent_->col + kMoves[action].col};
  if (!is_wall(target)) agent_ = target;

  if (pellets_[index(*agent_)]) {
    pellets_[index(*agent_)] = false;
    --pellets_left_;
    result.reward += reward::kPellet;
    if (pellets_left_ == 0) {
      result.reward += reward::kClear;
      done_ = true;
    }
  }
  if (!done_ && ghost_) {
    // Agent walking into the ghost (this also covers a swap of cells), then
    // the ghost walking into the agent.
    bool hit = *ghost_ == *agent_;
    if (!hit) {
      move_ghost();
      hit = *ghost_ == *agent_;
    }
    if (hit) {
      result.reward += reward::kGhost;
      done_ = true;
    }
  }
  result.done = done_;
  result.frame = render();
  return result;
}

Frame GridWorld::render() const {
  Frame frame(frame_h_, frame_w_, gray::kFloor);
  const std::size_t px = render_.cell_px;
  auto paint = [&](Cell c, std::uint8_t level) {
    for (std::size_t r = 0; r < px; ++r) {
      for (std::size_t k = 0; k < px; ++k) frame.at(c.row * px + r, c.col * px + k) = level;
    }
  };
  for (std::size_t r = 0; r < level_.rows; ++r) {
    for (std::size_t c = 0; c < level_.cols; ++c) {
      const Cell cell{static_cast<int>(r), static_cast<int>(c)};
      if (level_.walls[index(cell)]) paint(cell, gray::kWall);
      else if (pellets_[index(cell)]) paint(cell, gray::kPellet);
    }
  }
  if (agent_) paint(*agent_, gray::kAgent);
  if (ghost_) paint(*ghost_, gray::kGhost);
  return frame;
}

}  // namespace explorium
