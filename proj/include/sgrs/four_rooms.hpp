#ifndef SGRS_FOUR_ROOMS_HPP
#define SGRS_FOUR_ROOMS_HPP

#include <array>
#include <cstddef>
#include <deque>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "sgrs/error.hpp"
#include "sgrs/rng.hpp"
#include "sgrs/state.hpp"

namespace sgrs {

enum class GridAction : std::size_t { Up = 0, Down = 1, Left = 2, Right = 3 };

inline constexpr std::size_t kGridActionCount = 4;

/// Layout and dynamics of a gridworld. '#' is a wall, '.' free, 'S' start, 'G' goal.
struct FourRoomsConfig {
  std::vector<std::string> ascii_map;
  GridCell start_cell{1, 1};
  GridCell goal_cell{11, 11};
  double slip_probability = 0.33;
  double goal_reward = 1.0;
  std::size_t step_cap = 1000;

  int rows() const { return static_cast<int>(ascii_map.size()); }
  int cols() const { return ascii_map.empty() ? 0 : static_cast<int>(ascii_map.front().size()); }

  bool in_bounds(GridCell c) const { return c.row >= 0 && c.col >= 0 && c.row < rows() && c.col < cols(); }
  bool is_free(GridCell c) const {
    return in_bounds(c) && ascii_map[static_cast<std::size_t>(c.row)][static_cast<std::size_t>(c.col)] != '#';
  }

  std::size_t free_cell_count() const {
    std::size_t n = 0;
    for (const auto& row : ascii_map)
      for (char ch : row) n += ch != '#';
    return n;
  }

  /// Throws ConfigError unless the map is rectangular, walled in, and connected,
  /// with start and goal on free cells.
  void validate() const {
    if (ascii_map.empty() || ascii_map.front().empty()) throw ConfigError("four_rooms: empty map");
    for (const auto& row : ascii_map) {
      if (static_cast<int>(row.size()) != cols()) throw ConfigError("four_rooms: map is not rectangular");
      for (char ch : row)
        if (ch != '#' && ch != '.' && ch != 'S' && ch != 'G')
          throw ConfigError(std::string("four_rooms: unknown map character '") + ch + "'");
    }
    for (int c = 0; c < cols(); ++c)
      if (is_free({0, c}) || is_free({rows() - 1, c})) throw ConfigError("four_rooms: border must be wall");
    for (int r = 0; r < rows(); ++r)
      if (is_free({r, 0}) || is_free({r, cols() - 1})) throw ConfigError("four_rooms: border must be wall");
    if (!is_free(start_cell)) throw ConfigError("four_rooms: start cell is not free");
    if (!is_free(goal_cell)) throw ConfigError("four_rooms: goal cell is not free");
    if (!(slip_probability >= 0.0 && slip_probability <= 1.0))
      throw ConfigError("four_rooms: slip probability outside [0, 1]");
    if (step_cap < 1) throw ConfigError("four_rooms: step cap must be positive");

    std::vector<char> seen(static_cast<std::size_t>(rows() * cols()), 0);
    std::deque<GridCell> frontier{start_cell};
    seen[index(start_cell)] = 1;
    std::size_t reached = 1;
    while (!frontier.empty()) {
      const GridCell c = frontier.front();
      frontier.pop_front();
      for (GridCell n : {GridCell{c.row - 1, c.col}, GridCell{c.row + 1, c.col}, GridCell{c.row, c.col - 1},
                         GridCell{c.row, c.col + 1}}) {
        if (is_free(n) && !seen[index(n)]) {
          seen[index(n)] = 1;
          ++reached;
          frontier.push_back(n);
        }
      }
    }
    if (reached != free_cell_count()) throw ConfigError("four_rooms: free cells are not connected");
  }

  std::size_t index(GridCell c) const {
    return static_cast<std::size_t>(c.row) * static_cast<std::size_t>(cols()) + static_cast<std::size_t>(c.col);
  }

  /// 13x13 four-rooms layout; hallways at (3,6), (6,2), (7,9), (10,6).
  static FourRoomsConfig canonical() {
    return parse(
        "#############\n"
        "#S....#.....#\n"
        "#.....#.....#\n"
        "#...........#\n"
        "#.....#.....#\n"
        "#.....#.....#\n"
        "##.####.....#\n"
        "#.....###.###\n"
        "#.....#.....#\n"
        "#.....#.....#\n"
        "#...........#\n"
        "#.....#....G#\n"
        "#############\n");
  }

  /// Reads a map with exactly one 'S' and one 'G'. Blank lines are skipped.
  static FourRoomsConfig parse(std::string_view text) {
    FourRoomsConfig cfg;
    cfg.ascii_map.clear();
    int starts = 0, goals = 0;
    std::istringstream in{std::string(text)};
    std::string line;
    while (std::getline(in, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty()) continue;
      const int r = static_cast<int>(cfg.ascii_map.size());
      for (std::size_t c = 0; c < line.size(); ++c) {
        if (line[c] == 'S') {
          cfg.start_cell = {r, static_cast<int>(c)};
          ++starts;
        } else if (line[c] == 'G') {
          cfg.goal_cell = {r, static_cast<int>(c)};
          ++goals;
        }
      }
      cfg.ascii_map.push_back(line);
    }
    if (starts != 1 || goals != 1) throw ConfigError("four_rooms: map needs exactly one S and one G");
    cfg.validate();
    return cfg;
  }

  static FourRoomsConfig load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("four_rooms: cannot open map file " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return parse(buf.str());
  }
};

struct GridStep {
  GridCell next_cell;
  double reward = 0.0;
  bool terminal = false;
};

inline GridCell move_cell(GridCell c, GridAction a) {
  switch (a) {
    case GridAction::Up: return {c.row - 1, c.col};
    case GridAction::Down: return {c.row + 1, c.col};
    case GridAction::Left: return {c.row, c.col - 1};
    case GridAction::Right: return {c.row, c.col + 1};
  }
  return c;
}

/// One gridworld transition. Draw order: one uniform01() for the slip test,
/// then, on a slip only, one uniform_index(3) choosing among the other three
/// actions in Up, Down, Left, Right order.
template <UniformSource Rng>
GridStep fourrooms_step(const FourRoomsConfig& cfg, GridCell cell, GridAction action, Rng& rng) {
  if (!cfg.is_free(cell)) throw InvalidStateError("four_rooms: cannot step from a wall cell");
  GridAction executed = action;
  if (rng.uniform01() < cfg.slip_probability) {
    std::array<GridAction, 3> others{};
    std::size_t k = 0;
    for (std::size_t a = 0; a < kGridActionCount; ++a)
      if (static_cast<GridAction>(a) != action) others[k++] = static_cast<GridAction>(a);
    executed = others[rng.uniform_index(3)];
  }
  GridCell next = move_cell(cell, executed);
  if (!cfg.is_free(next)) next = cell;
  const bool at_goal = next == cfg.goal_cell;
  return {next, at_goal ? cfg.goal_reward : 0.0, at_goal};
}

/// Episodic gridworld environment over FourRoomsConfig.
class FourRooms {
 public:
  explicit FourRooms(FourRoomsConfig cfg = FourRoomsConfig::canonical()) : cfg_(std::move(cfg)) {
    cfg_.validate();
    cell_ = cfg_.start_cell;
  }

  const FourRoomsConfig& config() const noexcept { return cfg_; }
  std::size_t action_count() const noexcept { return kGridActionCount; }
  std::size_t state_count() const noexcept { return static_cast<std::size_t>(cfg_.rows() * cfg_.cols()); }
  std::size_t step_cap() const noexcept { return cfg_.step_cap; }
  GridCell cell() const noexcept { return cell_; }

  StateVec state_of(GridCell c) const { return StateVec::grid(c, static_cast<std::size_t>(cfg_.cols())); }

  StateVec reset() {
    cell_ = cfg_.start_cell;
    return state_of(cell_);
  }

  template <UniformSource Rng>
  StepResult step(std::size_t action, Rng& rng) {
    if (action >= kGridActionCount) throw ConfigError("four_rooms: action index out of range");
    const GridStep s = fourrooms_step(cfg_, cell_, static_cast<GridAction>(action), rng);
    cell_ = s.next_cell;
    return {state_of(cell_), s.reward, s.terminal};
  }

 private:
  FourRoomsConfig cfg_;
  GridCell cell_;
};

}  // namespace sgrs

#endif  // SGRS_FOUR_ROOMS_HPP
