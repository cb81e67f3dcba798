#pragma once

#include <cstddef>
#include <set>
#include <string>
#include <utility>

#include "horizon/errors.hpp"
#include "horizon/simulator.hpp"

namespace horizon {

struct Cell {
  int x = 0;
  int y = 0;
  friend auto operator<=>(const Cell&, const Cell&) = default;
};

/// Orientation 0 faces +x, 1 faces +y, 2 faces -x, 3 faces -y.
struct GridWorld {
  int width = 0;
  int height = 0;
  std::set<Cell> walls;
  Cell goal;
  Cell start;
  int start_direction = 0;

  bool inside(Cell c) const { return c.x >= 0 && c.y >= 0 && c.x < width && c.y < height; }
  bool blocked(Cell c) const { return !inside(c) || walls.count(c) != 0; }
};

/// Gridworld with actions turn-left (0), turn-right (1) and forward (2).
/// Moving onto the goal pays 1 and terminates; walking into a wall leaves
/// the agent where it is.
class GridSimulator {
 public:
  static constexpr ActionIndex kTurnLeft = 0;
  static constexpr ActionIndex kTurnRight = 1;
  static constexpr ActionIndex kForward = 2;

  explicit GridSimulator(GridWorld world, std::size_t horizon = 0)
      : world_(std::move(world)), horizon_(horizon) {
    if (world_.width <= 0 || world_.height <= 0 || world_.width > 250 || world_.height > 250) {
      throw PreconditionError("grid dimensions must lie in [1, 250]");
    }
    if (world_.blocked(world_.start) || world_.blocked(world_.goal)) {
      throw PreconditionError("grid start and goal must be open cells inside the grid");
    }
    if (world_.start_direction < 0 || world_.start_direction > 3) {
      throw PreconditionError("grid start direction must be in [0, 3]");
    }
  }

  const GridWorld& world() const { return world_; }
  std::size_t horizon() const { return horizon_; }

  std::size_t num_actions() const { return 3; }
  Blob initial_state() const { return encode(world_.start, world_.start_direction); }

  StepResult step(const Blob& blob, ActionIndex a) const {
    if (blob == goal_blob()) return {goal_blob(), 0.0, true};
    Cell pos{static_cast<unsigned char>(blob[0]), static_cast<unsigned char>(blob[1])};
    int dir = static_cast<unsigned char>(blob[2]);
    switch (a) {
      case kTurnLeft:
        dir = (dir + 3) % 4;
        break;
      case kTurnRight:
        dir = (dir + 1) % 4;
        break;
      case kForward: {
        static constexpr int dx[4] = {1, 0, -1, 0};
        static constexpr int dy[4] = {0, 1, 0, -1};
        const Cell ahead{pos.x + dx[dir], pos.y + dy[dir]};
        if (ahead == world_.goal) return {goal_blob(), 1.0, true};
        if (!world_.blocked(ahead)) pos = ahead;
        break;
      }
      default:
        throw PreconditionError("grid action out of range");
    }
    return {encode(pos, dir), 0.0, false};
  }

  Blob observation_key(const Blob& blob) const { return blob; }

  static Blob goal_blob() { return Blob(3, '\xff'); }

 private:
  static Blob encode(Cell c, int dir) {
    return Blob{static_cast<char>(c.x), static_cast<char>(c.y), static_cast<char>(dir)};
  }

  GridWorld world_;
  std::size_t horizon_;
};

/// n x n room whose border is wall; agent at (1,1) facing +x, goal at (n-2, n-2).
inline GridSimulator make_empty_grid(int n, std::size_t horizon) {
  if (n < 3) throw PreconditionError("empty grid needs n >= 3");
  GridWorld w;
  w.width = n;
  w.height = n;
  for (int i = 0; i < n; ++i) {
    w.walls.insert({i, 0});
    w.walls.insert({i, n - 1});
    w.walls.insert({0, i});
    w.walls.insert({n - 1, i});
  }
  w.start = {1, 1};
  w.goal = {n - 2, n - 2};
  w.start_direction = 0;
  return GridSimulator(std::move(w), horizon);
}

}  // namespace horizon
