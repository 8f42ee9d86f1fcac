#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "chemnet/message.hpp"

namespace chemnet {

struct Position {
  double x = 0;
  double y = 0;
};

inline double distance(const Position& a, const Position& b) {
  return std::hypot(a.x - b.x, a.y - b.y);
}

struct TopologyParams {
  int n_nodes = 100;          // products, excluding the sink
  double area_m = 300.0;      // square side
  Position sink{150.0, 0.0};  // bottom edge midpoint
  bool require_connected = false;
  double connectivity_range_m = 0;  // unit-disk radius for the check
  int max_attempts = 1000;
};

// Index 0 is the sink; products occupy 1..n_nodes. Positions are i.i.d.
// uniform over the square. With require_connected the draw repeats (with a
// derived seed per attempt) until the unit-disk graph is connected.
std::vector<Position> generate_topology(const TopologyParams& params,
                                        std::uint64_t seed);

// Hop distance from node 0 over the unit-disk graph; -1 for unreachable.
std::vector<int> bfs_hops(const std::vector<Position>& pos, double range_m);

bool is_connected(const std::vector<Position>& pos, double range_m);

// Straight-line waypoint mobility at constant speed, static once the last
// waypoint is reached. An empty waypoint list is a static node.
struct WaypointPath {
  Position start;
  std::vector<Position> waypoints;
  double speed_m_s = 1.0;

  Position position_at(double t) const;
};

}  // namespace chemnet
