#include "chemnet/topology.hpp"

#include <deque>
#include <random>
#include <stdexcept>

#include "chemnet/rng.hpp"

namespace chemnet {

std::vector<Position> generate_topology(const TopologyParams& params,
                                        std::uint64_t seed) {
  if (params.n_nodes < 1)
    throw std::invalid_argument("topology: need at least one node");
  for (int attempt = 0; attempt < params.max_attempts; ++attempt) {
    std::mt19937_64 rng = make_rng(seed, rng_tag::kTopology, attempt);
    std::uniform_real_distribution<double> coord(0.0, params.area_m);
    std::vector<Position> pos(params.n_nodes + 1);
    pos[0] = params.sink;
    for (int i = 1; i <= params.n_nodes; ++i) {
      pos[i].x = coord(rng);
      pos[i].y = coord(rng);
    }
    if (!params.require_connected ||
        is_connected(pos, params.connectivity_range_m))
      return pos;
  }
  throw std::runtime_error(
      "topology: no connected draw found; density too low for the radio range");
}

std::vector<int> bfs_hops(const std::vector<Position>& pos, double range_m) {
  std::vector<int> hops(pos.size(), -1);
  std::deque<std::size_t> queue;
  hops[0] = 0;
  queue.push_back(0);
  while (!queue.empty()) {
    std::size_t u = queue.front();
    queue.pop_front();
    for (std::size_t v = 0; v < pos.size(); ++v) {
      if (hops[v] >= 0 || v == u) continue;
      if (distance(pos[u], pos[v]) <= range_m) {
        hops[v] = hops[u] + 1;
        queue.push_back(v);
      }
    }
  }
  return hops;
}

bool is_connected(const std::vector<Position>& pos, double range_m) {
  auto hops = bfs_hops(pos, range_m);
  for (int h : hops)
    if (h < 0) return false;
  return true;
}

Position WaypointPath::position_at(double t) const {
  if (t <= 0 || waypoints.empty()) return start;
  Position cur = start;
  double remaining = t * speed_m_s;
  for (const Position& wp : waypoints) {
    double leg = distance(cur, wp);
    if (leg <= remaining) {
      remaining -= leg;
      cur = wp;
      continue;
    }
    double f = leg > 0 ? remaining / leg : 0.0;
    return {cur.x + (wp.x - cur.x) * f, cur.y + (wp.y - cur.y) * f};
  }
  return cur;  // path exhausted: parked at the last waypoint
}

}  // namespace chemnet

