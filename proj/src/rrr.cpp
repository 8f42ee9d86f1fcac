#include "chemnet/rrr.hpp"

#include <algorithm>

namespace chemnet {

std::optional<NodeId> rrr_preferred(const RoutingState& st) {
  const NeighborEntry* best = nullptr;
  for (const auto& [id, nb] : st.neighbors) {
    if (!best || nb.hc < best->hc || (nb.hc == best->hc && nb.id < best->id))
      best = &nb;
  }
  if (!best) return std::nullopt;
  return best->id;
}

std::optional<NodeId> rrr_random_descent(const RoutingState& st,
                                         std::mt19937_64& rng) {
  if (!st.gradient) return std::nullopt;
  std::vector<NodeId> candidates;
  for (const auto& [id, nb] : st.neighbors)
    if (nb.hc <= *st.gradient) candidates.push_back(id);
  if (candidates.empty()) return std::nullopt;
  if (candidates.size() == 1) return candidates[0];
  std::uniform_int_distribution<std::size_t> pick(0, candidates.size() - 1);
  return candidates[pick(rng)];
}

std::optional<NodeId> rrr_route(RrrState& st, PacketClass cls, double now,
                                std::mt19937_64& rng) {
  if (cls == PacketClass::Alert) {
    st.estimator.observe(now);
    return rrr_preferred(st.routing);
  }
  if (st.estimator.rate(now) > st.params.threshold_pkt_s)
    return rrr_random_descent(st.routing, rng);
  return rrr_preferred(st.routing);
}

}  // namespace chemnet

