#include "chemnet/routing.hpp"

#include <algorithm>

namespace chemnet {

std::optional<HelloInfo> handle_hello(RoutingState& st, const HelloInfo& hello,
                                      NodeId self, double now) {
  if (hello.round > st.round) {
    // New setup round: the gradient is re-derived from scratch so stale
    // short paths do not survive topology changes.
    st.round = hello.round;
    st.gradient.reset();
  } else if (hello.round < st.round) {
    return std::nullopt;  // late packet from a superseded round
  }

  NeighborEntry& nb = st.neighbors[hello.sender];
  nb.id = hello.sender;
  nb.hc = hello.hc;
  nb.last_seen = now;

  std::uint8_t candidate = static_cast<std::uint8_t>(hello.hc + 1);
  if (!st.gradient || candidate < *st.gradient) {
    st.gradient = candidate;
    return HelloInfo{hello.round, candidate, self};
  }
  return std::nullopt;
}

std::vector<NodeId> alert_preference(const RoutingState& st,
                                     const std::set<NodeId>& exclude) {
  std::vector<const NeighborEntry*> entries;
  entries.reserve(st.neighbors.size());
  for (const auto& [id, nb] : st.neighbors)
    if (!exclude.count(id)) entries.push_back(&nb);
  std::sort(entries.begin(), entries.end(),
            [](const NeighborEntry* a, const NeighborEntry* b) {
              if (a->hc != b->hc) return a->hc < b->hc;
              return a->id < b->id;
            });
  std::vector<NodeId> out;
  out.reserve(entries.size());
  for (const auto* e : entries) out.push_back(e->id);
  return out;
}

std::optional<NodeId> pick_routine_next_hop(std::span<const InfoRsp> responders) {
  if (responders.empty()) return std::nullopt;
  std::vector<InfoRsp> sorted(responders.begin(), responders.end());
  std::sort(sorted.begin(), sorted.end(), [](const InfoRsp& a, const InfoRsp& b) {
    if (a.hc != b.hc) return a.hc < b.hc;
    return a.id < b.id;
  });
  if (sorted.size() == 1) return sorted[0].id;
  const InfoRsp& a = sorted[0];
  const InfoRsp& b = sorted[1];
  if (a.energy_mj != b.energy_mj)
    return a.energy_mj > b.energy_mj ? a.id : b.id;
  if (a.hc != b.hc) return a.hc < b.hc ? a.id : b.id;
  return a.id < b.id ? a.id : b.id;
}

void reconcile_neighbors(RoutingState& st, std::span<const InfoRsp> responders,
                         double now, double staleness_s) {
  std::map<NodeId, NeighborEntry> fresh;
  for (const auto& [id, nb] : st.neighbors)
    if (now - nb.last_seen <= staleness_s) fresh[id] = nb;
  for (const InfoRsp& r : responders)
    fresh[r.id] = NeighborEntry{r.id, r.hc, r.energy_mj, now};
  st.neighbors = std::move(fresh);
}

void expire_accepted(RoutingState& st, double now, double lifetime_s) {
  for (auto it = st.accepted_alerts.begin(); it != st.accepted_alerts.end();) {
    if (now - it->second > lifetime_s)
      it = st.accepted_alerts.erase(it);
    else
      ++it;
  }
}

}  // namespace chemnet
