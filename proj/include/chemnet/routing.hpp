#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <vector>

#include "chemnet/packet.hpp"

namespace chemnet {

struct NetParams {
  int alert_paths = 2;               // disjoint copies per alert (k)
  double gather_window_s = 0.050;    // INFO_RSP collection window per hop
  double gather_jitter_s = 0.035;    // responder reply jitter upper bound
  int gather_retries = 1;            // re-broadcast INFO_REQ this many times
  double accepted_expiry_s = 10.0;   // INUSE memory lifetime
  double pending_forward_s = 1.0;    // how long a forwarder waits for INUSE
  double gradient_period_s = 100.0;  // HELLO round repetition
  double hello_jitter_s = 0.020;     // rebroadcast desynchronization
  double neighbor_staleness_s = 30.0;
  std::uint8_t routine_ttl = 22;     // 2x expected network diameter in hops
};

struct NeighborEntry {
  NodeId id = 0;
  std::uint8_t hc = 0;
  std::uint32_t energy_mj = 0;
  double last_seen = 0;
};

struct RoutingState {
  std::optional<std::uint8_t> gradient;
  std::uint16_t round = 0;  // last gradient round joined
  std::map<NodeId, NeighborEntry> neighbors;
  std::map<std::pair<NodeId, std::uint16_t>, double> accepted_alerts;
};

// One HELLO reception per the two-branch gradient rule: upsert the sender in
// the neighbor table; adopt hc+1 when it improves (or when the round is new)
// and return the rebroadcast, otherwise discard.
std::optional<HelloInfo> handle_hello(RoutingState& st, const HelloInfo& hello,
                                      NodeId self, double now);

// Neighbors ordered by alert-path preference: ascending hop count, ties by
// ascending id. `exclude` removes nodes already tried or refused.
std::vector<NodeId> alert_preference(const RoutingState& st,
                                     const std::set<NodeId>& exclude);

// Next hop for a routine packet: of the two lowest-hc responders pick the
// higher residual energy; ties fall to lower hc, then lower id.
std::optional<NodeId> pick_routine_next_hop(std::span<const InfoRsp> responders);

// After an information-gathering round the table holds exactly the
// responders plus entries still inside the staleness window; older
// absentees are evicted.
void reconcile_neighbors(RoutingState& st, std::span<const InfoRsp> responders,
                         double now, double staleness_s);

void expire_accepted(RoutingState& st, double now, double lifetime_s);

}  // namespace chemnet
