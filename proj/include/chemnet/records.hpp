#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "chemnet/packet.hpp"

namespace chemnet {

enum class LossCause : std::uint8_t {
  None = 0,       // delivered
  QueueOverflow,  // MAC queue full at some node
  MacBackoff,     // dropped after the CCA attempt budget
  LinkLoss,       // unicast frame not decoded by its next hop
  NoGradient,     // originator had no route to the sink
  NoResponders,   // information gathering found nobody twice
  TtlExceeded,    // hop budget exhausted
  DeadEnd,        // alert copy ran out of willing neighbors
  NodeDead,       // carrier node ran out of energy
  EndOfSim,       // still in flight when the trial ended
};

const char* to_string(LossCause c);

// One row per routed DATA packet copy. Multipath alert copies share
// (origin, seq) and differ in path_id; metrics deduplicate on aggregation.
struct PacketRecord {
  PacketClass cls = PacketClass::Routine;
  NodeId origin = 0;
  std::uint16_t seq = 0;
  std::uint8_t path_id = 0;
  double birth = 0;
  std::optional<double> delivery;
  LossCause loss = LossCause::EndOfSim;
  std::uint8_t hops = 0;
  std::vector<NodeId> route;  // intermediate nodes (not serialized)

  bool delivered() const { return delivery.has_value(); }
};

inline constexpr const char* kPacketCsvHeader =
    "class,origin,seq,birth,delivery,loss_cause,hops,path_id";

void write_packet_csv(std::ostream& out, const std::vector<PacketRecord>& records);
std::vector<PacketRecord> read_packet_csv(std::istream& in);

}  // namespace chemnet
