#pragma once

#include <cstdint>
#include <vector>

#include "chemnet/message.hpp"

namespace chemnet {

enum class PacketClass : std::uint8_t { Alert = 0, Routine, NetControl };

enum class PacketKind : std::uint8_t { HELLO = 0, INUSE, INFO_REQ, INFO_RSP, DATA };

const char* to_string(PacketClass c);
const char* to_string(PacketKind k);

// Control payloads, wire sizes pinned:
//   HELLO{round:2 hc:1 sa:2}  INUSE{originator:2 seq:2}
//   INFO_REQ{requester:2}     INFO_RSP{id:2 hc:1 energy:4}
struct HelloInfo {
  std::uint16_t round = 0;
  std::uint8_t hc = 0;
  NodeId sender = 0;
};

struct InuseInfo {
  NodeId originator = 0;
  std::uint16_t seq = 0;
};

struct InfoReq {
  NodeId requester = 0;
};

struct InfoRsp {
  NodeId id = 0;
  std::uint8_t hc = 0;
  std::uint32_t energy_mj = 0;  // residual energy, millijoules fixed point
};

// Network-layer unit. DATA packets embed an application message; control
// packets carry one of the structs above.
struct Packet {
  PacketClass cls = PacketClass::NetControl;
  PacketKind kind = PacketKind::HELLO;
  NodeId source = 0;          // originator of a DATA packet
  std::uint16_t seq = 0;      // originator sequence
  std::uint8_t hop_count = 0; // hops traversed so far
  std::uint8_t path_id = 0;   // multipath copy index
  std::uint8_t ttl = 0;       // remaining hops (routine loop guard)
  Message msg;                // DATA payload
  HelloInfo hello;
  InuseInfo inuse;
  InfoReq info_req;
  InfoRsp info_rsp;
  std::vector<NodeId> route;  // intermediate nodes visited (bookkeeping)
};

// Bytes on air for the network part of a frame (header + payload).
std::size_t packet_wire_bytes(const Packet& p);

Packet make_data_packet(PacketClass cls, const Message& msg, NodeId source,
                        std::uint16_t seq, std::uint8_t ttl,
                        std::uint8_t path_id);

}  // namespace chemnet
