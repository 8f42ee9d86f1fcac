#include "chemnet/packet.hpp"

namespace chemnet {

const char* to_string(PacketClass c) {
  switch (c) {
    case PacketClass::Alert: return "alert";
    case PacketClass::Routine: return "routine";
    case PacketClass::NetControl: return "netcontrol";
  }
  return "?";
}

const char* to_string(PacketKind k) {
  switch (k) {
    case PacketKind::HELLO: return "HELLO";
    case PacketKind::INUSE: return "INUSE";
    case PacketKind::INFO_REQ: return "INFO_REQ";
    case PacketKind::INFO_RSP: return "INFO_RSP";
    case PacketKind::DATA: return "DATA";
  }
  return "?";
}

std::size_t packet_wire_bytes(const Packet& p) {
  switch (p.kind) {
    case PacketKind::HELLO: return 2 + 5;     // class/kind + round:2 hc:1 sa:2
    case PacketKind::INUSE: return 2 + 4;     // originator:2 seq:2
    case PacketKind::INFO_REQ: return 2 + 2;  // requester:2
    case PacketKind::INFO_RSP: return 2 + 7;  // id:2 hc:1 energy:4
    case PacketKind::DATA:
      // class/kind + source:2 seq:2 hop:1 path:1 ttl:1 + app message
      return 2 + 7 + encoded_size(p.msg);
  }
  return 2;
}

Packet make_data_packet(PacketClass cls, const Message& msg, NodeId source,
                        std::uint16_t seq, std::uint8_t ttl,
                        std::uint8_t path_id) {
  Packet p;
  p.cls = cls;
  p.kind = PacketKind::DATA;
  p.source = source;
  p.seq = seq;
  p.ttl = ttl;
  p.path_id = path_id;
  p.msg = msg;
  return p;
}

}  // namespace chemnet
