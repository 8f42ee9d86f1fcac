#include "chemnet/records.hpp"

#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace chemnet {

const char* to_string(LossCause c) {
  switch (c) {
    case LossCause::None: return "";
    case LossCause::QueueOverflow: return "queue_overflow";
    case LossCause::MacBackoff: return "mac_backoff";
    case LossCause::LinkLoss: return "link_loss";
    case LossCause::NoGradient: return "no_gradient";
    case LossCause::NoResponders: return "no_responders";
    case LossCause::TtlExceeded: return "ttl_exceeded";
    case LossCause::DeadEnd: return "dead_end";
    case LossCause::NodeDead: return "node_dead";
    case LossCause::EndOfSim: return "end_of_sim";
  }
  return "?";
}

namespace {

LossCause loss_from_string(const std::string& s) {
  for (int i = 0; i <= static_cast<int>(LossCause::EndOfSim); ++i) {
    auto c = static_cast<LossCause>(i);
    if (s == to_string(c)) return c;
  }
  throw std::runtime_error("unknown loss cause: " + s);
}

PacketClass class_from_string(const std::string& s) {
  if (s == "alert") return PacketClass::Alert;
  if (s == "routine") return PacketClass::Routine;
  if (s == "netcontrol") return PacketClass::NetControl;
  throw std::runtime_error("unknown packet class: " + s);
}

}  // namespace

void write_packet_csv(std::ostream& out, const std::vector<PacketRecord>& records) {
  out << kPacketCsvHeader << '\n';
  char buf[160];
  for (const PacketRecord& r : records) {
    if (r.delivered()) {
      std::snprintf(buf, sizeof buf, "%s,%u,%u,%.6f,%.6f,,%u,%u\n",
                    to_string(r.cls), r.origin, r.seq, r.birth, *r.delivery,
                    r.hops, r.path_id);
    } else {
      std::snprintf(buf, sizeof buf, "%s,%u,%u,%.6f,,%s,%u,%u\n",
                    to_string(r.cls), r.origin, r.seq, r.birth,
                    to_string(r.loss), r.hops, r.path_id);
    }
    out << buf;
  }
}

std::vector<PacketRecord> read_packet_csv(std::istream& in) {
  std::vector<PacketRecord> out;
  std::string line;
  if (!std::getline(in, line) || line != kPacketCsvHeader)
    throw std::runtime_error("packet csv: missing or unexpected header");
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> cols;
    std::string cell;
    std::istringstream ls(line);
    while (std::getline(ls, cell, ',')) cols.push_back(cell);
    while (cols.size() < 8) cols.emplace_back();
    if (cols.size() != 8)
      throw std::runtime_error("packet csv line " + std::to_string(lineno) +
                               ": expected 8 columns");
    PacketRecord r;
    r.cls = class_from_string(cols[0]);
    r.origin = static_cast<NodeId>(std::stoul(cols[1]));
    r.seq = static_cast<std::uint16_t>(std::stoul(cols[2]));
    r.birth = std::stod(cols[3]);
    if (!cols[4].empty()) {
      r.delivery = std::stod(cols[4]);
      r.loss = LossCause::None;
    } else {
      r.loss = loss_from_string(cols[5]);
    }
    r.hops = static_cast<std::uint8_t>(std::stoul(cols[6]));
    r.path_id = static_cast<std::uint8_t>(std::stoul(cols[7]));
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace chemnet

