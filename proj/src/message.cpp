#include "chemnet/message.hpp"

#include <cstring>

namespace chemnet {

const char* to_string(MessageKind k) {
  switch (k) {
    case MessageKind::CTR: return "CTR";
    case MessageKind::ACKCTR: return "ACKCTR";
    case MessageKind::NCF0: return "NCF0";
    case MessageKind::NCF1: return "NCF1";
    case MessageKind::NCF2: return "NCF2";
    case MessageKind::CMD1: return "CMD1";
    case MessageKind::CMD2: return "CMD2";
    case MessageKind::CMD3: return "CMD3";
    case MessageKind::CMD4: return "CMD4";
    case MessageKind::CMD5: return "CMD5";
    case MessageKind::CFG: return "CFG";
    case MessageKind::SER: return "SER";
    case MessageKind::INA: return "INA";
    case MessageKind::GRE: return "GRE";
    case MessageKind::RSI: return "RSI";
    case MessageKind::ALE: return "ALE";
    case MessageKind::ACKALE: return "ACKALE";
  }
  return "?";
}

namespace {

void put_u8(std::vector<std::uint8_t>& out, std::uint8_t v) { out.push_back(v); }

void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v & 0xFF));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}

void put_f32(std::vector<std::uint8_t>& out, float v) {
  std::uint32_t bits;
  std::memcpy(&bits, &v, 4);
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(bits >> (8 * i)));
}

void put_str(std::vector<std::uint8_t>& out, const std::string& s) {
  if (s.size() > 32) throw MessageError("symbol string too long for wire");
  put_u8(out, static_cast<std::uint8_t>(s.size()));
  out.insert(out.end(), s.begin(), s.end());
}

struct Reader {
  const std::uint8_t* p;
  const std::uint8_t* end;

  std::uint8_t u8() {
    if (p >= end) throw MessageError("truncated message");
    return *p++;
  }
  std::uint16_t u16() {
    std::uint16_t lo = u8(), hi = u8();
    return static_cast<std::uint16_t>(lo | (hi << 8));
  }
  float f32() {
    std::uint32_t bits = 0;
    for (int i = 0; i < 4; ++i) bits |= static_cast<std::uint32_t>(u8()) << (8 * i);
    float v;
    std::memcpy(&v, &bits, 4);
    return v;
  }
  std::string str() {
    std::size_t n = u8();
    if (static_cast<std::size_t>(end - p) < n) throw MessageError("truncated symbol");
    std::string s(reinterpret_cast<const char*>(p), n);
    p += n;
    return s;
  }
};

void put_rules(std::vector<std::uint8_t>& out, const RuleRecord& r) {
  put_f32(out, r.v_min);
  put_f32(out, r.v_max);
  put_f32(out, r.delta_v);
  put_f32(out, r.t_cr);
  put_u16(out, r.n_c);
  put_f32(out, r.d_min);
  put_f32(out, r.delta_d);
}

RuleRecord read_rules(Reader& rd) {
  RuleRecord r;
  r.v_min = rd.f32();
  r.v_max = rd.f32();
  r.delta_v = rd.f32();
  r.t_cr = rd.f32();
  r.n_c = rd.u16();
  r.d_min = rd.f32();
  r.delta_d = rd.f32();
  return r;
}

}  // namespace

std::vector<std::uint8_t> encode(const Message& m) {
  std::vector<std::uint8_t> out;
  out.reserve(16);
  put_u8(out, static_cast<std::uint8_t>(m.kind));
  put_u16(out, m.source);
  put_u16(out, m.dest);
  put_u16(out, m.seq);
  switch (m.kind) {
    case MessageKind::CTR:
    case MessageKind::ACKCTR:
    case MessageKind::NCF0:
    case MessageKind::NCF1:
    case MessageKind::NCF2:
    case MessageKind::CMD2:
    case MessageKind::CMD4:
    case MessageKind::CMD5:
      break;
    case MessageKind::CMD1:
      put_str(out, m.symbol);
      break;
    case MessageKind::CMD3:
    case MessageKind::SER:
      put_rules(out, m.rules);
      break;
    case MessageKind::CFG:
      put_str(out, m.symbol);
      put_u8(out, m.has_symbols);
      put_u8(out, m.has_rules);
      break;
    case MessageKind::INA:
      put_f32(out, m.value);
      put_u8(out, static_cast<std::uint8_t>(m.level));
      break;
    case MessageKind::GRE:
      put_str(out, m.symbol);
      put_u8(out, static_cast<std::uint8_t>(m.level));
      break;
    case MessageKind::RSI:
      put_f32(out, m.rssi_dbm);
      put_str(out, m.symbol);
      put_u16(out, m.gre_seq);
      break;
    case MessageKind::ALE:
      put_u8(out, static_cast<std::uint8_t>(m.level));
      put_u8(out, static_cast<std::uint8_t>(m.trigger));
      put_f32(out, m.value);
      put_f32(out, m.threshold);
      put_u16(out, m.peer);
      break;
    case MessageKind::ACKALE:
      put_u16(out, m.acked_seq);
      break;
  }
  if (out.size() > 7 + kMaxPayloadBytes) throw MessageError("payload exceeds frame budget");
  return out;
}

Message decode(const std::uint8_t* data, std::size_t size) {
  Reader rd{data, data + size};
  Message m;
  std::uint8_t kind = rd.u8();
  if (kind >= kMessageKindCount) throw MessageError("unknown message kind");
  m.kind = static_cast<MessageKind>(kind);
  m.source = rd.u16();
  m.dest = rd.u16();
  m.seq = rd.u16();
  switch (m.kind) {
    case MessageKind::CTR:
    case MessageKind::ACKCTR:
    case MessageKind::NCF0:
    case MessageKind::NCF1:
    case MessageKind::NCF2:
    case MessageKind::CMD2:
    case MessageKind::CMD4:
    case MessageKind::CMD5:
      break;
    case MessageKind::CMD1:
      m.symbol = rd.str();
      break;
    case MessageKind::CMD3:
    case MessageKind::SER:
      m.rules = read_rules(rd);
      break;
    case MessageKind::CFG:
      m.symbol = rd.str();
      m.has_symbols = rd.u8();
      m.has_rules = rd.u8();
      break;
    case MessageKind::INA:
      m.value = rd.f32();
      m.level = static_cast<SecurityLevel>(rd.u8());
      break;
    case MessageKind::GRE:
      m.symbol = rd.str();
      m.level = static_cast<SecurityLevel>(rd.u8());
      break;
    case MessageKind::RSI:
      m.rssi_dbm = rd.f32();
      m.symbol = rd.str();
      m.gre_seq = rd.u16();
      break;
    case MessageKind::ALE:
      m.level = static_cast<SecurityLevel>(rd.u8());
      m.trigger = static_cast<AlertTrigger>(rd.u8());
      m.value = rd.f32();
      m.threshold = rd.f32();
      m.peer = rd.u16();
      break;
    case MessageKind::ACKALE:
      m.acked_seq = rd.u16();
      break;
  }
  return m;
}

std::size_t encoded_size(const Message& m) { return encode(m).size(); }

}  // namespace chemnet
