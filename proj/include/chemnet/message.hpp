#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "chemnet/level.hpp"
#include "chemnet/rules.hpp"

namespace chemnet {

using NodeId = std::uint16_t;

inline constexpr NodeId kBroadcastId = 0xFFFF;
inline constexpr NodeId kSinkId = 0;

enum class MessageKind : std::uint8_t {
  CTR = 0,   // product announces itself
  ACKCTR,    // sink acknowledges registration
  NCF0,      // needs symbols and rules
  NCF1,      // has symbols, needs rules
  NCF2,      // has rules, needs symbols
  CMD1,      // sink installs symbols
  CMD2,      // sink queries configuration
  CMD3,      // sink installs rules
  CMD4,      // sink queries security rules
  CMD5,      // sink queries ambient values
  CFG,       // reply to CMD2
  SER,       // reply to CMD4
  INA,       // reply to CMD5 (and routine ambient report)
  GRE,       // neighborhood greeting broadcast
  RSI,       // signal-strength reply to a GRE
  ALE,       // alert announcement
  ACKALE,    // sink acknowledges an alert
};

inline constexpr int kMessageKindCount = 17;

const char* to_string(MessageKind k);

enum class AlertTrigger : std::uint8_t { StaticRule = 0, DynamicRule, Community };

// Full security-rule parameter record as carried by CMD3 and SER.
struct RuleRecord {
  float v_min = 0;
  float v_max = 0;
  float delta_v = 0;
  float t_cr = 0;
  std::uint16_t n_c = 1;
  float d_min = 0;
  float delta_d = 0;

  bool operator==(const RuleRecord&) const = default;
};

// Application message. The fields below `seq` form a union of the
// kind-specific payloads; encode()/decode() serialize only the subset the
// kind defines, so unused fields are ignored on the wire.
struct Message {
  MessageKind kind = MessageKind::CTR;
  NodeId source = 0;
  NodeId dest = 0;
  std::uint16_t seq = 0;

  std::string symbol;                        // CMD1, CFG, GRE, RSI
  RuleRecord rules;                          // CMD3, SER
  std::uint8_t has_symbols = 0;              // CFG
  std::uint8_t has_rules = 0;                // CFG
  float value = 0;                           // INA, ALE
  SecurityLevel level = SecurityLevel::G;    // INA, GRE, ALE
  float rssi_dbm = 0;                        // RSI
  std::uint16_t gre_seq = 0;                 // RSI: seq of the GRE answered
  AlertTrigger trigger = AlertTrigger::StaticRule;  // ALE
  float threshold = 0;                       // ALE: the limit that was crossed
  NodeId peer = 0;                           // ALE: offending neighbor (community)
  std::uint16_t acked_seq = 0;               // ACKALE
};

inline constexpr std::size_t kMaxPayloadBytes = 100;

// Wire layout: kind(1) source(2) dest(2) seq(2) payload(<=100), little endian.
std::vector<std::uint8_t> encode(const Message& m);
Message decode(const std::uint8_t* data, std::size_t size);
inline Message decode(const std::vector<std::uint8_t>& buf) {
  return decode(buf.data(), buf.size());
}

std::size_t encoded_size(const Message& m);

class MessageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace chemnet
