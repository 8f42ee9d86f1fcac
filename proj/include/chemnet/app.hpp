#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "chemnet/level.hpp"
#include "chemnet/message.hpp"
#include "chemnet/pathloss.hpp"
#include "chemnet/rules.hpp"

namespace chemnet {

// Retransmission policy. Registration/configuration messages repeat until
// answered; alerts repeat faster and give up after a bounded number of tries.
struct AppTimings {
  double ctr_retry_s = 2.0;
  double ncf_retry_s = 2.0;
  double ale_retry_s = 0.5;
  int ale_max_attempts = 10;
};

struct ProductConfig {
  NodeId id = 1;
  std::string symbol;
  bool has_symbols = false;  // preinstalled symbol
  bool has_rules = false;    // preinstalled rule parameters
  StaticRuleConfig static_cfg;
  DynamicRuleConfig dynamic_cfg;
  CommunityRuleConfig community_cfg;
  double gre_period_s = 10.0;
  double sample_period_s = 10.0;
  AppTimings timings;
  // Calibration for the RSSI/distance equivalence; must match the channel.
  PathLossParams pathloss;
  double tx_power_dbm = 0.0;
};

enum class ProductPhase : std::uint8_t {
  Unregistered,
  AwaitingAck,
  AwaitingConfig,
  Supervising,
};

const char* to_string(ProductPhase p);

enum class AppTimerKind : std::uint8_t { CtrRetry = 0, NcfRetry, AleRetry, Gre };
inline constexpr int kAppTimerKinds = 4;

struct TimerRequest {
  AppTimerKind kind;
  double fire_at;
  std::uint32_t gen;  // staleness token; a fired timer with an old gen is void
};

struct StepOutput {
  std::vector<Message> messages;
  std::vector<TimerRequest> timers;
  std::vector<std::string> notes;  // trace fragments, `EVENT key=value ...`
};

struct ProductEvent {
  enum class Type { Start, Timer, Message, Sample };
  Type type = Type::Start;
  AppTimerKind timer = AppTimerKind::CtrRetry;
  std::uint32_t timer_gen = 0;
  Message msg;
  double rssi_dbm = 0;  // measured receive power of `msg`
  double sample = 0;    // sensed value
};

struct NeighborView {
  std::string symbol;
  SecurityLevel gre_level = SecurityLevel::G;
  SecurityLevel community = SecurityLevel::G;  // our pairwise distance level
  double last_heard = 0;
  std::uint16_t last_gre_seq = 0;
  bool seen_gre = false;
};

struct PendingAlert {
  Message msg;
  int attempts = 0;
};

struct ProductState {
  ProductConfig cfg;
  ProductPhase phase = ProductPhase::Unregistered;
  bool symbol_known = false;
  bool rules_known = false;

  DynamicRuleState dyn;
  SecurityLevel last_static = SecurityLevel::G;
  SecurityLevel last_dynamic = SecurityLevel::G;
  bool have_sample = false;
  double last_sample = 0;

  std::map<NodeId, NeighborView> neighbors;
  SecurityLevel announced = SecurityLevel::G;
  std::optional<PendingAlert> pending_ale;

  std::uint16_t next_seq = 0;
  std::uint16_t gre_seq = 0;
  std::uint32_t timer_gen[kAppTimerKinds] = {0, 0, 0, 0};
};

ProductState make_product(const ProductConfig& cfg);

// Advances the product state machine by one event. Events must arrive in
// non-decreasing `now` order. The state is updated in place; outputs carry
// the messages to transmit and the timers to arm.
StepOutput product_step(ProductState& st, const ProductEvent& ev, double now);

// Current global security level of a supervising product (Eq. 6 combination
// of the static, dynamic and worst pairwise community levels).
SecurityLevel product_global_level(const ProductState& st);

// Distance equivalent of a received signal strength under the mean
// log-distance model (shadowing term zero).
double rssi_to_distance(double rssi_dbm, const PathLossParams& pl,
                        double tx_power_dbm);

// --- Sink ---------------------------------------------------------------

struct SinkProvision {
  std::string symbol;
  RuleRecord rules;
};

struct AlertLogEntry {
  double time = 0;
  NodeId product = 0;
  SecurityLevel level = SecurityLevel::G;
  std::uint16_t seq = 0;
};

struct OperatorQuery {
  enum class What { Config, Rules, Ambient };
  What what = What::Ambient;
  NodeId target = 0;
};

struct SinkRegistryEntry {
  bool registered = false;
  bool symbols_sent = false;
  bool rules_sent = false;
  SecurityLevel last_level = SecurityLevel::G;
};

struct SinkState {
  std::map<NodeId, SinkProvision> provisioning;
  std::map<NodeId, SinkRegistryEntry> registry;
  std::vector<AlertLogEntry> alert_log;
  std::set<std::pair<NodeId, std::uint16_t>> logged_alerts;
  std::map<std::pair<NodeId, std::uint8_t>, double> pending_queries;
  std::uint16_t next_seq = 0;
  std::uint64_t ackale_sent = 0;
  std::uint64_t ale_received = 0;
};

struct SinkEvent {
  enum class Type { Message, Operator };
  Type type = Type::Message;
  Message msg;
  OperatorQuery query;
};

StepOutput sink_step(SinkState& st, const SinkEvent& ev, double now);

}  // namespace chemnet
