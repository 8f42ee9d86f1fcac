#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "chemnet/app.hpp"
#include "chemnet/channel.hpp"
#include "chemnet/routing.hpp"
#include "chemnet/rrr.hpp"
#include "chemnet/topology.hpp"

namespace chemnet {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// TelosB-class radio and energy figures plus the CSMA/CA knobs.
struct RadioParams {
  double tx_power_dbm = 0.0;
  double data_rate_bps = 250000.0;
  double voltage_v = 3.0;
  double initial_energy_j = 18720.0;
  double sink_energy_j = 1e12;
  double mcu_active_ma = 1.8;
  double sleep_ua = 5.1;  // the supervising duty cycle never sleeps
  double tx_current_ma = 17.4;
  double rx_current_ma = 19.7;  // idle listen draws the same as rx

  std::size_t mac_queue_capacity = 32;
  int mac_max_backoffs = 4;
  int mac_max_frame_retries = 3;        // acknowledged-unicast retry budget
  double mac_ack_overhead_s = 0.000544; // turnaround + ack frame on the air
  int mac_min_be = 3;
  int mac_max_be = 5;
  double mac_slot_s = 0.00032;
  double mac_cca_s = 0.000128;
  std::size_t mac_overhead_bytes = 16;
};

struct TrafficProfile {
  enum class Mode { None, NotCongested, Congested, Custom };
  Mode mode = Mode::None;
  double routine_rate_pkt_s = 0.0;  // per node
  double alert_rate_pkt_s = 0.0;    // per alert source
  int alert_sources = 0;
  double start_s = 5.0;

  static TrafficProfile not_congested() {
    return {Mode::NotCongested, 0.2, 1.0, 2, 5.0};
  }
  static TrafficProfile congested() {
    return {Mode::Congested, 1.0, 5.0, 4, 5.0};
  }
};

const char* to_string(TrafficProfile::Mode m);

// Deterministic sensor script: value = base + step * sample_index.
struct SampleScript {
  double base = 20.0;
  double step = 0.0;
};

struct ProductSpec {
  NodeId id = 0;
  std::string symbol;
  bool has_symbols = true;
  bool has_rules = true;
  std::optional<StaticRuleConfig> static_cfg;
  std::optional<DynamicRuleConfig> dynamic_cfg;
  std::optional<double> d_min;
  std::optional<double> delta_d;
  std::optional<Position> position;
  std::vector<Position> waypoints;
  double speed_m_s = 1.0;
  std::optional<SampleScript> samples;
  std::optional<double> gre_period_s;
  std::optional<double> sample_period_s;
};

struct OperatorAction {
  double at_s = 0;
  OperatorQuery query;
};

enum class RoutingKind { Ours, Rrr };

const char* to_string(RoutingKind k);

struct Scenario {
  std::string name = "scenario";
  TopologyParams topology;
  ChannelParams channel;
  RadioParams radio;
  NetParams net;
  AppTimings timings;
  RrrParams rrr;
  RoutingKind routing = RoutingKind::Ours;
  TrafficProfile traffic;
  double duration_s = 200.0;
  int trials = 1;
  std::uint64_t seed = 1;
  std::uint64_t shunt_salt = 0;  // perturbs only the RRR routine shunt stream
  bool realistic_downlink = false;
  int trace_level = 1;  // 0 silent, 1 application events, 2 network debug

  // Product defaults; per-product overrides in `products`.
  std::string default_symbol = "GEN";
  StaticRuleConfig default_static{-10.0, 60.0, 1.0};
  DynamicRuleConfig default_dynamic{30.0, 3};
  double default_d_min = 5.0;
  double default_delta_d = 3.0;
  double gre_period_s = 10.0;
  double sample_period_s = 10.0;
  SampleScript default_samples{20.0, 0.0};
  bool default_has_symbols = true;
  bool default_has_rules = true;

  std::string matrix_file;
  std::shared_ptr<CompatibilityMatrix> matrix;  // shared across trials

  std::map<NodeId, ProductSpec> products;
  std::vector<OperatorAction> operator_actions;

  // Sweep axes (used by the sweep subcommand).
  std::vector<int> sweep_densities;
  std::vector<TrafficProfile::Mode> sweep_profiles;
  std::vector<RoutingKind> sweep_protocols;

  void validate() const;  // throws ConfigError
  ProductConfig product_config(NodeId id) const;
  const ProductSpec* product_spec(NodeId id) const;
  SinkProvision provision_for(NodeId id) const;
  SampleScript sample_script(NodeId id) const;
};

// Line-oriented `key = value` scenario files with `[section]` headers.
Scenario parse_scenario(std::istream& in, const std::string& origin = "<input>");
Scenario load_scenario(const std::string& path);
std::string serialize_scenario(const Scenario& s);

}  // namespace chemnet
