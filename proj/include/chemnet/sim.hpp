#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "chemnet/config.hpp"
#include "chemnet/records.hpp"
#include "chemnet/topology.hpp"

namespace chemnet {

struct TrialStats {
  std::uint64_t frames_sent = 0;
  std::uint64_t frames_decoded = 0;
  std::uint64_t mac_backoff_drops = 0;
  std::uint64_t queue_overflow_drops = 0;
  std::uint64_t data_delivered = 0;
  std::uint64_t inuse_sent = 0;
  std::uint64_t dead_ends = 0;
  std::uint64_t app_send_deferred = 0;  // app message with no gradient yet
  std::uint64_t gatherings = 0;
  std::uint64_t alerts_logged_at_sink = 0;
};

struct NodeEnergyReport {
  NodeId id = 0;
  double initial_j = 0;
  double remaining_j = 0;
  double spent_j = 0;
  double listen_s = 0;
  double rx_s = 0;
  double tx_s = 0;
  bool died = false;
  double died_at = -1;
  bool ledger_increased = false;  // must stay false
};

struct TrialResult {
  std::uint64_t seed = 0;
  std::string trace;
  std::vector<PacketRecord> records;
  std::vector<NodeEnergyReport> energy;
  std::vector<Position> positions;     // initial positions, sink first
  std::vector<int> final_gradients;    // -1 where none was acquired
  double mean_decode_range_m = 0;
  TrialStats stats;
};

// Executes one deterministic trial of the scenario.
TrialResult run_trial(const Scenario& scenario, std::uint64_t seed);

}  // namespace chemnet
