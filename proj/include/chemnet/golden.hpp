#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "chemnet/config.hpp"
#include "chemnet/sim.hpp"

namespace chemnet {

struct TraceEvent {
  double t = 0;
  NodeId node = 0;
  std::string name;
  std::map<std::string, std::string> kv;
};

std::vector<TraceEvent> parse_trace(const std::string& trace);

// One step of an expected event subsequence: node + event name + exact
// key/value constraints, plus an optional numeric lower bound on one key.
struct Expect {
  NodeId node = 0;
  std::string name;
  std::map<std::string, std::string> kv;
  std::optional<std::pair<std::string, double>> num_gt;

  std::string describe() const;
  bool matches(const TraceEvent& ev) const;
};

struct GoldenOutcome {
  bool passed = false;
  std::size_t matched = 0;  // expectations satisfied before divergence
  std::string first_divergence;
};

// Timestamp-free ordered-subsequence check.
GoldenOutcome match_subsequence(const std::vector<TraceEvent>& events,
                                const std::vector<Expect>& expected);

inline const char* kGoldenNames[] = {"registration", "temperature-alert",
                                     "incompatible-approach"};

bool is_golden_scenario(const std::string& name);
Scenario golden_scenario(const std::string& name);
std::vector<Expect> golden_expectation(const std::string& name);

// Runs the named scripted scenario with the given seed and checks the
// stored expectation; event order is protocol-determined, not seed-determined.
GoldenOutcome run_golden(const std::string& name, std::uint64_t seed);

}  // namespace chemnet
