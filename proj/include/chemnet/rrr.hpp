#pragma once

#include <deque>
#include <optional>
#include <random>

#include "chemnet/routing.hpp"

namespace chemnet {

struct RrrParams {
  double threshold_pkt_s = 3.0;  // alert rate above which routine traffic shunts
  double window_s = 5.0;         // sliding measurement window
};

// Sliding-window rate estimator over forwarded alert packets.
class AlertRateEstimator {
 public:
  explicit AlertRateEstimator(double window_s = 5.0) : window_s_(window_s) {}

  void observe(double now) {
    stamps_.push_back(now);
    evict(now);
  }

  double rate(double now) {
    evict(now);
    return static_cast<double>(stamps_.size()) / window_s_;
  }

 private:
  void evict(double now) {
    while (!stamps_.empty() && now - stamps_.front() > window_s_)
      stamps_.pop_front();
  }

  double window_s_;
  std::deque<double> stamps_;
};

struct RrrState {
  RoutingState routing;  // gradient + neighbor table from HELLO setup
  AlertRateEstimator estimator;
  RrrParams params;

  explicit RrrState(RrrParams p = {}) : estimator(p.window_s), params(p) {}
};

// Preferred next hop: lowest hop count, ties by id.
std::optional<NodeId> rrr_preferred(const RoutingState& st);

// Random-descent next hop: uniform over neighbors with hc <= own gradient.
// Draws from `rng` only when there is a choice to make.
std::optional<NodeId> rrr_random_descent(const RoutingState& st,
                                         std::mt19937_64& rng);

// Forwarding decision for one packet. Alert packets always take the
// preferred path and feed the rate estimator; routine packets shunt to a
// random descent neighbor while the estimate exceeds the threshold.
std::optional<NodeId> rrr_route(RrrState& st, PacketClass cls, double now,
                                std::mt19937_64& rng);

}  // namespace chemnet
