#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "chemnet/channel.hpp"

namespace chemnet {

// Frame-level reception under additive interference. A receiver locks onto
// the first frame strong enough to hear while idle; every concurrent
// transmission degrades the tracked worst-case SINR; the decode decision
// falls at frame end. Transmitting or dead nodes cannot lock.
class AirModel {
 public:
  AirModel(double noise_mw, double sinr_threshold_linear, double sensitivity_mw,
           double busy_mw, std::size_t n_nodes)
      : noise_mw_(noise_mw),
        thr_(sinr_threshold_linear),
        sensitivity_mw_(sensitivity_mw),
        busy_mw_(busy_mw),
        nodes_(n_nodes) {}

  struct RxPower {
    NodeId node;
    double mw;
  };

  struct Outcome {
    NodeId node;
    bool decoded;
    double rssi_dbm;
  };

  void set_rx_enabled(NodeId n, bool enabled) {
    nodes_[n].rx_enabled = enabled;
    if (!enabled) nodes_[n].lock.reset();
  }

  // Total in-band power at the node, for clear-channel assessment.
  double channel_power_mw(NodeId n) const { return nodes_[n].interference_mw; }
  bool cca_busy(NodeId n) const { return channel_power_mw(n) > busy_mw_; }
  bool locked(NodeId n) const { return nodes_[n].lock.has_value(); }

  // `idealized_dest` marks a frame whose addressee decodes regardless of
  // signal strength unless channel power above the busy level overlaps it.
  void frame_start(std::uint64_t id, const std::vector<RxPower>& rx,
                   std::optional<NodeId> idealized_dest = std::nullopt) {
    frames_[id] = rx;
    for (const RxPower& r : rx) {
      NodeState& ns = nodes_[r.node];
      double other = ns.interference_mw;
      ns.interference_mw += r.mw;
      if (ns.lock && ns.lock->frame != id) {
        // One more interferer for an ongoing reception.
        double sinr = ns.lock->signal_mw /
                      (noise_mw_ + ns.interference_mw - ns.lock->signal_mw);
        if (sinr < ns.lock->min_sinr) ns.lock->min_sinr = sinr;
        if (r.mw > busy_mw_) ns.lock->busy_overlap = true;
        continue;
      }
      if (!ns.rx_enabled || ns.lock) continue;
      bool ideal_target = idealized_dest && *idealized_dest == r.node;
      if (r.mw < sensitivity_mw_ && !ideal_target) continue;
      Lock lock;
      lock.frame = id;
      lock.signal_mw = r.mw;
      lock.min_sinr = r.mw / (noise_mw_ + other);
      lock.busy_overlap = other > busy_mw_;
      lock.idealized = ideal_target;
      ns.lock = lock;
    }
  }

  // Debug visibility into why a given node failed to decode a frame.
  enum class FailWhy { Decoded, NeverLocked, BadSinr, BusyOverlap, NotInList };
  FailWhy last_fail_why(std::uint64_t id, NodeId node) const {
    auto it = frames_.find(id);
    if (it == frames_.end()) return FailWhy::NotInList;
    for (const RxPower& r : it->second) {
      if (r.node != node) continue;
      const NodeState& ns = nodes_[node];
      if (!ns.lock || ns.lock->frame != id) return FailWhy::NeverLocked;
      if (ns.lock->idealized)
        return ns.lock->busy_overlap ? FailWhy::BusyOverlap : FailWhy::Decoded;
      return ns.lock->min_sinr >= thr_ ? FailWhy::Decoded : FailWhy::BadSinr;
    }
    return FailWhy::NotInList;
  }

  // Removes the frame from the air and resolves every receiver locked on it.
  std::vector<Outcome> frame_end(std::uint64_t id) {
    std::vector<Outcome> out;
    auto it = frames_.find(id);
    if (it == frames_.end()) return out;
    for (const RxPower& r : it->second) {
      NodeState& ns = nodes_[r.node];
      ns.interference_mw -= r.mw;
      if (ns.interference_mw < 0) ns.interference_mw = 0;
      if (ns.lock && ns.lock->frame == id) {
        bool ok = ns.lock->idealized ? !ns.lock->busy_overlap
                                     : ns.lock->min_sinr >= thr_;
        out.push_back({r.node, ok, mw_to_dbm(ns.lock->signal_mw)});
        ns.lock.reset();
      }
    }
    frames_.erase(it);
    return out;
  }

 private:
  struct Lock {
    std::uint64_t frame = 0;
    double signal_mw = 0;
    double min_sinr = 0;
    bool busy_overlap = false;
    bool idealized = false;
  };

  struct NodeState {
    double interference_mw = 0;
    bool rx_enabled = true;
    std::optional<Lock> lock;
  };

  double noise_mw_;
  double thr_;
  double sensitivity_mw_;
  double busy_mw_;
  std::vector<NodeState> nodes_;
  std::map<std::uint64_t, std::vector<RxPower>> frames_;
};

}  // namespace chemnet
