#pragma once

#include <cmath>
#include <cstdint>

#include "chemnet/message.hpp"
#include "chemnet/pathloss.hpp"
#include "chemnet/rng.hpp"

namespace chemnet {

inline double dbm_to_mw(double dbm) { return std::pow(10.0, dbm / 10.0); }
inline double mw_to_dbm(double mw) { return 10.0 * std::log10(mw); }

// Lognormal-shadowing channel. The shadowing realization is one gaussian
// draw per undirected link, fixed for the whole trial, so links are
// symmetric and stable. `ideal` disables shadowing, interference and
// collisions: a frame decodes exactly within the mean decode range.
struct ChannelParams {
  PathLossParams pathloss;
  double sigma_db = 4.0;
  double sinr_threshold_db = 6.0;
  double noise_floor_dbm = -100.0;
  // Links are admitted into neighbor tables only when heard this far above
  // sensitivity; the headroom keeps routed links decodable under moderate
  // interference. Folded into the usable decode range.
  double link_margin_db = 4.0;
  // Transmissions weaker than this at a receiver are ignored as interference.
  double interference_cutoff_dbm = -104.0;
  double cca_busy_dbm = -100.0;
  bool ideal = false;
};

class Channel {
 public:
  Channel(ChannelParams params, std::uint64_t shadow_seed)
      : p_(params), seed_(shadow_seed) {}

  const ChannelParams& params() const { return p_; }

  double shadow_db(NodeId a, NodeId b) const {
    if (p_.ideal || p_.sigma_db <= 0.0) return 0.0;
    NodeId lo = a < b ? a : b;
    NodeId hi = a < b ? b : a;
    std::uint64_t key = mix64(seed_, (static_cast<std::uint64_t>(lo) << 16) | hi);
    return gaussian_from_key(key) * p_.sigma_db;
  }

  double rx_power_dbm(NodeId a, NodeId b, double tx_dbm,
                      double distance_m) const {
    return tx_dbm - p_.pathloss.mean_loss_db(distance_m) - shadow_db(a, b);
  }

  double mean_rx_power_dbm(double tx_dbm, double distance_m) const {
    return p_.pathloss.mean_rx_power_dbm(tx_dbm, distance_m);
  }

  // Minimum receive power that decodes against the noise floor alone.
  double sensitivity_dbm() const {
    return p_.noise_floor_dbm + p_.sinr_threshold_db;
  }

  // Distance at which the mean receive power meets the sensitivity.
  double mean_decode_range_m(double tx_dbm) const {
    double budget = tx_dbm - sensitivity_dbm();  // tolerable path loss
    if (budget <= p_.pathloss.ref_loss_db) return p_.pathloss.ref_distance_m;
    return p_.pathloss.ref_distance_m *
           std::pow(10.0, (budget - p_.pathloss.ref_loss_db) /
                              (10.0 * p_.pathloss.exponent));
  }

  double noise_mw() const { return dbm_to_mw(p_.noise_floor_dbm); }
  double sinr_threshold_linear() const {
    return std::pow(10.0, p_.sinr_threshold_db / 10.0);
  }

 private:
  ChannelParams p_;
  std::uint64_t seed_;
};

}  // namespace chemnet
