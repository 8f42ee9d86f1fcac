#pragma once

#include <algorithm>
#include <cmath>

namespace chemnet {

// Log-distance path-loss model: PL(d) = PL(d0) + 10*n*log10(d/d0).
// Shared by the radio channel and the RSSI-to-distance equivalence the
// products use for community-rule evaluation.
struct PathLossParams {
  double exponent = 2.4;        // n
  double ref_loss_db = 55.0;    // PL(d0)
  double ref_distance_m = 1.0;  // d0

  double mean_loss_db(double distance_m) const {
    if (distance_m <= ref_distance_m) return ref_loss_db;
    return ref_loss_db + 10.0 * exponent * std::log10(distance_m / ref_distance_m);
  }

  double mean_rx_power_dbm(double tx_power_dbm, double distance_m) const {
    return tx_power_dbm - mean_loss_db(distance_m);
  }

  // Inverse of mean_rx_power_dbm in the distance argument. Readings above
  // the reference-distance power clamp to d0. Strictly decreasing in rssi.
  double distance_from_rssi(double tx_power_dbm, double rssi_dbm) const {
    double loss = tx_power_dbm - rssi_dbm;
    if (loss <= ref_loss_db) return ref_distance_m;
    return ref_distance_m * std::pow(10.0, (loss - ref_loss_db) / (10.0 * exponent));
  }
};

}  // namespace chemnet
