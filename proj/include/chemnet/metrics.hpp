#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "chemnet/records.hpp"

namespace chemnet {

struct MetricGroup {
  std::string protocol;  // ours | rrr
  std::string profile;   // congested | not-congested | ...
  int density = 0;       // product count

  auto operator<=>(const MetricGroup&) const = default;
};

struct MetricRow {
  MetricGroup group;
  PacketClass cls = PacketClass::Routine;
  double mean_delay_s = 0;
  double delay_std_s = 0;  // sample stddev over delivered packet delays
  double loss_ratio = 0;
  std::uint64_t n_generated = 0;
  std::uint64_t n_delivered = 0;
  int n_trials = 0;
};

// Per-trial summary used for standard-error comparisons across trials.
struct TrialClassStats {
  std::uint64_t generated = 0;
  std::uint64_t delivered = 0;
  double delay_sum = 0;

  double mean_delay() const {
    return delivered ? delay_sum / static_cast<double>(delivered) : 0.0;
  }
  double loss_ratio() const {
    return generated ? 1.0 - static_cast<double>(delivered) /
                                 static_cast<double>(generated)
                     : 0.0;
  }
};

// Folds per-packet records into the two evaluation metrics. Multipath alert
// copies count once per (origin, seq): the first arrival defines the delay
// and the packet is lost only when no copy arrives.
class MetricsAccumulator {
 public:
  explicit MetricsAccumulator(MetricGroup group) : group_(std::move(group)) {}

  void add_trial(int trial_id, const std::vector<PacketRecord>& records);

  std::vector<MetricRow> rows() const;
  std::vector<TrialClassStats> per_trial(PacketClass cls) const;
  int trial_count() const { return static_cast<int>(trials_.size()); }

 private:
  struct ClassAgg {
    std::vector<double> delays;  // one entry per delivered packet
    std::uint64_t generated = 0;
  };

  MetricGroup group_;
  std::map<int, std::map<PacketClass, TrialClassStats>> trials_;
  std::map<PacketClass, ClassAgg> agg_;
};

inline constexpr const char* kMetricsCsvHeader =
    "protocol,profile,density,class,mean_delay_s,delay_std_s,loss_ratio,"
    "n_packets,n_trials";

void write_metrics_csv(std::ostream& out, const std::vector<MetricRow>& rows);

// Mean, sample stddev and standard error of per-trial mean delays.
struct TrialSummary {
  double mean = 0;
  double stddev = 0;
  double stderr_mean = 0;
  int n = 0;
};

TrialSummary summarize_trial_means(const std::vector<TrialClassStats>& trials);
TrialSummary summarize_trial_losses(const std::vector<TrialClassStats>& trials);

}  // namespace chemnet
