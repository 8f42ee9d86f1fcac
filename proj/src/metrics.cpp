#include "chemnet/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>

namespace chemnet {

void MetricsAccumulator::add_trial(int trial_id,
                                   const std::vector<PacketRecord>& records) {
  // Collapse multipath copies: first arrival wins, lost only if all copies
  // are lost. Keys are unique within a trial.
  struct Collapsed {
    PacketClass cls;
    double birth = 0;
    bool delivered = false;
    double first_arrival = 0;
  };
  std::map<std::uint32_t, Collapsed> packets;
  for (const PacketRecord& r : records) {
    if (r.cls == PacketClass::NetControl) continue;
    std::uint32_t key =
        (static_cast<std::uint32_t>(r.origin) << 16) | r.seq;
    auto [it, fresh] = packets.try_emplace(key);
    Collapsed& c = it->second;
    if (fresh) {
      c.cls = r.cls;
      c.birth = r.birth;
    }
    if (r.delivered()) {
      if (!c.delivered || *r.delivery < c.first_arrival) {
        c.delivered = true;
        c.first_arrival = *r.delivery;
      }
    }
  }

  auto& trial = trials_[trial_id];
  for (const auto& [key, c] : packets) {
    TrialClassStats& ts = trial[c.cls];
    ClassAgg& agg = agg_[c.cls];
    ++ts.generated;
    ++agg.generated;
    if (c.delivered) {
      double delay = c.first_arrival - c.birth;
      if (delay < 0) throw std::logic_error("delivery precedes birth");
      ++ts.delivered;
      ts.delay_sum += delay;
      agg.delays.push_back(delay);
    }
  }
}

std::vector<MetricRow> MetricsAccumulator::rows() const {
  std::vector<MetricRow> out;
  for (const auto& [cls, agg] : agg_) {
    MetricRow row;
    row.group = group_;
    row.cls = cls;
    row.n_generated = agg.generated;
    row.n_delivered = agg.delays.size();
    row.n_trials = static_cast<int>(trials_.size());
    if (!agg.delays.empty()) {
      double sum = 0;
      for (double d : agg.delays) sum += d;
      row.mean_delay_s = sum / static_cast<double>(agg.delays.size());
      double ss = 0;
      for (double d : agg.delays) {
        double e = d - row.mean_delay_s;
        ss += e * e;
      }
      row.delay_std_s =
          agg.delays.size() > 1
              ? std::sqrt(ss / static_cast<double>(agg.delays.size() - 1))
              : 0.0;
    }
    row.loss_ratio =
        agg.generated
            ? 1.0 - static_cast<double>(row.n_delivered) /
                        static_cast<double>(agg.generated)
            : 0.0;
    out.push_back(row);
  }
  return out;
}

std::vector<TrialClassStats> MetricsAccumulator::per_trial(
    PacketClass cls) const {
  std::vector<TrialClassStats> out;
  for (const auto& [trial, classes] : trials_) {
    auto it = classes.find(cls);
    out.push_back(it == classes.end() ? TrialClassStats{} : it->second);
  }
  return out;
}

void write_metrics_csv(std::ostream& out, const std::vector<MetricRow>& rows) {
  out << kMetricsCsvHeader << '\n';
  char buf[256];
  for (const MetricRow& r : rows) {
    std::snprintf(buf, sizeof buf, "%s,%s,%d,%s,%.6f,%.6f,%.6f,%llu,%d\n",
                  r.group.protocol.c_str(), r.group.profile.c_str(),
                  r.group.density, to_string(r.cls), r.mean_delay_s,
                  r.delay_std_s, r.loss_ratio,
                  static_cast<unsigned long long>(r.n_generated), r.n_trials);
    out << buf;
  }
}

namespace {

TrialSummary summarize(const std::vector<double>& xs) {
  TrialSummary s;
  s.n = static_cast<int>(xs.size());
  if (xs.empty()) return s;
  double sum = 0;
  for (double x : xs) sum += x;
  s.mean = sum / static_cast<double>(xs.size());
  if (xs.size() > 1) {
    double ss = 0;
    for (double x : xs) {
      double e = x - s.mean;
      ss += e * e;
    }
    s.stddev = std::sqrt(ss / static_cast<double>(xs.size() - 1));
    s.stderr_mean = s.stddev / std::sqrt(static_cast<double>(xs.size()));
  }
  return s;
}

}  // namespace

TrialSummary summarize_trial_means(const std::vector<TrialClassStats>& trials) {
  std::vector<double> xs;
  for (const TrialClassStats& t : trials)
    if (t.delivered > 0) xs.push_back(t.mean_delay());
  return summarize(xs);
}

TrialSummary summarize_trial_losses(
    const std::vector<TrialClassStats>& trials) {
  std::vector<double> xs;
  for (const TrialClassStats& t : trials)
    if (t.generated > 0) xs.push_back(t.loss_ratio());
  return summarize(xs);
}

}  // namespace chemnet
