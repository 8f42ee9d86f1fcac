#pragma once

#include <functional>
#include <string>
#include <vector>

#include "chemnet/metrics.hpp"
#include "chemnet/sim.hpp"

namespace chemnet {

// Trial i of a run uses seed(master, i); trial 0 is the master seed itself
// so a single-trial run is exactly reproducible from --seed.
std::uint64_t trial_seed(std::uint64_t master, int trial);

// Runs `scenario.trials` trials (parallel across worker threads, results in
// trial order). `workers` 0 picks the hardware concurrency.
std::vector<TrialResult> run_trials(const Scenario& scenario,
                                    unsigned workers = 0);

MetricGroup group_of(const Scenario& scenario);

std::vector<MetricRow> aggregate_trials(const Scenario& scenario,
                                        const std::vector<TrialResult>& trials);

// out_root/<name>/<seed>/trace.log + packets.csv, out_root/<name>/metrics.csv
void write_run_artifacts(const Scenario& scenario,
                         const std::vector<TrialResult>& trials,
                         const std::vector<MetricRow>& rows,
                         const std::string& out_root);

struct SweepCell {
  RoutingKind protocol;
  TrafficProfile::Mode profile;
  int density;
  std::string error;  // empty on success
};

struct SweepResult {
  std::vector<MetricRow> rows;
  std::vector<SweepCell> cells;
  int failures = 0;
};

// Full cross product of the scenario's sweep axes. Cell seeds derive from
// the master seed; failures are reported per cell and do not stop the sweep.
SweepResult run_sweep(const Scenario& base, const std::string& out_root,
                      unsigned workers = 0,
                      const std::function<void(const std::string&)>& progress = {});

// Derives the per-cell scenario (used by the sweep and the acceptance suite).
Scenario sweep_cell_scenario(const Scenario& base, RoutingKind protocol,
                             TrafficProfile::Mode profile, int density);

std::string default_out_root();

}  // namespace chemnet
