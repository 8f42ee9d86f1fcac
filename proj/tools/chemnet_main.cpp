#include <CLI11.hpp>
#include <cstdio>
#include <iostream>

#include "chemnet/golden.hpp"
#include "chemnet/runner.hpp"

using namespace chemnet;

namespace {

struct CommonOpts {
  std::string out_root;
  std::optional<std::uint64_t> seed;
  std::optional<int> trials;
  std::optional<double> duration;
  std::optional<std::string> protocol;
};

void apply(const CommonOpts& o, Scenario& sc) {
  if (o.seed) sc.seed = *o.seed;
  if (o.trials) sc.trials = *o.trials;
  if (o.duration) sc.duration_s = *o.duration;
  if (o.protocol) {
    if (*o.protocol == "ours") sc.routing = RoutingKind::Ours;
    else if (*o.protocol == "rrr") sc.routing = RoutingKind::Rrr;
    else throw ConfigError("--protocol must be ours or rrr");
  }
}

void add_common(CLI::App* cmd, CommonOpts& o) {
  cmd->add_option("--out", o.out_root, "Output root directory");
  cmd->add_option("--seed", o.seed, "Master seed override");
  cmd->add_option("--trials", o.trials, "Trial count override");
  cmd->add_option("--duration", o.duration, "Simulated seconds override");
  cmd->add_option("--protocol", o.protocol, "Routing protocol: ours|rrr");
}

void print_rows(const std::vector<MetricRow>& rows) {
  std::printf("%-8s %-14s %8s %-8s %12s %12s %10s %10s\n", "protocol",
              "profile", "density", "class", "mean_delay_s", "delay_std_s",
              "loss_ratio", "packets");
  for (const MetricRow& r : rows) {
    std::printf("%-8s %-14s %8d %-8s %12.6f %12.6f %10.4f %10llu\n",
                r.group.protocol.c_str(), r.group.profile.c_str(),
                r.group.density, to_string(r.cls), r.mean_delay_s,
                r.delay_std_s, r.loss_ratio,
                static_cast<unsigned long long>(r.n_generated));
  }
}

int cmd_run(const std::string& cfg_path, const CommonOpts& opts) {
  Scenario sc = load_scenario(cfg_path);
  apply(opts, sc);
  sc.validate();
  std::string out_root = opts.out_root.empty() ? default_out_root() : opts.out_root;
  std::fprintf(stderr, "running %s: %d trial(s), %d node(s), %.0f s, %s routing\n",
               sc.name.c_str(), sc.trials, sc.topology.n_nodes, sc.duration_s,
               to_string(sc.routing));
  auto trials = run_trials(sc);
  auto rows = aggregate_trials(sc, trials);
  write_run_artifacts(sc, trials, rows, out_root);
  print_rows(rows);
  std::fprintf(stderr, "artifacts under %s/%s\n", out_root.c_str(), sc.name.c_str());
  return 0;
}

int cmd_sweep(const std::string& cfg_path, const CommonOpts& opts) {
  Scenario sc = load_scenario(cfg_path);
  apply(opts, sc);
  std::string out_root = opts.out_root.empty() ? default_out_root() : opts.out_root;
  auto progress = [](const std::string& cell) {
    std::fprintf(stderr, "sweep cell: %s\n", cell.c_str());
  };
  SweepResult result = run_sweep(sc, out_root, 0, progress);
  print_rows(result.rows);
  for (const SweepCell& cell : result.cells) {
    if (!cell.error.empty())
      std::fprintf(stderr, "FAILED cell %s/%s/%d: %s\n",
                   to_string(cell.protocol), to_string(cell.profile),
                   cell.density, cell.error.c_str());
  }
  std::fprintf(stderr, "sweep done: %zu cells, %d failed; comparison.csv under %s/%s\n",
               result.cells.size(), result.failures, out_root.c_str(),
               sc.name.c_str());
  return result.failures == 0 ? 0 : 1;
}

int cmd_golden(const std::string& name, const CommonOpts& opts) {
  if (!is_golden_scenario(name)) {
    std::fprintf(stderr, "unknown golden scenario `%s` (expected registration, "
                         "temperature-alert or incompatible-approach)\n",
                 name.c_str());
    return 2;
  }
  std::uint64_t seed = opts.seed.value_or(1);
  GoldenOutcome outcome = run_golden(name, seed);
  if (outcome.passed) {
    std::printf("golden %s: PASS (seed %llu)\n", name.c_str(),
                static_cast<unsigned long long>(seed));
    return 0;
  }
  std::printf("golden %s: FAIL after %zu matched events (seed %llu)\n",
              name.c_str(), outcome.matched,
              static_cast<unsigned long long>(seed));
  std::printf("  %s\n", outcome.first_divergence.c_str());
  return 1;
}

int cmd_validate(const std::string& cfg_path) {
  Scenario sc = load_scenario(cfg_path);
  sc.validate();
  std::printf("%s: ok (%d nodes, %d trials, %.0f s, %s routing)\n",
              cfg_path.c_str(), sc.topology.n_nodes, sc.trials, sc.duration_s,
              to_string(sc.routing));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"chemnet: warehouse security WSN protocol simulator"};
  app.require_subcommand(1);

  std::string run_cfg, sweep_cfg, golden_name, validate_cfg;
  CommonOpts run_opts, sweep_opts, golden_opts;

  CLI::App* run = app.add_subcommand("run", "Run one scenario and emit artifacts");
  run->add_option("config", run_cfg, "Scenario file")->required();
  add_common(run, run_opts);

  CLI::App* sweep = app.add_subcommand("sweep", "Cross-product protocol comparison");
  sweep->add_option("config", sweep_cfg, "Scenario file with a [sweep] section")
      ->required();
  add_common(sweep, sweep_opts);

  CLI::App* golden = app.add_subcommand("golden", "Check a scripted scenario trace");
  golden->add_option("name", golden_name, "registration | temperature-alert | incompatible-approach")
      ->required();
  add_common(golden, golden_opts);

  CLI::App* validate = app.add_subcommand("validate", "Parse and validate a scenario");
  validate->add_option("config", validate_cfg, "Scenario file")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return cmd_run(run_cfg, run_opts);
    if (sweep->parsed()) return cmd_sweep(sweep_cfg, sweep_opts);
    if (golden->parsed()) return cmd_golden(golden_name, golden_opts);
    if (validate->parsed()) return cmd_validate(validate_cfg);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 2;
}
