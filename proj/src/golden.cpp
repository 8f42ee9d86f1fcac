#include "chemnet/golden.hpp"

#include <cstdio>
#include <sstream>

namespace chemnet {

std::vector<TraceEvent> parse_trace(const std::string& trace) {
  std::vector<TraceEvent> out;
  std::istringstream in(trace);
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::string tok;
    TraceEvent ev;
    bool have_t = false, have_node = false, have_name = false;
    while (ls >> tok) {
      auto eq = tok.find('=');
      if (eq == std::string::npos) {
        if (!have_name) {
          ev.name = tok;
          have_name = true;
        }
        continue;
      }
      std::string key = tok.substr(0, eq);
      std::string val = tok.substr(eq + 1);
      if (!have_t && key == "t") {
        ev.t = std::stod(val);
        have_t = true;
      } else if (!have_node && key == "node") {
        ev.node = static_cast<NodeId>(std::stoul(val));
        have_node = true;
      } else {
        ev.kv[key] = val;
      }
    }
    if (have_t && have_node && have_name) out.push_back(std::move(ev));
  }
  return out;
}

std::string Expect::describe() const {
  std::ostringstream out;
  out << "node=" << node << " " << name;
  for (const auto& [k, v] : kv) out << " " << k << "=" << v;
  if (num_gt) out << " " << num_gt->first << ">" << num_gt->second;
  return out.str();
}

bool Expect::matches(const TraceEvent& ev) const {
  if (ev.node != node || ev.name != name) return false;
  for (const auto& [k, v] : kv) {
    auto it = ev.kv.find(k);
    if (it == ev.kv.end() || it->second != v) return false;
  }
  if (num_gt) {
    auto it = ev.kv.find(num_gt->first);
    if (it == ev.kv.end()) return false;
    try {
      if (!(std::stod(it->second) > num_gt->second)) return false;
    } catch (const std::exception&) {
      return false;
    }
  }
  return true;
}

GoldenOutcome match_subsequence(const std::vector<TraceEvent>& events,
                                const std::vector<Expect>& expected) {
  GoldenOutcome out;
  std::size_t next = 0;
  for (const TraceEvent& ev : events) {
    if (next >= expected.size()) break;
    if (expected[next].matches(ev)) ++next;
  }
  out.matched = next;
  if (next >= expected.size()) {
    out.passed = true;
  } else {
    out.first_divergence = "expectation " + std::to_string(next) +
                           " never matched: " + expected[next].describe();
  }
  return out;
}

bool is_golden_scenario(const std::string& name) {
  for (const char* n : kGoldenNames)
    if (name == n) return true;
  return false;
}

namespace {

std::shared_ptr<CompatibilityMatrix> golden_matrix() {
  auto m = std::make_shared<CompatibilityMatrix>();
  m->add_symbol("GEN");
  m->add_symbol("H2O");
  m->set_incompatible("H2SO4", "HF");
  return m;
}

// Small fixed layouts near the sink; the lossless channel keeps event order
// protocol-determined so any seed passes.
Scenario golden_base() {
  Scenario sc;
  sc.channel.ideal = true;
  sc.channel.sigma_db = 0;
  sc.topology.area_m = 300;
  sc.traffic.mode = TrafficProfile::Mode::None;
  sc.matrix = golden_matrix();
  sc.trace_level = 1;
  sc.default_symbol = "GEN";
  sc.default_samples = {20.0, 0.0};
  sc.default_static = {-10.0, 60.0, 1.0};
  return sc;
}

}  // namespace

Scenario golden_scenario(const std::string& name) {
  Scenario sc = golden_base();
  if (name == "registration") {
    sc.name = "golden_registration";
    sc.topology.n_nodes = 1;
    sc.duration_s = 10;
    ProductSpec& p = sc.products[1];
    p.id = 1;
    p.position = Position{150, 20};
    p.has_symbols = false;  // NCF2: the symbol is the missing piece
    p.has_rules = true;
    p.symbol = "H2O";
    return sc;
  }
  if (name == "temperature-alert") {
    sc.name = "golden_temperature_alert";
    sc.topology.n_nodes = 3;
    sc.duration_s = 40;
    sc.products[1].id = 1;
    sc.products[1].position = Position{120, 15};
    sc.products[2].id = 2;
    sc.products[2].position = Position{180, 15};
    ProductSpec& p = sc.products[3];
    p.id = 3;
    p.symbol = "H2O";
    p.position = Position{150, 20};
    p.static_cfg = StaticRuleConfig{-100.0, 14.0, 0.0};
    p.samples = SampleScript{7.0, 2.0};
    p.sample_period_s = 5.0;
    return sc;
  }
  if (name == "incompatible-approach") {
    sc.name = "golden_incompatible_approach";
    sc.topology.n_nodes = 6;
    sc.duration_s = 90;
    sc.gre_period_s = 5.0;
    Position spots[] = {{110, 15}, {190, 15}, {150, 20}, {120, 35}, {180, 35}};
    for (NodeId id = 1; id <= 5; ++id) {
      ProductSpec& b = sc.products[id];
      b.id = id;
      b.position = spots[id - 1];
    }
    ProductSpec& p3 = sc.products[3];
    p3.symbol = "H2SO4";
    ProductSpec& p6 = sc.products[6];
    p6.id = 6;
    p6.symbol = "HF";
    // Starts 40 m out (greeting range, still a safe distance), registers via
    // the relays, then closes in through the bad band into the danger zone.
    p6.position = Position{150, 60};
    p6.waypoints = {Position{150, 22}};
    p6.speed_m_s = 0.5;
    return sc;
  }
  throw ConfigError("unknown golden scenario `" + name + "`");
}

std::vector<Expect> golden_expectation(const std::string& name) {
  auto kv = [](std::initializer_list<std::pair<const std::string, std::string>> init) {
    return std::map<std::string, std::string>(init);
  };
  if (name == "registration") {
    return {
        {1, "APP_SENT", kv({{"kind", "CTR"}}), {}},
        {0, "APP_RECV", kv({{"kind", "CTR"}, {"from", "1"}}), {}},
        {0, "APP_SENT", kv({{"kind", "ACKCTR"}, {"dest", "1"}}), {}},
        {1, "APP_RECV", kv({{"kind", "ACKCTR"}}), {}},
        {1, "APP_SENT", kv({{"kind", "NCF2"}}), {}},
        {0, "APP_RECV", kv({{"kind", "NCF2"}, {"from", "1"}}), {}},
        {0, "APP_SENT", kv({{"kind", "CMD1"}, {"dest", "1"}}), {}},
        {1, "APP_RECV", kv({{"kind", "CMD1"}}), {}},
        {1, "CONFIGURED", {}, {}},
    };
  }
  if (name == "temperature-alert") {
    return {
        {3, "CONFIGURED", {}, {}},
        {3, "SAMPLE", {}, {{"value", 14.0}}},  // the overflow sample
        {3, "ALERT", kv({{"level", "D"}}), {}},
        {3, "APP_SENT", kv({{"kind", "ALE"}, {"dest", "0"}}), {}},
        {0, "APP_RECV", kv({{"kind", "ALE"}, {"from", "3"}}), {}},
        {0, "APP_SENT", kv({{"kind", "ACKALE"}, {"dest", "3"}}), {}},
        {3, "APP_RECV", kv({{"kind", "ACKALE"}}), {}},
    };
  }
  if (name == "incompatible-approach") {
    return {
        {3, "APP_SENT", kv({{"kind", "GRE"}}), {}},
        {6, "APP_RECV", kv({{"kind", "GRE"}, {"from", "3"}}), {}},
        {6, "APP_SENT", kv({{"kind", "RSI"}, {"dest", "3"}}), {}},
        {3, "APP_RECV", kv({{"kind", "RSI"}, {"from", "6"}}), {}},
        {3, "ALERT", kv({{"level", "B"}, {"trigger", "community"}}), {}},
        {3, "APP_SENT", kv({{"kind", "ALE"}, {"dest", "0"}}), {}},
        {0, "APP_RECV", kv({{"kind", "ALE"}, {"from", "3"}}), {}},
        {0, "APP_SENT", kv({{"kind", "ACKALE"}, {"dest", "3"}}), {}},
        {3, "ALERT", kv({{"level", "D"}, {"trigger", "community"}}), {}},
        {3, "APP_SENT", kv({{"kind", "ALE"}, {"dest", "0"}}), {}},
        {0, "APP_SENT", kv({{"kind", "ACKALE"}, {"dest", "3"}}), {}},
    };
  }
  throw ConfigError("unknown golden scenario `" + name + "`");
}

GoldenOutcome run_golden(const std::string& name, std::uint64_t seed) {
  Scenario sc = golden_scenario(name);
  TrialResult result = run_trial(sc, seed);
  auto events = parse_trace(result.trace);
  return match_subsequence(events, golden_expectation(name));
}

}  // namespace chemnet
