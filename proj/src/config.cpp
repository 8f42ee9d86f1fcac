#include "chemnet/config.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace chemnet {

const char* to_string(TrafficProfile::Mode m) {
  switch (m) {
    case TrafficProfile::Mode::None: return "none";
    case TrafficProfile::Mode::NotCongested: return "not-congested";
    case TrafficProfile::Mode::Congested: return "congested";
    case TrafficProfile::Mode::Custom: return "custom";
  }
  return "?";
}

const char* to_string(RoutingKind k) {
  return k == RoutingKind::Ours ? "ours" : "rrr";
}

const ProductSpec* Scenario::product_spec(NodeId id) const {
  auto it = products.find(id);
  return it == products.end() ? nullptr : &it->second;
}

ProductConfig Scenario::product_config(NodeId id) const {
  ProductConfig c;
  c.id = id;
  c.symbol = default_symbol;
  c.has_symbols = default_has_symbols;
  c.has_rules = default_has_rules;
  c.static_cfg = default_static;
  c.dynamic_cfg = default_dynamic;
  c.community_cfg = {default_d_min, default_delta_d, matrix.get()};
  c.gre_period_s = gre_period_s;
  c.sample_period_s = sample_period_s;
  c.timings = timings;
  c.pathloss = channel.pathloss;
  c.tx_power_dbm = radio.tx_power_dbm;
  if (const ProductSpec* s = product_spec(id)) {
    if (!s->symbol.empty()) c.symbol = s->symbol;
    c.has_symbols = s->has_symbols;
    c.has_rules = s->has_rules;
    if (s->static_cfg) c.static_cfg = *s->static_cfg;
    if (s->dynamic_cfg) c.dynamic_cfg = *s->dynamic_cfg;
    if (s->d_min) c.community_cfg.d_min = *s->d_min;
    if (s->delta_d) c.community_cfg.delta_d = *s->delta_d;
    if (s->gre_period_s) c.gre_period_s = *s->gre_period_s;
    if (s->sample_period_s) c.sample_period_s = *s->sample_period_s;
  }
  if (!c.has_symbols) c.symbol.clear();
  return c;
}

SinkProvision Scenario::provision_for(NodeId id) const {
  // The sink knows what every product should run, whether or not the
  // product has it preinstalled.
  ProductConfig c;
  c.symbol = default_symbol;
  c.static_cfg = default_static;
  c.dynamic_cfg = default_dynamic;
  double dmin = default_d_min, dd = default_delta_d;
  if (const ProductSpec* s = product_spec(id)) {
    if (!s->symbol.empty()) c.symbol = s->symbol;
    if (s->static_cfg) c.static_cfg = *s->static_cfg;
    if (s->dynamic_cfg) c.dynamic_cfg = *s->dynamic_cfg;
    if (s->d_min) dmin = *s->d_min;
    if (s->delta_d) dd = *s->delta_d;
  }
  SinkProvision p;
  p.symbol = c.symbol;
  p.rules = {static_cast<float>(c.static_cfg.v_min),
             static_cast<float>(c.static_cfg.v_max),
             static_cast<float>(c.static_cfg.delta_v),
             static_cast<float>(c.dynamic_cfg.t_cr),
             static_cast<std::uint16_t>(c.dynamic_cfg.n_c),
             static_cast<float>(dmin), static_cast<float>(dd)};
  return p;
}

SampleScript Scenario::sample_script(NodeId id) const {
  if (const ProductSpec* s = product_spec(id))
    if (s->samples) return *s->samples;
  return default_samples;
}

void Scenario::validate() const {
  if (trials < 1) throw ConfigError(name + ": trials must be >= 1");
  if (duration_s <= 0) throw ConfigError(name + ": duration must be > 0");
  if (topology.n_nodes < 1) throw ConfigError(name + ": need at least one node");
  if (!matrix) throw ConfigError(name + ": no compatibility matrix loaded");
  if (net.alert_paths < 1)
    throw ConfigError(name + ": alert_paths must be >= 1");
  auto check_symbol = [&](const std::string& sym, NodeId id) {
    if (!matrix->knows(sym))
      throw ConfigError(name + ": symbol `" + sym + "` of product " +
                        std::to_string(id) +
                        " is missing from the compatibility matrix");
  };
  check_symbol(default_symbol, 0);
  for (const auto& [id, spec] : products) {
    if (id == kSinkId || id > topology.n_nodes)
      throw ConfigError(name + ": product id " + std::to_string(id) +
                        " outside 1.." + std::to_string(topology.n_nodes));
    if (!spec.symbol.empty()) check_symbol(spec.symbol, id);
    if (spec.static_cfg) spec.static_cfg->validate();
    if (spec.dynamic_cfg) spec.dynamic_cfg->validate();
  }
  default_static.validate();
  default_dynamic.validate();
  for (const auto& act : operator_actions) {
    if (act.at_s < 0 || act.at_s > duration_s)
      throw ConfigError(name + ": operator action outside the trial duration");
  }
}

// ---------------------------------------------------------------------------
// parsing

namespace {

struct Cursor {
  std::string origin;
  int lineno = 0;

  [[noreturn]] void fail(const std::string& what) const {
    throw ConfigError(origin + ":" + std::to_string(lineno) + ": " + what);
  }
};

bool parse_bool(const std::string& v, const Cursor& at) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  at.fail("expected a boolean, got `" + v + "`");
}

double parse_num(const std::string& v, const Cursor& at) {
  try {
    std::size_t used = 0;
    double d = std::stod(v, &used);
    if (used != v.size()) at.fail("trailing junk in number `" + v + "`");
    return d;
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception&) {
    at.fail("expected a number, got `" + v + "`");
  }
}

std::vector<std::string> split_ws(const std::string& v) {
  std::vector<std::string> out;
  std::istringstream in(v);
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

TrafficProfile::Mode parse_profile(const std::string& v, const Cursor& at) {
  if (v == "none") return TrafficProfile::Mode::None;
  if (v == "not-congested") return TrafficProfile::Mode::NotCongested;
  if (v == "congested") return TrafficProfile::Mode::Congested;
  if (v == "custom") return TrafficProfile::Mode::Custom;
  at.fail("unknown traffic profile `" + v + "`");
}

RoutingKind parse_routing(const std::string& v, const Cursor& at) {
  if (v == "ours") return RoutingKind::Ours;
  if (v == "rrr") return RoutingKind::Rrr;
  at.fail("unknown routing `" + v + "` (expected ours|rrr)");
}

Position parse_position(const std::string& v, const Cursor& at) {
  double x = 0, y = 0;
  if (std::sscanf(v.c_str(), "%lf,%lf", &x, &y) != 2)
    at.fail("expected `x,y`, got `" + v + "`");
  return {x, y};
}

void apply_profile_defaults(TrafficProfile& t) {
  switch (t.mode) {
    case TrafficProfile::Mode::NotCongested: {
      double start = t.start_s;
      t = TrafficProfile::not_congested();
      t.start_s = start;
      break;
    }
    case TrafficProfile::Mode::Congested: {
      double start = t.start_s;
      t = TrafficProfile::congested();
      t.start_s = start;
      break;
    }
    default:
      break;
  }
}

}  // namespace

Scenario parse_scenario(std::istream& in, const std::string& origin) {
  Scenario sc;
  Cursor at{origin, 0};
  std::string section = "scenario";
  NodeId section_product = 0;
  std::string line;
  bool traffic_mode_set = false;

  while (std::getline(in, line)) {
    ++at.lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    // trim
    auto b = line.find_first_not_of(" \t\r");
    if (b == std::string::npos) continue;
    auto e = line.find_last_not_of(" \t\r");
    line = line.substr(b, e - b + 1);
    if (line.empty()) continue;

    if (line.front() == '[') {
      if (line.back() != ']') at.fail("unterminated section header");
      section = line.substr(1, line.size() - 2);
      if (section.rfind("product.", 0) == 0) {
        std::string idstr = section.substr(8);
        try {
          section_product = static_cast<NodeId>(std::stoul(idstr));
        } catch (const std::exception&) {
          at.fail("bad product id `" + idstr + "`");
        }
        if (section_product == kSinkId) at.fail("product id 0 is the sink");
        sc.products[section_product].id = section_product;
        section = "product";
      }
      continue;
    }

    auto eq = line.find('=');
    if (eq == std::string::npos) at.fail("expected `key = value`");
    std::string key = line.substr(0, eq);
    std::string val = line.substr(eq + 1);
    auto trim = [](std::string& s) {
      auto b2 = s.find_first_not_of(" \t");
      auto e2 = s.find_last_not_of(" \t");
      s = b2 == std::string::npos ? "" : s.substr(b2, e2 - b2 + 1);
    };
    trim(key);
    trim(val);
    if (key.empty() || val.empty()) at.fail("expected `key = value`");

    if (section == "scenario") {
      if (key == "name") sc.name = val;
      else if (key == "duration") sc.duration_s = parse_num(val, at);
      else if (key == "trials") sc.trials = static_cast<int>(parse_num(val, at));
      else if (key == "seed") sc.seed = static_cast<std::uint64_t>(parse_num(val, at));
      else if (key == "routing") sc.routing = parse_routing(val, at);
      else if (key == "trace_level") sc.trace_level = static_cast<int>(parse_num(val, at));
      else if (key == "realistic_downlink") sc.realistic_downlink = parse_bool(val, at);
      else at.fail("unknown key `" + key + "` in [scenario]");
    } else if (section == "topology") {
      if (key == "nodes") sc.topology.n_nodes = static_cast<int>(parse_num(val, at));
      else if (key == "area") sc.topology.area_m = parse_num(val, at);
      else if (key == "sink") sc.topology.sink = parse_position(val, at);
      else if (key == "require_connected") sc.topology.require_connected = parse_bool(val, at);
      else at.fail("unknown key `" + key + "` in [topology]");
    } else if (section == "channel") {
      if (key == "sigma") sc.channel.sigma_db = parse_num(val, at);
      else if (key == "path_loss_exponent") sc.channel.pathloss.exponent = parse_num(val, at);
      else if (key == "reference_loss") sc.channel.pathloss.ref_loss_db = parse_num(val, at);
      else if (key == "sinr_threshold") sc.channel.sinr_threshold_db = parse_num(val, at);
      else if (key == "noise_floor") sc.channel.noise_floor_dbm = parse_num(val, at);
      else if (key == "cca_busy") sc.channel.cca_busy_dbm = parse_num(val, at);
      else if (key == "interference_cutoff") sc.channel.interference_cutoff_dbm = parse_num(val, at);
      else if (key == "ideal") sc.channel.ideal = parse_bool(val, at);
      else at.fail("unknown key `" + key + "` in [channel]");
    } else if (section == "radio") {
      if (key == "tx_power") sc.radio.tx_power_dbm = parse_num(val, at);
      else if (key == "data_rate") sc.radio.data_rate_bps = parse_num(val, at);
      else if (key == "initial_energy") sc.radio.initial_energy_j = parse_num(val, at);
      else if (key == "voltage") sc.radio.voltage_v = parse_num(val, at);
      else if (key == "tx_current_ma") sc.radio.tx_current_ma = parse_num(val, at);
      else if (key == "rx_current_ma") sc.radio.rx_current_ma = parse_num(val, at);
      else if (key == "mcu_active_ma") sc.radio.mcu_active_ma = parse_num(val, at);
      else if (key == "queue_capacity") sc.radio.mac_queue_capacity = static_cast<std::size_t>(parse_num(val, at));
      else if (key == "max_backoffs") sc.radio.mac_max_backoffs = static_cast<int>(parse_num(val, at));
      else at.fail("unknown key `" + key + "` in [radio]");
    } else if (section == "net") {
      if (key == "alert_paths") sc.net.alert_paths = static_cast<int>(parse_num(val, at));
      else if (key == "gather_window") sc.net.gather_window_s = parse_num(val, at);
      else if (key == "gradient_period") sc.net.gradient_period_s = parse_num(val, at);
      else if (key == "routine_ttl") sc.net.routine_ttl = static_cast<std::uint8_t>(parse_num(val, at));
      else if (key == "accepted_expiry") sc.net.accepted_expiry_s = parse_num(val, at);
      else at.fail("unknown key `" + key + "` in [net]");
    } else if (section == "rrr") {
      if (key == "threshold") sc.rrr.threshold_pkt_s = parse_num(val, at);
      else if (key == "window") sc.rrr.window_s = parse_num(val, at);
      else at.fail("unknown key `" + key + "` in [rrr]");
    } else if (section == "traffic") {
      if (key == "profile") {
        sc.traffic.mode = parse_profile(val, at);
        traffic_mode_set = true;
        apply_profile_defaults(sc.traffic);
      } else if (key == "routine_rate") {
        sc.traffic.routine_rate_pkt_s = parse_num(val, at);
      } else if (key == "alert_rate") {
        sc.traffic.alert_rate_pkt_s = parse_num(val, at);
      } else if (key == "alert_sources") {
        sc.traffic.alert_sources = static_cast<int>(parse_num(val, at));
      } else if (key == "start") {
        sc.traffic.start_s = parse_num(val, at);
      } else {
        at.fail("unknown key `" + key + "` in [traffic]");
      }
    } else if (section == "rules") {
      if (key == "matrix_file") sc.matrix_file = val;
      else if (key == "symbol") sc.default_symbol = val;
      else if (key == "v_min") sc.default_static.v_min = parse_num(val, at);
      else if (key == "v_max") sc.default_static.v_max = parse_num(val, at);
      else if (key == "delta_v") sc.default_static.delta_v = parse_num(val, at);
      else if (key == "t_cr") sc.default_dynamic.t_cr = parse_num(val, at);
      else if (key == "n_c") sc.default_dynamic.n_c = static_cast<int>(parse_num(val, at));
      else if (key == "d_min") sc.default_d_min = parse_num(val, at);
      else if (key == "delta_d") sc.default_delta_d = parse_num(val, at);
      else at.fail("unknown key `" + key + "` in [rules]");
    } else if (section == "app") {
      if (key == "gre_period") sc.gre_period_s = parse_num(val, at);
      else if (key == "sample_period") sc.sample_period_s = parse_num(val, at);
      else if (key == "sample_base") sc.default_samples.base = parse_num(val, at);
      else if (key == "sample_step") sc.default_samples.step = parse_num(val, at);
      else if (key == "preinstalled_symbols") sc.default_has_symbols = parse_bool(val, at);
      else if (key == "preinstalled_rules") sc.default_has_rules = parse_bool(val, at);
      else if (key == "ctr_retry") sc.timings.ctr_retry_s = parse_num(val, at);
      else if (key == "ncf_retry") sc.timings.ncf_retry_s = parse_num(val, at);
      else if (key == "ale_retry") sc.timings.ale_retry_s = parse_num(val, at);
      else if (key == "ale_max_attempts") sc.timings.ale_max_attempts = static_cast<int>(parse_num(val, at));
      else at.fail("unknown key `" + key + "` in [app]");
    } else if (section == "product") {
      ProductSpec& p = sc.products[section_product];
      if (key == "symbol") p.symbol = val;
      else if (key == "has_symbols") p.has_symbols = parse_bool(val, at);
      else if (key == "has_rules") p.has_rules = parse_bool(val, at);
      else if (key == "position") p.position = parse_position(val, at);
      else if (key == "speed") p.speed_m_s = parse_num(val, at);
      else if (key == "waypoints") {
        for (const std::string& tok : split_ws(val))
          p.waypoints.push_back(parse_position(tok, at));
      } else if (key == "v_min" || key == "v_max" || key == "delta_v") {
        if (!p.static_cfg) p.static_cfg = sc.default_static;
        if (key == "v_min") p.static_cfg->v_min = parse_num(val, at);
        if (key == "v_max") p.static_cfg->v_max = parse_num(val, at);
        if (key == "delta_v") p.static_cfg->delta_v = parse_num(val, at);
      } else if (key == "t_cr" || key == "n_c") {
        if (!p.dynamic_cfg) p.dynamic_cfg = sc.default_dynamic;
        if (key == "t_cr") p.dynamic_cfg->t_cr = parse_num(val, at);
        if (key == "n_c") p.dynamic_cfg->n_c = static_cast<int>(parse_num(val, at));
      } else if (key == "d_min") {
        p.d_min = parse_num(val, at);
      } else if (key == "delta_d") {
        p.delta_d = parse_num(val, at);
      } else if (key == "sample_base" || key == "sample_step") {
        if (!p.samples) p.samples = sc.default_samples;
        if (key == "sample_base") p.samples->base = parse_num(val, at);
        if (key == "sample_step") p.samples->step = parse_num(val, at);
      } else if (key == "gre_period") {
        p.gre_period_s = parse_num(val, at);
      } else if (key == "sample_period") {
        p.sample_period_s = parse_num(val, at);
      } else {
        at.fail("unknown key `" + key + "` in [product." +
                std::to_string(section_product) + "]");
      }
    } else if (section == "operator") {
      if (key == "query") {
        auto toks = split_ws(val);
        if (toks.size() != 3) at.fail("expected `query = <t> <config|rules|ambient> <target>`");
        OperatorAction act;
        act.at_s = parse_num(toks[0], at);
        if (toks[1] == "config") act.query.what = OperatorQuery::What::Config;
        else if (toks[1] == "rules") act.query.what = OperatorQuery::What::Rules;
        else if (toks[1] == "ambient") act.query.what = OperatorQuery::What::Ambient;
        else at.fail("unknown query kind `" + toks[1] + "`");
        act.query.target = static_cast<NodeId>(parse_num(toks[2], at));
        sc.operator_actions.push_back(act);
      } else {
        at.fail("unknown key `" + key + "` in [operator]");
      }
    } else if (section == "sweep") {
      if (key == "densities") {
        for (const std::string& tok : split_ws(val))
          sc.sweep_densities.push_back(static_cast<int>(parse_num(tok, at)));
      } else if (key == "profiles") {
        for (const std::string& tok : split_ws(val))
          sc.sweep_profiles.push_back(parse_profile(tok, at));
      } else if (key == "protocols") {
        for (const std::string& tok : split_ws(val))
          sc.sweep_protocols.push_back(parse_routing(tok, at));
      } else {
        at.fail("unknown key `" + key + "` in [sweep]");
      }
    } else {
      at.fail("unknown section [" + section + "]");
    }
  }
  (void)traffic_mode_set;

  if (!sc.matrix_file.empty()) {
    std::ifstream mf(sc.matrix_file);
    if (!mf)
      throw ConfigError(origin + ": cannot open matrix_file `" +
                        sc.matrix_file + "`");
    sc.matrix = std::make_shared<CompatibilityMatrix>(
        CompatibilityMatrix::parse(mf));
  } else {
    // Minimal built-in relation so scenarios without a file still validate.
    auto m = std::make_shared<CompatibilityMatrix>();
    m->add_symbol(sc.default_symbol);
    for (auto& [id, p] : sc.products)
      if (!p.symbol.empty()) m->add_symbol(p.symbol);
    sc.matrix = std::move(m);
  }
  return sc;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open scenario file: " + path);
  return parse_scenario(in, path);
}

std::string serialize_scenario(const Scenario& s) {
  std::ostringstream out;
  char buf[256];
  auto kv = [&](const char* k, const std::string& v) {
    out << k << " = " << v << '\n';
  };
  auto kvf = [&](const char* k, double v) {
    std::snprintf(buf, sizeof buf, "%s = %.9g", k, v);
    out << buf << '\n';
  };
  out << "[scenario]\n";
  kv("name", s.name);
  kvf("duration", s.duration_s);
  kvf("trials", s.trials);
  kvf("seed", static_cast<double>(s.seed));
  kv("routing", to_string(s.routing));
  kvf("trace_level", s.trace_level);
  kv("realistic_downlink", s.realistic_downlink ? "true" : "false");
  out << "\n[topology]\n";
  kvf("nodes", s.topology.n_nodes);
  kvf("area", s.topology.area_m);
  std::snprintf(buf, sizeof buf, "sink = %.9g,%.9g", s.topology.sink.x,
                s.topology.sink.y);
  out << buf << '\n';
  kv("require_connected", s.topology.require_connected ? "true" : "false");
  out << "\n[channel]\n";
  kvf("sigma", s.channel.sigma_db);
  kvf("path_loss_exponent", s.channel.pathloss.exponent);
  kvf("reference_loss", s.channel.pathloss.ref_loss_db);
  kvf("sinr_threshold", s.channel.sinr_threshold_db);
  kvf("noise_floor", s.channel.noise_floor_dbm);
  kvf("cca_busy", s.channel.cca_busy_dbm);
  kvf("interference_cutoff", s.channel.interference_cutoff_dbm);
  kv("ideal", s.channel.ideal ? "true" : "false");
  out << "\n[radio]\n";
  kvf("tx_power", s.radio.tx_power_dbm);
  kvf("data_rate", s.radio.data_rate_bps);
  kvf("initial_energy", s.radio.initial_energy_j);
  kvf("voltage", s.radio.voltage_v);
  kvf("tx_current_ma", s.radio.tx_current_ma);
  kvf("rx_current_ma", s.radio.rx_current_ma);
  kvf("mcu_active_ma", s.radio.mcu_active_ma);
  kvf("queue_capacity", static_cast<double>(s.radio.mac_queue_capacity));
  kvf("max_backoffs", s.radio.mac_max_backoffs);
  out << "\n[net]\n";
  kvf("alert_paths", s.net.alert_paths);
  kvf("gather_window", s.net.gather_window_s);
  kvf("gradient_period", s.net.gradient_period_s);
  kvf("routine_ttl", s.net.routine_ttl);
  kvf("accepted_expiry", s.net.accepted_expiry_s);
  out << "\n[rrr]\n";
  kvf("threshold", s.rrr.threshold_pkt_s);
  kvf("window", s.rrr.window_s);
  out << "\n[traffic]\n";
  kv("profile", to_string(s.traffic.mode));
  kvf("routine_rate", s.traffic.routine_rate_pkt_s);
  kvf("alert_rate", s.traffic.alert_rate_pkt_s);
  kvf("alert_sources", s.traffic.alert_sources);
  kvf("start", s.traffic.start_s);
  out << "\n[rules]\n";
  if (!s.matrix_file.empty()) kv("matrix_file", s.matrix_file);
  kv("symbol", s.default_symbol);
  kvf("v_min", s.default_static.v_min);
  kvf("v_max", s.default_static.v_max);
  kvf("delta_v", s.default_static.delta_v);
  kvf("t_cr", s.default_dynamic.t_cr);
  kvf("n_c", s.default_dynamic.n_c);
  kvf("d_min", s.default_d_min);
  kvf("delta_d", s.default_delta_d);
  out << "\n[app]\n";
  kvf("gre_period", s.gre_period_s);
  kvf("sample_period", s.sample_period_s);
  kvf("sample_base", s.default_samples.base);
  kvf("sample_step", s.default_samples.step);
  kv("preinstalled_symbols", s.default_has_symbols ? "true" : "false");
  kv("preinstalled_rules", s.default_has_rules ? "true" : "false");
  kvf("ctr_retry", s.timings.ctr_retry_s);
  kvf("ncf_retry", s.timings.ncf_retry_s);
  kvf("ale_retry", s.timings.ale_retry_s);
  kvf("ale_max_attempts", s.timings.ale_max_attempts);
  for (const auto& [id, p] : s.products) {
    out << "\n[product." << id << "]\n";
    if (!p.symbol.empty()) kv("symbol", p.symbol);
    kv("has_symbols", p.has_symbols ? "true" : "false");
    kv("has_rules", p.has_rules ? "true" : "false");
    if (p.position) {
      std::snprintf(buf, sizeof buf, "position = %.9g,%.9g", p.position->x,
                    p.position->y);
      out << buf << '\n';
    }
    if (!p.waypoints.empty()) {
      out << "waypoints =";
      for (const Position& w : p.waypoints) {
        std::snprintf(buf, sizeof buf, " %.9g,%.9g", w.x, w.y);
        out << buf;
      }
      out << '\n';
      kvf("speed", p.speed_m_s);
    }
    if (p.static_cfg) {
      kvf("v_min", p.static_cfg->v_min);
      kvf("v_max", p.static_cfg->v_max);
      kvf("delta_v", p.static_cfg->delta_v);
    }
    if (p.dynamic_cfg) {
      kvf("t_cr", p.dynamic_cfg->t_cr);
      kvf("n_c", p.dynamic_cfg->n_c);
    }
    if (p.d_min) kvf("d_min", *p.d_min);
    if (p.delta_d) kvf("delta_d", *p.delta_d);
    if (p.samples) {
      kvf("sample_base", p.samples->base);
      kvf("sample_step", p.samples->step);
    }
    if (p.gre_period_s) kvf("gre_period", *p.gre_period_s);
    if (p.sample_period_s) kvf("sample_period", *p.sample_period_s);
  }
  if (!s.operator_actions.empty()) {
    out << "\n[operator]\n";
    for (const auto& act : s.operator_actions) {
      const char* what = act.query.what == OperatorQuery::What::Config
                             ? "config"
                             : act.query.what == OperatorQuery::What::Rules
                                   ? "rules"
                                   : "ambient";
      std::snprintf(buf, sizeof buf, "query = %.9g %s %u", act.at_s, what,
                    act.query.target);
      out << buf << '\n';
    }
  }
  if (!s.sweep_densities.empty()) {
    out << "\n[sweep]\n";
    out << "densities =";
    for (int d : s.sweep_densities) out << ' ' << d;
    out << '\n';
    if (!s.sweep_profiles.empty()) {
      out << "profiles =";
      for (auto m : s.sweep_profiles) out << ' ' << to_string(m);
      out << '\n';
    }
    if (!s.sweep_protocols.empty()) {
      out << "protocols =";
      for (auto p : s.sweep_protocols) out << ' ' << to_string(p);
      out << '\n';
    }
  }
  return out.str();
}

}  // namespace chemnet
