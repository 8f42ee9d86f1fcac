#include "chemnet/sim.hpp"

#include <algorithm>
#include <cstdarg>
#include <cstdio>
#include <deque>
#include <set>
#include <sstream>

#include "chemnet/air.hpp"
#include "chemnet/event_queue.hpp"
#include "chemnet/rng.hpp"

namespace chemnet {

namespace {

enum class RadioState : std::uint8_t { Listen = 0, Rx, Tx };

// Battery and radio-state occupancy. Durations accumulate only while the
// node is alive, so the spent energy always equals the occupancy integral.
struct EnergyMeter {
  double voltage = 3.0;
  double amps[3] = {0, 0, 0};  // listen, rx, tx (radio + MCU)
  double remaining_j = 0;
  double initial_j = 0;
  double spent_j = 0;
  RadioState state = RadioState::Listen;
  double since = 0;
  double dur[3] = {0, 0, 0};
  bool dead = false;
  double died_at = -1;
  bool increased = false;

  double power_w(RadioState s) const {
    return voltage * amps[static_cast<int>(s)];
  }

  // Returns true when the battery empties during this settlement.
  bool settle(double now) {
    if (dead) return false;
    double dt = now - since;
    since = now;
    if (dt <= 0) return false;
    double p = power_w(state);
    double need = p * dt;
    if (need >= remaining_j && p > 0) {
      double dt_alive = remaining_j / p;
      dur[static_cast<int>(state)] += dt_alive;
      spent_j += remaining_j;
      died_at = now - dt + dt_alive;
      remaining_j = 0;
      dead = true;
      return true;
    }
    double before = remaining_j;
    dur[static_cast<int>(state)] += dt;
    spent_j += need;
    remaining_j -= need;
    if (remaining_j > before) increased = true;
    return false;
  }

  bool transition(double now, RadioState s) {
    bool died = settle(now);
    if (!died) state = s;
    return died;
  }
};

struct Frame {
  NodeId link_src = 0;
  NodeId link_dest = kBroadcastId;
  Packet packet;
  double tx_power_dbm = 0;
  bool idealized = false;  // sink downlink with idealized coverage
  bool no_ack = false;     // unicast without acknowledgment or retry
  std::size_t bytes = 0;
};

struct Mac {
  std::deque<Frame> alert_q;  // alert-class DATA jumps ahead
  std::deque<Frame> normal_q;
  std::optional<Frame> current;  // frame being served (CSMA or retrying)
  int retries = 0;
  bool busy_tx = false;
  bool in_csma = false;
  int attempt = 0;
  int be = 3;
  std::uint32_t backoff_gen = 0;

  std::size_t queued() const { return alert_q.size() + normal_q.size(); }
};

// Alert-forwarding state per (originator, seq): the copies this node still
// remembers (for INUSE retries) and every target tried or known refused.
struct AlertForward {
  struct Copy {
    Packet packet;
    NodeId target;
  };
  std::vector<Copy> copies;
  std::set<NodeId> excluded;
  double last_activity = 0;
};

struct Gathering {
  bool active = false;
  Packet packet;
  std::vector<InfoRsp> responses;
  std::set<NodeId> responded;
  int attempt = 0;
  std::uint32_t window_gen = 0;
};

struct SimEvent {
  enum class Kind : std::uint8_t {
    NodeStart,
    AppTimer,
    Sample,
    TrafficRoutine,
    TrafficAlert,
    PickAlertSources,
    GradientRound,
    MacBackoff,
    TxEnd,
    DelayedFrame,
    GatherWindow,
    ForwardTimeout,
    OperatorAction,
  };
  Kind kind = Kind::NodeStart;
  NodeId node = 0;
  std::uint32_t gen = 0;
  AppTimerKind app_timer = AppTimerKind::CtrRetry;
  std::uint64_t key = 0;
};

SimEvent make_event(SimEvent::Kind kind, NodeId node, std::uint32_t gen = 0,
                    std::uint64_t key = 0) {
  SimEvent ev;
  ev.kind = kind;
  ev.node = node;
  ev.gen = gen;
  ev.key = key;
  return ev;
}

struct Node {
  NodeId id = 0;
  bool is_sink = false;
  Position home;
  std::optional<WaypointPath> mobility;

  Mac mac;
  EnergyMeter energy;

  RoutingState routing;
  AlertRateEstimator rrr_estimator{5.0};
  std::map<std::uint32_t, AlertForward> alert_fwd;
  Gathering gathering;
  std::deque<Packet> gather_queue;
  std::uint16_t next_net_seq = 0;

  std::optional<ProductState> app;
  int sample_index = 0;

  std::mt19937_64 mac_rng;
  std::mt19937_64 jitter_rng;
  std::mt19937_64 traffic_rng;
  std::mt19937_64 shunt_rng;
};

std::uint32_t fwd_key(NodeId origin, std::uint16_t seq) {
  return (static_cast<std::uint32_t>(origin) << 16) | seq;
}

class Simulator {
 public:
  Simulator(const Scenario& sc, std::uint64_t seed)
      : sc_(sc),
        seed_(seed),
        channel_(sc.channel, mix64(seed, rng_tag::kShadowing)),
        air_(channel_.noise_mw(), channel_.sinr_threshold_linear(),
             dbm_to_mw(channel_.sensitivity_dbm()),
             dbm_to_mw(sc.channel.cca_busy_dbm),
             static_cast<std::size_t>(sc.topology.n_nodes) + 1) {}

  TrialResult run() {
    TrialResult out;
    setup();
    main_loop();
    finalize(out);
    return out;
  }

 private:
  const Scenario& sc_;
  std::uint64_t seed_;
  Channel channel_;
  AirModel air_;
  EventQueue<SimEvent> queue_;
  std::vector<Node> nodes_;
  SinkState sink_;
  double now_ = 0;
  double decode_range_ = 0;
  std::uint16_t gradient_round_ = 0;
  std::uint64_t next_frame_id_ = 1;
  std::uint64_t next_delayed_id_ = 1;

  struct Flight {
    Frame frame;
    double t_start = 0;
    double t_end = 0;
    std::vector<AirModel::RxPower> rx;
  };
  std::map<std::uint64_t, Flight> flights_;
  std::map<std::uint64_t, Frame> delayed_;

  // Static receive-power cache: rx_cache_[sender] holds (receiver, mw) for
  // every static receiver above the interference cutoff at product power.
  std::vector<std::vector<AirModel::RxPower>> rx_cache_;
  std::vector<bool> mobile_;
  bool any_mobile_ = false;

  std::vector<PacketRecord> records_;
  std::map<std::uint64_t, std::size_t> record_index_;
  TrialStats stats_;
  std::ostringstream trace_;

  Node& node(NodeId id) { return nodes_[id]; }

  static std::uint64_t record_key(NodeId origin, std::uint16_t seq,
                                  std::uint8_t path) {
    return (static_cast<std::uint64_t>(origin) << 32) |
           (static_cast<std::uint64_t>(seq) << 8) | path;
  }

  Position position_of(const Node& n, double t) const {
    if (n.mobility) return n.mobility->position_at(t);
    return n.home;
  }

  void trace(NodeId id, const char* f, ...) {
    if (sc_.trace_level < 1) return;
    char buf[224];
    va_list ap;
    va_start(ap, f);
    std::vsnprintf(buf, sizeof buf, f, ap);
    va_end(ap);
    char head[48];
    std::snprintf(head, sizeof head, "t=%.6f node=%u ", now_, id);
    trace_ << head << buf << '\n';
  }

  void trace_note(NodeId id, const std::string& note) {
    if (sc_.trace_level < 1) return;
    char head[48];
    std::snprintf(head, sizeof head, "t=%.6f node=%u ", now_, id);
    trace_ << head << note << '\n';
  }

  double uniform(std::mt19937_64& rng, double lo, double hi) {
    std::uniform_real_distribution<double> d(lo, hi);
    return d(rng);
  }

  double exponential(std::mt19937_64& rng, double rate) {
    std::exponential_distribution<double> d(rate);
    return d(rng);
  }

  std::size_t frame_bytes(const Packet& p) const {
    return sc_.radio.mac_overhead_bytes + packet_wire_bytes(p);
  }

  std::uint32_t energy_mj(const Node& n) const {
    double mj = n.energy.remaining_j * 1000.0;
    if (n.is_sink || mj > 4294967295.0) return 4294967295u;
    if (mj < 0) return 0;
    return static_cast<std::uint32_t>(mj);
  }

  // ------------------------------------------------------------------ setup

  void setup() {
    auto positions = generate_topology(sc_.topology, seed_);
    decode_range_ = channel_.mean_decode_range_m(sc_.radio.tx_power_dbm);

    std::size_t count = positions.size();
    nodes_.resize(count);
    mobile_.assign(count, false);

    for (std::size_t i = 0; i < count; ++i) {
      Node& n = nodes_[i];
      n.id = static_cast<NodeId>(i);
      n.is_sink = i == 0;
      n.home = positions[i];
      n.energy.voltage = sc_.radio.voltage_v;
      double mcu = sc_.radio.mcu_active_ma / 1000.0;
      n.energy.amps[0] = mcu + sc_.radio.rx_current_ma / 1000.0;
      n.energy.amps[1] = mcu + sc_.radio.rx_current_ma / 1000.0;
      n.energy.amps[2] = mcu + sc_.radio.tx_current_ma / 1000.0;
      n.energy.initial_j =
          n.is_sink ? sc_.radio.sink_energy_j : sc_.radio.initial_energy_j;
      n.energy.remaining_j = n.energy.initial_j;
      n.mac.be = sc_.radio.mac_min_be;
      n.mac_rng = make_rng(seed_, rng_tag::kMacBackoff, i);
      n.jitter_rng = make_rng(seed_, rng_tag::kAppJitter, i);
      n.traffic_rng = make_rng(seed_, rng_tag::kTraffic, i);
      n.shunt_rng = make_rng(seed_, rng_tag::kRrrShunt ^ sc_.shunt_salt, i);
      n.rrr_estimator = AlertRateEstimator(sc_.rrr.window_s);

      if (!n.is_sink) {
        NodeId id = n.id;
        if (const ProductSpec* spec = sc_.product_spec(id)) {
          if (spec->position) n.home = *spec->position;
          if (!spec->waypoints.empty()) {
            n.mobility = WaypointPath{n.home, spec->waypoints, spec->speed_m_s};
            mobile_[i] = true;
            any_mobile_ = true;
          }
        }
        n.app = make_product(sc_.product_config(id));
        sink_.provisioning[id] = sc_.provision_for(id);
      }
    }

    rx_cache_.assign(count, {});
    for (std::size_t a = 0; a < count; ++a) {
      if (mobile_[a]) continue;
      auto& list = rx_cache_[a];
      for (std::size_t b = 0; b < count; ++b) {
        if (a == b || mobile_[b]) continue;
        double d = distance(nodes_[a].home, nodes_[b].home);
        double dbm = channel_.rx_power_dbm(static_cast<NodeId>(a),
                                           static_cast<NodeId>(b),
                                           sc_.radio.tx_power_dbm, d);
        if (dbm >= sc_.channel.interference_cutoff_dbm)
          list.push_back({static_cast<NodeId>(b), dbm_to_mw(dbm)});
      }
    }

    queue_.push(0.0, make_event(SimEvent::Kind::NodeStart, 0));
    for (std::size_t i = 1; i < count; ++i) {
      double at = uniform(nodes_[i].jitter_rng, 0.05, 1.5);
      queue_.push(at,
                  make_event(SimEvent::Kind::NodeStart, static_cast<NodeId>(i)));
    }
    queue_.push(0.1, make_event(SimEvent::Kind::GradientRound, 0));
    for (std::size_t i = 0; i < sc_.operator_actions.size(); ++i)
      queue_.push(sc_.operator_actions[i].at_s,
                  make_event(SimEvent::Kind::OperatorAction, 0, 0, i));

    if (sc_.traffic.mode != TrafficProfile::Mode::None) {
      if (sc_.traffic.routine_rate_pkt_s > 0) {
        for (std::size_t i = 1; i < count; ++i) {
          double at = sc_.traffic.start_s +
                      exponential(nodes_[i].traffic_rng,
                                  sc_.traffic.routine_rate_pkt_s);
          queue_.push(at, make_event(SimEvent::Kind::TrafficRoutine,
                                     static_cast<NodeId>(i)));
        }
      }
      if (sc_.traffic.alert_rate_pkt_s > 0 && sc_.traffic.alert_sources > 0)
        queue_.push(sc_.traffic.start_s,
                    make_event(SimEvent::Kind::PickAlertSources, 0));
    }
  }

  // --------------------------------------------------------------- dispatch

  void dispatch(const SimEvent& ev) {
    switch (ev.kind) {
      case SimEvent::Kind::NodeStart: on_node_start(node(ev.node)); break;
      case SimEvent::Kind::AppTimer:
        app_timer_event(node(ev.node), ev.app_timer, ev.gen);
        break;
      case SimEvent::Kind::Sample: on_sample(node(ev.node)); break;
      case SimEvent::Kind::TrafficRoutine:
        on_traffic_routine(node(ev.node));
        break;
      case SimEvent::Kind::TrafficAlert: on_traffic_alert(node(ev.node)); break;
      case SimEvent::Kind::PickAlertSources: pick_alert_sources(); break;
      case SimEvent::Kind::GradientRound: on_gradient_round(); break;
      case SimEvent::Kind::MacBackoff:
        on_mac_backoff(node(ev.node), ev.gen);
        break;
      case SimEvent::Kind::TxEnd: on_tx_end(ev.key); break;
      case SimEvent::Kind::DelayedFrame: {
        auto it = delayed_.find(ev.key);
        if (it == delayed_.end()) break;
        Frame f = std::move(it->second);
        delayed_.erase(it);
        mac_enqueue(node(ev.node), std::move(f));
        break;
      }
      case SimEvent::Kind::GatherWindow:
        on_gather_window(node(ev.node), ev.gen);
        break;
      case SimEvent::Kind::ForwardTimeout:
        on_forward_timeout(node(ev.node), ev.key);
        break;
      case SimEvent::Kind::OperatorAction: {
        const OperatorAction& act = sc_.operator_actions[ev.key];
        SinkEvent sev;
        sev.type = SinkEvent::Type::Operator;
        sev.query = act.query;
        sink_outputs(sink_step(sink_, sev, now_));
        break;
      }
    }
  }

  void on_node_start(Node& n) {
    n.energy.since = now_;
    if (n.is_sink) return;
    trace(n.id, "STARTUP");
    run_app_outputs(n, product_step(*n.app, ProductEvent{}, now_));
    queue_.push(now_ + n.app->cfg.sample_period_s,
                make_event(SimEvent::Kind::Sample, n.id));
  }

  void on_sample(Node& n) {
    if (n.energy.dead) return;
    SampleScript script = sc_.sample_script(n.id);
    double value = script.base + script.step * n.sample_index;
    ++n.sample_index;
    ProductEvent ev;
    ev.type = ProductEvent::Type::Sample;
    ev.sample = value;
    run_app_outputs(n, product_step(*n.app, ev, now_));
    queue_.push(now_ + n.app->cfg.sample_period_s,
                make_event(SimEvent::Kind::Sample, n.id));
  }

  void pick_alert_sources() {
    std::vector<NodeId> holders;
    for (std::size_t i = 1; i < nodes_.size(); ++i)
      if (nodes_[i].routing.gradient) holders.push_back(nodes_[i].id);
    if (holders.empty())
      for (std::size_t i = 1; i < nodes_.size(); ++i)
        holders.push_back(nodes_[i].id);
    std::mt19937_64 rng = make_rng(seed_, rng_tag::kSources);
    std::shuffle(holders.begin(), holders.end(), rng);
    int k = std::min<int>(sc_.traffic.alert_sources,
                          static_cast<int>(holders.size()));
    for (int i = 0; i < k; ++i) {
      Node& src = node(holders[i]);
      trace(src.id, "ALERT_SOURCE");
      double at =
          now_ + exponential(src.traffic_rng, sc_.traffic.alert_rate_pkt_s);
      queue_.push(at, make_event(SimEvent::Kind::TrafficAlert, src.id));
    }
  }

  void on_traffic_routine(Node& n) {
    double next =
        now_ + exponential(n.traffic_rng, sc_.traffic.routine_rate_pkt_s);
    if (next < sc_.duration_s)
      queue_.push(next, make_event(SimEvent::Kind::TrafficRoutine, n.id));
    if (n.energy.dead) return;
    Message m;
    m.kind = MessageKind::INA;
    m.source = n.id;
    m.dest = kSinkId;
    m.seq = 0;
    m.value = static_cast<float>(sc_.sample_script(n.id).base);
    m.level = SecurityLevel::G;
    originate_routine(n, m);
  }

  void on_traffic_alert(Node& n) {
    double next =
        now_ + exponential(n.traffic_rng, sc_.traffic.alert_rate_pkt_s);
    if (next < sc_.duration_s)
      queue_.push(next, make_event(SimEvent::Kind::TrafficAlert, n.id));
    if (n.energy.dead) return;
    Message m;
    m.kind = MessageKind::ALE;
    m.source = n.id;
    m.dest = kSinkId;
    m.seq = 0;
    m.level = SecurityLevel::B;
    m.trigger = AlertTrigger::StaticRule;
    originate_alert(n, m);
  }

  void on_gradient_round() {
    ++gradient_round_;
    Node& sink = nodes_[0];
    sink.routing.round = gradient_round_;
    sink.routing.gradient = 0;
    Packet p;
    p.cls = PacketClass::NetControl;
    p.kind = PacketKind::HELLO;
    p.hello = {gradient_round_, 0, kSinkId};
    Frame f;
    f.link_src = kSinkId;
    f.link_dest = kBroadcastId;
    f.packet = std::move(p);
    f.tx_power_dbm = sc_.radio.tx_power_dbm;  // product-class range
    f.bytes = frame_bytes(f.packet);
    mac_enqueue(sink, std::move(f));
    if (sc_.trace_level >= 2) trace(0, "HELLO_ROUND round=%u", gradient_round_);
    double next = now_ + sc_.net.gradient_period_s;
    if (next < sc_.duration_s)
      queue_.push(next, make_event(SimEvent::Kind::GradientRound, 0));
  }

  // ---------------------------------------------------------- app plumbing

  void app_timer_event(Node& n, AppTimerKind kind, std::uint32_t gen) {
    if (n.energy.dead || !n.app) return;
    ProductEvent ev;
    ev.type = ProductEvent::Type::Timer;
    ev.timer = kind;
    ev.timer_gen = gen;
    run_app_outputs(n, product_step(*n.app, ev, now_));
  }

  void run_app_outputs(Node& n, StepOutput out) {
    for (const std::string& note : out.notes) trace_note(n.id, note);
    for (const TimerRequest& t : out.timers) {
      SimEvent ev = make_event(SimEvent::Kind::AppTimer, n.id, t.gen);
      ev.app_timer = t.kind;
      double at = t.fire_at;
      // Registration retries desynchronize so bursts of simultaneous
      // boots do not retry in lockstep forever.
      if (t.kind == AppTimerKind::CtrRetry || t.kind == AppTimerKind::NcfRetry)
        at += uniform(n.jitter_rng, 0.0, 0.3);
      queue_.push(at, ev);
    }
    for (Message& m : out.messages) {
      if (m.dest == kBroadcastId)
        send_local_broadcast(n, m);
      else if (m.kind == MessageKind::RSI)
        send_local_unicast(n, m);
      else
        send_to_sink(n, m);
    }
  }

  void deliver_app_message(Node& n, const Message& msg, double rssi) {
    if (!n.app) return;
    ProductEvent ev;
    ev.type = ProductEvent::Type::Message;
    ev.msg = msg;
    ev.rssi_dbm = rssi;
    run_app_outputs(n, product_step(*n.app, ev, now_));
  }

  void sink_outputs(StepOutput out) {
    for (const std::string& note : out.notes) trace_note(0, note);
    Node& sink = nodes_[0];
    for (Message& m : out.messages) {
      // One-hop downlink; idealized coverage unless configured realistic.
      Packet p = make_data_packet(PacketClass::Routine, m, kSinkId, 0, 0, 0);
      Frame f;
      f.link_src = kSinkId;
      f.link_dest = m.dest;
      f.packet = std::move(p);
      f.tx_power_dbm = sc_.radio.tx_power_dbm;
      f.idealized = !sc_.realistic_downlink;
      f.bytes = frame_bytes(f.packet);
      mac_enqueue(sink, std::move(f));
    }
  }

  // -------------------------------------------------------------- net layer

  void send_local_broadcast(Node& n, const Message& msg) {
    Packet p = make_data_packet(PacketClass::Routine, msg, n.id, 0, 0, 0);
    Frame f;
    f.link_src = n.id;
    f.link_dest = kBroadcastId;
    f.packet = std::move(p);
    f.tx_power_dbm = sc_.radio.tx_power_dbm;
    f.bytes = frame_bytes(f.packet);
    mac_enqueue(n, std::move(f));
  }

  void send_local_unicast(Node& n, const Message& msg) {
    Packet p = make_data_packet(PacketClass::Routine, msg, n.id, 0, 0, 0);
    Frame f;
    f.link_src = n.id;
    f.link_dest = msg.dest;
    f.packet = std::move(p);
    f.tx_power_dbm = sc_.radio.tx_power_dbm;
    f.bytes = frame_bytes(f.packet);
    mac_enqueue(n, std::move(f));
  }

  void send_to_sink(Node& n, const Message& msg) {
    if (!n.routing.gradient) {
      ++stats_.app_send_deferred;  // the application retries on its own timer
      return;
    }
    if (msg.kind == MessageKind::ALE)
      originate_alert(n, msg);
    else
      originate_routine(n, msg);
  }

  void originate_alert(Node& n, const Message& msg) {
    if (!n.routing.gradient) {
      ++stats_.app_send_deferred;
      return;
    }
    std::uint16_t seq = ++n.next_net_seq;
    std::uint8_t ttl =
        static_cast<std::uint8_t>(std::min<int>(2 * sc_.net.routine_ttl, 255));
    if (sc_.routing == RoutingKind::Rrr) {
      // The baseline sends a single copy along the preferred path.
      new_record(PacketClass::Alert, n.id, seq, 0);
      Packet p = make_data_packet(PacketClass::Alert, msg, n.id, seq, ttl, 0);
      rrr_forward(n, std::move(p));
      return;
    }

    expire_accepted(n.routing, now_, sc_.net.accepted_expiry_s);
    n.routing.accepted_alerts[{n.id, seq}] = now_;
    AlertForward& fwd = n.alert_fwd[fwd_key(n.id, seq)];
    fwd.last_activity = now_;

    auto prefs = alert_preference(n.routing, fwd.excluded);
    int k = sc_.net.alert_paths;
    for (int path = 0; path < k; ++path) {
      PacketRecord* rec = new_record(PacketClass::Alert, n.id, seq,
                                     static_cast<std::uint8_t>(path));
      if (path >= static_cast<int>(prefs.size())) {
        // No distinct neighbor left for this copy.
        rec->loss = LossCause::DeadEnd;
        ++stats_.dead_ends;
        continue;
      }
      Packet p = make_data_packet(PacketClass::Alert, msg, n.id, seq, ttl,
                                  static_cast<std::uint8_t>(path));
      NodeId target = prefs[path];
      fwd.excluded.insert(target);
      fwd.copies.push_back({p, target});
      Frame f;
      f.link_src = n.id;
      f.link_dest = target;
      f.packet = std::move(p);
      f.tx_power_dbm = sc_.radio.tx_power_dbm;
      f.bytes = frame_bytes(f.packet);
      mac_enqueue(n, std::move(f));
    }
    queue_.push(now_ + sc_.net.pending_forward_s,
                make_event(SimEvent::Kind::ForwardTimeout, n.id, 0,
                           fwd_key(n.id, seq)));
  }

  void originate_routine(Node& n, const Message& msg) {
    std::uint16_t seq = ++n.next_net_seq;
    PacketRecord* rec = new_record(PacketClass::Routine, n.id, seq, 0);
    if (!n.routing.gradient) {
      rec->loss = LossCause::NoGradient;
      return;
    }
    Packet p = make_data_packet(PacketClass::Routine, msg, n.id, seq,
                                sc_.net.routine_ttl, 0);
    if (sc_.routing == RoutingKind::Rrr)
      rrr_forward(n, std::move(p));
    else
      continue_routine(n, std::move(p));
  }

  void continue_routine(Node& n, Packet packet) {
    if (n.gathering.active) {
      if (n.gather_queue.size() >= sc_.radio.mac_queue_capacity) {
        ++stats_.queue_overflow_drops;
        record_loss(packet, LossCause::QueueOverflow);
        return;
      }
      n.gather_queue.push_back(std::move(packet));
      return;
    }
    std::uint32_t keep_gen = n.gathering.window_gen;
    n.gathering = Gathering{};
    n.gathering.window_gen = keep_gen;
    n.gathering.active = true;
    n.gathering.packet = std::move(packet);
    start_gathering(n);
  }

  void start_gathering(Node& n) {
    ++stats_.gatherings;
    n.gathering.responses.clear();
    n.gathering.responded.clear();
    Packet p;
    p.cls = PacketClass::NetControl;
    p.kind = PacketKind::INFO_REQ;
    p.info_req = {n.id};
    Frame f;
    f.link_src = n.id;
    f.link_dest = kBroadcastId;
    f.packet = std::move(p);
    f.tx_power_dbm = sc_.radio.tx_power_dbm;
    f.bytes = frame_bytes(f.packet);
    mac_enqueue(n, std::move(f));
    std::uint32_t gen = ++n.gathering.window_gen;
    queue_.push(now_ + sc_.net.gather_window_s,
                make_event(SimEvent::Kind::GatherWindow, n.id, gen));
  }

  void on_gather_window(Node& n, std::uint32_t gen) {
    if (!n.gathering.active || gen != n.gathering.window_gen) return;
    if (n.energy.dead) return;
    Gathering& g = n.gathering;
    reconcile_neighbors(n.routing, g.responses, now_,
                        sc_.net.neighbor_staleness_s);
    auto pick = pick_routine_next_hop(g.responses);
    if (!pick) {
      if (g.attempt < sc_.net.gather_retries) {
        ++g.attempt;
        start_gathering(n);
        return;
      }
      record_loss(g.packet, LossCause::NoResponders);
    } else if (g.packet.ttl == 0) {
      record_loss(g.packet, LossCause::TtlExceeded);
    } else {
      Packet p = std::move(g.packet);
      --p.ttl;
      Frame f;
      f.link_src = n.id;
      f.link_dest = *pick;
      f.packet = std::move(p);
      f.tx_power_dbm = sc_.radio.tx_power_dbm;
      f.bytes = frame_bytes(f.packet);
      mac_enqueue(n, std::move(f));
    }
    g.active = false;
    if (!n.gather_queue.empty()) {
      Packet next = std::move(n.gather_queue.front());
      n.gather_queue.pop_front();
      continue_routine(n, std::move(next));
    }
  }

  void handle_info_req(Node& n, const InfoReq& req) {
    if (n.energy.dead || !n.routing.gradient) return;
    Packet p;
    p.cls = PacketClass::NetControl;
    p.kind = PacketKind::INFO_RSP;
    p.info_rsp = {n.id, *n.routing.gradient, energy_mj(n)};
    Frame f;
    f.link_src = n.id;
    f.link_dest = req.requester;
    f.packet = std::move(p);
    f.tx_power_dbm = sc_.radio.tx_power_dbm;
    f.no_ack = true;  // a lost response is redundant; retries only add bursts
    f.bytes = frame_bytes(f.packet);
    // Responders desynchronize inside the collection window.
    mac_enqueue_delayed(n, std::move(f),
                        uniform(n.jitter_rng, 0.0, sc_.net.gather_jitter_s));
  }

  void handle_info_rsp(Node& n, const InfoRsp& rsp) {
    if (!n.gathering.active) return;
    if (n.gathering.responded.insert(rsp.id).second)
      n.gathering.responses.push_back(rsp);
  }

  void handle_hello_frame(Node& n, const HelloInfo& hello) {
    auto rebroadcast = handle_hello(n.routing, hello, n.id, now_);
    if (sc_.trace_level >= 2)
      trace(n.id, "HELLO from=%u hc=%u gradient=%d", hello.sender, hello.hc,
            n.routing.gradient ? static_cast<int>(*n.routing.gradient) : -1);
    if (!rebroadcast) return;
    Packet p;
    p.cls = PacketClass::NetControl;
    p.kind = PacketKind::HELLO;
    p.hello = *rebroadcast;
    Frame f;
    f.link_src = n.id;
    f.link_dest = kBroadcastId;
    f.packet = std::move(p);
    f.tx_power_dbm = sc_.radio.tx_power_dbm;
    f.bytes = frame_bytes(f.packet);
    mac_enqueue_delayed(n, std::move(f),
                        uniform(n.jitter_rng, 0.0, sc_.net.hello_jitter_s));
  }

  void handle_data_at(Node& n, Packet packet, NodeId from, double rssi) {
    const Message& msg = packet.msg;
    // Neighborhood application traffic is never routed.
    if (msg.kind == MessageKind::GRE || msg.kind == MessageKind::RSI) {
      if (!n.is_sink) deliver_app_message(n, msg, rssi);
      return;
    }
    if (n.is_sink) {
      if (PacketRecord* rec = record_for(packet)) {
        if (!rec->delivered()) {
          rec->delivery = now_;
          rec->loss = LossCause::None;
          rec->hops = static_cast<std::uint8_t>(
              std::min<int>(packet.hop_count + 1, 255));
          rec->route = packet.route;
          ++stats_.data_delivered;
        }
      }
      if (sc_.trace_level >= 2)
        trace(0, "NET_DELIVERED kind=%s origin=%u seq=%u path=%u",
              to_string(msg.kind), packet.source, packet.seq, packet.path_id);
      SinkEvent sev;
      sev.type = SinkEvent::Type::Message;
      sev.msg = msg;
      sink_outputs(sink_step(sink_, sev, now_));
      return;
    }
    if (msg.dest == n.id) {
      deliver_app_message(n, msg, rssi);  // downlink: ACKCTR, CMD*, ACKALE
      return;
    }
    // Forwarding duty.
    packet.hop_count =
        static_cast<std::uint8_t>(std::min<int>(packet.hop_count + 1, 255));
    packet.route.push_back(n.id);
    if (sc_.routing == RoutingKind::Ours &&
        packet.cls == PacketClass::Alert) {
      continue_alert(n, std::move(packet), from);
      return;
    }
    if (packet.ttl == 0) {
      record_loss(packet, LossCause::TtlExceeded);
      return;
    }
    --packet.ttl;
    if (sc_.routing == RoutingKind::Rrr)
      rrr_forward(n, std::move(packet));
    else
      continue_routine(n, std::move(packet));
  }

  void continue_alert(Node& n, Packet packet, NodeId from) {
    expire_accepted(n.routing, now_, sc_.net.accepted_expiry_s);
    auto key = std::make_pair(packet.source, packet.seq);
    if (n.routing.accepted_alerts.count(key)) {
      // Already part of another path for this alert: refuse.
      ++stats_.inuse_sent;
      Packet p;
      p.cls = PacketClass::NetControl;
      p.kind = PacketKind::INUSE;
      p.inuse = {packet.source, packet.seq};
      Frame f;
      f.link_src = n.id;
      f.link_dest = from;
      f.packet = std::move(p);
      f.tx_power_dbm = sc_.radio.tx_power_dbm;
      f.bytes = frame_bytes(f.packet);
      mac_enqueue(n, std::move(f));
      return;
    }
    n.routing.accepted_alerts[key] = now_;
    AlertForward& fwd = n.alert_fwd[fwd_key(packet.source, packet.seq)];
    fwd.excluded.insert(from);
    fwd.last_activity = now_;
    queue_.push(now_ + sc_.net.pending_forward_s,
                make_event(SimEvent::Kind::ForwardTimeout, n.id, 0,
                           fwd_key(packet.source, packet.seq)));
    forward_alert_copy(n, fwd, std::move(packet));
  }

  void forward_alert_copy(Node& n, AlertForward& fwd, Packet packet) {
    if (packet.ttl == 0) {
      record_loss(packet, LossCause::TtlExceeded);
      return;
    }
    --packet.ttl;
    auto prefs = alert_preference(n.routing, fwd.excluded);
    if (prefs.empty()) {
      ++stats_.dead_ends;
      record_loss(packet, LossCause::DeadEnd);
      if (sc_.trace_level >= 2)
        trace(n.id, "DEAD_END origin=%u seq=%u path=%u", packet.source,
              packet.seq, packet.path_id);
      return;
    }
    NodeId target = prefs[0];
    fwd.excluded.insert(target);
    fwd.last_activity = now_;
    Frame f;
    f.link_src = n.id;
    f.link_dest = target;
    f.packet = packet;
    f.tx_power_dbm = sc_.radio.tx_power_dbm;
    f.bytes = frame_bytes(f.packet);
    fwd.copies.push_back({std::move(packet), target});
    mac_enqueue(n, std::move(f));
  }

  void handle_inuse(Node& n, const InuseInfo& info, NodeId refuser) {
    auto it = n.alert_fwd.find(fwd_key(info.originator, info.seq));
    if (it == n.alert_fwd.end()) return;  // state already reclaimed
    AlertForward& fwd = it->second;
    for (std::size_t i = 0; i < fwd.copies.size(); ++i) {
      if (fwd.copies[i].target != refuser) continue;
      Packet packet = std::move(fwd.copies[i].packet);
      // The refused hop was consumed; hand the copy to the next preference.
      ++packet.ttl;
      fwd.copies.erase(fwd.copies.begin() + static_cast<long>(i));
      fwd.excluded.insert(refuser);
      forward_alert_copy(n, fwd, std::move(packet));
      return;
    }
  }

  void on_forward_timeout(Node& n, std::uint64_t key) {
    auto it = n.alert_fwd.find(static_cast<std::uint32_t>(key));
    if (it == n.alert_fwd.end()) return;
    if (now_ - it->second.last_activity >= sc_.net.pending_forward_s - 1e-9) {
      n.alert_fwd.erase(it);
    } else {
      queue_.push(it->second.last_activity + sc_.net.pending_forward_s,
                  make_event(SimEvent::Kind::ForwardTimeout, n.id, 0, key));
    }
  }

  void rrr_forward(Node& n, Packet packet) {
    std::optional<NodeId> target;
    if (packet.cls == PacketClass::Alert) {
      n.rrr_estimator.observe(now_);
      target = rrr_preferred(n.routing);
    } else if (n.rrr_estimator.rate(now_) > sc_.rrr.threshold_pkt_s) {
      target = rrr_random_descent(n.routing, n.shunt_rng);
    } else {
      target = rrr_preferred(n.routing);
    }
    if (!target) {
      record_loss(packet, LossCause::DeadEnd);
      return;
    }
    Frame f;
    f.link_src = n.id;
    f.link_dest = *target;
    f.packet = std::move(packet);
    f.tx_power_dbm = sc_.radio.tx_power_dbm;
    f.bytes = frame_bytes(f.packet);
    mac_enqueue(n, std::move(f));
  }

  // ---------------------------------------------------------------- records

  PacketRecord* new_record(PacketClass cls, NodeId origin, std::uint16_t seq,
                           std::uint8_t path) {
    std::uint64_t key = record_key(origin, seq, path);
    records_.push_back(PacketRecord{cls, origin, seq, path, now_, std::nullopt,
                                    LossCause::EndOfSim, 0, {}});
    record_index_[key] = records_.size() - 1;
    return &records_.back();
  }

  PacketRecord* record_for(const Packet& p) {
    auto it = record_index_.find(record_key(p.source, p.seq, p.path_id));
    if (it == record_index_.end()) return nullptr;
    return &records_[it->second];
  }

  void record_loss(const Packet& p, LossCause cause) {
    if (p.kind != PacketKind::DATA) return;
    if (PacketRecord* rec = record_for(p)) {
      if (!rec->delivered() && rec->loss == LossCause::EndOfSim)
        rec->loss = cause;
    }
  }

  // -------------------------------------------------------------- MAC / PHY

  void mac_enqueue(Node& n, Frame frame) {
    if (n.energy.dead) {
      record_loss(frame.packet, LossCause::NodeDead);
      return;
    }
    if (n.mac.queued() >= sc_.radio.mac_queue_capacity) {
      ++stats_.queue_overflow_drops;
      record_loss(frame.packet, LossCause::QueueOverflow);
      return;
    }
    bool priority = frame.packet.cls == PacketClass::Alert &&
                    frame.packet.kind == PacketKind::DATA;
    if (priority)
      n.mac.alert_q.push_back(std::move(frame));
    else
      n.mac.normal_q.push_back(std::move(frame));
    mac_try_start(n);
  }

  void mac_enqueue_delayed(Node& n, Frame frame, double delay) {
    if (delay <= 0) {
      mac_enqueue(n, std::move(frame));
      return;
    }
    std::uint64_t id = next_delayed_id_++;
    delayed_[id] = std::move(frame);
    queue_.push(now_ + delay,
                make_event(SimEvent::Kind::DelayedFrame, n.id, 0, id));
  }

  void mac_try_start(Node& n) {
    if (n.energy.dead || n.mac.busy_tx || n.mac.in_csma) return;
    if (!n.mac.current) {
      if (n.mac.queued() == 0) return;
      auto& q = !n.mac.alert_q.empty() ? n.mac.alert_q : n.mac.normal_q;
      n.mac.current = std::move(q.front());
      q.pop_front();
      n.mac.retries = 0;
    }
    n.mac.in_csma = true;
    n.mac.attempt = 0;
    n.mac.be = sc_.radio.mac_min_be;
    mac_schedule_backoff(n);
  }

  void mac_schedule_backoff(Node& n) {
    int window = 1 << n.mac.be;
    std::uniform_int_distribution<int> slots(0, window - 1);
    double wait = slots(n.mac_rng) * sc_.radio.mac_slot_s + sc_.radio.mac_cca_s;
    std::uint32_t gen = ++n.mac.backoff_gen;
    queue_.push(now_ + wait, make_event(SimEvent::Kind::MacBackoff, n.id, gen));
  }

  void on_mac_backoff(Node& n, std::uint32_t gen) {
    if (gen != n.mac.backoff_gen || !n.mac.in_csma) return;
    if (n.energy.dead) {
      n.mac.in_csma = false;
      return;
    }
    bool busy = !sc_.channel.ideal && air_.cca_busy(n.id);
    if (busy) {
      ++n.mac.attempt;
      if (n.mac.attempt > sc_.radio.mac_max_backoffs) {
        ++stats_.mac_backoff_drops;
        record_loss(n.mac.current->packet, LossCause::MacBackoff);
        n.mac.current.reset();
        n.mac.in_csma = false;
        mac_try_start(n);
        return;
      }
      n.mac.be = std::min(n.mac.be + 1, sc_.radio.mac_max_be);
      mac_schedule_backoff(n);
      return;
    }
    n.mac.in_csma = false;
    start_tx(n, *n.mac.current);
  }

  std::vector<AirModel::RxPower> receiver_powers(const Frame& frame) {
    NodeId s = frame.link_src;
    std::vector<AirModel::RxPower> rx;
    Position sp = position_of(nodes_[s], now_);
    if (mobile_[s]) {
      for (std::size_t j = 0; j < nodes_.size(); ++j) {
        if (j == s) continue;
        double d = distance(sp, position_of(nodes_[j], now_));
        double dbm = channel_.rx_power_dbm(s, static_cast<NodeId>(j),
                                           frame.tx_power_dbm, d);
        if (dbm >= sc_.channel.interference_cutoff_dbm)
          rx.push_back({static_cast<NodeId>(j), dbm_to_mw(dbm)});
      }
    } else {
      rx = rx_cache_[s];
      if (any_mobile_) {
        for (std::size_t j = 0; j < nodes_.size(); ++j) {
          if (j == s || !mobile_[j]) continue;
          double d = distance(sp, position_of(nodes_[j], now_));
          double dbm = channel_.rx_power_dbm(s, static_cast<NodeId>(j),
                                             frame.tx_power_dbm, d);
          if (dbm >= sc_.channel.interference_cutoff_dbm)
            rx.push_back({static_cast<NodeId>(j), dbm_to_mw(dbm)});
        }
      }
    }
    if (frame.idealized && frame.link_dest != kBroadcastId) {
      // The addressee hears the idealized downlink at a fixed strong level.
      double strong = dbm_to_mw(10.0);
      bool found = false;
      for (auto& r : rx)
        if (r.node == frame.link_dest) {
          r.mw = strong;
          found = true;
        }
      if (!found) rx.push_back({frame.link_dest, strong});
    }
    return rx;
  }

  void start_tx(Node& n, Frame frame) {
    if (n.energy.transition(now_, RadioState::Tx)) {
      n.mac.busy_tx = false;
      record_loss(frame.packet, LossCause::NodeDead);
      on_node_death(n);
      return;
    }
    n.mac.busy_tx = true;
    air_.set_rx_enabled(n.id, false);  // half duplex: an ongoing lock is lost
    double airtime =
        static_cast<double>(frame.bytes) * 8.0 / sc_.radio.data_rate_bps;
    if (frame.link_dest != kBroadcastId && !frame.no_ack)
      airtime += sc_.radio.mac_ack_overhead_s;  // turnaround + ack frame
    std::uint64_t id = next_frame_id_++;
    ++stats_.frames_sent;
    Flight fl;
    fl.frame = std::move(frame);
    fl.t_start = now_;
    fl.t_end = now_ + airtime;
    if (!sc_.channel.ideal) {
      fl.rx = receiver_powers(fl.frame);
      std::optional<NodeId> ideal_dest;
      if (fl.frame.idealized && fl.frame.link_dest != kBroadcastId)
        ideal_dest = fl.frame.link_dest;
      air_.frame_start(id, fl.rx, ideal_dest);
    }
    queue_.push(fl.t_end, make_event(SimEvent::Kind::TxEnd, n.id, 0, id));
    flights_[id] = std::move(fl);
  }

  void on_tx_end(std::uint64_t frame_id) {
    auto it = flights_.find(frame_id);
    if (it == flights_.end()) return;
    Flight fl = std::move(it->second);
    flights_.erase(it);
    double airtime = fl.t_end - fl.t_start;

    Node& sender = nodes_[fl.frame.link_src];
    sender.mac.busy_tx = false;
    bool sender_died = sender.energy.transition(now_, RadioState::Listen);
    if (sender_died) {
      on_node_death(sender);
    } else if (!sender.energy.dead) {
      air_.set_rx_enabled(sender.id, true);
    }

    std::vector<std::pair<NodeId, double>> deliveries;
    bool dest_got_it = false;

    if (sc_.channel.ideal) {
      Position sp = position_of(sender, now_);
      double range = channel_.mean_decode_range_m(fl.frame.tx_power_dbm);
      for (std::size_t j = 0; j < nodes_.size(); ++j) {
        if (j == fl.frame.link_src) continue;
        Node& rxn = nodes_[j];
        if (rxn.energy.dead) continue;
        double d = distance(sp, position_of(rxn, now_));
        bool ideal_dest = fl.frame.idealized && fl.frame.link_dest == rxn.id;
        if (d > range + 1e-12 && !ideal_dest) continue;
        ++stats_.frames_decoded;
        if (rxn.id == fl.frame.link_dest) dest_got_it = true;
        if (fl.frame.link_dest == kBroadcastId || fl.frame.link_dest == rxn.id)
          deliveries.push_back(
              {rxn.id, channel_.mean_rx_power_dbm(fl.frame.tx_power_dbm, d)});
      }
    } else {
      if (fl.frame.packet.kind == PacketKind::DATA &&
          fl.frame.packet.cls == PacketClass::Alert &&
          fl.frame.link_dest != kBroadcastId && getenv("CHEMNET_DEBUG_AIR")) {
        auto why = air_.last_fail_why(frame_id, fl.frame.link_dest);
        static const char* names[] = {"decoded", "never_locked", "bad_sinr",
                                      "busy_overlap", "not_in_list"};
        std::fprintf(stderr, "ALERTFRAME %s\n", names[(int)why]);
      }
      auto outcomes = air_.frame_end(frame_id);
      for (const auto& oc : outcomes) {
        Node& rxn = nodes_[oc.node];
        if (rxn.energy.dead) continue;
        // Attribute the lock time to the rx occupancy bucket (the listen and
        // rx draws are equal, so the spent energy is unchanged).
        rxn.energy.settle(now_);
        if (rxn.energy.dur[0] >= airtime) {
          rxn.energy.dur[0] -= airtime;
          rxn.energy.dur[1] += airtime;
        }
        if (!oc.decoded) continue;
        ++stats_.frames_decoded;
        if (rxn.id == fl.frame.link_dest) dest_got_it = true;
        if (fl.frame.link_dest == kBroadcastId || fl.frame.link_dest == rxn.id)
          deliveries.push_back({oc.node, oc.rssi_dbm});
      }
    }

    for (const auto& [rx_id, rssi] : deliveries) {
      Node& rxn = nodes_[rx_id];
      const Packet& p = fl.frame.packet;
      switch (p.kind) {
        case PacketKind::HELLO: handle_hello_frame(rxn, p.hello); break;
        case PacketKind::INUSE:
          handle_inuse(rxn, p.inuse, fl.frame.link_src);
          break;
        case PacketKind::INFO_REQ: handle_info_req(rxn, p.info_req); break;
        case PacketKind::INFO_RSP: handle_info_rsp(rxn, p.info_rsp); break;
        case PacketKind::DATA:
          handle_data_at(rxn, p, fl.frame.link_src, rssi);
          break;
      }
    }

    // Acknowledged unicast: the sender learns the outcome at frame end and
    // retransmits through a fresh CSMA round until the retry budget is gone.
    if (!sender.energy.dead && sender.mac.current) {
      bool unicast = fl.frame.link_dest != kBroadcastId && !fl.frame.no_ack;
      if (unicast && !dest_got_it &&
          sender.mac.retries < sc_.radio.mac_max_frame_retries) {
        ++sender.mac.retries;
        sender.mac.in_csma = true;
        sender.mac.attempt = 0;
        sender.mac.be = sc_.radio.mac_min_be;
        mac_schedule_backoff(sender);
      } else {
        if (unicast && !dest_got_it)
          record_loss(fl.frame.packet, LossCause::LinkLoss);
        sender.mac.current.reset();
        mac_try_start(sender);
      }
    }
  }

  void on_node_death(Node& n) {
    trace(n.id, "NODE_DEAD");
    air_.set_rx_enabled(n.id, false);
    if (n.mac.current) {
      record_loss(n.mac.current->packet, LossCause::NodeDead);
      n.mac.current.reset();
    }
    for (auto& f : n.mac.alert_q) record_loss(f.packet, LossCause::NodeDead);
    for (auto& f : n.mac.normal_q) record_loss(f.packet, LossCause::NodeDead);
    n.mac.alert_q.clear();
    n.mac.normal_q.clear();
    n.mac.in_csma = false;
    n.mac.busy_tx = false;
    if (n.gathering.active) {
      record_loss(n.gathering.packet, LossCause::NodeDead);
      n.gathering.active = false;
    }
    for (auto& p : n.gather_queue) record_loss(p, LossCause::NodeDead);
    n.gather_queue.clear();
  }

  // -------------------------------------------------------------------- run

  void main_loop() {
    while (!queue_.empty()) {
      if (queue_.next_time() > sc_.duration_s) break;
      auto entry = queue_.pop();
      now_ = entry.at;
      dispatch(entry.payload);
    }
    now_ = sc_.duration_s;
  }

  void finalize(TrialResult& out) {
    out.seed = seed_;
    out.mean_decode_range_m = decode_range_;
    out.positions.reserve(nodes_.size());
    for (Node& n : nodes_) {
      out.positions.push_back(n.home);
      n.energy.settle(now_);
      NodeEnergyReport rep;
      rep.id = n.id;
      rep.initial_j = n.energy.initial_j;
      rep.remaining_j = n.energy.remaining_j;
      rep.spent_j = n.energy.spent_j;
      rep.listen_s = n.energy.dur[0];
      rep.rx_s = n.energy.dur[1];
      rep.tx_s = n.energy.dur[2];
      rep.died = n.energy.dead;
      rep.died_at = n.energy.died_at;
      rep.ledger_increased = n.energy.increased;
      out.energy.push_back(rep);
      out.final_gradients.push_back(
          n.routing.gradient ? static_cast<int>(*n.routing.gradient) : -1);
    }
    out.records = std::move(records_);
    out.stats = stats_;
    out.stats.alerts_logged_at_sink = sink_.alert_log.size();
    out.trace = trace_.str();
  }
};

}  // namespace

TrialResult run_trial(const Scenario& scenario, std::uint64_t seed) {
  scenario.validate();
  Simulator sim(scenario, seed);
  return sim.run();
}

}  // namespace chemnet
