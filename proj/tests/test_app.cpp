#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <deque>
#include <sstream>

#include "chemnet/app.hpp"

using namespace chemnet;

namespace {

CompatibilityMatrix& matrix() {
  static CompatibilityMatrix m = [] {
    std::istringstream in(
        "H2SO4 HF incompatible\n"
        "H2SO4 H2O compatible\n");
    return CompatibilityMatrix::parse(in);
  }();
  return m;
}

ProductConfig base_config(NodeId id, bool has_symbols, bool has_rules) {
  ProductConfig c;
  c.id = id;
  c.symbol = has_symbols ? "H2O" : "";
  c.has_symbols = has_symbols;
  c.has_rules = has_rules;
  c.static_cfg = {0, 14, 0};
  c.dynamic_cfg = {30, 3};
  c.community_cfg = {5, 3, &matrix()};
  c.gre_period_s = 10;
  c.sample_period_s = 5;
  return c;
}

SinkState base_sink(std::initializer_list<NodeId> products) {
  SinkState s;
  for (NodeId p : products)
    s.provisioning[p] = {"H2SO4", {0, 14, 0, 30, 3, 5, 3}};
  return s;
}

ProductEvent msg_event(Message m, double rssi = -60) {
  ProductEvent ev;
  ev.type = ProductEvent::Type::Message;
  ev.msg = std::move(m);
  ev.rssi_dbm = rssi;
  return ev;
}

ProductEvent timer_event(const TimerRequest& t) {
  ProductEvent ev;
  ev.type = ProductEvent::Type::Timer;
  ev.timer = t.kind;
  ev.timer_gen = t.gen;
  return ev;
}

ProductEvent sample_event(double v) {
  ProductEvent ev;
  ev.type = ProductEvent::Type::Sample;
  ev.sample = v;
  return ev;
}

int count_kind(const std::vector<Message>& ms, MessageKind k) {
  int n = 0;
  for (auto& m : ms)
    if (m.kind == k) ++n;
  return n;
}

const Message* find_kind(const std::vector<Message>& ms, MessageKind k) {
  for (auto& m : ms)
    if (m.kind == k) return &m;
  return nullptr;
}

// Lossless zero-delay pipe between one product and the sink; timers fire in
// order. Used for the registration liveness property.
struct Harness {
  ProductState prod;
  SinkState sink;
  double now = 0;
  std::deque<TimerRequest> timers;
  int product_messages_sent = 0;

  explicit Harness(ProductConfig cfg, SinkState s)
      : prod(make_product(cfg)), sink(std::move(s)) {}

  void drain(StepOutput out) {
    for (auto& t : out.timers) timers.push_back(t);
    for (auto& m : out.messages) {
      ++product_messages_sent;
      auto reply = sink_step(sink, {SinkEvent::Type::Message, m, {}}, now);
      for (auto& rm : reply.messages)
        drain(product_step(prod, msg_event(rm), now));
    }
  }

  void start() { drain(product_step(prod, {}, now)); }

  void fire_next_timer() {
    if (timers.empty()) return;
    auto t = timers.front();
    timers.pop_front();
    now = std::max(now, t.fire_at);
    drain(product_step(prod, timer_event(t), now));
  }
};

}  // namespace

TEST_CASE("registration walk per preinstall flavor") {
  struct Case {
    bool has_symbols, has_rules;
    MessageKind ncf;
    int cmd1, cmd3;
  };
  const Case cases[] = {
      {false, false, MessageKind::NCF0, 1, 1},
      {true, false, MessageKind::NCF1, 0, 1},
      {false, true, MessageKind::NCF2, 1, 0},
  };
  for (const auto& c : cases) {
    CAPTURE((int)c.ncf);
    ProductState p = make_product(base_config(3, c.has_symbols, c.has_rules));
    auto out = product_step(p, {}, 0.0);
    REQUIRE(out.messages.size() == 1);
    CHECK(out.messages[0].kind == MessageKind::CTR);
    CHECK(p.phase == ProductPhase::AwaitingAck);

    Message ack;
    ack.kind = MessageKind::ACKCTR;
    ack.source = kSinkId;
    ack.dest = 3;
    auto out2 = product_step(p, msg_event(ack), 0.1);
    REQUIRE(out2.messages.size() == 1);
    CHECK(out2.messages[0].kind == c.ncf);
    CHECK(p.phase == ProductPhase::AwaitingConfig);

    SinkState sink = base_sink({3});
    auto cfgmsgs = sink_step(sink, {SinkEvent::Type::Message, out2.messages[0], {}}, 0.2);
    CHECK(count_kind(cfgmsgs.messages, MessageKind::CMD1) == c.cmd1);
    CHECK(count_kind(cfgmsgs.messages, MessageKind::CMD3) == c.cmd3);

    for (auto& m : cfgmsgs.messages) product_step(p, msg_event(m), 0.3);
    CHECK(p.phase == ProductPhase::Supervising);
    CHECK(p.symbol_known);
    CHECK(p.rules_known);
  }
}

TEST_CASE("fully preinstalled product skips configuration") {
  ProductConfig cfg = base_config(4, true, true);
  ProductState p = make_product(cfg);
  product_step(p, {}, 0.0);
  Message ack;
  ack.kind = MessageKind::ACKCTR;
  ack.dest = 4;
  auto out = product_step(p, msg_event(ack), 0.1);
  CHECK(out.messages.empty());
  CHECK(p.phase == ProductPhase::Supervising);
}

TEST_CASE("CTR retransmits until acknowledged") {
  ProductState p = make_product(base_config(2, true, true));
  auto out = product_step(p, {}, 0.0);
  REQUIRE(out.timers.size() == 1);
  CHECK(out.timers[0].kind == AppTimerKind::CtrRetry);
  CHECK(out.timers[0].fire_at == doctest::Approx(2.0));
  // Fire the retry: another CTR and another timer.
  auto out2 = product_step(p, timer_event(out.timers[0]), 2.0);
  CHECK(count_kind(out2.messages, MessageKind::CTR) == 1);
  REQUIRE(out2.timers.size() == 1);
  // Ack, then the stale timer must do nothing.
  Message ack;
  ack.kind = MessageKind::ACKCTR;
  product_step(p, msg_event(ack), 2.5);
  auto out3 = product_step(p, timer_event(out2.timers[0]), 4.0);
  CHECK(out3.messages.empty());
}

TEST_CASE("registration liveness under lossless delivery") {
  for (int flavor = 0; flavor < 4; ++flavor) {
    Harness h(base_config(9, flavor & 1, flavor & 2), base_sink({9}));
    h.start();
    for (int i = 0; i < 10 && h.prod.phase != ProductPhase::Supervising; ++i)
      h.fire_next_timer();
    CHECK(h.prod.phase == ProductPhase::Supervising);
    // 2 registration + at most 3 configuration exchanges, no retransmissions.
    CHECK(h.product_messages_sent <= 5);
  }
}

TEST_CASE("acknowledgment replay is idempotent") {
  ProductState p = make_product(base_config(5, true, true));
  product_step(p, {}, 0.0);
  Message ack;
  ack.kind = MessageKind::ACKCTR;
  product_step(p, msg_event(ack), 0.1);
  REQUIRE(p.phase == ProductPhase::Supervising);
  auto replay = product_step(p, msg_event(ack), 0.2);
  CHECK(replay.messages.empty());
  CHECK(p.phase == ProductPhase::Supervising);
}

TEST_CASE("temperature ramp alerts exactly at the overflow sample") {
  ProductState p = make_product(base_config(3, true, true));
  product_step(p, {}, 0.0);
  Message ack;
  ack.kind = MessageKind::ACKCTR;
  product_step(p, msg_event(ack), 0.1);
  REQUIRE(p.phase == ProductPhase::Supervising);

  double t = 1.0;
  int ale_count = 0;
  for (double v : {7.0, 9.0, 11.0, 13.0}) {
    auto out = product_step(p, sample_event(v), t);
    ale_count += count_kind(out.messages, MessageKind::ALE);
    t += 5;
  }
  CHECK(ale_count == 0);
  auto out = product_step(p, sample_event(15.0), t);
  REQUIRE(count_kind(out.messages, MessageKind::ALE) == 1);
  const Message* ale = find_kind(out.messages, MessageKind::ALE);
  CHECK(ale->level == SecurityLevel::D);
  CHECK(ale->value == doctest::Approx(15.0));
  CHECK(p.announced == SecurityLevel::D);
}

TEST_CASE("no ALE is ever emitted in state G") {
  // Alert construction asserts an upward transition; a full G ramp stays quiet.
  ProductState p = make_product(base_config(3, true, true));
  product_step(p, {}, 0.0);
  Message ack;
  ack.kind = MessageKind::ACKCTR;
  product_step(p, msg_event(ack), 0.1);
  for (double v : {1.0, 5.0, 9.0, 13.0, 9.0, 1.0}) {
    auto out = product_step(p, sample_event(v), 1.0);
    CHECK(count_kind(out.messages, MessageKind::ALE) == 0);
  }
}

TEST_CASE("ALE retransmits until ACKALE, then stops") {
  ProductState p = make_product(base_config(3, true, true));
  product_step(p, {}, 0.0);
  Message ack;
  ack.kind = MessageKind::ACKCTR;
  product_step(p, msg_event(ack), 0.1);
  auto out = product_step(p, sample_event(99.0), 1.0);
  const Message* ale = find_kind(out.messages, MessageKind::ALE);
  REQUIRE(ale != nullptr);
  std::uint16_t ale_seq = ale->seq;
  REQUIRE(out.timers.size() == 1);
  CHECK(out.timers[0].kind == AppTimerKind::AleRetry);
  CHECK(out.timers[0].fire_at == doctest::Approx(1.5));

  auto retry = product_step(p, timer_event(out.timers[0]), 1.5);
  REQUIRE(count_kind(retry.messages, MessageKind::ALE) == 1);
  CHECK(find_kind(retry.messages, MessageKind::ALE)->seq == ale_seq);

  Message ackale;
  ackale.kind = MessageKind::ACKALE;
  ackale.acked_seq = ale_seq;
  product_step(p, msg_event(ackale), 1.6);
  CHECK_FALSE(p.pending_ale.has_value());
  auto stale = product_step(p, timer_event(retry.timers[0]), 2.0);
  CHECK(stale.messages.empty());
  // Replayed ACKALE changes nothing.
  auto replay = product_step(p, msg_event(ackale), 2.1);
  CHECK(replay.messages.empty());
}

TEST_CASE("ALE gives up after the attempt budget") {
  ProductState p = make_product(base_config(3, true, true));
  product_step(p, {}, 0.0);
  Message ack;
  ack.kind = MessageKind::ACKCTR;
  product_step(p, msg_event(ack), 0.1);
  auto out = product_step(p, sample_event(99.0), 1.0);
  int sent = 1;
  double t = 1.0;
  while (!out.timers.empty() && sent < 50) {
    t = out.timers[0].fire_at;
    out = product_step(p, timer_event(out.timers[0]), t);
    sent += count_kind(out.messages, MessageKind::ALE);
  }
  CHECK(sent == 10);
  CHECK_FALSE(p.pending_ale.has_value());
}

TEST_CASE("GRE broadcasts are exactly one period apart") {
  ProductConfig cfg = base_config(3, true, true);
  cfg.gre_period_s = 7.5;
  ProductState p = make_product(cfg);
  product_step(p, {}, 0.0);
  Message ack;
  ack.kind = MessageKind::ACKCTR;
  auto out = product_step(p, msg_event(ack), 0.25);
  REQUIRE(out.timers.size() == 1);
  CHECK(out.timers[0].kind == AppTimerKind::Gre);
  double prev = 0.25;
  for (int i = 0; i < 5; ++i) {
    double at = out.timers[0].fire_at;
    CHECK(at == doctest::Approx(prev + 7.5));
    out = product_step(p, timer_event(out.timers[0]), at);
    REQUIRE(count_kind(out.messages, MessageKind::GRE) == 1);
    CHECK(find_kind(out.messages, MessageKind::GRE)->dest == kBroadcastId);
    REQUIRE(out.timers.size() == 1);
    prev = at;
  }
}

TEST_CASE("GRE received triggers exactly one RSI; duplicates suppressed") {
  ProductState p = make_product(base_config(3, true, true));
  product_step(p, {}, 0.0);
  Message ack;
  ack.kind = MessageKind::ACKCTR;
  product_step(p, msg_event(ack), 0.1);

  Message gre;
  gre.kind = MessageKind::GRE;
  gre.source = 6;
  gre.dest = kBroadcastId;
  gre.seq = 17;
  gre.symbol = "HF";
  gre.level = SecurityLevel::G;
  auto out = product_step(p, msg_event(gre, -70.0), 1.0);
  REQUIRE(count_kind(out.messages, MessageKind::RSI) == 1);
  const Message* rsi = find_kind(out.messages, MessageKind::RSI);
  CHECK(rsi->dest == 6);
  CHECK(rsi->rssi_dbm == doctest::Approx(-70.0));
  CHECK(rsi->gre_seq == 17);
  // Same GRE seq again: no second RSI.
  auto dup = product_step(p, msg_event(gre, -70.0), 1.1);
  CHECK(count_kind(dup.messages, MessageKind::RSI) == 0);
}

TEST_CASE("incompatible neighborhood escalates from RSI distance") {
  // Product 3 carries H2SO4 via CMD1; neighbor 6 carries HF.
  ProductConfig cfg = base_config(3, false, true);
  ProductState p = make_product(cfg);
  product_step(p, {}, 0.0);
  Message ack;
  ack.kind = MessageKind::ACKCTR;
  product_step(p, msg_event(ack), 0.1);
  Message cmd1;
  cmd1.kind = MessageKind::CMD1;
  cmd1.symbol = "H2SO4";
  product_step(p, msg_event(cmd1), 0.2);
  REQUIRE(p.phase == ProductPhase::Supervising);

  // RSI carrying an RSSI equivalent to 6.5 m: inside the bad band [5, 8].
  double rssi_b = cfg.pathloss.mean_rx_power_dbm(cfg.tx_power_dbm, 6.5);
  Message rsi;
  rsi.kind = MessageKind::RSI;
  rsi.source = 6;
  rsi.symbol = "HF";
  rsi.rssi_dbm = static_cast<float>(rssi_b);
  auto out = product_step(p, msg_event(rsi), 2.0);
  REQUIRE(count_kind(out.messages, MessageKind::ALE) == 1);
  const Message* ale = find_kind(out.messages, MessageKind::ALE);
  CHECK(ale->level == SecurityLevel::B);
  CHECK(ale->trigger == AlertTrigger::Community);
  CHECK(ale->peer == 6);

  // Closer than d_min: escalation to D emits a second alert.
  double rssi_d = cfg.pathloss.mean_rx_power_dbm(cfg.tx_power_dbm, 3.0);
  rsi.rssi_dbm = static_cast<float>(rssi_d);
  auto out2 = product_step(p, msg_event(rsi), 4.0);
  REQUIRE(count_kind(out2.messages, MessageKind::ALE) == 1);
  CHECK(find_kind(out2.messages, MessageKind::ALE)->level == SecurityLevel::D);

  // Moving away de-escalates silently and re-entering the bad band re-alerts.
  double rssi_far = cfg.pathloss.mean_rx_power_dbm(cfg.tx_power_dbm, 20.0);
  rsi.rssi_dbm = static_cast<float>(rssi_far);
  auto out3 = product_step(p, msg_event(rsi), 6.0);
  CHECK(count_kind(out3.messages, MessageKind::ALE) == 0);
  rsi.rssi_dbm = static_cast<float>(rssi_b);
  auto out4 = product_step(p, msg_event(rsi), 8.0);
  CHECK(count_kind(out4.messages, MessageKind::ALE) == 1);
}

TEST_CASE("messages in impossible phases are logged, not fatal") {
  ProductState p = make_product(base_config(3, true, true));
  Message cmd4;
  cmd4.kind = MessageKind::CMD4;
  auto out = product_step(p, msg_event(cmd4), 0.0);
  CHECK(out.messages.empty());
  bool flagged = false;
  for (auto& n : out.notes)
    if (n.find("PROTOCOL_VIOLATION") != std::string::npos) flagged = true;
  CHECK(flagged);
  CHECK(p.phase == ProductPhase::Unregistered);
}

TEST_CASE("sink answers queries and clears pending state") {
  SinkState s = base_sink({5});
  SinkEvent op;
  op.type = SinkEvent::Type::Operator;
  op.query = {OperatorQuery::What::Ambient, 5};
  auto out = sink_step(s, op, 1.0);
  REQUIRE(out.messages.size() == 1);
  CHECK(out.messages[0].kind == MessageKind::CMD5);
  CHECK(out.messages[0].dest == 5);
  CHECK(s.pending_queries.size() == 1);

  Message ina;
  ina.kind = MessageKind::INA;
  ina.source = 5;
  ina.value = 21.5f;
  ina.level = SecurityLevel::G;
  sink_step(s, {SinkEvent::Type::Message, ina, {}}, 2.0);
  CHECK(s.pending_queries.empty());
}

TEST_CASE("sink logs each alert once and re-acks duplicates") {
  SinkState s = base_sink({3});
  Message ale;
  ale.kind = MessageKind::ALE;
  ale.source = 3;
  ale.seq = 42;
  ale.level = SecurityLevel::D;
  auto out = sink_step(s, {SinkEvent::Type::Message, ale, {}}, 1.0);
  REQUIRE(out.messages.size() == 1);
  CHECK(out.messages[0].kind == MessageKind::ACKALE);
  CHECK(out.messages[0].dest == 3);
  CHECK(out.messages[0].acked_seq == 42);
  CHECK(s.alert_log.size() == 1);

  auto out2 = sink_step(s, {SinkEvent::Type::Message, ale, {}}, 1.5);
  CHECK(count_kind(out2.messages, MessageKind::ACKALE) == 1);
  CHECK(s.alert_log.size() == 1);  // logged once
  CHECK(s.ackale_sent == s.ale_received);
}

TEST_CASE("duplicate CTR is re-acknowledged") {
  SinkState s = base_sink({7});
  Message ctr;
  ctr.kind = MessageKind::CTR;
  ctr.source = 7;
  auto a = sink_step(s, {SinkEvent::Type::Message, ctr, {}}, 0.1);
  auto b = sink_step(s, {SinkEvent::Type::Message, ctr, {}}, 0.2);
  CHECK(count_kind(a.messages, MessageKind::ACKCTR) == 1);
  CHECK(count_kind(b.messages, MessageKind::ACKCTR) == 1);
}

TEST_CASE("rssi_to_distance inverts the mean path-loss model") {
  PathLossParams pl;
  double tx = 0.0;
  // Reference point: rssi at d0 maps back to d0.
  CHECK(rssi_to_distance(tx - pl.ref_loss_db, pl, tx) ==
        doctest::Approx(pl.ref_distance_m));
  // Readings above the reference clamp to d0.
  CHECK(rssi_to_distance(tx - pl.ref_loss_db + 5, pl, tx) ==
        doctest::Approx(pl.ref_distance_m));
  // A drop of 10*n dB multiplies distance by 10.
  double r1 = rssi_to_distance(-70, pl, tx);
  double r2 = rssi_to_distance(-70 - 10 * pl.exponent, pl, tx);
  CHECK(r2 / r1 == doctest::Approx(10.0).epsilon(1e-9));
  // Strictly decreasing in rssi.
  CHECK(rssi_to_distance(-60, pl, tx) < rssi_to_distance(-61, pl, tx));
  // Round trip against the channel's own mean power at 1, 5, 10, 20 m.
  for (double d : {1.0, 5.0, 10.0, 20.0}) {
    double rssi = pl.mean_rx_power_dbm(tx, d);
    CHECK(rssi_to_distance(rssi, pl, tx) ==
          doctest::Approx(d).epsilon(1e-6));
  }
}
