#include <cstdarg>
#include <cstdio>

#include "chemnet/app.hpp"

namespace chemnet {

const char* to_string(ProductPhase p) {
  switch (p) {
    case ProductPhase::Unregistered: return "Unregistered";
    case ProductPhase::AwaitingAck: return "AwaitingAck";
    case ProductPhase::AwaitingConfig: return "AwaitingConfig";
    case ProductPhase::Supervising: return "Supervising";
  }
  return "?";
}

double rssi_to_distance(double rssi_dbm, const PathLossParams& pl,
                        double tx_power_dbm) {
  return pl.distance_from_rssi(tx_power_dbm, rssi_dbm);
}

ProductState make_product(const ProductConfig& cfg) {
  ProductState st;
  st.cfg = cfg;
  st.symbol_known = cfg.has_symbols;
  st.rules_known = cfg.has_rules;
  return st;
}

namespace {

constexpr const char* trigger_name(AlertTrigger t) {
  switch (t) {
    case AlertTrigger::StaticRule: return "static";
    case AlertTrigger::DynamicRule: return "dynamic";
    case AlertTrigger::Community: return "community";
  }
  return "?";
}

std::string fmt(const char* f, ...) {
  char buf[192];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof buf, f, ap);
  va_end(ap);
  return buf;
}

class Step {
 public:
  Step(ProductState& st, double now) : st_(st), now_(now) {}

  StepOutput take() { return std::move(out_); }

  void handle(const ProductEvent& ev) {
    switch (ev.type) {
      case ProductEvent::Type::Start: on_start(); break;
      case ProductEvent::Type::Timer: on_timer(ev); break;
      case ProductEvent::Type::Message: on_message(ev); break;
      case ProductEvent::Type::Sample: on_sample(ev.sample); break;
    }
  }

 private:
  ProductState& st_;
  double now_;
  StepOutput out_;

  void note(std::string s) { out_.notes.push_back(std::move(s)); }

  void arm(AppTimerKind k, double at) {
    std::uint32_t gen = ++st_.timer_gen[static_cast<int>(k)];
    out_.timers.push_back({k, at, gen});
  }

  bool timer_current(const ProductEvent& ev) const {
    return ev.timer_gen == st_.timer_gen[static_cast<int>(ev.timer)];
  }

  Message base_msg(MessageKind kind, NodeId dest) {
    Message m;
    m.kind = kind;
    m.source = st_.cfg.id;
    m.dest = dest;
    m.seq = ++st_.next_seq;
    return m;
  }

  void send(Message m) {
    note(fmt("APP_SENT kind=%s dest=%u seq=%u", to_string(m.kind),
             m.dest, m.seq));
    out_.messages.push_back(std::move(m));
  }

  void send_ctr() {
    send(base_msg(MessageKind::CTR, kSinkId));
    arm(AppTimerKind::CtrRetry, now_ + st_.cfg.timings.ctr_retry_s);
  }

  MessageKind ncf_variant() const {
    if (!st_.symbol_known && !st_.rules_known) return MessageKind::NCF0;
    if (st_.symbol_known && !st_.rules_known) return MessageKind::NCF1;
    return MessageKind::NCF2;  // rules present, symbols missing
  }

  void send_ncf() {
    send(base_msg(ncf_variant(), kSinkId));
    arm(AppTimerKind::NcfRetry, now_ + st_.cfg.timings.ncf_retry_s);
  }

  void on_start() {
    if (st_.phase != ProductPhase::Unregistered) return;
    st_.phase = ProductPhase::AwaitingAck;
    send_ctr();
  }

  void maybe_complete_config() {
    if (st_.phase != ProductPhase::AwaitingConfig) return;
    if (st_.symbol_known && st_.rules_known) {
      enter_supervising();
    } else {
      // Part of the configuration is still missing; keep asking with the
      // variant matching what is missing now.
      send_ncf();
    }
  }

  void enter_supervising() {
    st_.phase = ProductPhase::Supervising;
    st_.announced = SecurityLevel::G;
    note("CONFIGURED");
    arm(AppTimerKind::Gre, now_ + st_.cfg.gre_period_s);
  }

  void on_timer(const ProductEvent& ev) {
    if (!timer_current(ev)) return;  // superseded or cancelled
    switch (ev.timer) {
      case AppTimerKind::CtrRetry:
        if (st_.phase == ProductPhase::AwaitingAck) send_ctr();
        break;
      case AppTimerKind::NcfRetry:
        if (st_.phase == ProductPhase::AwaitingConfig) send_ncf();
        break;
      case AppTimerKind::Gre:
        if (st_.phase == ProductPhase::Supervising) send_gre(ev.timer_gen);
        break;
      case AppTimerKind::AleRetry:
        retry_ale();
        break;
    }
  }

  void send_gre(std::uint32_t) {
    Message m = base_msg(MessageKind::GRE, kBroadcastId);
    m.seq = ++st_.gre_seq;
    m.symbol = st_.cfg.symbol;
    m.level = product_global_level(st_);
    send(std::move(m));
    arm(AppTimerKind::Gre, now_ + st_.cfg.gre_period_s);
  }

  void retry_ale() {
    if (st_.phase != ProductPhase::Supervising || !st_.pending_ale) return;
    PendingAlert& p = *st_.pending_ale;
    if (p.attempts >= st_.cfg.timings.ale_max_attempts) {
      note(fmt("ALE_DELIVERY_FAILED seq=%u attempts=%d", p.msg.seq, p.attempts));
      st_.pending_ale.reset();
      return;
    }
    ++p.attempts;
    send(p.msg);
    arm(AppTimerKind::AleRetry, now_ + st_.cfg.timings.ale_retry_s);
  }

  void violation(const Message& m) {
    note(fmt("PROTOCOL_VIOLATION kind=%s from=%u phase=%s", to_string(m.kind),
             m.source, to_string(st_.phase)));
  }

  void on_message(const ProductEvent& ev) {
    const Message& m = ev.msg;
    note(fmt("APP_RECV kind=%s from=%u seq=%u", to_string(m.kind), m.source,
             m.seq));
    switch (m.kind) {
      case MessageKind::ACKCTR: on_ackctr(m); break;
      case MessageKind::CMD1: on_cmd1(m); break;
      case MessageKind::CMD3: on_cmd3(m); break;
      case MessageKind::CMD2: on_query(m, MessageKind::CFG); break;
      case MessageKind::CMD4: on_query(m, MessageKind::SER); break;
      case MessageKind::CMD5: on_query(m, MessageKind::INA); break;
      case MessageKind::GRE: on_gre(m, ev.rssi_dbm); break;
      case MessageKind::RSI: on_rsi(m); break;
      case MessageKind::ACKALE: on_ackale(m); break;
      default: violation(m); break;
    }
  }

  void on_ackctr(const Message&) {
    if (st_.phase != ProductPhase::AwaitingAck) return;  // idempotent replay
    ++st_.timer_gen[static_cast<int>(AppTimerKind::CtrRetry)];  // cancel
    if (st_.symbol_known && st_.rules_known) {
      // Fully preinstalled: no configuration exchange needed.
      enter_supervising();
    } else {
      st_.phase = ProductPhase::AwaitingConfig;
      send_ncf();
    }
  }

  void on_cmd1(const Message& m) {
    if (st_.phase == ProductPhase::Unregistered ||
        st_.phase == ProductPhase::AwaitingAck) {
      violation(m);
      return;
    }
    st_.cfg.symbol = m.symbol;
    st_.symbol_known = true;
    if (st_.phase == ProductPhase::AwaitingConfig) {
      ++st_.timer_gen[static_cast<int>(AppTimerKind::NcfRetry)];
      maybe_complete_config();
    }
  }

  void on_cmd3(const Message& m) {
    if (st_.phase == ProductPhase::Unregistered ||
        st_.phase == ProductPhase::AwaitingAck) {
      violation(m);
      return;
    }
    st_.cfg.static_cfg = {m.rules.v_min, m.rules.v_max, m.rules.delta_v};
    st_.cfg.dynamic_cfg = {m.rules.t_cr, m.rules.n_c};
    st_.cfg.community_cfg.d_min = m.rules.d_min;
    st_.cfg.community_cfg.delta_d = m.rules.delta_d;
    st_.rules_known = true;
    st_.dyn = reset_dynamic();  // fresh rules supervise from a clean slate
    if (st_.phase == ProductPhase::AwaitingConfig) {
      ++st_.timer_gen[static_cast<int>(AppTimerKind::NcfRetry)];
      maybe_complete_config();
    }
  }

  void on_query(const Message& m, MessageKind reply_kind) {
    if (st_.phase != ProductPhase::Supervising) {
      violation(m);
      return;
    }
    Message r = base_msg(reply_kind, kSinkId);
    switch (reply_kind) {
      case MessageKind::CFG:
        r.symbol = st_.cfg.symbol;
        r.has_symbols = st_.symbol_known;
        r.has_rules = st_.rules_known;
        break;
      case MessageKind::SER:
        r.rules = {static_cast<float>(st_.cfg.static_cfg.v_min),
                   static_cast<float>(st_.cfg.static_cfg.v_max),
                   static_cast<float>(st_.cfg.static_cfg.delta_v),
                   static_cast<float>(st_.cfg.dynamic_cfg.t_cr),
                   static_cast<std::uint16_t>(st_.cfg.dynamic_cfg.n_c),
                   static_cast<float>(st_.cfg.community_cfg.d_min),
                   static_cast<float>(st_.cfg.community_cfg.delta_d)};
        break;
      case MessageKind::INA:
        r.value = static_cast<float>(st_.last_sample);
        r.level = product_global_level(st_);
        break;
      default: break;
    }
    send(std::move(r));
  }

  void on_gre(const Message& m, double rssi) {
    if (st_.phase != ProductPhase::Supervising) return;
    NeighborView& nb = st_.neighbors[m.source];
    if (nb.seen_gre && nb.last_gre_seq == m.seq) return;  // duplicate
    nb.seen_gre = true;
    nb.last_gre_seq = m.seq;
    nb.symbol = m.symbol;
    nb.gre_level = m.level;
    nb.last_heard = now_;
    Message r = base_msg(MessageKind::RSI, m.source);
    r.rssi_dbm = static_cast<float>(rssi);
    r.symbol = st_.cfg.symbol;
    r.gre_seq = m.seq;
    send(std::move(r));
  }

  void on_rsi(const Message& m) {
    if (st_.phase != ProductPhase::Supervising) return;
    double distance =
        rssi_to_distance(m.rssi_dbm, st_.cfg.pathloss, st_.cfg.tx_power_dbm);
    SecurityLevel lvl;
    try {
      lvl = eval_community(st_.cfg.symbol, m.symbol, distance,
                           st_.cfg.community_cfg);
    } catch (const RuleError&) {
      note(fmt("PROTOCOL_VIOLATION kind=RSI from=%u unknown-symbol", m.source));
      return;
    }
    NeighborView& nb = st_.neighbors[m.source];
    nb.symbol = m.symbol;
    nb.community = lvl;
    nb.last_heard = now_;
    note(fmt("COMMUNITY peer=%u distance=%.3f level=%s", m.source, distance,
             to_string(lvl).data()));
    reevaluate(AlertTrigger::Community, distance,
               st_.cfg.community_cfg.d_min, m.source);
  }

  void on_ackale(const Message& m) {
    if (!st_.pending_ale) return;  // idempotent
    if (st_.pending_ale->msg.seq != m.acked_seq) return;
    note(fmt("ALE_ACKED seq=%u", m.acked_seq));
    st_.pending_ale.reset();
    ++st_.timer_gen[static_cast<int>(AppTimerKind::AleRetry)];  // cancel
  }

  void on_sample(double value) {
    if (st_.phase != ProductPhase::Supervising) return;
    st_.last_sample = value;
    st_.have_sample = true;
    st_.last_static = eval_static(value, st_.cfg.static_cfg);
    auto [dyn2, dlvl] =
        update_dynamic(st_.dyn, st_.last_static, now_, st_.cfg.dynamic_cfg);
    st_.dyn = dyn2;
    st_.last_dynamic = dlvl;
    note(fmt("SAMPLE value=%.6f vmax=%.6f level=%s", value,
             st_.cfg.static_cfg.v_max, to_string(st_.last_static).data()));
    AlertTrigger hint = st_.last_dynamic > st_.last_static
                            ? AlertTrigger::DynamicRule
                            : AlertTrigger::StaticRule;
    double threshold = hint == AlertTrigger::DynamicRule
                           ? st_.cfg.dynamic_cfg.t_cr
                           : st_.cfg.static_cfg.v_max;
    reevaluate(hint, value, threshold, 0);
  }

  void reevaluate(AlertTrigger hint, double value, double threshold,
                  NodeId peer) {
    SecurityLevel g = product_global_level(st_);
    if (g > st_.announced) {
      // Upward transition: announce. g is B or D here by construction.
      Message a = base_msg(MessageKind::ALE, kSinkId);
      a.level = g;
      a.trigger = hint;
      a.value = static_cast<float>(value);
      a.threshold = static_cast<float>(threshold);
      a.peer = peer;
      note(fmt("ALERT level=%s trigger=%s value=%.6f", to_string(g).data(),
               trigger_name(hint), value));
      st_.pending_ale = PendingAlert{a, 1};
      send(std::move(a));
      arm(AppTimerKind::AleRetry, now_ + st_.cfg.timings.ale_retry_s);
      st_.announced = g;
    } else if (g < st_.announced) {
      st_.announced = g;  // episode over; next escalation alerts again
    }
  }
};

}  // namespace

SecurityLevel product_global_level(const ProductState& st) {
  SecurityLevel worst_community = SecurityLevel::G;
  for (const auto& [id, nb] : st.neighbors)
    worst_community = worse(worst_community, nb.community);
  const SecurityLevel levels[] = {st.last_static, st.last_dynamic,
                                  worst_community};
  return combine_global(levels);
}

StepOutput product_step(ProductState& st, const ProductEvent& ev, double now) {
  Step step(st, now);
  step.handle(ev);
  return step.take();
}

}  // namespace chemnet
