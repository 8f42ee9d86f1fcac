#include <cstdarg>
#include <cstdio>

#include "chemnet/app.hpp"

namespace chemnet {

namespace {

std::string fmt(const char* f, ...) {
  char buf[192];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof buf, f, ap);
  va_end(ap);
  return buf;
}

Message sink_msg(SinkState& st, MessageKind kind, NodeId dest) {
  Message m;
  m.kind = kind;
  m.source = kSinkId;
  m.dest = dest;
  m.seq = ++st.next_seq;
  return m;
}

void send(SinkState&, StepOutput& out, Message m) {
  out.notes.push_back(fmt("APP_SENT kind=%s dest=%u seq=%u", to_string(m.kind),
                          m.dest, m.seq));
  out.messages.push_back(std::move(m));
}

void send_cmd1(SinkState& st, StepOutput& out, NodeId product) {
  Message m = sink_msg(st, MessageKind::CMD1, product);
  auto it = st.provisioning.find(product);
  if (it == st.provisioning.end()) {
    out.notes.push_back(fmt("NO_PROVISIONING product=%u", product));
    return;
  }
  m.symbol = it->second.symbol;
  st.registry[product].symbols_sent = true;
  send(st, out, std::move(m));
}

void send_cmd3(SinkState& st, StepOutput& out, NodeId product) {
  Message m = sink_msg(st, MessageKind::CMD3, product);
  auto it = st.provisioning.find(product);
  if (it == st.provisioning.end()) {
    out.notes.push_back(fmt("NO_PROVISIONING product=%u", product));
    return;
  }
  m.rules = it->second.rules;
  st.registry[product].rules_sent = true;
  send(st, out, std::move(m));
}

void on_message(SinkState& st, StepOutput& out, const Message& m, double now) {
  out.notes.push_back(fmt("APP_RECV kind=%s from=%u seq=%u", to_string(m.kind),
                          m.source, m.seq));
  switch (m.kind) {
    case MessageKind::CTR: {
      st.registry[m.source].registered = true;  // duplicate CTR re-acked
      send(st, out, sink_msg(st, MessageKind::ACKCTR, m.source));
      break;
    }
    case MessageKind::NCF0:
      send_cmd1(st, out, m.source);
      send_cmd3(st, out, m.source);
      break;
    case MessageKind::NCF1:
      send_cmd3(st, out, m.source);
      break;
    case MessageKind::NCF2:
      send_cmd1(st, out, m.source);
      break;
    case MessageKind::ALE: {
      ++st.ale_received;
      Message ack = sink_msg(st, MessageKind::ACKALE, m.source);
      ack.acked_seq = m.seq;
      ++st.ackale_sent;
      send(st, out, std::move(ack));
      if (st.logged_alerts.insert({m.source, m.seq}).second) {
        st.alert_log.push_back({now, m.source, m.level, m.seq});
        st.registry[m.source].last_level = m.level;
        out.notes.push_back(fmt("ALERT_LOGGED product=%u level=%s", m.source,
                                to_string(m.level).data()));
      }
      break;
    }
    case MessageKind::CFG:
      st.pending_queries.erase(
          {m.source, static_cast<std::uint8_t>(MessageKind::CMD2)});
      break;
    case MessageKind::SER:
      st.pending_queries.erase(
          {m.source, static_cast<std::uint8_t>(MessageKind::CMD4)});
      break;
    case MessageKind::INA:
      st.pending_queries.erase(
          {m.source, static_cast<std::uint8_t>(MessageKind::CMD5)});
      st.registry[m.source].last_level = m.level;
      break;
    default:
      out.notes.push_back(fmt("PROTOCOL_VIOLATION kind=%s from=%u",
                              to_string(m.kind), m.source));
      break;
  }
}

void on_operator(SinkState& st, StepOutput& out, const OperatorQuery& q,
                 double now) {
  MessageKind kind;
  switch (q.what) {
    case OperatorQuery::What::Config: kind = MessageKind::CMD2; break;
    case OperatorQuery::What::Rules: kind = MessageKind::CMD4; break;
    case OperatorQuery::What::Ambient: kind = MessageKind::CMD5; break;
    default: return;
  }
  st.pending_queries[{q.target, static_cast<std::uint8_t>(kind)}] = now;
  send(st, out, sink_msg(st, kind, q.target));
}

}  // namespace

StepOutput sink_step(SinkState& st, const SinkEvent& ev, double now) {
  StepOutput out;
  switch (ev.type) {
    case SinkEvent::Type::Message: on_message(st, out, ev.msg, now); break;
    case SinkEvent::Type::Operator: on_operator(st, out, ev.query, now); break;
  }
  return out;
}

}  // namespace chemnet
