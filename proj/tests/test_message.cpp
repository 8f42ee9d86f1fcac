#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "chemnet/message.hpp"

using namespace chemnet;

namespace {

Message random_message(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> kind_d(0, kMessageKindCount - 1);
  std::uniform_int_distribution<int> id_d(0, 1000);
  std::uniform_real_distribution<float> f_d(-200, 200);
  std::uniform_int_distribution<int> len_d(0, 12);
  auto sym = [&] {
    static const char alpha[] = "ABCDEFGH0123456789";
    std::string s;
    int n = len_d(rng);
    std::uniform_int_distribution<int> c(0, sizeof(alpha) - 2);
    for (int i = 0; i < n; ++i) s += alpha[c(rng)];
    return s;
  };
  Message m;
  m.kind = static_cast<MessageKind>(kind_d(rng));
  m.source = static_cast<NodeId>(id_d(rng));
  m.dest = static_cast<NodeId>(id_d(rng));
  m.seq = static_cast<std::uint16_t>(id_d(rng));
  m.symbol = sym();
  m.rules = {f_d(rng), f_d(rng), f_d(rng), f_d(rng),
             static_cast<std::uint16_t>(id_d(rng)), f_d(rng), f_d(rng)};
  m.has_symbols = id_d(rng) & 1;
  m.has_rules = id_d(rng) & 1;
  m.value = f_d(rng);
  m.level = static_cast<SecurityLevel>(id_d(rng) % 3);
  m.rssi_dbm = f_d(rng);
  m.gre_seq = static_cast<std::uint16_t>(id_d(rng));
  m.trigger = static_cast<AlertTrigger>(id_d(rng) % 3);
  m.threshold = f_d(rng);
  m.peer = static_cast<NodeId>(id_d(rng));
  m.acked_seq = static_cast<std::uint16_t>(id_d(rng));
  return m;
}

}  // namespace

TEST_CASE("header layout is pinned") {
  Message m;
  m.kind = MessageKind::ALE;
  m.source = 0x0102;
  m.dest = kBroadcastId;
  m.seq = 0x0304;
  auto bytes = encode(m);
  REQUIRE(bytes.size() >= 7);
  CHECK(bytes[0] == static_cast<std::uint8_t>(MessageKind::ALE));
  CHECK(bytes[1] == 0x02);  // source little endian
  CHECK(bytes[2] == 0x01);
  CHECK(bytes[3] == 0xFF);  // broadcast dest
  CHECK(bytes[4] == 0xFF);
  CHECK(bytes[5] == 0x04);  // seq little endian
  CHECK(bytes[6] == 0x03);
}

TEST_CASE("payloads stay within the frame budget") {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 2000; ++i) {
    auto bytes = encode(random_message(rng));
    CHECK(bytes.size() <= 7 + kMaxPayloadBytes);
  }
}

TEST_CASE("encode/decode round trip preserves the kind-relevant fields") {
  std::mt19937_64 rng(99);
  for (int i = 0; i < 5000; ++i) {
    Message m = random_message(rng);
    Message d = decode(encode(m));
    CHECK(d.kind == m.kind);
    CHECK(d.source == m.source);
    CHECK(d.dest == m.dest);
    CHECK(d.seq == m.seq);
    switch (m.kind) {
      case MessageKind::CMD1:
        CHECK(d.symbol == m.symbol);
        break;
      case MessageKind::CMD3:
      case MessageKind::SER:
        CHECK(d.rules == m.rules);
        break;
      case MessageKind::CFG:
        CHECK(d.symbol == m.symbol);
        CHECK(d.has_symbols == m.has_symbols);
        CHECK(d.has_rules == m.has_rules);
        break;
      case MessageKind::INA:
        CHECK(d.value == m.value);
        CHECK(d.level == m.level);
        break;
      case MessageKind::GRE:
        CHECK(d.symbol == m.symbol);
        CHECK(d.level == m.level);
        break;
      case MessageKind::RSI:
        CHECK(d.rssi_dbm == m.rssi_dbm);
        CHECK(d.symbol == m.symbol);
        CHECK(d.gre_seq == m.gre_seq);
        break;
      case MessageKind::ALE:
        CHECK(d.level == m.level);
        CHECK(d.trigger == m.trigger);
        CHECK(d.value == m.value);
        CHECK(d.threshold == m.threshold);
        CHECK(d.peer == m.peer);
        break;
      case MessageKind::ACKALE:
        CHECK(d.acked_seq == m.acked_seq);
        break;
      default:
        break;
    }
  }
}

TEST_CASE("decode rejects garbage") {
  std::vector<std::uint8_t> junk = {200, 0, 0, 0, 0, 0, 0};
  CHECK_THROWS_AS(decode(junk), MessageError);
  std::vector<std::uint8_t> truncated = {0, 1};
  CHECK_THROWS_AS(decode(truncated), MessageError);
}
