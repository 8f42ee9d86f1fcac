#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>
#include <sstream>
#include <vector>

#include "chemnet/rules.hpp"

using namespace chemnet;

namespace {

// Independent interval classifier: walks the boundary list left to right
// instead of testing band membership. Used as the oracle for eval_static.
SecurityLevel static_oracle(double v, const StaticRuleConfig& c) {
  // Regions: (-inf,vmin) D | [vmin, vmin+dv) B | [vmin+dv, vmax-dv] G |
  //          (vmax-dv, vmax] B | (vmax,inf) D
  if (v < c.v_min) return SecurityLevel::D;
  if (v < c.v_min + c.delta_v) return SecurityLevel::B;
  if (v <= c.v_max - c.delta_v) return SecurityLevel::G;
  if (v <= c.v_max) return SecurityLevel::B;
  return SecurityLevel::D;
}

SecurityLevel community_oracle(bool incompatible, double d,
                               const CommunityRuleConfig& c) {
  if (!incompatible) return SecurityLevel::G;
  if (d > c.d_min + c.delta_d) return SecurityLevel::G;
  if (d >= c.d_min) return SecurityLevel::B;
  return SecurityLevel::D;
}

// Direct evaluation of the dynamic-rule predicate over a full recorded
// history of (time, static level) samples, independent of the incremental
// implementation. B is treated as continuous between consecutive B samples.
SecurityLevel dynamic_oracle(const std::vector<std::pair<double, SecurityLevel>>& hist,
                             std::size_t upto, const DynamicRuleConfig& cfg) {
  int occur = 0;
  SecurityLevel prev = SecurityLevel::G;
  bool danger = false;
  for (std::size_t i = 0; i <= upto; ++i) {
    if (hist[i].second == SecurityLevel::B && prev == SecurityLevel::G) ++occur;
    prev = hist[i].second;
  }
  if (occur >= cfg.n_c) danger = true;
  // Any contiguous run of B samples spanning at least t_cr.
  for (std::size_t j = 0; j <= upto && !danger; ++j) {
    if (hist[j].second != SecurityLevel::B) continue;
    if (j > 0 && hist[j - 1].second == SecurityLevel::B) continue;  // not run start
    for (std::size_t i = j; i <= upto; ++i) {
      if (hist[i].second != SecurityLevel::B) break;
      if (hist[i].first - hist[j].first >= cfg.t_cr) {
        danger = true;
        break;
      }
    }
  }
  if (danger) return SecurityLevel::D;
  return hist[upto].second;
}

CompatibilityMatrix test_matrix() {
  std::istringstream in(
      "H2SO4 HF incompatible\n"
      "H2SO4 H2O compatible\n"
      "NAOH H2SO4 incompatible\n");
  return CompatibilityMatrix::parse(in);
}

}  // namespace

TEST_CASE("eval_static spec examples") {
  CHECK(eval_static(10, {0, 14, 2}) == SecurityLevel::G);
  // Fig. 22 trigger: value 15.0158 against VMax 14 reads danger.
  CHECK(eval_static(15.0158, {0, 14, 0}) == SecurityLevel::D);
  CHECK(eval_static(13.5, {0, 14, 1}) == SecurityLevel::B);
}

TEST_CASE("eval_static boundary ownership") {
  StaticRuleConfig c{0, 14, 2};
  CHECK(eval_static(2, c) == SecurityLevel::G);    // G owns its closed ends
  CHECK(eval_static(12, c) == SecurityLevel::G);
  CHECK(eval_static(0, c) == SecurityLevel::B);    // B owns the outer closed ends
  CHECK(eval_static(14, c) == SecurityLevel::B);
  CHECK(eval_static(-0.0001, c) == SecurityLevel::D);
  CHECK(eval_static(14.0001, c) == SecurityLevel::D);
}

TEST_CASE("eval_static rejects invalid config") {
  CHECK_THROWS_AS(eval_static(1, {0, 10, -1}), RuleError);
  CHECK_THROWS_AS(eval_static(1, {0, 10, 6}), RuleError);  // empty G interval
}

TEST_CASE("eval_static agrees with interval-classifier oracle on 10k samples") {
  std::mt19937_64 rng(12345);
  std::uniform_real_distribution<double> val(-50, 150);
  std::uniform_real_distribution<double> lo(-20, 40);
  std::uniform_real_distribution<double> width(0.5, 80);
  for (int i = 0; i < 10000; ++i) {
    StaticRuleConfig c;
    c.v_min = lo(rng);
    c.v_max = c.v_min + width(rng);
    std::uniform_real_distribution<double> dv(0, (c.v_max - c.v_min) / 2);
    c.delta_v = dv(rng);
    double v = val(rng);
    CHECK(eval_static(v, c) == static_oracle(v, c));
  }
}

TEST_CASE("eval_static partitions the line on a dense grid") {
  StaticRuleConfig c{-3, 9, 1.5};
  for (double v = -20; v <= 20; v += 0.0625) {
    SecurityLevel l = eval_static(v, c);
    int matches = 0;
    if (l == SecurityLevel::G) ++matches;
    if (l == SecurityLevel::B) ++matches;
    if (l == SecurityLevel::D) ++matches;
    CHECK(matches == 1);
    CHECK(l == static_oracle(v, c));
  }
}

TEST_CASE("update_dynamic spec examples") {
  DynamicRuleConfig cfg{5.0, 100};

  SUBCASE("fresh state stays good") {
    DynamicRuleState s;
    auto [s1, l1] = update_dynamic(s, SecurityLevel::G, 0.0, cfg);
    CHECK(l1 == SecurityLevel::G);
    CHECK(s1.occur_count == 0);
    CHECK_FALSE(s1.bad_since.has_value());
  }

  SUBCASE("sustained B escalates at t_cr") {
    DynamicRuleState s;
    for (int t = 0; t <= 4; ++t) {
      auto [s2, l] = update_dynamic(s, SecurityLevel::B, t, cfg);
      s = s2;
      CHECK(l == SecurityLevel::B);
    }
    auto [s3, l5] = update_dynamic(s, SecurityLevel::B, 5.0, cfg);
    CHECK(l5 == SecurityLevel::D);
    CHECK(s3.latched_danger);
  }

  SUBCASE("n_c oscillations escalate") {
    DynamicRuleConfig c2{1000.0, 3};
    DynamicRuleState s;
    double t = 0;
    SecurityLevel l = SecurityLevel::G;
    // G,B,G,B,G,B -> D exactly on the third G->B edge
    for (SecurityLevel in : {SecurityLevel::G, SecurityLevel::B, SecurityLevel::G,
                             SecurityLevel::B, SecurityLevel::G}) {
      auto [s2, lvl] = update_dynamic(s, in, t, c2);
      s = s2;
      l = lvl;
      CHECK(l == in);
      t += 1;
    }
    auto [s3, lvl] = update_dynamic(s, SecurityLevel::B, t, c2);
    CHECK(lvl == SecurityLevel::D);
    CHECK(s3.occur_count == 3);
  }
}

TEST_CASE("dynamic danger latches until reset") {
  DynamicRuleConfig cfg{2.0, 99};
  DynamicRuleState s;
  auto r0 = update_dynamic(s, SecurityLevel::B, 0.0, cfg);
  auto r1 = update_dynamic(r0.first, SecurityLevel::B, 2.0, cfg);
  CHECK(r1.second == SecurityLevel::D);
  auto r2 = update_dynamic(r1.first, SecurityLevel::G, 3.0, cfg);
  CHECK(r2.second == SecurityLevel::D);  // still latched after recovery
  DynamicRuleState fresh = reset_dynamic();
  auto r3 = update_dynamic(fresh, SecurityLevel::G, 4.0, cfg);
  CHECK(r3.second == SecurityLevel::G);
}

TEST_CASE("a single G sample breaks a B episode") {
  DynamicRuleConfig cfg{3.0, 99};
  DynamicRuleState s;
  auto a = update_dynamic(s, SecurityLevel::B, 0.0, cfg);
  auto b = update_dynamic(a.first, SecurityLevel::G, 2.9, cfg);
  auto c = update_dynamic(b.first, SecurityLevel::B, 3.0, cfg);
  CHECK(c.second == SecurityLevel::B);  // episode restarted at t=3
  auto d = update_dynamic(c.first, SecurityLevel::B, 5.9, cfg);
  CHECK(d.second == SecurityLevel::B);
  auto e = update_dynamic(d.first, SecurityLevel::B, 6.0, cfg);
  CHECK(e.second == SecurityLevel::D);
}

TEST_CASE("update_dynamic matches the history-predicate oracle on 1000 random sequences") {
  std::mt19937_64 rng(777);
  std::uniform_int_distribution<int> len_d(1, 50);
  std::uniform_int_distribution<int> lvl_d(0, 2);
  std::uniform_real_distribution<double> dt_d(0.1, 4.0);
  std::uniform_real_distribution<double> tcr_d(0.5, 12.0);
  std::uniform_int_distribution<int> nc_d(1, 6);

  for (int iter = 0; iter < 1000; ++iter) {
    DynamicRuleConfig cfg{tcr_d(rng), nc_d(rng)};
    int n = len_d(rng);
    std::vector<std::pair<double, SecurityLevel>> hist;
    double t = 0;
    for (int i = 0; i < n; ++i) {
      t += dt_d(rng);
      hist.emplace_back(t, static_cast<SecurityLevel>(lvl_d(rng)));
    }
    DynamicRuleState s;
    for (std::size_t i = 0; i < hist.size(); ++i) {
      auto [s2, lvl] = update_dynamic(s, hist[i].second, hist[i].first, cfg);
      s = s2;
      REQUIRE(lvl == dynamic_oracle(hist, i, cfg));
    }
  }
}

TEST_CASE("update_dynamic replay determinism") {
  DynamicRuleConfig cfg{4.0, 2};
  std::vector<std::pair<double, SecurityLevel>> seq = {
      {1, SecurityLevel::B}, {2, SecurityLevel::G}, {3, SecurityLevel::B},
      {7, SecurityLevel::B}, {8, SecurityLevel::D}, {9, SecurityLevel::G}};
  auto run = [&] {
    std::vector<SecurityLevel> out;
    DynamicRuleState s;
    for (auto& [t, l] : seq) {
      auto [s2, lvl] = update_dynamic(s, l, t, cfg);
      s = s2;
      out.push_back(lvl);
    }
    return out;
  };
  CHECK(run() == run());
}

TEST_CASE("eval_community spec examples") {
  CompatibilityMatrix m = test_matrix();
  CommunityRuleConfig cfg{5.0, 3.0, &m};
  CHECK(eval_community("H2SO4", "H2O", 0.5, cfg) == SecurityLevel::G);
  CHECK(eval_community("H2SO4", "HF", 4.9, cfg) == SecurityLevel::D);
  CHECK(eval_community("H2SO4", "HF", 8.0, cfg) == SecurityLevel::B);  // d_min+dd exactly
  CHECK(eval_community("H2SO4", "HF", 8.0001, cfg) == SecurityLevel::G);
  CHECK(eval_community("H2SO4", "HF", 5.0, cfg) == SecurityLevel::B);  // d_min exactly
}

TEST_CASE("eval_community unknown symbol") {
  CompatibilityMatrix m = test_matrix();
  CommunityRuleConfig cfg{5.0, 3.0, &m};
  CHECK_THROWS_AS(eval_community("XENON", "HF", 1.0, cfg), RuleError);
  CHECK_THROWS_AS(eval_community("HF", "XENON", 1.0, cfg), RuleError);
}

TEST_CASE("eval_community is symmetric and agrees with oracle on 10k samples") {
  CompatibilityMatrix m = test_matrix();
  std::vector<std::string> syms = {"H2SO4", "HF", "H2O", "NAOH"};
  std::mt19937_64 rng(4242);
  std::uniform_int_distribution<std::size_t> pick(0, syms.size() - 1);
  std::uniform_real_distribution<double> dist_d(0, 20);
  std::uniform_real_distribution<double> dmin_d(0.5, 8);
  std::uniform_real_distribution<double> dd_d(0, 5);
  for (int i = 0; i < 10000; ++i) {
    CommunityRuleConfig cfg{dmin_d(rng), dd_d(rng), &m};
    const std::string& a = syms[pick(rng)];
    const std::string& b = syms[pick(rng)];
    double d = dist_d(rng);
    SecurityLevel l = eval_community(a, b, d, cfg);
    CHECK(l == community_oracle(m.incompatible(a, b), d, cfg));
    CHECK(l == eval_community(b, a, d, cfg));
  }
}

TEST_CASE("matrix parsing defaults and reflexivity") {
  CompatibilityMatrix m = test_matrix();
  CHECK(m.incompatible("H2SO4", "HF"));
  CHECK_FALSE(m.incompatible("H2O", "NAOH"));  // unlisted pair of known symbols
  CHECK_FALSE(m.incompatible("HF", "HF"));
  std::istringstream bad("X X incompatible\n");
  CHECK_THROWS_AS(CompatibilityMatrix::parse(bad), RuleError);
  std::istringstream junk("A B frenemies\n");
  CHECK_THROWS_AS(CompatibilityMatrix::parse(junk), RuleError);
  std::istringstream truncated("A\n");
  CHECK_THROWS_AS(CompatibilityMatrix::parse(truncated), RuleError);
}

TEST_CASE("combine_global enumerates all 27 triples") {
  const SecurityLevel all[] = {SecurityLevel::G, SecurityLevel::B, SecurityLevel::D};
  for (SecurityLevel a : all)
    for (SecurityLevel b : all)
      for (SecurityLevel c : all) {
        SecurityLevel v[] = {a, b, c};
        SecurityLevel expect = worse(worse(a, b), c);  // brute max
        CHECK(combine_global(v) == expect);
      }
}

TEST_CASE("combine_global spec examples and empty input") {
  SecurityLevel g3[] = {SecurityLevel::G, SecurityLevel::G, SecurityLevel::G};
  CHECK(combine_global(g3) == SecurityLevel::G);
  SecurityLevel gbg[] = {SecurityLevel::G, SecurityLevel::B, SecurityLevel::G};
  CHECK(combine_global(gbg) == SecurityLevel::B);
  CHECK_THROWS_AS(combine_global({}), RuleError);
}

TEST_CASE("combine_global monotone escalation") {
  const SecurityLevel all[] = {SecurityLevel::G, SecurityLevel::B, SecurityLevel::D};
  for (SecurityLevel a : all)
    for (SecurityLevel b : all)
      for (SecurityLevel c : all) {
        SecurityLevel base[] = {a, b, c};
        SecurityLevel lo = combine_global(base);
        for (int i = 0; i < 3; ++i) {
          for (SecurityLevel up : all) {
            if (up < base[i]) continue;
            SecurityLevel raised[] = {a, b, c};
            raised[i] = up;
            CHECK(combine_global(raised) >= lo);
          }
        }
      }
}
