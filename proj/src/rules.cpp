#include "chemnet/rules.hpp"

#include <fstream>
#include <sstream>

namespace chemnet {

namespace {

std::pair<std::string, std::string> ordered(const std::string& a,
                                            const std::string& b) {
  return a < b ? std::make_pair(a, b) : std::make_pair(b, a);
}

}  // namespace

void CompatibilityMatrix::add_symbol(const std::string& symbol) {
  symbols_.insert(symbol);
}

void CompatibilityMatrix::set_incompatible(const std::string& a,
                                           const std::string& b) {
  if (a == b)
    throw RuleError("compatibility matrix: a symbol cannot be incompatible with itself (" + a + ")");
  symbols_.insert(a);
  symbols_.insert(b);
  incompatible_.insert(ordered(a, b));
}

bool CompatibilityMatrix::knows(const std::string& symbol) const {
  return symbols_.count(symbol) > 0;
}

bool CompatibilityMatrix::incompatible(const std::string& a,
                                       const std::string& b) const {
  if (a == b) return false;  // reflexive compatible
  return incompatible_.count(ordered(a, b)) > 0;
}

CompatibilityMatrix CompatibilityMatrix::parse(std::istream& in) {
  CompatibilityMatrix m;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string a, b, rel;
    if (!(ls >> a)) continue;  // blank
    if (!(ls >> b >> rel))
      throw RuleError("compatibility matrix line " + std::to_string(lineno) +
                      ": expected `SYMBOL_A SYMBOL_B incompatible|compatible`");
    if (rel == "incompatible") {
      m.set_incompatible(a, b);
    } else if (rel == "compatible") {
      m.add_symbol(a);
      m.add_symbol(b);
    } else {
      throw RuleError("compatibility matrix line " + std::to_string(lineno) +
                      ": unknown relation `" + rel + "`");
    }
  }
  return m;
}

CompatibilityMatrix CompatibilityMatrix::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw RuleError("cannot open compatibility matrix file: " + path);
  return parse(in);
}

SecurityLevel eval_static(double value, const StaticRuleConfig& cfg) {
  cfg.validate();
  // The paper's intervals share their endpoints; G keeps its closed interval,
  // B the half-open remainders, D the strict exteriors.
  if (value >= cfg.v_min + cfg.delta_v && value <= cfg.v_max - cfg.delta_v)
    return SecurityLevel::G;
  if (value >= cfg.v_min && value <= cfg.v_max) return SecurityLevel::B;
  return SecurityLevel::D;
}

std::pair<DynamicRuleState, SecurityLevel> update_dynamic(
    DynamicRuleState state, SecurityLevel s_sr, double now,
    const DynamicRuleConfig& cfg) {
  cfg.validate();
  if (s_sr == SecurityLevel::B) {
    if (state.last_level == SecurityLevel::G) ++state.occur_count;
    if (state.last_level != SecurityLevel::B) state.bad_since = now;
  } else {
    state.bad_since.reset();
  }
  state.last_level = s_sr;

  bool danger = state.latched_danger;
  if (!danger && state.occur_count >= cfg.n_c) danger = true;
  if (!danger && s_sr == SecurityLevel::B && state.bad_since &&
      now - *state.bad_since >= cfg.t_cr)
    danger = true;

  if (danger) {
    state.latched_danger = true;
    return {state, SecurityLevel::D};
  }
  return {state, s_sr};
}

DynamicRuleState reset_dynamic() { return DynamicRuleState{}; }

SecurityLevel eval_community(const std::string& symb_i,
                             const std::string& symb_j, double distance,
                             const CommunityRuleConfig& cfg) {
  cfg.validate();
  if (!cfg.matrix->knows(symb_i))
    throw RuleError("community rule: unknown symbol `" + symb_i + "`");
  if (!cfg.matrix->knows(symb_j))
    throw RuleError("community rule: unknown symbol `" + symb_j + "`");
  if (!cfg.matrix->incompatible(symb_i, symb_j)) return SecurityLevel::G;
  if (distance < cfg.d_min) return SecurityLevel::D;
  if (distance <= cfg.d_min + cfg.delta_d) return SecurityLevel::B;
  return SecurityLevel::G;
}

SecurityLevel combine_global(std::span<const SecurityLevel> levels) {
  if (levels.empty()) throw RuleError("combine_global: empty level list");
  SecurityLevel out = SecurityLevel::G;
  for (SecurityLevel l : levels) out = worse(out, l);
  return out;
}

}  // namespace chemnet
