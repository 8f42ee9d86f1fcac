#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>

#include "chemnet/level.hpp"

namespace chemnet {

class RuleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Static rule: classify a sensed value against [v_min, v_max] with margin
// delta_v. The margin band on each side reads B, the interior G, outside D.
struct StaticRuleConfig {
  double v_min = 0.0;
  double v_max = 100.0;
  double delta_v = 1.0;

  void validate() const {
    if (delta_v < 0.0) throw RuleError("static rule: delta_v must be >= 0");
    if (v_min + delta_v > v_max - delta_v)
      throw RuleError("static rule: margin leaves no good interval");
  }
};

struct DynamicRuleConfig {
  double t_cr = 30.0;  // seconds a bad state may persist before danger
  int n_c = 3;         // tolerated good->bad switches before danger

  void validate() const {
    if (t_cr <= 0.0) throw RuleError("dynamic rule: t_cr must be > 0");
    if (n_c < 1) throw RuleError("dynamic rule: n_c must be >= 1");
  }
};

// Accumulated state of the dynamic rule for one product. Fresh products are
// assumed to start in a good state, so an initial B sample counts as a
// G->B switch. Once the rule fires D it stays latched until reset().
struct DynamicRuleState {
  int occur_count = 0;
  std::optional<double> bad_since;  // entry time of the current B episode
  SecurityLevel last_level = SecurityLevel::G;
  bool latched_danger = false;
};

// Symmetric compatibility relation over opaque chemical symbols. Pairs of
// known symbols default to Compatible; a symbol never mentioned is unknown
// and eval_community refuses it.
class CompatibilityMatrix {
 public:
  void add_symbol(const std::string& symbol);
  void set_incompatible(const std::string& a, const std::string& b);
  bool knows(const std::string& symbol) const;
  bool incompatible(const std::string& a, const std::string& b) const;

  std::size_t symbol_count() const { return symbols_.size(); }

  // One pair per line: `SYMBOL_A SYMBOL_B incompatible|compatible`.
  // Blank lines and lines starting with '#' are skipped.
  static CompatibilityMatrix parse(std::istream& in);
  static CompatibilityMatrix load_file(const std::string& path);

 private:
  std::set<std::string> symbols_;
  std::set<std::pair<std::string, std::string>> incompatible_;
};

struct CommunityRuleConfig {
  double d_min = 5.0;    // meters: closer than this is danger
  double delta_d = 3.0;  // meters: the bad band above d_min
  const CompatibilityMatrix* matrix = nullptr;

  void validate() const {
    if (d_min <= 0.0) throw RuleError("community rule: d_min must be > 0");
    if (delta_d < 0.0) throw RuleError("community rule: delta_d must be >= 0");
    if (matrix == nullptr) throw RuleError("community rule: no matrix");
  }
};

SecurityLevel eval_static(double value, const StaticRuleConfig& cfg);

// Advances the dynamic rule state by one sample of the static level.
// `now` must be non-decreasing across calls for the same state.
std::pair<DynamicRuleState, SecurityLevel> update_dynamic(
    DynamicRuleState state, SecurityLevel s_sr, double now,
    const DynamicRuleConfig& cfg);

// Operator reset of the latched dynamic state (occurrence counter included).
DynamicRuleState reset_dynamic();

SecurityLevel eval_community(const std::string& symb_i,
                             const std::string& symb_j, double distance,
                             const CommunityRuleConfig& cfg);

SecurityLevel combine_global(std::span<const SecurityLevel> levels);

}  // namespace chemnet
