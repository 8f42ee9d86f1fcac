#pragma once

#include <cstdint>
#include <string_view>

namespace chemnet {

// Three-valued security state. Ordered so that escalation is a plain max:
// G (good) < B (bad) < D (danger).
enum class SecurityLevel : std::uint8_t { G = 0, B = 1, D = 2 };

constexpr SecurityLevel worse(SecurityLevel a, SecurityLevel b) {
  return a < b ? b : a;
}

constexpr char to_char(SecurityLevel l) {
  switch (l) {
    case SecurityLevel::G: return 'G';
    case SecurityLevel::B: return 'B';
    case SecurityLevel::D: return 'D';
  }
  return '?';
}

constexpr std::string_view to_string(SecurityLevel l) {
  switch (l) {
    case SecurityLevel::G: return "G";
    case SecurityLevel::B: return "B";
    case SecurityLevel::D: return "D";
  }
  return "?";
}

}  // namespace chemnet
