#include "chemnet/channel.hpp"

#include <numbers>

namespace chemnet {

double gaussian_from_key(std::uint64_t key) {
  // Two mixed uniforms through Box-Muller. u1 is kept away from zero.
  std::uint64_t a = mix64(key, 0xA5A5A5A5A5A5A5A5ULL);
  std::uint64_t b = mix64(key, 0x5A5A5A5A5A5A5A5AULL);
  double u1 = (static_cast<double>(a >> 11) + 1.0) / 9007199254740993.0;
  double u2 = static_cast<double>(b >> 11) / 9007199254740992.0;
  return std::sqrt(-2.0 * std::log(u1)) *
         std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace chemnet

