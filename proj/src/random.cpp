#include "vacmirror/random.hpp"

#include <cmath>

#include "vacmirror/constants.hpp"

namespace vacmirror {

namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53;
constexpr std::uint32_t kMul1 = 0xCD9E8D57;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
  const std::uint64_t p = std::uint64_t{a} * b;
  hi = static_cast<std::uint32_t>(p >> 32);
  lo = static_cast<std::uint32_t>(p);
}

}  // namespace

Philox4x32::Counter Philox4x32::generate(Counter ctr, Key key) {
  for (int round = 0; round < 10; ++round) {
    if (round > 0) {
      key[0] += kWeyl0;
      key[1] += kWeyl1;
    }
    std::uint32_t hi0, lo0, hi1, lo1;
    mulhilo(kMul0, ctr[0], hi0, lo0);
    mulhilo(kMul1, ctr[2], hi1, lo1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
  }
  return ctr;
}

std::pair<double, double> gaussian_pair(std::uint64_t seed, std::uint64_t stream,
                                        std::uint64_t index) {
  const Philox4x32::Counter ctr{
      static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32),
      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
  const Philox4x32::Key key{static_cast<std::uint32_t>(seed),
                            static_cast<std::uint32_t>(seed >> 32)};
  const auto w = Philox4x32::generate(ctr, key);
  constexpr double kUlp53 = 1.0 / 9007199254740992.0;  // 2^-53
  const std::uint64_t a = ((std::uint64_t{w[0]} << 32) | w[1]) >> 11;
  const std::uint64_t b = ((std::uint64_t{w[2]} << 32) | w[3]) >> 11;
  const double u1 = (static_cast<double>(a) + 1.0) * kUlp53;  // (0, 1]
  const double u2 = static_cast<double>(b) * kUlp53;          // [0, 1)
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = constants::two_pi * u2;
  return {radius * std::cos(angle), radius * std::sin(angle)};
}

}  // namespace vacmirror
