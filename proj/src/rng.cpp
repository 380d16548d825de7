#include "kramers/rng.hpp"

#include <cmath>
#include <numbers>

#include "kramers/errors.hpp"

namespace kramers {

namespace {

constexpr std::uint32_t kM0 = 0xD2511F53u;
constexpr std::uint32_t kM1 = 0xCD9E8D57u;
constexpr std::uint32_t kW0 = 0x9E3779B9u;
constexpr std::uint32_t kW1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
  const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
  hi = static_cast<std::uint32_t>(p >> 32);
  lo = static_cast<std::uint32_t>(p);
}

// 53 random bits from two words, mapped into the open interval (0, 1)
inline double to_open_unit(std::uint32_t a, std::uint32_t b) {
  const std::uint64_t bits = ((static_cast<std::uint64_t>(a) << 32) | b) >> 11;
  return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
}

}  // namespace

PhiloxCounter philox4x32(PhiloxCounter c, PhiloxKey k) {
  for (int round = 0; round < 10; ++round) {
    std::uint32_t hi0, lo0, hi1, lo1;
    mulhilo(kM0, c[0], hi0, lo0);
    mulhilo(kM1, c[2], hi1, lo1);
    c = {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
    k[0] += kW0;
    k[1] += kW1;
  }
  return c;
}

PhiloxCounter NoiseStream::block(std::uint64_t step, std::uint32_t index) const {
  // counter = (stream, step, block); the top 8 bits of the last word hold the block index
  const PhiloxCounter ctr{static_cast<std::uint32_t>(stream_), static_cast<std::uint32_t>(stream_ >> 32),
                          static_cast<std::uint32_t>(step),
                          static_cast<std::uint32_t>((step >> 32) & 0x00FFFFFFu) | (index << 24)};
  const PhiloxKey key{static_cast<std::uint32_t>(seed_), static_cast<std::uint32_t>(seed_ >> 32)};
  return philox4x32(ctr, key);
}

void NoiseStream::uniforms(std::uint64_t step, std::span<double> out) const {
  if (out.size() > 512) throw InputError("at most 512 random values per step");
  for (std::size_t i = 0; i < out.size(); i += 2) {
    const auto r = block(step, static_cast<std::uint32_t>(i / 2));
    out[i] = to_open_unit(r[0], r[1]);
    if (i + 1 < out.size()) out[i + 1] = to_open_unit(r[2], r[3]);
  }
}

void NoiseStream::normals(std::uint64_t step, std::span<double> out) const {
  if (out.size() > 512) throw InputError("at most 512 random values per step");
  // Box-Muller on one block per pair of normals
  for (std::size_t i = 0; i < out.size(); i += 2) {
    const auto r = block(step, static_cast<std::uint32_t>(i / 2));
    const double u1 = to_open_unit(r[0], r[1]);
    const double u2 = to_open_unit(r[2], r[3]);
    const double rad = std::sqrt(-2.0 * std::log(u1));
    const double ang = 2.0 * std::numbers::pi * u2;
    out[i] = rad * std::cos(ang);
    if (i + 1 < out.size()) out[i + 1] = rad * std::sin(ang);
  }
}

}  // namespace kramers
