#pragma once

#include <array>
#include <cstdint>
#include <span>

namespace kramers {

// Philox4x32-10 counter based generator
using PhiloxCounter = std::array<std::uint32_t, 4>;
using PhiloxKey = std::array<std::uint32_t, 2>;
PhiloxCounter philox4x32(PhiloxCounter counter, PhiloxKey key);

// Standard normals keyed by (seed, stream_id, step index). Any (stream, step) pair can be
// regenerated on its own, which is what makes ensembles order independent.
class NoiseStream {
 public:
  NoiseStream(std::uint64_t seed, std::uint64_t stream_id) : seed_(seed), stream_(stream_id) {}

  // fills out with normals for the given step; at most 512 values per step
  void normals(std::uint64_t step, std::span<double> out) const;
  // uniform doubles in (0, 1)
  void uniforms(std::uint64_t step, std::span<double> out) const;

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_; }

 private:
  PhiloxCounter block(std::uint64_t step, std::uint32_t index) const;

  std::uint64_t seed_;
  std::uint64_t stream_;
};

}  // namespace kramers
