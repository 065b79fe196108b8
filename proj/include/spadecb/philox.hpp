#pragma once

#include <array>
#include <cstdint>

namespace spadecb {

/// Philox4x32-10 counter-based generator (Salmon et al., SC'11).
using PhiloxCounter = std::array<std::uint32_t, 4>;
using PhiloxKey = std::array<std::uint32_t, 2>;

PhiloxCounter philox4x32_10(PhiloxCounter ctr, PhiloxKey key);

/// Sequential stream over Philox blocks. The key is the 64-bit seed and the
/// high counter words carry the stream id, so distinct (seed, stream) pairs
/// never share blocks.
class PhiloxStream {
 public:
  PhiloxStream(std::uint64_t seed, std::uint64_t stream);

  std::uint32_t next_u32();
  /// Uniform on the open interval (0, 1) with 53 random bits.
  double uniform();
  /// Standard normal by Box-Muller.
  double normal();
  /// Poisson by inversion, splitting means above 30 into equal chunks.
  std::uint64_t poisson(double mean);

 private:
  PhiloxKey key_;
  PhiloxCounter ctr_;
  PhiloxCounter block_{};
  int used_ = 4;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace spadecb
