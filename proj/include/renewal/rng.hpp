#pragma once

#include <array>
#include <cstdint>

namespace renewal {

/// Philox4x32-10 counter-based block cipher (Salmon et al., SC'11).
/// Maps (counter, key) to four statistically independent 32-bit words.
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key);

/**
 * Reproducible random stream keyed by (base_seed, stream_index).
 *
 * Draw `n` of the stream is a pure function of (base_seed, stream_index, n),
 * so replicas can be generated in any order or in parallel and still produce
 * identical paths. Copying a stream forks it at its current position.
 */
class RngStream {
 public:
  RngStream(std::uint64_t base_seed, std::uint64_t stream_index);

  /// Uniform on the open interval (0, 1), 53-bit resolution.
  double uniform();
  /// Exp(1) by inversion.
  double exponential();

  std::uint64_t next_u64();

  std::uint64_t base_seed() const { return seed_; }
  std::uint64_t stream_index() const { return stream_; }
  std::uint64_t draw_index() const { return draws_; }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t draws_ = 0;  // 64-bit words consumed
  std::array<std::uint32_t, 4> block_{};
};

}  // namespace renewal
