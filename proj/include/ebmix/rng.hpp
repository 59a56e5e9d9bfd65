#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace ebmix {

/// Counter-based random stream (Philox4x32-10).
///
/// The 64-bit seed is the cipher key and the 64-bit stream id occupies the
/// upper half of the 128-bit counter, so streams with distinct ids never
/// share a block. Draw `i` of a stream depends only on (seed, stream, i).
/// A stream must not be shared between threads; it may be moved.
class RngStream {
 public:
  using result_type = std::uint64_t;

  RngStream(std::uint64_t seed, std::uint64_t stream_id);

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t stream_id() const noexcept { return stream_; }
  // Number of 64-bit words consumed so far.
  std::uint64_t position() const noexcept { return position_; }

  std::uint64_t next_u64();
  std::uint64_t operator()() { return next_u64(); }
  static constexpr result_type min() { return 0; }
  static constexpr result_type max() {
    return std::numeric_limits<result_type>::max();
  }

  // Uniform on [0, 1) with 53 random bits.
  double uniform();
  // Uniform on the open interval (0, 1); safe to take logs of.
  double uniform_open();
  // Standard normal (Box-Muller, second variate cached).
  double normal();
  // Uniform integer in [0, bound).
  std::uint64_t below(std::uint64_t bound);

 private:
  void refill();

  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t block_ = 0;
  std::uint64_t position_ = 0;
  std::array<std::uint64_t, 2> buffer_{};
  int buffered_ = 0;
  double cached_normal_ = 0.0;
  bool has_cached_normal_ = false;
};

/// Mixes several integers into one 64-bit stream id (SplitMix64 finalizer).
std::uint64_t derive_stream_id(std::uint64_t a, std::uint64_t b = 0,
                               std::uint64_t c = 0, std::uint64_t d = 0);

}  // namespace ebmix
