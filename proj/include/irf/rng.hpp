#pragma once

#include <array>
#include <cstdint>

namespace irf {

// Philox4x32-10 block function (Salmon et al., "Parallel random numbers: as easy as 1, 2, 3").
// Stateless: maps (counter, key) to 128 random bits.
struct Philox4x32 {
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static Counter block(Counter ctr, Key key) noexcept;
};

// A counter-based stream keyed by (seed, stream_id). Draw k of the stream is a pure function
// of (seed, stream_id, k), so streams can be created anywhere, in any order, on any worker.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream_id) noexcept;

  std::uint64_t next_u64() noexcept;

  // Uniform on (0, 1] with 53 random bits; never returns 0.
  double uniform() noexcept;

  // Jump to draw index `k` (in 64-bit words).
  void seek(std::uint64_t k) noexcept;
  std::uint64_t position() const noexcept { return position_; }

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t stream_id() const noexcept { return stream_id_; }

 private:
  void refill() noexcept;

  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::uint64_t position_ = 0;  // index of the next 64-bit word
  std::array<std::uint64_t, 2> buffer_{};
  std::uint64_t buffered_block_ = ~std::uint64_t{0};
};

// Derives a child seed for an independent purpose (e.g. a second batch) from a parent seed.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t purpose) noexcept;

}  // namespace irf
