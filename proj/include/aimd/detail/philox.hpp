#pragma once

#include <array>
#include <cstdint>

namespace aimd::detail {

// Philox4x32-10 counter-based generator.
struct Philox4x32 {
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static Counter block(Counter ctr, Key key) {
    for (int r = 0; r < 10; ++r) {
      if (r > 0) {
        key[0] += 0x9E3779B9u;
        key[1] += 0xBB67AE85u;
      }
      const std::uint64_t p0 = std::uint64_t{0xD2511F53u} * ctr[0];
      const std::uint64_t p1 = std::uint64_t{0xCD9E8D57u} * ctr[2];
      const std::uint32_t hi0 = static_cast<std::uint32_t>(p0 >> 32);
      const std::uint32_t lo0 = static_cast<std::uint32_t>(p0);
      const std::uint32_t hi1 = static_cast<std::uint32_t>(p1 >> 32);
      const std::uint32_t lo1 = static_cast<std::uint32_t>(p1);
      ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    }
    return ctr;
  }
};

// Stream of uniforms for one (seed, path) pair; the block counter is the draw index.
class PathStream {
 public:
  PathStream(std::uint64_t seed, std::uint64_t path)
      : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
        path_lo_(static_cast<std::uint32_t>(path)),
        path_hi_(static_cast<std::uint32_t>(path >> 32)) {}

  // Uniform on [0, 1) with 53 random bits.
  double uniform() {
    if (slot_ == 2) refill();
    const std::uint64_t hi = buf_[2 * slot_];
    const std::uint64_t lo = buf_[2 * slot_ + 1];
    ++slot_;
    const std::uint64_t bits = ((hi << 32) | lo) >> 11;
    return static_cast<double>(bits) * 0x1.0p-53;
  }

  std::uint64_t blocks_used() const { return block_; }

 private:
  void refill() {
    buf_ = Philox4x32::block({static_cast<std::uint32_t>(block_),
                              static_cast<std::uint32_t>(block_ >> 32), path_lo_, path_hi_},
                             key_);
    ++block_;
    slot_ = 0;
  }

  Philox4x32::Key key_;
  std::uint32_t path_lo_;
  std::uint32_t path_hi_;
  std::uint64_t block_ = 0;
  Philox4x32::Counter buf_{};
  int slot_ = 2;
};

}  // namespace aimd::detail
