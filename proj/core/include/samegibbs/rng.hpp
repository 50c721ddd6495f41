#pragma once

#include <array>
#include <cstdint>
#include <initializer_list>
#include <string_view>

namespace samegibbs {

// Philox4x32-10 block function (Salmon et al., SC'11). Stateless: the output
// depends only on (counter, key), so any draw can be recomputed from its
// coordinates regardless of which thread produces it.
struct Philox4x32 {
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static Counter generate(Counter counter, Key key) noexcept;
};

// Derive a 64-bit key from a root seed, a component label and a list of
// indices (pass, minibatch, ...). Distinct inputs give unrelated keys.
std::uint64_t derive_key(std::uint64_t seed, std::string_view component,
                         std::initializer_list<std::uint64_t> indices = {}) noexcept;

// A sequential stream over Philox blocks. The stream is identified by a key
// and a 96-bit coordinate; successive draws advance the fourth counter word.
class CounterRng {
 public:
  CounterRng(std::uint64_t key, std::uint32_t c0, std::uint32_t c1 = 0, std::uint32_t c2 = 0) noexcept
      : key_{static_cast<std::uint32_t>(key), static_cast<std::uint32_t>(key >> 32)},
        counter_{c0, c1, c2, 0} {}

  std::uint32_t next_u32() noexcept {
    if (used_ == 4) refill();
    return buffer_[used_++];
  }

  // Uniform on [0, 1) with 53 random bits.
  double uniform() noexcept {
    const std::uint64_t hi = next_u32() >> 5;
    const std::uint64_t lo = next_u32() >> 6;
    return static_cast<double>((hi << 26) | lo) * 0x1.0p-53;
  }

  // Uniform on (0, 1).
  double uniform_open() noexcept {
    double u;
    do {
      u = uniform();
    } while (u == 0.0);
    return u;
  }

  double normal() noexcept;

  // Gamma(shape, 1) via Marsaglia-Tsang; shape > 0.
  double gamma(double shape) noexcept;

 private:
  void refill() noexcept {
    buffer_ = Philox4x32::generate(counter_, key_);
    ++counter_[3];
    used_ = 0;
  }

  Philox4x32::Key key_;
  Philox4x32::Counter counter_;
  Philox4x32::Counter buffer_{};
  int used_ = 4;
};

// Single uniform draw on [0, 1) addressed by a full 128-bit counter.
inline double uniform_at(std::uint64_t key, std::uint32_t c0, std::uint32_t c1, std::uint32_t c2,
                         std::uint32_t c3) noexcept {
  const auto out = Philox4x32::generate(
      {c0, c1, c2, c3}, {static_cast<std::uint32_t>(key), static_cast<std::uint32_t>(key >> 32)});
  const std::uint64_t hi = out[0] >> 5;
  const std::uint64_t lo = out[1] >> 6;
  return static_cast<double>((hi << 26) | lo) * 0x1.0p-53;
}

}  // namespace samegibbs
