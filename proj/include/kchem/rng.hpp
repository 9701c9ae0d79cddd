#pragma once

#include <array>
#include <cstdint>

namespace kchem {

//! Philox4x32 counter-based generator with 10 rounds.
struct Philox4x32 {
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static Counter block(Counter ctr, Key key)
  {
    constexpr std::uint32_t m0 = 0xD2511F53u, m1 = 0xCD9E8D57u;
    constexpr std::uint32_t w0 = 0x9E3779B9u, w1 = 0xBB67AE85u;
    for (int r = 0; r < 10; ++r)
    {
      if (r > 0)
      {
        key[0] += w0;
        key[1] += w1;
      }
      std::uint64_t const p0 = std::uint64_t{m0} * ctr[0];
      std::uint64_t const p1 = std::uint64_t{m1} * ctr[2];
      ctr = {static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0], static_cast<std::uint32_t>(p1),
             static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1], static_cast<std::uint32_t>(p0)};
    }
    return ctr;
  }
};

//! Independent stream (seed, stream id); each draw consumes one counter.
class CounterStream {
 public:
  CounterStream(std::uint64_t seed, std::uint64_t stream, std::uint64_t position = 0)
      : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
        stream_(stream),
        position_(position)
  {
  }

  //! Uniform double in the open interval (0, 1).
  double uniform()
  {
    auto const r = Philox4x32::block({static_cast<std::uint32_t>(position_),
                                      static_cast<std::uint32_t>(position_ >> 32),
                                      static_cast<std::uint32_t>(stream_),
                                      static_cast<std::uint32_t>(stream_ >> 32)},
                                     key_);
    ++position_;
    std::uint64_t const bits = (std::uint64_t{r[0]} << 32 | r[1]) >> 11;
    return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
  }

  std::uint64_t position() const { return position_; }

 private:
  Philox4x32::Key key_;
  std::uint64_t stream_;
  std::uint64_t position_;
};

}  // namespace kchem
