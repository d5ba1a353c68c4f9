#pragma once

// Seedable, splittable random streams.
//
// A stream is addressed by (seed, index): the pair is hashed with splitmix64
// into the state of a std::mt19937_64, so stream `index` never depends on how
// many other streams were drawn before it. Normal variates come from
// std::normal_distribution on that engine.

#include <cstdint>
#include <random>
#include <string_view>

namespace pvmrigid {

inline constexpr std::string_view kRngAlgorithm =
    "splitmix64(seed,index) -> mt19937_64 -> std::normal_distribution";

struct RngSeed {
  std::uint64_t value = 0;

  friend bool operator==(const RngSeed&, const RngSeed&) = default;
};

namespace detail {

inline constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

}  // namespace detail

// Child seed for a named sub-stream; used to give independent sample sets
// (curves, states, simplex points) their own seed space.
inline constexpr RngSeed split(RngSeed seed, std::uint64_t salt) {
  return RngSeed{detail::splitmix64(seed.value ^ detail::splitmix64(salt + 0x632BE59BD9B4E019ULL))};
}

inline std::mt19937_64 make_stream(RngSeed seed, std::uint64_t index) {
  const std::uint64_t k = detail::splitmix64(seed.value ^ detail::splitmix64(index));
  std::seed_seq seq{static_cast<std::uint32_t>(k), static_cast<std::uint32_t>(k >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
  return std::mt19937_64(seq);
}

}  // namespace pvmrigid
