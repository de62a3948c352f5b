#ifndef SGRS_RNG_HPP
#define SGRS_RNG_HPP

#include <concepts>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <random>
#include <string_view>

#include "sgrs/error.hpp"

namespace sgrs {

/// SplitMix64 finalizer; used to derive generator seeds and content hashes.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Anything that can stand in for SeededRng inside environment and policy code.
/// Tests use scripted sources to force particular draws.
template <typename R>
concept UniformSource = requires(R& r, std::size_t n) {
  { r.uniform01() } -> std::convertible_to<double>;
  { r.uniform_index(n) } -> std::convertible_to<std::size_t>;
};

/// Seedable generator with a bit-exact, platform-independent draw sequence.
///
/// Engine: std::mt19937_64 (its output sequence is fixed by the C++ standard),
/// seeded with splitmix64(seed). Derived quantities avoid the std distributions,
/// whose algorithms are implementation-defined:
///   uniform01()        = (u64 >> 11) * 2^-53, in [0, 1)
///   uniform_index(n)   = u64 % n with rejection of the biased tail
///   stream(k)          = SeededRng(splitmix64(seed ^ splitmix64(k + 1)))
class SeededRng {
 public:
  static constexpr std::string_view kAlgorithm = "mt19937_64/splitmix64";

  explicit SeededRng(std::uint64_t seed) : seed_(seed), engine_(splitmix64(seed)) {}

  std::uint64_t seed() const noexcept { return seed_; }
  std::string_view algorithm() const noexcept { return kAlgorithm; }

  std::uint64_t next_u64() { return engine_(); }

  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  std::size_t uniform_index(std::size_t n) {
    if (n == 0) throw DomainError("uniform_index: empty range");
    const std::uint64_t range = n;
    const std::uint64_t limit =
        std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % range;
    std::uint64_t x = next_u64();
    while (x >= limit) x = next_u64();
    return static_cast<std::size_t>(x % range);
  }

  /// Independent child generator; the parent sequence is untouched.
  SeededRng stream(std::uint64_t index) const {
    return SeededRng(splitmix64(seed_ ^ splitmix64(index + 1)));
  }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

static_assert(UniformSource<SeededRng>);

}  // namespace sgrs

#endif  // SGRS_RNG_HPP
