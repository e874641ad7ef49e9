#pragma once

#include <cstdint>
#include <initializer_list>
#include <optional>

namespace gdfactor {

/// SplitMix64 finalizer. Constants from Steele, Lea & Flood (2014):
///   z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
///   z = (z ^ (z >> 27)) * 0x94D049BB133111EB
///   z =  z ^ (z >> 31)
std::uint64_t mix64(std::uint64_t z) noexcept;

/// Combine a master seed with a list of words into an independent seed.
std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> words) noexcept;

/// Counter-based SplitMix64 stream. The n-th raw output is
/// mix64(seed + n * 0x9E3779B97F4A7C15), so sequences depend only on the
/// seed and are identical on every platform. Gaussian draws use the
/// Box-Muller transform; both outputs of a pair are used, the second one
/// cached for the next call.
///
/// Single owner: concurrent users should each take a split() stream.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) noexcept : seed_(seed) {}

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t counter() const noexcept { return counter_; }

  std::uint64_t next_u64() noexcept;
  /// Uniform in the open interval (0, 1), 53-bit resolution.
  double next_uniform() noexcept;
  /// Standard normal draw.
  double next_gaussian() noexcept;

  /// Independent stream keyed by (seed, id); does not advance this stream.
  RngStream split(std::uint64_t id) const noexcept;

 private:
  std::uint64_t seed_;
  std::uint64_t counter_ = 0;
  std::optional<double> cached_;
};

}  // namespace gdfactor
