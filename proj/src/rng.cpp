#include "gdfactor/rng.hpp"

#include <cmath>
#include <numbers>

namespace gdfactor {

namespace {
constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;
}

std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> words) noexcept {
  std::uint64_t h = mix64(master + kGolden);
  for (std::uint64_t w : words) {
    h = mix64(h ^ mix64(w + kGolden));
  }
  return h;
}

std::uint64_t RngStream::next_u64() noexcept {
  ++counter_;
  return mix64(seed_ + counter_ * kGolden);
}

double RngStream::next_uniform() noexcept {
  // (k + 0.5) / 2^53 never hits 0 or 1.
  return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

double RngStream::next_gaussian() noexcept {
  if (cached_) {
    double z = *cached_;
    cached_.reset();
    return z;
  }
  const double u1 = next_uniform();
  const double u2 = next_uniform();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  cached_ = radius * std::sin(angle);
  return radius * std::cos(angle);
}

RngStream RngStream::split(std::uint64_t id) const noexcept {
  return RngStream(derive_seed(seed_, {id}));
}

}  // namespace gdfactor
