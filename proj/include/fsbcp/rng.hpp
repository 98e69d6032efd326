#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace fsbcp {

namespace detail {

inline constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline constexpr std::uint64_t fnv1a(std::string_view s) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace detail

/// A reproducible random stream identified by a master seed and a path of
/// child indices (study -> replication -> bootstrap replicate ...).
///
/// Streams are values: child() derives a new key from the parent key without
/// consuming any draws, so the draws of replicate b never depend on how many
/// replicates were scheduled before it or on which thread runs it.
class RngStream {
 public:
  using engine_type = std::mt19937_64;

  explicit RngStream(std::uint64_t master_seed)
      : seed_(master_seed), key_(detail::splitmix64(master_seed)), engine_(key_) {}

  [[nodiscard]] RngStream child(std::uint64_t index) const {
    return RngStream(seed_, detail::splitmix64(key_ ^ detail::splitmix64(index + 0x51ed27f3ULL)));
  }

  /// Named child, for streams that must not collide with indexed ones.
  [[nodiscard]] RngStream child(std::string_view tag) const {
    return RngStream(seed_, detail::splitmix64(key_ ^ detail::fnv1a(tag)));
  }

  [[nodiscard]] std::uint64_t master_seed() const noexcept { return seed_; }
  [[nodiscard]] std::uint64_t key() const noexcept { return key_; }

  engine_type& engine() noexcept { return engine_; }

  double normal() { return normal_(engine_); }

  /// Uniform integer on [0, bound).
  std::size_t index(std::size_t bound) {
    return std::uniform_int_distribution<std::size_t>(0, bound - 1)(engine_);
  }

 private:
  RngStream(std::uint64_t seed, std::uint64_t key) : seed_(seed), key_(key), engine_(key) {}

  std::uint64_t seed_;
  std::uint64_t key_;
  engine_type engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace fsbcp
