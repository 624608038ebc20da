#pragma once

#include <array>
#include <cstdint>
#include <initializer_list>
#include <iterator>
#include <utility>

namespace fracmix {

// Philox4x32-10 (Salmon, Moraes, Dror, Shaw; SC'11). Stateless block function.
class Philox4x32 {
 public:
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static Counter generate(Counter ctr, Key key);
};

/// 64-bit finalizer used to fold structured identifiers into stream ids.
std::uint64_t mix64(std::uint64_t x);

/// Folds an ordered list of integers (purpose tag, level, index, ...) into one stream id.
std::uint64_t stream_id(std::initializer_list<std::uint64_t> parts);

/// Deterministic random stream addressed by (seed, stream id). Two streams with
/// different ids are statistically independent and never overlap; the values a
/// stream yields do not depend on which thread or in which order streams are used.
class RandomStream {
 public:
  RandomStream(std::uint64_t seed, std::uint64_t id);

  std::uint32_t next_u32();
  std::uint64_t next_u64();

  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  /// Uniform on the open interval (0, 1).
  double uniform_open();
  /// Standard normal by inversion.
  double normal();
  /// Uniform integer in [0, n). n must be positive.
  std::uint64_t below(std::uint64_t n);

  template <class RandomIt>
  void shuffle(RandomIt first, RandomIt last) {
    auto n = static_cast<std::uint64_t>(std::distance(first, last));
    for (std::uint64_t i = n; i > 1; --i) {
      std::uint64_t j = below(i);
      using std::swap;
      swap(first[static_cast<std::ptrdiff_t>(i - 1)], first[static_cast<std::ptrdiff_t>(j)]);
    }
  }

 private:
  void refill();

  Philox4x32::Key key_;
  Philox4x32::Counter counter_;
  Philox4x32::Counter buffer_{};
  unsigned used_ = 4;
};

// Purpose tags for stream ids; keep values stable, they are part of the reproducibility contract.
namespace stream_tag {
inline constexpr std::uint64_t kLssAssign = 1;
inline constexpr std::uint64_t kCandidateAssign = 2;
inline constexpr std::uint64_t kCandidateOffset = 3;
inline constexpr std::uint64_t kCandidateOrder = 4;
inline constexpr std::uint64_t kBootstrap = 5;
inline constexpr std::uint64_t kMonteCarlo = 6;
inline constexpr std::uint64_t kSubsetLevel0 = 7;
inline constexpr std::uint64_t kSubsetChain = 8;
inline constexpr std::uint64_t kFitRestart = 9;
}  // namespace stream_tag

}  // namespace fracmix
