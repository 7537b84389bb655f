#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace tvf {

/// Philox4x32-10 counter-based generator (Salmon et al., Random123).
///
/// The stream is a pure function of (seed, stream id, counter), so draws are
/// bit-identical across platforms and compilers. The distributions below are
/// written out by hand for the same reason; the standard library leaves the
/// algorithms behind std::normal_distribution and friends unspecified.
class Philox
{
public:
  using result_type = std::uint64_t;
  using Block = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  explicit Philox(std::uint64_t seed, std::uint64_t stream = 0);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max()
  {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()();

  /// Uniform on the open interval (0, 1), 53 bits of resolution.
  double uniform();

  /// Standard normal draw (Box-Muller).
  double normal();

  /// Uniform integer in [0, bound). `bound` must be positive.
  std::uint64_t below(std::uint64_t bound);

  /// The raw ten-round bijection, exposed for known-answer tests.
  static Block bijection(Block counter, Key key);

private:
  void refill();

  Key key_;
  Block counter_{};
  Block buffer_{};
  int next_word_ = 4;
  bool has_spare_normal_ = false;
  double spare_normal_ = 0.0;
};

/// Mixes a master seed with an index into an independent child seed
/// (SplitMix64 finalizer over both words). Used for per-replication seeds.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index);

} // namespace tvf
