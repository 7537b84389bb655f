#include "tvf/rng.hpp"

#include <cmath>
#include <numbers>

namespace tvf {

namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a,
                    std::uint32_t b,
                    std::uint32_t& hi,
                    std::uint32_t& lo)
{
  const std::uint64_t product = std::uint64_t{ a } * std::uint64_t{ b };
  hi = static_cast<std::uint32_t>(product >> 32);
  lo = static_cast<std::uint32_t>(product);
}

std::uint64_t splitmix64(std::uint64_t x)
{
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

} // namespace

Philox::Philox(std::uint64_t seed, std::uint64_t stream)
  : key_{ static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32) }
{
  counter_[2] = static_cast<std::uint32_t>(stream);
  counter_[3] = static_cast<std::uint32_t>(stream >> 32);
}

Philox::Block Philox::bijection(Block ctr, Key key)
{
  for (int round = 0; round < 10; ++round) {
    if (round > 0) {
      key[0] += kWeyl0;
      key[1] += kWeyl1;
    }
    std::uint32_t hi0, lo0, hi1, lo1;
    mulhilo(kMul0, ctr[0], hi0, lo0);
    mulhilo(kMul1, ctr[2], hi1, lo1);
    ctr = { hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0 };
  }
  return ctr;
}

void Philox::refill()
{
  buffer_ = bijection(counter_, key_);
  // 64-bit block counter in the low two words; the high two hold the stream.
  if (++counter_[0] == 0)
    ++counter_[1];
  next_word_ = 0;
}

Philox::result_type Philox::operator()()
{
  if (next_word_ > 2)
    refill();
  const std::uint64_t lo = buffer_[next_word_];
  const std::uint64_t hi = buffer_[next_word_ + 1];
  next_word_ += 2;
  return (hi << 32) | lo;
}

double Philox::uniform()
{
  return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53;
}

double Philox::normal()
{
  if (has_spare_normal_) {
    has_spare_normal_ = false;
    return spare_normal_;
  }
  const double radius = std::sqrt(-2.0 * std::log(uniform()));
  const double angle = 2.0 * std::numbers::pi * uniform();
  spare_normal_ = radius * std::sin(angle);
  has_spare_normal_ = true;
  return radius * std::cos(angle);
}

std::uint64_t Philox::below(std::uint64_t bound)
{
  // Rejection on the top of the range keeps the draw exactly uniform.
  const std::uint64_t limit = max() - max() % bound;
  std::uint64_t draw;
  do {
    draw = (*this)();
  } while (draw >= limit);
  return draw % bound;
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index)
{
  return splitmix64(splitmix64(master) ^ splitmix64(index + 0x632BE59BD9B4E019ull));
}

} // namespace tvf
