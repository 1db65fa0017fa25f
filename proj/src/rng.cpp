#include "mlmrt/rng.hpp"

#include <cmath>
#include <numbers>

namespace mlmrt {

namespace {

constexpr std::uint32_t kM0 = 0xD2511F53u;
constexpr std::uint32_t kM1 = 0xCD9E8D57u;
constexpr std::uint32_t kW0 = 0x9E3779B9u;
constexpr std::uint32_t kW1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
  const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
  hi = static_cast<std::uint32_t>(p >> 32);
  lo = static_cast<std::uint32_t>(p);
}

}  // namespace

Philox::Philox(std::uint64_t seed, std::uint64_t stream)
    : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
      stream_(stream) {}

Philox::Block Philox::round10(Block c, std::array<std::uint32_t, 2> k) {
  for (int r = 0; r < 10; ++r) {
    std::uint32_t hi0, lo0, hi1, lo1;
    mulhilo(kM0, c[0], hi0, lo0);
    mulhilo(kM1, c[2], hi1, lo1);
    c = {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
    k[0] += kW0;
    k[1] += kW1;
  }
  return c;
}

void Philox::refill() {
  buf_ = round10({static_cast<std::uint32_t>(block_), static_cast<std::uint32_t>(block_ >> 32),
                  static_cast<std::uint32_t>(stream_), static_cast<std::uint32_t>(stream_ >> 32)},
                 key_);
  ++block_;
  pos_ = 0;
}

std::uint32_t Philox::next_u32() {
  if (pos_ == 4) refill();
  return buf_[pos_++];
}

double Philox::uniform() {
  const std::uint64_t a = next_u32() >> 5;  // 27 bits
  const std::uint64_t b = next_u32() >> 6;  // 26 bits
  return (static_cast<double>((a << 26) | b) + 0.5) * 0x1.0p-53;
}

double Philox::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  const double r = std::sqrt(-2.0 * std::log(uniform()));
  const double t = 2.0 * std::numbers::pi * uniform();
  spare_ = r * std::sin(t);
  has_spare_ = true;
  return r * std::cos(t);
}

int Philox::categorical(const double* w, int n) {
  const double u = uniform();
  double acc = 0.0;
  int last = 0;
  for (int i = 0; i < n; ++i) {
    if (w[i] <= 0.0) continue;
    acc += w[i];
    if (u < acc) return i;
    last = i;
  }
  return last;
}

}  // namespace mlmrt
