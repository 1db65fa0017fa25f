#pragma once

#include <array>
#include <cstdint>

namespace mlmrt {

// Philox4x32-10 counter-based generator. The 64-bit seed is the key; the
// 128-bit counter is (block, stream), so stream s of seed k is an
// independent sequence that any implementation of Philox4x32-10 reproduces.
class Philox {
 public:
  using Block = std::array<std::uint32_t, 4>;

  Philox(std::uint64_t seed, std::uint64_t stream);

  static Block round10(Block ctr, std::array<std::uint32_t, 2> key);

  std::uint32_t next_u32();
  // Uniform on the open interval (0,1) with 53 random bits.
  double uniform();
  // Standard normal via Box-Muller; the second draw of each pair is cached.
  double normal();
  bool bernoulli(double p) { return uniform() < p; }
  // Index i with probability w[i]; w sums to 1 over n entries.
  int categorical(const double* w, int n);

 private:
  void refill();

  std::array<std::uint32_t, 2> key_;
  std::uint64_t stream_;
  std::uint64_t block_ = 0;
  Block buf_{};
  int pos_ = 4;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace mlmrt
