#include "cqrma/rng.hpp"

#include <cmath>
#include <cstring>

#include "cqrma/errors.hpp"

namespace cqrma {

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_key(std::initializer_list<std::uint64_t> parts) {
  std::uint64_t key = 0x8e2ab5e1fcd14d07ULL;
  for (std::uint64_t part : parts) {
    key = mix64(key ^ mix64(part));
  }
  return key;
}

std::uint64_t key_bits(double value) {
  std::uint64_t bits = 0;
  std::memcpy(&bits, &value, sizeof(bits));
  return bits;
}

namespace {

inline std::uint64_t rotl(std::uint64_t x, int k) {
  return (x << k) | (x >> (64 - k));
}

}  // namespace

Rng::Rng(std::uint64_t key) {
  // xoshiro state seeded through splitmix, as its authors recommend.
  std::uint64_t seed = key;
  for (auto& word : s_) {
    seed += 0x9e3779b97f4a7c15ULL;
    word = mix64(seed);
  }
}

std::uint64_t Rng::next_u64() {
  const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
  const std::uint64_t t = s_[1] << 17;
  s_[2] ^= s_[0];
  s_[3] ^= s_[1];
  s_[1] ^= s_[2];
  s_[0] ^= s_[3];
  s_[2] ^= t;
  s_[3] = rotl(s_[3], 45);
  return result;
}

double Rng::uniform() {
  while (true) {
    const double u = static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    if (u > 0.0) {
      return u;
    }
  }
}

std::uint64_t Rng::uniform_below(std::uint64_t bound) {
  if (bound == 0) {
    throw DomainError("uniform_below requires a positive bound");
  }
  const std::uint64_t limit = bound * (UINT64_MAX / bound);
  while (true) {
    const std::uint64_t draw = next_u64();
    if (draw < limit) {
      return draw % bound;
    }
  }
}

double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u, v, q;
  do {
    u = 2.0 * uniform() - 1.0;
    v = 2.0 * uniform() - 1.0;
    q = u * u + v * v;
  } while (q >= 1.0 || q == 0.0);
  const double f = std::sqrt(-2.0 * std::log(q) / q);
  spare_ = v * f;
  has_spare_ = true;
  return u * f;
}

double Rng::chi_squared(int df) {
  if (df < 1) {
    throw DomainError("chi_squared requires df >= 1");
  }
  double total = 0.0;
  for (int j = 0; j < df; ++j) {
    const double z = normal();
    total += z * z;
  }
  return total;
}

double Rng::normalized_chi3() {
  return (chi_squared(3) - 3.0) / std::sqrt(6.0);
}

}  // namespace cqrma
