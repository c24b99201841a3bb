#pragma once

#include <cstdint>
#include <initializer_list>

namespace cqrma {

/// splitmix64 finaliser; used to mix key material.
std::uint64_t mix64(std::uint64_t x);

/// Folds the parts into one stream key. Different tuples give streams that
/// are independent for all practical purposes, which is what keeps parallel
/// replications order-free.
std::uint64_t derive_key(std::initializer_list<std::uint64_t> parts);

/// Bit pattern of a double, for keying streams on real-valued settings.
std::uint64_t key_bits(double value);

/// Deterministic xoshiro256++ stream with explicit samplers. The samplers are
/// written out here (rather than using <random> distributions) so simulated
/// draws are identical across standard-library versions.
class Rng {
 public:
  explicit Rng(std::uint64_t key);

  std::uint64_t next_u64();
  /// Uniform on (0, 1), never exactly 0 or 1.
  double uniform();
  /// Uniform integer in [0, bound), rejection sampled.
  std::uint64_t uniform_below(std::uint64_t bound);
  /// Standard normal via the Marsaglia polar method.
  double normal();
  /// Chi-squared with `df` degrees of freedom (sum of squared normals).
  double chi_squared(int df);
  /// (chi2_3 - 3) / sqrt(6): mean zero, unit variance.
  double normalized_chi3();

 private:
  std::uint64_t s_[4];
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace cqrma
