#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

#include "nck/types.hpp"

namespace nck {

/// SplitMix64 finalizer; used to decorrelate derived stream seeds.
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Deterministic random stream. Normal draws use the basic Box-Muller
/// transform (fixed consumption: two uniforms per pair), so a stream's
/// output depends only on its seed, never on library internals.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_base_(mix64(seed)), engine_(seed_base_) {}

  /// Derived, statistically independent stream. Children of the same
  /// (seed, key) pair are identical; used to split per-particle noise.
  Rng child(std::uint64_t key) const { return Rng(seed_base_ ^ mix64(key)); }

  std::uint64_t bits() { return engine_(); }

  /// Uniform on [0, 1).
  Scalar uniform() { return static_cast<Scalar>(bits() >> 11) * 0x1.0p-53; }

  /// Uniform on [lo, hi).
  Scalar uniform(Scalar lo, Scalar hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, n). Modulo bias is negligible for n << 2^64.
  std::uint64_t uniform_index(std::uint64_t n) { return bits() % n; }

  Scalar normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    Scalar u1 = uniform();
    if (u1 <= 0.0) u1 = 0x1.0p-53;
    const Scalar u2 = uniform();
    const Scalar r = std::sqrt(-2.0 * std::log(u1));
    const Scalar a = 2.0 * std::numbers::pi_v<Scalar> * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

  Vector normal_vector(Index d) {
    Vector v(d);
    for (Index i = 0; i < d; ++i) v[i] = normal();
    return v;
  }

  Matrix normal_matrix(Index rows, Index cols) {
    Matrix m(rows, cols);
    for (Index j = 0; j < cols; ++j)
      for (Index i = 0; i < rows; ++i) m(i, j) = normal();
    return m;
  }

 private:
  std::uint64_t seed_base_;
  std::mt19937_64 engine_;
  Scalar spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace nck
