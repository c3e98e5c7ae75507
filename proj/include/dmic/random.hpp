#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace dmic {

/// SplitMix64 finalizer; used to derive independent stream seeds.
std::uint64_t splitmix64(std::uint64_t x) noexcept;

/// Seeded generator with derived sub-streams. Draws are built from raw
/// mt19937_64 output (never from std:: distributions) so sequences are
/// identical across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed), engine_(splitmix64(seed)) {}

  /// Independent generator for sub-stream `stream` (agent index, trial...).
  Rng split(std::uint64_t stream) const;

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t next_u64() { return engine_(); }
  /// Uniform in [0, 1) with 53 random bits.
  double uniform();
  /// Uniform in [0, n).
  std::size_t index(std::size_t n);
  /// Inverse-CDF draw from nonnegative weights (need not be normalized).
  std::size_t categorical(std::span<const double> weights);
  double normal();
  double gamma(double shape);
  std::vector<double> dirichlet(std::span<const double> alpha);

  template <class T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[index(i)]);
  }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

}  // namespace dmic
