#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace sign {

/// SplitMix64 finalizer; used to derive independent stream seeds.
std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b);
std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b, std::uint64_t c);

/// A single exclusively-owned random stream. Not thread-safe; give every
/// shard, chain and prediction pass its own instance.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on the open interval (0, 1).
  double uniform();
  double normal() { return normal_(engine_); }
  double normal(double mean, double sd) { return mean + sd * normal(); }
  double exponential(double rate);
  /// Gamma with shape/rate parametrisation. Never returns exactly zero.
  double gamma(double shape, double rate);
  std::vector<double> dirichlet(std::span<const double> concentration);
  /// Standard normal conditioned on Z >= lower.
  double std_normal_above(double lower);
  std::size_t uniform_index(std::size_t n);

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_;
};

}  // namespace sign
