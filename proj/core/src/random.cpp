#include "sign/random.hpp"

#include <cmath>
#include <limits>

#include <boost/math/special_functions/erf.hpp>

namespace sign {

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
  std::uint64_t z = a + 0x9e3779b97f4a7c15ULL * (b + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b, std::uint64_t c) {
  return mix_seed(mix_seed(a, b), c);
}

double Rng::uniform() {
  // 53 random mantissa bits, shifted half a step away from zero.
  return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
}

double Rng::exponential(double rate) { return -std::log(uniform()) / rate; }

double Rng::gamma(double shape, double rate) {
  std::gamma_distribution<double> dist(shape, 1.0 / rate);
  const double x = dist(engine_);
  // Shapes near zero underflow; a zero precision would poison downstream logs.
  return x > 0.0 ? x : std::numeric_limits<double>::min();
}

std::vector<double> Rng::dirichlet(std::span<const double> concentration) {
  std::vector<double> out(concentration.size());
  double total = 0.0;
  for (std::size_t k = 0; k < out.size(); ++k) {
    out[k] = gamma(concentration[k], 1.0);
    total += out[k];
  }
  for (double& v : out) v /= total;
  return out;
}

double Rng::std_normal_above(double lower) {
  if (lower < 5.0) {
    // Inverse CDF on the upper tail: Z = sqrt(2) erfc^{-1}(U erfc(a / sqrt 2)).
    const double tail = std::erfc(lower / std::sqrt(2.0));
    const double z = std::sqrt(2.0) * boost::math::erfc_inv(uniform() * tail);
    return z < lower ? lower : z;
  }
  // Exponential proposal with the optimal rate for the truncation point.
  const double rate = 0.5 * (lower + std::sqrt(lower * lower + 4.0));
  for (;;) {
    const double z = lower + exponential(rate);
    const double diff = z - rate;
    if (uniform() <= std::exp(-0.5 * diff * diff)) return z;
  }
}

std::size_t Rng::uniform_index(std::size_t n) {
  std::uniform_int_distribution<std::size_t> dist(0, n - 1);
  return dist(engine_);
}

}  // namespace sign
