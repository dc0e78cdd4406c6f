#include "jumpcalc/rng.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace jumpcalc::rng {

double Stream::exponential(double mean_rate) {
  if (!(mean_rate > 0)) throw std::domain_error("exponential: rate must be positive");
  return -std::log(uniform_pos()) / mean_rate;
}

double Stream::normal() {
  // Box-Muller; consumes exactly two uniforms so stream offsets stay fixed.
  const double u1 = uniform_pos();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::uint64_t Stream::poisson(double mean) {
  if (mean < 0 || !std::isfinite(mean)) throw std::domain_error("poisson: mean must be finite and >= 0");
  std::uint64_t total = 0;
  // Infinite divisibility: split large means into chunks the product method
  // can handle without underflow.
  while (mean > 30.0) {
    double chunk = 30.0;
    const double l = std::exp(-chunk);
    std::uint64_t k = 0;
    double p = 1.0;
    do {
      ++k;
      p *= uniform();
    } while (p > l);
    total += k - 1;
    mean -= chunk;
  }
  if (mean > 0) {
    const double l = std::exp(-mean);
    std::uint64_t k = 0;
    double p = 1.0;
    do {
      ++k;
      p *= uniform();
    } while (p > l);
    total += k - 1;
  }
  return total;
}

std::size_t Stream::categorical(std::span<const double> weights) {
  if (weights.empty()) throw std::domain_error("categorical: no weights");
  double total = 0;
  for (double w : weights) {
    if (w < 0 || !std::isfinite(w)) throw std::domain_error("categorical: weights must be finite and >= 0");
    total += w;
  }
  if (total <= 0) throw std::domain_error("categorical: total weight must be positive");
  const double target = uniform() * total;
  double acc = 0;
  for (std::size_t i = 0; i + 1 < weights.size(); ++i) {
    acc += weights[i];
    if (target < acc) return i;
  }
  return weights.size() - 1;
}

}  // namespace jumpcalc::rng
