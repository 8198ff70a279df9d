#include "hom/rng.hpp"

#include <cmath>
#include <vector>

namespace hom {

namespace {

std::mt19937_64 seeded(std::uint64_t seed, std::initializer_list<std::uint64_t> path) {
  std::vector<std::uint32_t> words;
  words.reserve(2 * (path.size() + 1) + 1);
  auto push = [&words](std::uint64_t v) {
    words.push_back(static_cast<std::uint32_t>(v));
    words.push_back(static_cast<std::uint32_t>(v >> 32));
  };
  push(seed);
  words.push_back(static_cast<std::uint32_t>(path.size()));
  for (auto v : path) push(v);
  std::seed_seq seq(words.begin(), words.end());
  return std::mt19937_64(seq);
}

}  // namespace

Rng::Rng(std::uint64_t seed, std::initializer_list<std::uint64_t> path)
    : engine_(seeded(seed, path)) {}

std::uint64_t Rng::geometric(double q) {
  if (q >= 1.0) return 0;
  if (q <= 0.0) return std::numeric_limits<std::uint64_t>::max();
  const double u = 1.0 - uniform();  // (0, 1]
  const double k = std::floor(std::log(u) / std::log1p(-q));
  if (k >= 1.8e19) return std::numeric_limits<std::uint64_t>::max();
  return static_cast<std::uint64_t>(k);
}

int Rng::poisson(double mean, int cap) {
  if (mean <= 0.0 || cap <= 0) return 0;
  double u = uniform();
  double term = std::exp(-mean);
  int n = 0;
  while (n < cap) {
    if (u < term) return n;
    u -= term;
    ++n;
    term *= mean / n;
  }
  return cap;
}

}  // namespace hom
