#include "eqdisc/rng.hpp"

#include <cmath>
#include <limits>

#include "eqdisc/errors.hpp"

namespace eqdisc {

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;
}

double RandomStream::uniform() {
  // 53 uniform mantissa bits in [0,1)
  return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
}

double RandomStream::normal() {
  // Box-Muller, one value per call: the draw count stays a pure function of
  // the call sequence, which keeps multi-distribution streams reproducible.
  double u1;
  do {
    u1 = uniform();
  } while (u1 <= 0.0);
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(kTwoPi * u2);
}

double RandomStream::gamma(double shape, double scale) {
  if (!(shape > 0.0) || !(scale > 0.0)) {
    throw NumericalError("gamma draw requires positive shape and scale");
  }
  if (shape < 1.0) {
    // boost to shape+1, then apply the power correction
    double u;
    do {
      u = uniform();
    } while (u <= 0.0);
    return gamma(shape + 1.0, scale) * std::pow(u, 1.0 / shape);
  }
  // Marsaglia-Tsang squeeze
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x, v;
    do {
      x = normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = uniform();
    if (u < 1.0 - 0.0331 * x * x * x * x) return d * v * scale;
    if (u > 0.0 && std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) {
      return d * v * scale;
    }
  }
}

double RandomStream::inverse_gamma(double shape, double scale) {
  if (!(shape > 0.0) || !(scale > 0.0)) {
    throw NumericalError("inverse-gamma draw requires positive shape and scale");
  }
  // 1/X with X ~ Gamma(shape, rate = scale)
  const double g = gamma(shape, 1.0 / scale);
  if (g <= 0.0) return std::numeric_limits<double>::max();
  return 1.0 / g;
}

double RandomStream::beta(double a, double b) {
  const double ga = gamma(a, 1.0);
  const double gb = gamma(b, 1.0);
  const double s = ga + gb;
  if (s <= 0.0) return a / (a + b);
  return ga / s;
}

bool RandomStream::bernoulli(double p) {
  if (p <= 0.0) return false;
  if (p >= 1.0) return true;
  return uniform() < p;
}

std::uint64_t RandomStream::integer(std::uint64_t bound) {
  if (bound < 2) return 0;
  const std::uint64_t max = std::numeric_limits<std::uint64_t>::max();
  const std::uint64_t limit = max - max % bound;
  std::uint64_t r;
  do {
    r = gen_();
  } while (r >= limit);
  return r % bound;
}

std::vector<int> RandomStream::permutation(int n) {
  std::vector<int> p(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) p[static_cast<std::size_t>(i)] = i;
  for (int i = n - 1; i > 0; --i) {
    const auto j = static_cast<int>(integer(static_cast<std::uint64_t>(i) + 1));
    std::swap(p[static_cast<std::size_t>(i)], p[static_cast<std::size_t>(j)]);
  }
  return p;
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream_id) {
  // splitmix64 over a golden-ratio offset
  std::uint64_t z = master + 0x9E3779B97F4A7C15ull * (stream_id + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

}  // namespace eqdisc
