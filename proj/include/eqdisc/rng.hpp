#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace eqdisc {

/// Deterministic random stream. All distributions are built from the raw
/// mt19937_64 output through fixed algorithms, so a seed pins the entire
/// sequence of draws regardless of standard-library version.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : gen_(seed) {}

  double uniform();  // U[0,1)
  double normal();   // N(0,1)

  // shape/scale convention: mean = shape * scale
  double gamma(double shape, double scale);

  // density proportional to x^{-shape-1} exp(-scale/x)
  double inverse_gamma(double shape, double scale);

  double beta(double a, double b);
  bool bernoulli(double p);

  std::uint64_t integer(std::uint64_t bound);  // U{0,...,bound-1}
  std::vector<int> permutation(int n);         // uniform shuffle of 0..n-1

 private:
  std::mt19937_64 gen_;
};

/// Stable sub-stream seed for chain / replication `stream_id` of a run.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream_id);

}  // namespace eqdisc
