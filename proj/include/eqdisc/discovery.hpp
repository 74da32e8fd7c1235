#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "eqdisc/diagnostics.hpp"
#include "eqdisc/dictionary.hpp"
#include "eqdisc/posterior.hpp"
#include "eqdisc/sdof.hpp"

namespace eqdisc {

enum class SamplerKind { DssI, DssG, Css };

std::string to_string(SamplerKind kind);
SamplerKind sampler_from_string(const std::string& name);

struct ChainSettings {
  int n_chains = 4;
  int n_iter = 5000;
  int n_burn = 1000;
  int workers = 0;  // <= 0: hardware concurrency
  bool operator==(const ChainSettings&) const = default;
};

struct PriorSettings {
  double a_p = 0.1, b_p = 1.0;
  double a_v = 0.5, b_v = 0.5;
  double a_sigma = 1e-4, b_sigma = 1e-4;
  double p0_init = 0.1;
  double vs_init = 10.0;
  // continuous spike/slab scales; 0 derives v0 = 1/N and v1 = 100 v0
  double v0 = 0.0;
  double v1 = 0.0;
  bool css_half_quadratic_vs = true;
  bool operator==(const PriorSettings&) const = default;
};

struct DiscoveryResult {
  PosteriorSummary summary;
  ConvergenceReport convergence;
  std::vector<ChainTrace> traces;
  std::string equation;
  BasisConfig basis_config;
};

/// Build + normalize the dictionary, run the chains, merge, select and
/// summarize, and assess convergence of the weight draws.
DiscoveryResult run_discovery(const Dataset& train, SamplerKind kind, const BasisConfig& basis,
                              const PriorSettings& priors, const ChainSettings& chains,
                              std::uint64_t master_seed, double r_hat_threshold = 1.1);

}  // namespace eqdisc
