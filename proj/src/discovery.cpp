#include "eqdisc/discovery.hpp"

#include "eqdisc/errors.hpp"
#include "eqdisc/gibbs_css.hpp"
#include "eqdisc/gibbs_dss.hpp"

namespace eqdisc {

std::string to_string(SamplerKind kind) {
  switch (kind) {
    case SamplerKind::DssI: return "dss_i";
    case SamplerKind::DssG: return "dss_g";
    case SamplerKind::Css: return "css";
  }
  return "dss_i";
}

SamplerKind sampler_from_string(const std::string& name) {
  if (name == "dss_i") return SamplerKind::DssI;
  if (name == "dss_g") return SamplerKind::DssG;
  if (name == "css") return SamplerKind::Css;
  throw ConfigError("unknown sampler '" + name + "'; legal values: dss_i, dss_g, css");
}

DiscoveryResult run_discovery(const Dataset& train, SamplerKind kind, const BasisConfig& basis,
                              const PriorSettings& priors, const ChainSettings& chains,
                              std::uint64_t master_seed, double r_hat_threshold) {
  const Dictionary dict = build_dictionary(train, basis);
  const ScaledDesign design = normalize(dict);

  DiscoveryResult result;
  result.basis_config = basis;

  if (kind == SamplerKind::Css) {
    CssPriorConfig cfg;
    cfg.a_p = priors.a_p;
    cfg.b_p = priors.b_p;
    cfg.a_v = priors.a_v;
    cfg.b_v = priors.b_v;
    cfg.a_sigma = priors.a_sigma;
    cfg.b_sigma = priors.b_sigma;
    cfg.half_quadratic_vs_scale = priors.css_half_quadratic_vs;
    const double n = static_cast<double>(design.Ds.rows());
    cfg.v0 = priors.v0 > 0.0 ? priors.v0 : 1.0 / n;
    cfg.v1 = priors.v1 > 0.0 ? priors.v1 : 100.0 * cfg.v0;
    result.traces = run_chains_css(design, cfg, chains.n_chains, chains.n_iter, chains.n_burn,
                                   priors.p0_init, priors.vs_init, master_seed, chains.workers);
  } else {
    DssPriorConfig cfg;
    cfg.slab = kind == SamplerKind::DssG ? SlabStructure::GPrior : SlabStructure::Independent;
    cfg.a_p = priors.a_p;
    cfg.b_p = priors.b_p;
    cfg.a_v = priors.a_v;
    cfg.b_v = priors.b_v;
    cfg.a_sigma = priors.a_sigma;
    cfg.b_sigma = priors.b_sigma;
    result.traces = run_chains_dss(design, cfg, chains.n_chains, chains.n_iter, chains.n_burn,
                                   priors.p0_init, priors.vs_init, master_seed, chains.workers);
  }

  result.summary = summarize(result.traces, dict.names(), design.scaling);
  result.equation = render_equation(result.summary);
  if (chains.n_chains >= 2) {
    result.convergence = psrf_from_traces(result.traces, r_hat_threshold);
  } else {
    result.convergence.note = "single chain; scale reduction factor not computed";
    result.convergence.threshold = r_hat_threshold;
  }
  return result;
}

}  // namespace eqdisc
