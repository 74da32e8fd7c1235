#include "eqdisc/gibbs_css.hpp"

#include <atomic>
#include <cmath>
#include <mutex>
#include <thread>

#include "eqdisc/errors.hpp"
#include "eqdisc/gibbs_dss.hpp"

namespace eqdisc {

void CssPriorConfig::validate() const {
  if (!(v0 > 0.0) || !(v1 > 0.0)) throw ConfigError("v0 and v1 must be positive");
  if (v1 / v0 < 10.0) {
    throw ConfigError("slab/spike variance ratio v1/v0 must be at least 10");
  }
  if (!(a_v > 0.0 && b_v > 0.0 && a_p > 0.0 && b_p > 0.0 && a_sigma > 0.0 && b_sigma > 0.0)) {
    throw ConfigError("all six slab/inclusion/noise hyperparameters must be positive");
  }
}

namespace css {

Eigen::VectorXd sample_theta_full(const Eigen::VectorXd& y, const Eigen::MatrixXd& D,
                                  const Eigen::VectorXd& V_diag, double sigma2,
                                  RandomStream& rng) {
  const Eigen::Index P = D.cols();
  if ((V_diag.array() <= 0.0).any()) throw NumericalError("prior variance matrix must be positive");
  Eigen::MatrixXd M = D.transpose() * D;
  M.diagonal() += V_diag.cwiseInverse();
  const auto llt = cholesky_with_jitter(M);
  const Eigen::VectorXd mu = llt.solve(D.transpose() * y);
  Eigen::VectorXd xi(P);
  for (Eigen::Index i = 0; i < P; ++i) xi[i] = rng.normal();
  return mu + std::sqrt(sigma2) * llt.matrixU().solve(xi);
}

InverseGammaParams sigma2_conditional(const Eigen::VectorXd& y, const Eigen::MatrixXd& D,
                                      const Eigen::VectorXd& theta, const Eigen::VectorXd& V_diag,
                                      const CssPriorConfig& priors) {
  const double rss = (y - D * theta).squaredNorm();
  const double prior_quad = (theta.array().square() / V_diag.array()).sum();
  const double scale = priors.b_sigma + 0.5 * (rss + prior_quad);
  if (!(scale > 0.0)) throw NumericalError("non-positive noise-variance scale");
  return {priors.a_sigma + 0.5 * static_cast<double>(y.size() + theta.size()), scale};
}

InverseGammaParams vs_conditional(double theta_i, std::uint8_t z_i, double sigma2,
                                  const CssPriorConfig& priors) {
  const double w = z_i ? priors.v1 : priors.v0;
  double inc = theta_i * theta_i / (2.0 * sigma2 * w);
  if (priors.half_quadratic_vs_scale) inc *= 0.5;
  return {priors.a_v + 0.5, priors.b_v + inc};
}

double inclusion_probability(double theta_i, double v_s_i, double sigma2, double p0,
                             const CssPriorConfig& priors) {
  if (p0 <= 0.0) return 0.0;
  if (p0 >= 1.0) return 1.0;
  // log p(theta | z=0) - log p(theta | z=1)
  const double delta = 0.5 * std::log(priors.v1 / priors.v0) +
                       theta_i * theta_i / (2.0 * sigma2 * v_s_i) *
                           (1.0 / priors.v1 - 1.0 / priors.v0);
  const double d = std::clamp(delta, -700.0, 700.0);
  return p0 / (p0 + (1.0 - p0) * std::exp(d));
}

}  // namespace css

CssModel::CssModel(const ScaledDesign& design, CssPriorConfig priors) : priors_(priors) {
  priors_.validate();
  N_ = static_cast<int>(design.Ds.rows());
  P_ = static_cast<int>(design.Ds.cols());
  if (N_ < 2 || P_ < 1) throw ConfigError("design must have at least 2 rows and 1 column");
  if (design.ys.size() != design.Ds.rows()) throw ConfigError("design target length mismatch");
  Ds_ = design.Ds;
  ys_ = design.ys;
  G_.noalias() = Ds_.transpose() * Ds_;
  Dty_.noalias() = Ds_.transpose() * ys_;
  yty_ = ys_.squaredNorm();

  Eigen::MatrixXd A = G_;
  A.diagonal().array() += 1e-12 * (G_.trace() / static_cast<double>(P_));
  const Eigen::VectorXd theta_ols = A.ldlt().solve(Dty_);
  double rss = yty_ - Dty_.dot(theta_ols);
  if (!(rss > 0.0)) rss = 1e-12 * yty_ + 1e-300;
  sigma2_ols_ = rss / static_cast<double>(N_);
}

CssState CssModel::init_state(double p0_init, double vs_init, RandomStream& rng,
                              bool jitter_hyperparams) const {
  CssState s;
  s.p0 = p0_init;
  double vs = vs_init;
  s.sigma2 = sigma2_ols_;
  if (jitter_hyperparams) {
    s.p0 = std::clamp(s.p0 * std::exp(0.1 * rng.normal()), 0.01, 0.5);
    vs *= std::exp(0.1 * rng.normal());
    s.sigma2 *= std::exp(0.1 * rng.normal());
  }
  s.v_s = Eigen::VectorXd::Constant(P_, vs);

  const int target = static_cast<int>(std::lround(s.p0 * static_cast<double>(P_)));
  const std::vector<int> active = greedy_forward_selection(G_, Dty_, yty_, target);
  s.z.assign(static_cast<std::size_t>(P_), 0);
  for (int j : active) s.z[static_cast<std::size_t>(j)] = 1;

  Eigen::VectorXd V(P_);
  for (int i = 0; i < P_; ++i) {
    V[i] = s.v_s[i] * (s.z[static_cast<std::size_t>(i)] ? priors_.v1 : priors_.v0);
  }
  s.theta = css::sample_theta_full(ys_, Ds_, V, s.sigma2, rng);
  return s;
}

ChainTrace CssModel::run_chain(CssState state, int n_iter, int n_burn, int chain_id,
                               RandomStream& rng) const {
  if (n_iter <= n_burn) throw ConfigError("n_iter must exceed n_burn");
  if (static_cast<int>(state.z.size()) != P_ || state.theta.size() != P_ ||
      state.v_s.size() != P_) {
    throw ConfigError("initial state does not match the design dimension");
  }

  ChainTrace trace;
  const int keep = n_iter - n_burn;
  trace.theta.resize(keep, P_);
  trace.z.resize(keep, P_);
  trace.sigma2.resize(keep);
  trace.v_s.resize(keep, P_);
  trace.p0.resize(keep);
  trace.chain_id = chain_id;
  trace.n_iter = n_iter;
  trace.n_burn = n_burn;

  Eigen::VectorXd V(P_);
  int consecutive_failures = 0;

  for (int iter = 0; iter < n_iter; ++iter) {
    try {
      for (int i = 0; i < P_; ++i) {
        V[i] = state.v_s[i] * (state.z[static_cast<std::size_t>(i)] ? priors_.v1 : priors_.v0);
      }

      // (a) weights
      state.theta = css::sample_theta_full(ys_, Ds_, V, state.sigma2, rng);

      // (b) noise variance, conditioned on the weights
      {
        const auto p = css::sigma2_conditional(ys_, Ds_, state.theta, V, priors_);
        state.sigma2 = rng.inverse_gamma(p.shape, p.scale);
      }

      // (c) weight-specific slab variances
      for (int i = 0; i < P_; ++i) {
        const auto p = css::vs_conditional(state.theta[i], state.z[static_cast<std::size_t>(i)],
                                           state.sigma2, priors_);
        state.v_s[i] = rng.inverse_gamma(p.shape, p.scale);
      }

      // (d) inclusion probability
      {
        int s_z = 0;
        for (auto zi : state.z) s_z += zi;
        state.p0 = rng.beta(priors_.a_p + static_cast<double>(s_z),
                            priors_.b_p + static_cast<double>(P_ - s_z));
      }

      // (e) indicators from the spike/slab density ratio
      {
        const std::vector<int> order = rng.permutation(P_);
        for (int i : order) {
          const double xi = css::inclusion_probability(state.theta[i], state.v_s[i], state.sigma2,
                                                       state.p0, priors_);
          state.z[static_cast<std::size_t>(i)] = rng.bernoulli(xi) ? 1 : 0;
        }
      }

      consecutive_failures = 0;
    } catch (const NumericalError&) {
      if (++consecutive_failures > 10) {
        throw NumericalError("chain " + std::to_string(chain_id) + " aborted after " +
                             std::to_string(consecutive_failures) +
                             " consecutive conditioning failures at iteration " +
                             std::to_string(iter + 1));
      }
    }

    if (iter >= n_burn) {
      const int row = iter - n_burn;
      trace.theta.row(row) = state.theta.transpose();
      for (int j = 0; j < P_; ++j) trace.z(row, j) = state.z[static_cast<std::size_t>(j)];
      trace.sigma2[row] = state.sigma2;
      trace.v_s.row(row) = state.v_s.transpose();
      trace.p0[row] = state.p0;
    }
  }
  return trace;
}

std::vector<ChainTrace> run_chains_css(const ScaledDesign& design, const CssPriorConfig& priors,
                                       int n_chains, int n_iter, int n_burn, double p0_init,
                                       double vs_init, std::uint64_t master_seed, int workers) {
  if (n_chains < 1) throw ConfigError("need at least one chain");
  const CssModel model(design, priors);
  std::vector<ChainTrace> traces(static_cast<std::size_t>(n_chains));

  if (workers <= 0) workers = static_cast<int>(std::thread::hardware_concurrency());
  workers = std::max(1, std::min(workers, n_chains));

  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto body = [&] {
    for (;;) {
      const int c = next.fetch_add(1);
      if (c >= n_chains) return;
      try {
        const std::uint64_t seed = derive_seed(master_seed, static_cast<std::uint64_t>(c));
        RandomStream rng(seed);
        const CssState init = model.init_state(p0_init, vs_init, rng, c > 0);
        traces[static_cast<std::size_t>(c)] = model.run_chain(init, n_iter, n_burn, c, rng);
        traces[static_cast<std::size_t>(c)].seed = seed;
      } catch (...) {
        std::scoped_lock lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    }
  };

  if (workers == 1) {
    body();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) pool.emplace_back(body);
    for (auto& t : pool) t.join();
  }
  if (error) std::rethrow_exception(error);
  return traces;
}

}  // namespace eqdisc
