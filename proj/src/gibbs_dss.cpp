#include "eqdisc/gibbs_dss.hpp"

#include <atomic>
#include <cmath>
#include <limits>
#include <mutex>
#include <thread>

#include "eqdisc/errors.hpp"

namespace eqdisc {

namespace {
constexpr double kLog2Pi = 1.8378770664093454835606594728112;

std::vector<int> active_indices(const std::vector<std::uint8_t>& z) {
  std::vector<int> active;
  for (std::size_t i = 0; i < z.size(); ++i) {
    if (z[i]) active.push_back(static_cast<int>(i));
  }
  return active;
}
}  // namespace

void DssPriorConfig::validate() const {
  if (!(a_v > 0.0 && b_v > 0.0 && a_p > 0.0 && b_p > 0.0 && a_sigma > 0.0 && b_sigma > 0.0)) {
    throw ConfigError("all six slab/inclusion/noise hyperparameters must be positive");
  }
}

namespace dss {

Eigen::VectorXd sample_theta_slab(const Eigen::VectorXd& y, const Eigen::MatrixXd& Dr, double v_s,
                                  double sigma2, const Eigen::MatrixXd& A0r_inv,
                                  RandomStream& rng) {
  const Eigen::Index r = Dr.cols();
  if (r == 0) return Eigen::VectorXd();
  Eigen::MatrixXd M = Dr.transpose() * Dr + A0r_inv / v_s;
  const auto llt = cholesky_with_jitter(M);
  const Eigen::VectorXd mu = llt.solve(Dr.transpose() * y);
  Eigen::VectorXd xi(r);
  for (Eigen::Index i = 0; i < r; ++i) xi[i] = rng.normal();
  return mu + std::sqrt(sigma2) * llt.matrixU().solve(xi);
}

InverseGammaParams sigma2_conditional(const Eigen::VectorXd& y, const Eigen::MatrixXd& Dr,
                                      double v_s, const Eigen::MatrixXd& A0r_inv,
                                      const DssPriorConfig& priors) {
  const double yty = y.squaredNorm();
  double quad = 0.0;
  if (Dr.cols() > 0) {
    Eigen::MatrixXd M = Dr.transpose() * Dr + A0r_inv / v_s;
    const auto llt = cholesky_with_jitter(M);
    const Eigen::VectorXd b = Dr.transpose() * y;
    quad = b.dot(llt.solve(b));  // mu' Sigma^-1 mu
  }
  const double scale = priors.b_sigma + 0.5 * (yty - quad);
  if (!(scale > 0.0)) {
    throw NumericalError("non-positive inverse-gamma scale in noise-variance update");
  }
  return {priors.a_sigma + 0.5 * static_cast<double>(y.size()), scale};
}

double sample_sigma2(const Eigen::VectorXd& y, const Eigen::MatrixXd& Dr, double v_s,
                     const Eigen::MatrixXd& A0r_inv, const DssPriorConfig& priors,
                     RandomStream& rng) {
  const auto p = sigma2_conditional(y, Dr, v_s, A0r_inv, priors);
  return rng.inverse_gamma(p.shape, p.scale);
}

InverseGammaParams vs_conditional(const Eigen::VectorXd& theta_r, const Eigen::MatrixXd& A0r_inv,
                                  double sigma2, int s_z, const DssPriorConfig& priors) {
  double quad = 0.0;
  if (theta_r.size() > 0) quad = theta_r.dot(A0r_inv * theta_r);
  return {priors.a_v + 0.5 * static_cast<double>(s_z), priors.b_v + quad / (2.0 * sigma2)};
}

double sample_vs(const Eigen::VectorXd& theta_r, const Eigen::MatrixXd& A0r_inv, double sigma2,
                 int s_z, const DssPriorConfig& priors, RandomStream& rng) {
  const auto p = vs_conditional(theta_r, A0r_inv, sigma2, s_z, priors);
  return rng.inverse_gamma(p.shape, p.scale);
}

BetaParams p0_conditional(int s_z, int P, const DssPriorConfig& priors) {
  return {priors.a_p + static_cast<double>(s_z), priors.b_p + static_cast<double>(P - s_z)};
}

double sample_p0(int s_z, int P, const DssPriorConfig& priors, RandomStream& rng) {
  const auto p = p0_conditional(s_z, P, priors);
  return rng.beta(p.a, p.b);
}

double inclusion_probability(double p0, double delta) {
  if (p0 <= 0.0) return 0.0;
  if (p0 >= 1.0) return 1.0;
  const double d = std::clamp(delta, -700.0, 700.0);
  return p0 / (p0 + (1.0 - p0) * std::exp(d));
}

double log_marginal_likelihood(const Eigen::VectorXd& y, const Eigen::MatrixXd& D,
                               const std::vector<std::uint8_t>& z, double v_s,
                               const DssPriorConfig& priors) {
  ScaledDesign design;
  design.Ds = D;
  design.ys = y;
  DssModel model(design, priors);
  return model.log_marginal(z, v_s);
}

}  // namespace dss

DssModel::DssModel(const ScaledDesign& design, DssPriorConfig priors) : priors_(priors) {
  priors_.validate();
  N_ = static_cast<int>(design.Ds.rows());
  P_ = static_cast<int>(design.Ds.cols());
  if (N_ < 2 || P_ < 1) throw ConfigError("design must have at least 2 rows and 1 column");
  if (design.ys.size() != design.Ds.rows()) throw ConfigError("design target length mismatch");
  G_.noalias() = design.Ds.transpose() * design.Ds;
  Dty_.noalias() = design.Ds.transpose() * design.ys;
  yty_ = design.ys.squaredNorm();

  // full-dictionary OLS residual variance, used as the sigma2 start
  Eigen::MatrixXd A = G_;
  A.diagonal().array() += 1e-12 * (G_.trace() / static_cast<double>(P_));
  const Eigen::VectorXd theta_ols = A.ldlt().solve(Dty_);
  double rss = yty_ - Dty_.dot(theta_ols);
  if (!(rss > 0.0)) rss = 1e-12 * yty_ + 1e-300;
  sigma2_ols_ = rss / static_cast<double>(N_);
}

void DssModel::gather(const std::vector<int>& active, Eigen::MatrixXd& Grr,
                      Eigen::VectorXd& br) const {
  const auto r = static_cast<Eigen::Index>(active.size());
  Grr.resize(r, r);
  br.resize(r);
  for (Eigen::Index i = 0; i < r; ++i) {
    br[i] = Dty_[active[static_cast<std::size_t>(i)]];
    for (Eigen::Index j = 0; j < r; ++j) {
      Grr(i, j) = G_(active[static_cast<std::size_t>(i)], active[static_cast<std::size_t>(j)]);
    }
  }
}

double DssModel::log_marginal(const std::vector<std::uint8_t>& z, double v_s) const {
  if (static_cast<int>(z.size()) != P_) throw ConfigError("indicator length mismatch");
  return log_marginal_active(active_indices(z), v_s);
}

double DssModel::log_marginal_active(const std::vector<int>& active, double v_s) const {
  const double a = priors_.a_sigma, b = priors_.b_sigma;
  const double n = static_cast<double>(N_);
  const double base =
      std::lgamma(a + 0.5 * n) - std::lgamma(a) + a * std::log(b) - 0.5 * n * kLog2Pi;
  const auto r = static_cast<Eigen::Index>(active.size());
  if (r == 0) return base - (a + 0.5 * n) * std::log(b + 0.5 * yty_);

  Eigen::MatrixXd Grr;
  Eigen::VectorXd br;
  gather(active, Grr, br);

  double logdet_A0inv = 0.0, logdet_M = 0.0, quad = 0.0;
  if (priors_.slab == SlabStructure::Independent) {
    Eigen::MatrixXd M = Grr;
    M.diagonal().array() += 1.0 / v_s;
    const auto llt = cholesky_with_jitter(M);
    logdet_M = 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
    quad = yty_ - br.dot(llt.solve(br));
  } else {
    // A0r^-1 = Grr/N, so M = (1 + 1/(N v_s)) Grr
    const auto llt = cholesky_with_jitter(Grr);
    const double logdet_G = 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
    const double c = 1.0 + 1.0 / (n * v_s);
    logdet_A0inv = logdet_G - static_cast<double>(r) * std::log(n);
    logdet_M = static_cast<double>(r) * std::log(c) + logdet_G;
    quad = yty_ - br.dot(llt.solve(br)) / c;
  }
  const double scale = b + 0.5 * quad;
  if (!(scale > 0.0)) {
    throw NumericalError("non-positive marginal-likelihood scale for the current active set");
  }
  return base - 0.5 * static_cast<double>(r) * std::log(v_s) + 0.5 * logdet_A0inv -
         0.5 * logdet_M - (a + 0.5 * n) * std::log(scale);
}

std::vector<int> greedy_forward_selection(const Eigen::MatrixXd& G, const Eigen::VectorXd& Dty,
                                          double yty, int target) {
  const auto P = static_cast<int>(G.rows());
  std::vector<int> active;
  std::vector<char> in(static_cast<std::size_t>(P), 0);
  for (int step = 0; step < target; ++step) {
    int best = -1;
    double best_rss = std::numeric_limits<double>::infinity();
    std::vector<int> cand = active;
    cand.push_back(0);
    for (int j = 0; j < P; ++j) {
      if (in[static_cast<std::size_t>(j)]) continue;
      cand.back() = j;
      const auto r = static_cast<Eigen::Index>(cand.size());
      Eigen::MatrixXd Grr(r, r);
      Eigen::VectorXd br(r);
      for (Eigen::Index ii = 0; ii < r; ++ii) {
        br[ii] = Dty[cand[static_cast<std::size_t>(ii)]];
        for (Eigen::Index jj = 0; jj < r; ++jj) {
          Grr(ii, jj) = G(cand[static_cast<std::size_t>(ii)], cand[static_cast<std::size_t>(jj)]);
        }
      }
      double rss;
      try {
        rss = yty - br.dot(cholesky_with_jitter(Grr).solve(br));
      } catch (const NumericalError&) {
        continue;  // collinear candidate
      }
      if (rss < best_rss) {
        best_rss = rss;
        best = j;
      }
    }
    if (best < 0) break;
    active.push_back(best);
    in[static_cast<std::size_t>(best)] = 1;
  }
  std::sort(active.begin(), active.end());
  return active;
}

GibbsState DssModel::init_state(double p0_init, double vs_init, RandomStream& rng,
                                bool jitter_hyperparams) const {
  GibbsState s;
  s.p0 = p0_init;
  s.v_s = vs_init;
  s.sigma2 = sigma2_ols_;
  if (jitter_hyperparams) {
    s.p0 = std::clamp(s.p0 * std::exp(0.1 * rng.normal()), 0.01, 0.5);
    s.v_s *= std::exp(0.1 * rng.normal());
    s.sigma2 *= std::exp(0.1 * rng.normal());
  }

  const int target = static_cast<int>(std::lround(s.p0 * static_cast<double>(P_)));
  const std::vector<int> active = greedy_forward_selection(G_, Dty_, yty_, target);

  s.z.assign(static_cast<std::size_t>(P_), 0);
  for (int j : active) s.z[static_cast<std::size_t>(j)] = 1;
  s.theta = Eigen::VectorXd::Zero(P_);
  if (!active.empty()) {
    Eigen::MatrixXd Grr;
    Eigen::VectorXd br;
    gather(active, Grr, br);
    Eigen::MatrixXd M = Grr;
    if (priors_.slab == SlabStructure::Independent) {
      M.diagonal().array() += 1.0 / s.v_s;
    } else {
      M *= 1.0 + 1.0 / (static_cast<double>(N_) * s.v_s);
    }
    const auto llt = cholesky_with_jitter(M);
    const Eigen::VectorXd mu = llt.solve(br);
    Eigen::VectorXd xi(static_cast<Eigen::Index>(active.size()));
    for (Eigen::Index i = 0; i < xi.size(); ++i) xi[i] = rng.normal();
    const Eigen::VectorXd theta_r = mu + std::sqrt(s.sigma2) * llt.matrixU().solve(xi);
    for (std::size_t i = 0; i < active.size(); ++i) {
      s.theta[active[i]] = theta_r[static_cast<Eigen::Index>(i)];
    }
  }
  return s;
}

ChainTrace DssModel::run_chain(GibbsState state, int n_iter, int n_burn, int chain_id,
                               RandomStream& rng) const {
  if (n_iter <= n_burn) throw ConfigError("n_iter must exceed n_burn");
  if (static_cast<int>(state.z.size()) != P_ || state.theta.size() != P_) {
    throw ConfigError("initial state does not match the design dimension");
  }

  ChainTrace trace;
  const int keep = n_iter - n_burn;
  trace.theta.resize(keep, P_);
  trace.z.resize(keep, P_);
  trace.sigma2.resize(keep);
  trace.v_s.resize(keep, 1);
  trace.p0.resize(keep);
  trace.chain_id = chain_id;
  trace.n_iter = n_iter;
  trace.n_burn = n_burn;

  Eigen::MatrixXd Grr;
  Eigen::VectorXd br;
  int consecutive_failures = 0;

  for (int iter = 0; iter < n_iter; ++iter) {
    try {
      // (a) weights: spike components pinned at zero, slab block Gaussian
      std::vector<int> active = active_indices(state.z);
      const auto r = static_cast<Eigen::Index>(active.size());
      state.theta.setZero();
      Eigen::VectorXd mu;
      Eigen::VectorXd theta_r;
      if (r > 0) {
        gather(active, Grr, br);
        Eigen::MatrixXd M = Grr;
        if (priors_.slab == SlabStructure::Independent) {
          M.diagonal().array() += 1.0 / state.v_s;
        } else {
          M *= 1.0 + 1.0 / (static_cast<double>(N_) * state.v_s);
        }
        const auto llt = cholesky_with_jitter(M);
        mu = llt.solve(br);
        Eigen::VectorXd xi(r);
        for (Eigen::Index i = 0; i < r; ++i) xi[i] = rng.normal();
        theta_r = mu + std::sqrt(state.sigma2) * llt.matrixU().solve(xi);
        for (Eigen::Index i = 0; i < r; ++i) {
          state.theta[active[static_cast<std::size_t>(i)]] = theta_r[i];
        }
      }

      // (b) noise variance, weights integrated out
      {
        const double quad = r > 0 ? br.dot(mu) : 0.0;
        const double scale = priors_.b_sigma + 0.5 * (yty_ - quad);
        if (!(scale > 0.0)) throw NumericalError("non-positive noise-variance scale");
        state.sigma2 =
            rng.inverse_gamma(priors_.a_sigma + 0.5 * static_cast<double>(N_), scale);
      }

      // (c) slab variance
      {
        double quad_v = 0.0;
        if (r > 0) {
          if (priors_.slab == SlabStructure::Independent) {
            quad_v = theta_r.squaredNorm();
          } else {
            quad_v = theta_r.dot(Grr * theta_r) / static_cast<double>(N_);
          }
        }
        state.v_s = rng.inverse_gamma(priors_.a_v + 0.5 * static_cast<double>(r),
                                      priors_.b_v + quad_v / (2.0 * state.sigma2));
      }

      // (d) inclusion probability
      {
        const int s_z = static_cast<int>(r);
        state.p0 = rng.beta(priors_.a_p + static_cast<double>(s_z),
                            priors_.b_p + static_cast<double>(P_ - s_z));
      }

      // (e) indicators, fresh random order each sweep
      {
        const std::vector<int> order = rng.permutation(P_);
        for (int i : order) {
          std::vector<std::uint8_t> z0 = state.z;
          z0[static_cast<std::size_t>(i)] = 0;
          std::vector<std::uint8_t> z1 = state.z;
          z1[static_cast<std::size_t>(i)] = 1;
          const double lm0 = log_marginal_active(active_indices(z0), state.v_s);
          const double lm1 = log_marginal_active(active_indices(z1), state.v_s);
          const double xi = dss::inclusion_probability(state.p0, lm0 - lm1);
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
      // abandon the sweep; the state keeps its last committed draws
    }

    if (iter >= n_burn) {
      const int row = iter - n_burn;
      for (int j = 0; j < P_; ++j) {
        const bool on = state.z[static_cast<std::size_t>(j)] != 0;
        trace.theta(row, j) = on ? state.theta[j] : 0.0;
        trace.z(row, j) = on ? 1 : 0;
      }
      trace.sigma2[row] = state.sigma2;
      trace.v_s(row, 0) = state.v_s;
      trace.p0[row] = state.p0;
    }
  }
  return trace;
}

std::vector<ChainTrace> run_chains_dss(const ScaledDesign& design, const DssPriorConfig& priors,
                                       int n_chains, int n_iter, int n_burn, double p0_init,
                                       double vs_init, std::uint64_t master_seed, int workers) {
  if (n_chains < 1) throw ConfigError("need at least one chain");
  const DssModel model(design, priors);
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
        const GibbsState init = model.init_state(p0_init, vs_init, rng, c > 0);
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
