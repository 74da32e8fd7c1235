#include "eqdisc/sdof.hpp"

#include <cmath>

#include "eqdisc/errors.hpp"
#include "eqdisc/rng.hpp"

namespace eqdisc {

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;
}

std::string to_string(NonlinearityType t) {
  switch (t) {
    case NonlinearityType::None: return "none";
    case NonlinearityType::CubicStiffness: return "cubic_stiffness";
    case NonlinearityType::QuadraticDamping: return "quadratic_damping";
    case NonlinearityType::CoulombFriction: return "coulomb_friction";
  }
  return "none";
}

NonlinearityType nonlinearity_from_string(const std::string& s) {
  if (s == "none") return NonlinearityType::None;
  if (s == "cubic_stiffness") return NonlinearityType::CubicStiffness;
  if (s == "quadratic_damping") return NonlinearityType::QuadraticDamping;
  if (s == "coulomb_friction") return NonlinearityType::CoulombFriction;
  throw ConfigError("unknown nonlinearity '" + s +
                    "'; legal values: none, cubic_stiffness, quadratic_damping, coulomb_friction");
}

double SystemSpec::nonlinear_force(double x1, double x2) const {
  switch (nonlinearity) {
    case NonlinearityType::None: return 0.0;
    case NonlinearityType::CubicStiffness: return coeff * x1 * x1 * x1;
    case NonlinearityType::QuadraticDamping: return coeff * x2 * std::abs(x2);
    case NonlinearityType::CoulombFriction: return coeff * signum(x2);
  }
  return 0.0;
}

double SystemSpec::acceleration(double x1, double x2, double u) const {
  return (u - stiffness_k * x1 - damping_c * x2 - nonlinear_force(x1, x2)) / mass;
}

void SystemSpec::validate() const {
  if (!(mass > 0.0)) throw ConfigError("system mass must be positive");
  if (!(stiffness_k > 0.0)) throw ConfigError("system stiffness must be positive");
  if (damping_c < 0.0) throw ConfigError("system damping must be non-negative");
  if (coeff < 0.0) throw ConfigError("nonlinearity coefficient must be non-negative");
}

std::string SystemSpec::name() const {
  switch (nonlinearity) {
    case NonlinearityType::None: return "linear";
    case NonlinearityType::CubicStiffness: return "duffing";
    case NonlinearityType::QuadraticDamping: return "quadratic_damping";
    case NonlinearityType::CoulombFriction: return "coulomb";
  }
  return "linear";
}

SystemSpec SystemSpec::linear() { return SystemSpec{}; }

SystemSpec SystemSpec::duffing() {
  SystemSpec s;
  s.nonlinearity = NonlinearityType::CubicStiffness;
  s.coeff = 1e5;
  return s;
}

SystemSpec SystemSpec::quadratic_damping() {
  SystemSpec s;
  s.nonlinearity = NonlinearityType::QuadraticDamping;
  s.coeff = 2.0;
  return s;
}

SystemSpec SystemSpec::coulomb() {
  SystemSpec s;
  s.nonlinearity = NonlinearityType::CoulombFriction;
  s.coeff = 1.0;
  return s;
}

SystemSpec SystemSpec::by_name(const std::string& name) {
  if (name == "linear") return linear();
  if (name == "duffing") return duffing();
  if (name == "quadratic_damping") return quadratic_damping();
  if (name == "coulomb") return coulomb();
  throw ConfigError("unknown system '" + name +
                    "'; legal values: linear, duffing, quadratic_damping, coulomb");
}

void Dataset::validate() const {
  const Eigen::Index n = t.size();
  if (n < 2) throw ConfigError("dataset needs at least 2 samples");
  if (x1.size() != n || x2.size() != n || x2dot.size() != n || u.size() != n) {
    throw ConfigError("dataset channels have mismatched lengths");
  }
  if (!(fs > 0.0)) throw ConfigError("dataset sampling rate must be positive");
  const double h = 1.0 / fs;
  for (Eigen::Index i = 0; i + 1 < n; ++i) {
    const double dt = t[i + 1] - t[i];
    if (!(dt > 0.0) || std::abs(dt - h) > 1e-9 * (h + std::abs(t[i]))) {
      throw ConfigError("dataset time stamps are not a uniform 1/fs grid");
    }
  }
}

double sample_std(const Eigen::VectorXd& v) {
  const Eigen::Index n = v.size();
  if (n < 2) return 0.0;
  const double mean = v.mean();
  const double ss = (v.array() - mean).square().sum();
  return std::sqrt(ss / static_cast<double>(n - 1));
}

Eigen::VectorXd generate_excitation(const ExcitationSpec& spec, Eigen::Index n, double fs) {
  if (n < 2) throw ConfigError("excitation length must be at least 2");
  if (!(fs > 0.0)) throw ConfigError("sampling rate must be positive");
  if (!(spec.std_dev > 0.0)) throw ConfigError("excitation std must be positive");
  if (spec.passband_low_hz < 0.0 || !(spec.passband_low_hz < spec.passband_high_hz) ||
      spec.passband_high_hz > fs / 2.0 + 1e-12) {
    throw ConfigError("invalid passband: need 0 <= low < high <= fs/2");
  }

  const double df = fs / static_cast<double>(n);
  Eigen::Index k_lo = static_cast<Eigen::Index>(std::ceil(spec.passband_low_hz / df - 1e-9));
  if (k_lo < 1) k_lo = 1;  // skip DC: zero-mean by construction
  Eigen::Index k_hi = static_cast<Eigen::Index>(std::floor(spec.passband_high_hz / df + 1e-9));
  if (k_hi > n / 2) k_hi = n / 2;
  if (k_hi < k_lo) throw ConfigError("passband contains no DFT bins for this length");

  Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
  RandomStream rng(spec.seed);
  for (Eigen::Index k = k_lo; k <= k_hi; ++k) {
    const double phase = kTwoPi * rng.uniform();
    const double w = kTwoPi * static_cast<double>(k) / static_cast<double>(n);
    // accumulate cos(w j + phase) by complex rotation
    double re = std::cos(phase), im = std::sin(phase);
    const double cr = std::cos(w), ci = std::sin(w);
    for (Eigen::Index j = 0; j < n; ++j) {
      x[j] += re;
      const double nre = re * cr - im * ci;
      im = re * ci + im * cr;
      re = nre;
    }
  }

  const double s = sample_std(x);
  if (!(s > 0.0)) throw NumericalError("degenerate excitation realisation");
  x *= spec.std_dev / s;
  return x;
}

Dataset simulate(const SystemSpec& system, const Eigen::VectorXd& u, double fs,
                 double x1_0, double x2_0, Eigen::Index discard_prefix) {
  system.validate();
  if (!(fs > 0.0)) throw ConfigError("sampling rate must be positive");
  const Eigen::Index n = u.size();
  if (n < 2) throw ConfigError("input force must have at least 2 samples");
  if (!u.allFinite()) throw ConfigError("input force contains non-finite values");
  if (discard_prefix < 0 || discard_prefix > n - 2) {
    throw ConfigError("warm-up prefix leaves fewer than 2 samples");
  }

  const double h = 1.0 / fs;
  Eigen::VectorXd x1(n), x2(n);
  x1[0] = x1_0;
  x2[0] = x2_0;
  for (Eigen::Index j = 0; j + 1 < n; ++j) {
    const double uj = u[j];  // zero-order hold across the step
    const double a1 = x1[j], a2 = x2[j];

    const double k1_1 = a2;
    const double k1_2 = system.acceleration(a1, a2, uj);
    const double b1 = a1 + 0.5 * h * k1_1, b2 = a2 + 0.5 * h * k1_2;

    const double k2_1 = b2;
    const double k2_2 = system.acceleration(b1, b2, uj);
    const double c1 = a1 + 0.5 * h * k2_1, c2 = a2 + 0.5 * h * k2_2;

    const double k3_1 = c2;
    const double k3_2 = system.acceleration(c1, c2, uj);
    const double d1 = a1 + h * k3_1, d2 = a2 + h * k3_2;

    const double k4_1 = d2;
    const double k4_2 = system.acceleration(d1, d2, uj);

    x1[j + 1] = a1 + h / 6.0 * (k1_1 + 2.0 * (k2_1 + k3_1) + k4_1);
    x2[j + 1] = a2 + h / 6.0 * (k1_2 + 2.0 * (k2_2 + k3_2) + k4_2);
    if (!std::isfinite(x1[j + 1]) || !std::isfinite(x2[j + 1])) {
      throw IntegrationDivergence(static_cast<std::size_t>(j + 1));
    }
  }

  const Eigen::Index m = n - discard_prefix;
  Dataset out;
  out.fs = fs;
  out.t.resize(m);
  out.x1 = x1.tail(m);
  out.x2 = x2.tail(m);
  out.u = u.tail(m);
  out.x2dot.resize(m);
  for (Eigen::Index j = 0; j < m; ++j) {
    out.t[j] = static_cast<double>(j) * h;
    out.x2dot[j] = system.acceleration(out.x1[j], out.x2[j], out.u[j]);
  }
  return out;
}

Dataset add_noise(const Dataset& data, double noise_fraction, std::uint64_t seed) {
  if (noise_fraction < 0.0) throw ConfigError("noise fraction must be non-negative");
  Dataset out = data;
  if (noise_fraction == 0.0) return out;
  RandomStream rng(seed);
  auto corrupt = [&](Eigen::VectorXd& v) {
    const double s = noise_fraction * sample_std(v);
    for (Eigen::Index i = 0; i < v.size(); ++i) v[i] += s * rng.normal();
  };
  corrupt(out.x1);
  corrupt(out.x2);
  corrupt(out.x2dot);
  corrupt(out.u);
  return out;
}

Eigen::VectorXd differentiate(const Eigen::VectorXd& signal, double fs, int order) {
  const Eigen::Index n = signal.size();
  if (n < 5) throw ConfigError("differentiate needs at least 5 samples");
  if (!(fs > 0.0)) throw ConfigError("sampling rate must be positive");
  if (order != 1 && order != 2) throw ConfigError("derivative order must be 1 or 2");

  const double h = 1.0 / fs;
  Eigen::VectorXd out(n);
  if (order == 1) {
    for (Eigen::Index i = 1; i + 1 < n; ++i) out[i] = (signal[i + 1] - signal[i - 1]) / (2.0 * h);
    out[0] = (-3.0 * signal[0] + 4.0 * signal[1] - signal[2]) / (2.0 * h);
    out[n - 1] = (3.0 * signal[n - 1] - 4.0 * signal[n - 2] + signal[n - 3]) / (2.0 * h);
  } else {
    const double h2 = h * h;
    for (Eigen::Index i = 1; i + 1 < n; ++i) {
      out[i] = (signal[i + 1] - 2.0 * signal[i] + signal[i - 1]) / h2;
    }
    out[0] = (2.0 * signal[0] - 5.0 * signal[1] + 4.0 * signal[2] - signal[3]) / h2;
    out[n - 1] =
        (2.0 * signal[n - 1] - 5.0 * signal[n - 2] + 4.0 * signal[n - 3] - signal[n - 4]) / h2;
  }
  return out;
}

}  // namespace eqdisc
