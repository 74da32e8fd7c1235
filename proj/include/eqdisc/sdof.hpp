#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>

namespace eqdisc {

inline double signum(double x) { return static_cast<double>(x > 0.0) - static_cast<double>(x < 0.0); }

enum class NonlinearityType { None, CubicStiffness, QuadraticDamping, CoulombFriction };

std::string to_string(NonlinearityType t);
NonlinearityType nonlinearity_from_string(const std::string& s);

/// Single degree-of-freedom oscillator
///   m q'' + c q' + k q + g(q, q') = u
/// with g one of 0, k3 q^3, c2 q'|q'| or cF sgn(q').
struct SystemSpec {
  double mass = 1.0;
  double damping_c = 2.0;
  double stiffness_k = 1000.0;
  NonlinearityType nonlinearity = NonlinearityType::None;
  double coeff = 0.0;  // k3, c2 or cF depending on the nonlinearity

  double nonlinear_force(double x1, double x2) const;
  // (u - k x1 - c x2 - g(x1, x2)) / m
  double acceleration(double x1, double x2, double u) const;
  void validate() const;
  std::string name() const;

  static SystemSpec linear();
  static SystemSpec duffing();
  static SystemSpec quadratic_damping();
  static SystemSpec coulomb();
  static SystemSpec by_name(const std::string& name);
};

/// Band-limited Gaussian forcing: unit spectral magnitude on every DFT bin
/// inside the passband, uniformly random phases, then a final rescale to the
/// requested standard deviation. The DC bin is always excluded so the signal
/// has exactly zero sample mean.
struct ExcitationSpec {
  double passband_low_hz = 0.0;
  double passband_high_hz = 100.0;
  double std_dev = 50.0;
  std::uint64_t seed = 0;
};

struct Dataset {
  Eigen::VectorXd t;      // time stamps [s]
  Eigen::VectorXd x1;     // displacement
  Eigen::VectorXd x2;     // velocity
  Eigen::VectorXd x2dot;  // acceleration
  Eigen::VectorXd u;      // input force
  double fs = 0.0;        // sampling rate [Hz]

  Eigen::Index size() const { return t.size(); }
  void validate() const;
};

Eigen::VectorXd generate_excitation(const ExcitationSpec& spec, Eigen::Index n, double fs);

/// Fixed-step RK4 with the input held constant over each step. The
/// acceleration channel is evaluated algebraically from the equation of
/// motion at every sample, never by differencing the velocity. An optional
/// warm-up prefix is dropped from the returned record.
Dataset simulate(const SystemSpec& system, const Eigen::VectorXd& u, double fs,
                 double x1_0 = 0.0, double x2_0 = 0.0, Eigen::Index discard_prefix = 0);

/// Adds independent zero-mean Gaussian noise to each channel with standard
/// deviation noise_fraction times that channel's sample std.
Dataset add_noise(const Dataset& data, double noise_fraction, std::uint64_t seed);

/// Central finite differences (order 1 or 2) with second-order one-sided
/// stencils at both edges; output length equals input length.
Eigen::VectorXd differentiate(const Eigen::VectorXd& signal, double fs, int order);

/// Sample standard deviation (N-1 divisor).
double sample_std(const Eigen::VectorXd& v);

}  // namespace eqdisc
