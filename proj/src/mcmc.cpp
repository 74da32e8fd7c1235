#include "eqdisc/mcmc.hpp"

#include <charconv>
#include <fstream>

#include "eqdisc/errors.hpp"

namespace eqdisc {

Eigen::LLT<Eigen::MatrixXd> cholesky_with_jitter(const Eigen::MatrixXd& M) {
  const Eigen::Index r = M.rows();
  const double base = M.trace() / static_cast<double>(r);
  double factor = 0.0;
  for (;;) {
    Eigen::MatrixXd A = M;
    if (factor > 0.0) A.diagonal().array() += factor * base;
    Eigen::LLT<Eigen::MatrixXd> llt(A);
    if (llt.info() == Eigen::Success) return llt;
    if (factor == 0.0) {
      factor = 1e-10;
    } else if (factor < 1e-6) {
      factor *= 10.0;
    } else {
      throw NumericalError("Cholesky failed even with jitter 1e-6*trace/r");
    }
  }
}

void write_chain_trace_csv(const std::string& path, const ChainTrace& trace) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot open '" + path + "' for writing");
  const Eigen::Index P = trace.params();
  const Eigen::Index vs_cols = trace.v_s.cols();

  f << "iteration";
  for (Eigen::Index j = 0; j < P; ++j) f << ",theta_" << (j + 1);
  for (Eigen::Index j = 0; j < P; ++j) f << ",z_" << (j + 1);
  f << ",sigma2";
  if (vs_cols == 1) {
    f << ",v_s";
  } else {
    for (Eigen::Index j = 0; j < vs_cols; ++j) f << ",v_s_" << (j + 1);
  }
  f << ",p0\n";

  char buf[32];
  auto put = [&](double v) {
    f << ',';
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    f.write(buf, res.ptr - buf);
  };
  for (Eigen::Index i = 0; i < trace.samples(); ++i) {
    f << (trace.n_burn + static_cast<int>(i) + 1);
    for (Eigen::Index j = 0; j < P; ++j) put(trace.theta(i, j));
    for (Eigen::Index j = 0; j < P; ++j) f << ',' << static_cast<int>(trace.z(i, j));
    put(trace.sigma2[i]);
    for (Eigen::Index j = 0; j < vs_cols; ++j) put(trace.v_s(i, j));
    put(trace.p0[i]);
    f << '\n';
  }
}

}  // namespace eqdisc
