#pragma once

#include <string>

#include "eqdisc/sdof.hpp"

namespace eqdisc {

/// Writes `t,x1,x2,x2dot,u` rows with shortest round-trip double formatting.
void write_dataset_csv(const std::string& path, const Dataset& data);

/// A CSV load where any subset of the canonical columns may be present.
struct LoadedDataset {
  Eigen::VectorXd t, x1, x2, x2dot, u;  // empty when the column is absent
  bool has_t = false, has_x1 = false, has_x2 = false, has_x2dot = false, has_u = false;
  double fs = 0.0;  // inferred from t when present
  Eigen::Index rows = 0;
};

LoadedDataset load_dataset_csv(const std::string& path);

/// Turns a partial load into a full Dataset. With `reconstruct`, a missing
/// velocity/acceleration channel is rebuilt by numerical differentiation of
/// the displacement; otherwise missing channels raise a ConfigError naming
/// them. Time stamps and displacement and input force are always required.
Dataset complete_dataset(const LoadedDataset& loaded, bool reconstruct);

}  // namespace eqdisc
