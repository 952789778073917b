#pragma once

#include <string>

#include "coral/harness.hpp"

namespace coral {

/// Everything a run needs; assembled from a profile, an optional config
/// file and CLI overrides, then validated as a whole before any
/// computation starts.
struct RunConfig {
  EntropyParams entropy;
  NdtParams ndt;
  ErrorSpec error;
  Method method = Method::Coral;
  Protocol protocol = Protocol::Separate5Fold;
  double downsample_cell = 0.0;  // applied at load time; 0 disables
  std::size_t folds = 5;
  std::string out_dir = "out";

  MethodParams method_params() const { return {entropy, ndt}; }
  void validate() const;  // throws Error(InvalidParameter)
};

/// Shipped parameter profiles:
///   "eth":            fixed radius 0.3, e_reject 0.2, epsilon 0,
///                     voxel 0.6, load-time downsample 0.08.
///   "spinning-lidar": r 0.2..1.0, alpha 0.92 deg, e_reject 0.2,
///                     epsilon 1e-8, voxel 0.4.
/// Throws Error(InvalidParameter) for an unknown name.
RunConfig default_profile(const std::string& name);

/// Flat key=value text with [section] headers; '#' comments. Unknown
/// sections or keys are rejected, so a config either fully validates or
/// the run aborts. Recognized sections: entropy, ndt, error, run.
RunConfig load_config(const std::string& path, RunConfig base);

/// One section.key=value override, same keys as the config file.
void apply_config_value(RunConfig& config, const std::string& section,
                        const std::string& key, const std::string& value);

/// Stable one-line parameter record embedded in reports.
std::string describe(const RunConfig& config);

}  // namespace coral
