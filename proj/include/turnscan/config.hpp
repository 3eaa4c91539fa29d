#pragma once

#include <string>
#include <vector>

#include "turnscan/filters.hpp"
#include "turnscan/mesh.hpp"
#include "turnscan/registration.hpp"
#include "turnscan/scansim.hpp"
#include "turnscan/smooth.hpp"

namespace turnscan {

enum class Mesher { gp, gt };

/// Every tunable of the reconstruction pipeline and of the scan simulator.
struct PipelineConfig {
  AxisRange crop;
  double leaf_size = 0.005;
  std::size_t sor_k = 50;
  double sor_stddev = 0.5;
  std::size_t normal_k = 20;
  IcpParams icp = [] {
    IcpParams p;
    p.max_iterations = 200;
    p.fitness_epsilon = 1e-9;
    p.refine_correspondence_distance = 0.005;
    return p;
  }();
  AlignStrategy align_strategy = AlignStrategy::incremental_model;
  bool mls = true;
  bool mls_pre_align = false;
  MlsParams mls_params;
  Mesher mesher = Mesher::gp;
  GreedyParams greedy;
  GridParams grid;
  LaplacianParams laplacian;
  std::size_t hole_max_boundary = 1000;
  std::string shape = "notched-cube";
  ScanConfig scan;
  Vec3 camera_eye = Vec3(0.0, -0.35, -0.9);
};

/// `key = value` lines; `#` starts a comment. Throws ConfigError naming the
/// key for unknown keys, unparsable values and out-of-range values.
PipelineConfig parse_config(const std::string& text);
PipelineConfig parse_config(const std::string& text, PipelineConfig base);

/// Sets one key from its textual value, with the same checks as parse_config.
void set_config_value(PipelineConfig& config, const std::string& key, const std::string& value);

/// Full effective configuration in parse_config syntax, one key per line.
std::string format_config(const PipelineConfig& config);

/// All recognised keys, in format_config order.
std::vector<std::string> config_keys();

}  // namespace turnscan
