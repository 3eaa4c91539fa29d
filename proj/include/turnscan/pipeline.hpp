#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "turnscan/config.hpp"
#include "turnscan/error.hpp"

namespace turnscan {

/// A pipeline stage failed; what() reads "<stage>: <cause>".
class StageError : public Error {
 public:
  StageError(const std::string& stage, const std::string& cause) : Error(stage + ": " + cause), stage_(stage) {}
  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

struct StageTiming {
  std::string stage;
  double seconds = 0.0;
};

struct PipelineRun {
  PipelineConfig config;
  std::vector<PointCloud> clouds;  // as acquired, camera frame
  AlignmentReport alignment;
  PointCloud merged;               // after MLS
  TriangleMesh mesh;               // after hole filling
  std::size_t holes_filled = 0;
  std::size_t holes_left_open = 0;
  MeshAudit audit;
  std::vector<StageTiming> timings;
};

/// Stage names in execution order.
const std::vector<std::string>& pipeline_stages();

/// Runs every stage on clouds given in their camera frames. When `output_dir`
/// is non-empty, merged.ply, mesh.ply, mesh.stl and report.txt are written
/// there; files of the stages that completed before a failure are kept and the
/// report names the failed stage. Throws StageError.
PipelineRun run_pipeline(const PipelineConfig& config, std::vector<PointCloud> clouds,
                         const std::filesystem::path& output_dir = {}, Exec exec = Exec::parallel);

/// Same, acquiring the clouds by scanning `config.shape` in the simulator.
PipelineRun run_simulated_pipeline(const PipelineConfig& config, std::uint64_t seed,
                                   const std::filesystem::path& output_dir = {}, Exec exec = Exec::parallel);

/// The *.ply point clouds of a directory in name order; PLY meshes (such as
/// a simulator's ground_truth.ply) are skipped.
std::vector<PointCloud> load_scan_directory(const std::filesystem::path& dir);

/// Zero-padded cloud file name used by `simulate`: cloud_000.ply, ...
std::string cloud_file_name(std::size_t index);

std::string format_report(const PipelineRun& run, const std::string& failed_stage = {},
                          const std::string& cause = {});

}  // namespace turnscan
