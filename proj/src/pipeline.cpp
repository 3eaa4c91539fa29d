#include "turnscan/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <functional>
#include <sstream>

#include "turnscan/io.hpp"
#include "turnscan/shapes.hpp"

namespace turnscan {
namespace {

class Runner {
 public:
  Runner(PipelineRun& run, std::filesystem::path out) : run_(run), out_(std::move(out)) {}

  void stage(const std::string& name, const std::function<void()>& body) {
    const auto start = std::chrono::steady_clock::now();
    try {
      body();
    } catch (const std::exception& e) {
      if (!out_.empty()) write_text_file(out_ / "report.txt", format_report(run_, name, e.what()));
      throw StageError(name, e.what());
    }
    const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
    run_.timings.push_back({name, elapsed.count()});
  }

  void write(const std::string& file, const Bytes& bytes) {
    if (!out_.empty()) write_file(out_ / file, bytes);
  }

  const std::filesystem::path& out() const { return out_; }

 private:
  PipelineRun& run_;
  std::filesystem::path out_;
};

void run_stages(PipelineRun& run, Runner& runner, Exec exec) {
  const PipelineConfig& cfg = run.config;
  std::vector<PointCloud> clouds = run.clouds;

  runner.stage("passthrough", [&] {
    if (cfg.crop.is_unbounded()) return;
    for (auto& c : clouds) c = passthrough(c, cfg.crop);
  });
  runner.stage("downsample", [&] {
    for (auto& c : clouds) c = voxel_downsample(c, cfg.leaf_size, exec);
  });
  runner.stage("sor", [&] {
    for (auto& c : clouds) c = statistical_outlier_removal(c, cfg.sor_k, cfg.sor_stddev, exec).kept;
  });
  runner.stage("normals", [&] {
    // Clouds are in camera coordinates, so the sensor sits at the origin.
    for (auto& c : clouds) c = estimate_normals(c, cfg.normal_k, Vec3::Zero(), exec).cloud;
    if (cfg.mls && cfg.mls_pre_align)
      for (auto& c : clouds) c = mls_smooth(c, cfg.mls_params, exec).cloud;
  });
  runner.stage("align", [&] {
    run.alignment = register_sequence(clouds, cfg.icp, cfg.align_strategy, exec);
    run.merged = voxel_downsample(run.alignment.merged, cfg.leaf_size, exec);
  });
  runner.stage("mls", [&] {
    if (cfg.mls) run.merged = mls_smooth(run.merged, cfg.mls_params, exec).cloud;
    runner.write("merged.ply", write_ply(run.merged, PlyFormat::binary_little_endian));
  });
  runner.stage("mesh", [&] {
    run.mesh = cfg.mesher == Mesher::gp ? grid_projection(run.merged, cfg.grid, exec)
                                        : greedy_triangulation(run.merged, cfg.greedy);
  });
  runner.stage("laplacian", [&] {
    if (cfg.mesher == Mesher::gt) run.mesh = laplacian_smooth(run.mesh, cfg.laplacian, exec);
  });
  runner.stage("fill_holes", [&] {
    HoleFillResult filled = fill_holes(run.mesh, cfg.hole_max_boundary);
    run.mesh = std::move(filled.mesh);
    run.holes_filled = filled.filled;
    run.holes_left_open = filled.left_open.size();
  });
  runner.stage("audit", [&] { run.audit = mesh_audit(run.mesh); });
  runner.stage("export", [&] {
    runner.write("mesh.ply", write_ply(run.mesh, PlyFormat::binary_little_endian));
    runner.write("mesh.stl", write_stl(run.mesh));
  });
  if (!runner.out().empty()) write_text_file(runner.out() / "report.txt", format_report(run));
}

PipelineRun start(const PipelineConfig& config, const std::filesystem::path& output_dir) {
  if (!output_dir.empty()) std::filesystem::create_directories(output_dir);
  PipelineRun run;
  run.config = config;
  return run;
}

}  // namespace

const std::vector<std::string>& pipeline_stages() {
  static const std::vector<std::string> names = {"acquire", "passthrough", "downsample", "sor",
                                                 "normals", "align",       "mls",        "mesh",
                                                 "laplacian", "fill_holes", "audit",     "export"};
  return names;
}

PipelineRun run_pipeline(const PipelineConfig& config, std::vector<PointCloud> clouds,
                         const std::filesystem::path& output_dir, Exec exec) {
  PipelineRun run = start(config, output_dir);
  Runner runner(run, output_dir);
  runner.stage("acquire", [&] {
    if (clouds.size() < 2) throw InvalidInput("need at least 2 clouds, got " + std::to_string(clouds.size()));
    for (const auto& c : clouds) validate(c);
    run.clouds = std::move(clouds);
  });
  run_stages(run, runner, exec);
  return run;
}

PipelineRun run_simulated_pipeline(const PipelineConfig& config, std::uint64_t seed,
                                   const std::filesystem::path& output_dir, Exec exec) {
  PipelineRun run = start(config, output_dir);
  Runner runner(run, output_dir);
  runner.stage("acquire", [&] {
    run.clouds = simulate_scan(make_named_shape(config.shape), config.scan, seed, exec).clouds;
  });
  run_stages(run, runner, exec);
  return run;
}

std::vector<PointCloud> load_scan_directory(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw InvalidInput("not a directory: " + dir.string());
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".ply") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<PointCloud> clouds;
  for (const auto& f : files) {
    PlyContent content = read_ply(read_file(f));
    if (auto* cloud = std::get_if<PointCloud>(&content)) clouds.push_back(std::move(*cloud));
  }
  return clouds;
}

std::string cloud_file_name(std::size_t index) {
  char name[32];
  std::snprintf(name, sizeof name, "cloud_%03zu.ply", index);
  return name;
}

std::string format_report(const PipelineRun& run, const std::string& failed_stage, const std::string& cause) {
  std::ostringstream out;
  out << "# turnscan reconstruction report\n";
  for (const StageTiming& t : run.timings) out << "stage " << t.stage << " " << t.seconds << " s\n";
  if (!failed_stage.empty()) {
    out << "failed_stage: " << failed_stage << "\n";
    out << "error: " << cause << "\n";
    return out.str();
  }
  out << "clouds: " << run.clouds.size() << "\n";
  out << "merged_points: " << run.merged.size() << "\n";
  out << "mesh_vertices: " << run.mesh.vertices.size() << "\n";
  out << "mesh_triangles: " << run.mesh.triangles.size() << "\n";
  out << "holes_filled: " << run.holes_filled << "\n";
  out << "holes_left_open: " << run.holes_left_open << "\n";
  out << "boundary_edges: " << run.audit.boundary_edges << "\n";
  out << "non_manifold_edges: " << run.audit.non_manifold_edges << "\n";
  out << "euler_characteristic: " << run.audit.euler_characteristic << "\n";
  out << "connected_components: " << run.audit.connected_components << "\n";
  out.precision(9);
  for (std::size_t i = 1; i < run.alignment.pair_fitness.size(); ++i)
    out << "icp_fitness " << i << " " << run.alignment.pair_fitness[i] << "\n";
  out << "# cumulative transforms (r00 .. r22 tx ty tz)\n" << format_transforms(run.alignment.cumulative);
  return out.str();
}

}  // namespace turnscan
