// Serial reference path against the OpenMP path for each parallel kernel.
// Argument 0 is Exec::serial, 1 is Exec::parallel.

#include <benchmark/benchmark.h>

#include <random>

#include "turnscan/filters.hpp"
#include "turnscan/mesh.hpp"
#include "turnscan/scansim.hpp"
#include "turnscan/shapes.hpp"
#include "turnscan/smooth.hpp"
#include "turnscan/spatial.hpp"

using namespace turnscan;

namespace {

Exec exec_of(const benchmark::State& state) { return state.range(0) ? Exec::parallel : Exec::serial; }

PointCloud sphere_cloud(std::size_t n, double r, bool normals) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g(0.0, 1.0);
  PointCloud c;
  for (std::size_t i = 0; i < n; ++i) c.points.push_back(r * Vec3(g(rng), g(rng), g(rng)).normalized());
  if (normals) {
    c.normals.emplace();
    for (const Vec3& p : c.points) c.normals->push_back(p.normalized());
  }
  return c;
}

void BM_KnnBatch(benchmark::State& state) {
  const PointCloud c = sphere_cloud(50000, 0.1, false);
  const KdTree tree(c.points);
  for (auto _ : state) benchmark::DoNotOptimize(k_nearest_all(tree, c.points, 20, exec_of(state)));
}

void BM_Sor(benchmark::State& state) {
  const PointCloud c = sphere_cloud(20000, 0.1, false);
  for (auto _ : state) benchmark::DoNotOptimize(statistical_outlier_removal(c, 50, 1.0, exec_of(state)));
}

void BM_Normals(benchmark::State& state) {
  const PointCloud c = sphere_cloud(20000, 0.1, false);
  for (auto _ : state) benchmark::DoNotOptimize(estimate_normals(c, 20, Vec3::Zero(), exec_of(state)));
}

void BM_Mls(benchmark::State& state) {
  const PointCloud c = sphere_cloud(20000, 0.1, true);
  MlsParams p;
  p.search_radius = 0.01;
  for (auto _ : state) benchmark::DoNotOptimize(mls_smooth(c, p, exec_of(state)));
}

void BM_GridProjection(benchmark::State& state) {
  const PointCloud c = sphere_cloud(20000, 0.1, true);
  for (auto _ : state) benchmark::DoNotOptimize(grid_projection(c, GridParams{}, exec_of(state)));
}

void BM_Bilateral(benchmark::State& state) {
  const ScanConfig cfg;
  const DepthImage d = render_depth(make_notched_cube(0.2), 30.0, cfg.camera, cfg.camera_pose);
  for (auto _ : state) benchmark::DoNotOptimize(bilateral_filter(d, 1.0, 0.01, exec_of(state)));
}

void BM_Render(benchmark::State& state) {
  const ScanConfig cfg;
  const TriangleMesh m = make_notched_cube(0.2);
  for (auto _ : state)
    benchmark::DoNotOptimize(render(m, 30.0, cfg.camera, cfg.camera_pose, cfg.geometry, {}, exec_of(state)));
}

}  // namespace

BENCHMARK(BM_KnnBatch)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Sor)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Normals)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Mls)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_GridProjection)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Bilateral)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Render)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
