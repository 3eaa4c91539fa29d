// Acceptance checks: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <random>
#include <set>
#include <sstream>
#include <string>

#include "oracles.hpp"
#include "turnscan/filters.hpp"
#include "turnscan/io.hpp"
#include "turnscan/mesh.hpp"
#include "turnscan/registration.hpp"
#include "turnscan/scansim.hpp"
#include "turnscan/shapes.hpp"
#include "turnscan/smooth.hpp"
#include "turnscan/spatial.hpp"

using namespace turnscan;
namespace fs = std::filesystem;

namespace {

// Pinned tolerances.
constexpr double kKabschTol = 1e-9;
constexpr double kKabschSeconds = 1.0;
constexpr double kIcpRotationDeg = 0.1;
constexpr double kIcpTranslation = 1e-4;
constexpr double kIcpSeconds = 5.0;
constexpr double kTurntableRotationDeg = 1.0;
constexpr double kTurntableRms = 0.006;
constexpr double kTurntableSeconds = 60.0;
constexpr double kSorOutlierRecall = 0.95;
constexpr double kSorInlierLoss = 0.02;
constexpr double kMlsReduction = 0.5;
constexpr double kMlsPolynomialTol = 1e-7;
constexpr double kLaplacianShrink = 0.05;

struct Outcome {
  bool pass;
  std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

Outcome kabsch_exactness() {
  std::mt19937_64 rng(1001);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  double worst_r = 0.0, worst_t = 0.0;
  const auto t0 = std::chrono::steady_clock::now();
  for (int trial = 0; trial < 1000; ++trial) {
    const RigidTransform truth = oracle::random_transform(rng);
    std::vector<Vec3> src(100), dst(100);
    for (int i = 0; i < 100; ++i) {
      src[i] = Vec3(u(rng), u(rng), u(rng));
      dst[i] = truth.apply(src[i]);
    }
    const RigidTransform got = kabsch(src, dst);
    worst_r = std::max(worst_r, (got.rotation() - truth.rotation()).norm());
    worst_t = std::max(worst_t, (got.translation() - truth.translation()).norm());
  }
  const double s = seconds_since(t0);
  return {worst_r <= kKabschTol && worst_t <= kKabschTol && s < kKabschSeconds,
          fmt("max |dR|_F %.2e, max |dt| %.2e (tol %.0e), %.3f s (< %.0f s)", worst_r, worst_t, kKabschTol, s,
              kKabschSeconds)};
}

Outcome icp_recovery() {
  std::mt19937_64 rng(36);
  PointCloud target;
  target.points = oracle::sample_surface(make_notched_cube(0.2), 20000, rng);
  const RigidTransform step = RigidTransform::rotation_about(Vec3::UnitY(), 10.0);
  const PointCloud source = apply_transform(invert(step), target);
  IcpParams p;
  p.max_iterations = 200;
  p.fitness_epsilon = 1e-12;
  const auto t0 = std::chrono::steady_clock::now();
  const IcpResult r = icp(source, target, p);
  const double s = seconds_since(t0);
  const double rot = rotation_error_degrees(r.transform, step);
  const double trans = (r.transform.translation() - step.translation()).norm();
  bool monotone = true;
  for (std::size_t i = 1; i < r.fitness_history.size(); ++i) monotone &= r.fitness_history[i] <= r.fitness_history[i - 1];
  return {rot <= kIcpRotationDeg && trans <= kIcpTranslation && monotone && s < kIcpSeconds,
          fmt("rotation err %.2e deg (<= %.1f), translation err %.2e m (<= %.0e), fitness %s over %d iterations, %.2f s",
              rot, kIcpRotationDeg, trans, kIcpTranslation, monotone ? "non-increasing" : "INCREASED",
              r.iterations_used, s)};
}

Outcome turntable_registration() {
  const TriangleMesh shape = make_notched_cube(0.2);
  ScanConfig scan;  // 36 views at 10 deg, sigma 0.002 m
  IcpParams p;
  p.max_iterations = 200;
  p.fitness_epsilon = 1e-9;
  p.refine_correspondence_distance = 0.005;
  const auto t0 = std::chrono::steady_clock::now();
  const ScanSession session = simulate_scan(shape, scan, 7);
  const AlignmentReport rep =
      align_sequence(session.clouds, p, AlignStrategy::incremental_model, 0.005, OutlierParams{50, 1.0});
  const double s = seconds_since(t0);

  double worst = 0.0;
  for (std::size_t i = 0; i < session.clouds.size(); ++i) {
    // Truth: rotation by i * 10 deg about the turntable axis, in camera-0 coordinates.
    const RigidTransform truth = compose(session.object_to_view[0], invert(session.object_to_view[i]));
    worst = std::max(worst, rotation_error_degrees(rep.cumulative[i], truth));
  }
  TriangleMesh reference = shape;
  for (Vec3& v : reference.vertices) v = session.object_to_view[0].apply(v);
  const double rms = oracle::rms_to_mesh(rep.merged.points, reference);
  std::size_t total = 0;
  for (const auto& c : session.clouds) total += c.size();
  return {session.clouds.size() == 36 && worst <= kTurntableRotationDeg && rms <= kTurntableRms &&
              s < kTurntableSeconds,
          fmt("%zu views, %zu points/view, worst TC err %.3f deg (<= %.1f), merged RMS %.5f m (<= %.3f), %.1f s (< %.0f s)",
              session.clouds.size(), total / session.clouds.size(), worst, kTurntableRotationDeg, rms, kTurntableRms,
              s, kTurntableSeconds)};
}

Outcome sor_outliers() {
  std::mt19937_64 rng(404);
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  std::normal_distribution<double> g(0.0, 0.005);
  std::uniform_real_distribution<double> lift(0.1, 0.3);
  PointCloud c;
  for (int i = 0; i < 10000; ++i) c.points.emplace_back(u(rng), u(rng), g(rng));
  for (int i = 0; i < 200; ++i) {
    const double sign = i % 2 ? 1.0 : -1.0;
    c.points.emplace_back(u(rng), u(rng), sign * lift(rng));
  }
  const OutlierRemoval r = statistical_outlier_removal(c, 50, 1.0);

  // Oracle: brute-force d_i, sample stddev threshold.
  const auto d = oracle::mean_knn_distances(c.points, 50);
  double mean = 0.0, var = 0.0;
  for (double v : d) mean += v;
  mean /= d.size();
  for (double v : d) var += (v - mean) * (v - mean);
  const double threshold = mean + std::sqrt(var / (d.size() - 1.0));
  std::vector<std::uint32_t> expected;
  for (std::uint32_t i = 0; i < d.size(); ++i)
    if (d[i] > threshold) expected.push_back(i);

  std::size_t outliers = 0, inliers = 0;
  for (std::uint32_t i : r.removed_indices) (i >= 10000 ? outliers : inliers)++;
  const double recall = outliers / 200.0, loss = inliers / 10000.0;
  const bool oracle_ok = r.removed_indices == expected && std::abs(r.threshold - threshold) <= 1e-12;
  return {recall >= kSorOutlierRecall && loss <= kSorInlierLoss && oracle_ok,
          fmt("outliers removed %.1f%% (>= %.0f%%), inliers removed %.2f%% (<= %.0f%%), oracle %s", 100 * recall,
              100 * kSorOutlierRecall, 100 * loss, 100 * kSorInlierLoss, oracle_ok ? "agrees" : "DISAGREES")};
}

Outcome mls_smoothing() {
  std::mt19937_64 rng(51);
  std::normal_distribution<double> g(0.0, 0.01);
  PointCloud sphere;
  sphere.points = oracle::sphere_points(rng, 100000, 0.5);
  sphere.normals.emplace();
  double before = 0.0;
  for (Vec3& p : sphere.points) {
    sphere.normals->push_back(p.normalized());
    p += g(rng) * p.normalized();
    before += (p.norm() - 0.5) * (p.norm() - 0.5);
  }
  before = std::sqrt(before / sphere.size());
  const MlsResult smoothed = mls_smooth(sphere, MlsParams{});
  double after = 0.0;
  for (const Vec3& p : smoothed.cloud.points) after += (p.norm() - 0.5) * (p.norm() - 0.5);
  after = std::sqrt(after / smoothed.cloud.size());
  const double reduction = 1.0 - after / before;

  // z = 0.25x^2 + 0.15xy + 0.1y^2 + 0.1x - 0.05y + 0.01, exact normals.
  PointCloud quad;
  quad.normals.emplace();
  for (int i = 0; i < 101; ++i)
    for (int j = 0; j < 101; ++j) {
      const double x = -0.1 + 0.2 * i / 100, y = -0.1 + 0.2 * j / 100;
      quad.points.emplace_back(x, y, 0.25 * x * x + 0.15 * x * y + 0.1 * y * y + 0.1 * x - 0.05 * y + 0.01);
      quad.normals->push_back(Vec3(-(0.5 * x + 0.15 * y + 0.1), -(0.15 * x + 0.2 * y - 0.05), 1).normalized());
    }
  const MlsResult fit = mls_smooth(quad, MlsParams{});
  double worst = 0.0;
  for (std::size_t i = 0; i < quad.size(); ++i) worst = std::max(worst, (fit.cloud.points[i] - quad.points[i]).norm());
  return {reduction >= kMlsReduction && worst <= kMlsPolynomialTol,
          fmt("sphere RMS %.5f -> %.5f (reduction %.1f%%, >= %.0f%%), quadratic max err %.2e (<= %.0e)", before, after,
              100 * reduction, 100 * kMlsReduction, worst, kMlsPolynomialTol)};
}

bool segments_cross(const Eigen::Vector2d& a, const Eigen::Vector2d& b, const Eigen::Vector2d& c,
                    const Eigen::Vector2d& d) {
  auto orient = [](const Eigen::Vector2d& p, const Eigen::Vector2d& q, const Eigen::Vector2d& r) {
    return (q - p).x() * (r - p).y() - (q - p).y() * (r - p).x();
  };
  const double d1 = orient(a, b, c), d2 = orient(a, b, d), d3 = orient(c, d, a), d4 = orient(c, d, b);
  return ((d1 > 0) != (d2 > 0)) && ((d3 > 0) != (d4 > 0)) && d1 != 0 && d2 != 0 && d3 != 0 && d4 != 0;
}

Outcome greedy_grid() {
  PointCloud c;
  c.normals.emplace();
  for (int j = 0; j < 20; ++j)
    for (int i = 0; i < 20; ++i) {
      c.points.emplace_back(i * 0.005, j * 0.005, 0.0);
      c.normals->push_back(Vec3::UnitZ());
    }
  const TriangleMesh m = greedy_triangulation(c, GreedyParams{});
  std::vector<std::pair<std::uint32_t, std::uint32_t>> edges;
  for (const auto& [e, n] : oracle::edge_use(m)) edges.push_back(e);
  std::size_t crossings = 0;
  for (std::size_t i = 0; i < edges.size(); ++i)
    for (std::size_t j = i + 1; j < edges.size(); ++j) {
      const auto [a, b] = edges[i];
      const auto [p, q] = edges[j];
      if (a == p || a == q || b == p || b == q) continue;
      crossings += segments_cross(m.vertices[a].head<2>(), m.vertices[b].head<2>(), m.vertices[p].head<2>(),
                                  m.vertices[q].head<2>());
    }
  const std::size_t loops = boundary_loops(m).size();
  return {m.triangles.size() == 722 && loops == 1 && crossings == 0,
          fmt("%zu triangles (722), %zu boundary loops (1), %zu crossing edge pairs (0)", m.triangles.size(), loops,
              crossings)};
}

Outcome grid_projection_sphere() {
  std::mt19937_64 rng(62);
  PointCloud c;
  c.points = oracle::sphere_points(rng, 20000, 0.1);
  c.normals.emplace();
  for (const Vec3& p : c.points) c.normals->push_back(p.normalized());
  GridParams params;
  params.resolution = 0.0025;
  const MeshAudit a = mesh_audit(grid_projection(c, params));
  return {a == MeshAudit{0, 0, 2, 1},
          fmt("boundary %zu, non-manifold %zu, Euler %ld, components %zu (0, 0, 2, 1)", a.boundary_edges,
              a.non_manifold_edges, a.euler_characteristic, a.connected_components)};
}

Outcome hole_filling() {
  const TriangleMesh sphere = make_icosphere(1.0, 2);
  auto without = [&](const std::set<std::size_t>& drop) {
    TriangleMesh out;
    out.vertices = sphere.vertices;
    for (std::size_t i = 0; i < sphere.triangles.size(); ++i)
      if (!drop.count(i)) out.triangles.push_back(sphere.triangles[i]);
    return out;
  };
  std::set<std::size_t> fan;
  for (std::size_t i = 0; i < sphere.triangles.size(); ++i)
    for (std::uint32_t v : sphere.triangles[i])
      if (v == 0) fan.insert(i);
  const MeshAudit one = mesh_audit(fill_holes(without({11}), 100).mesh);
  const MeshAudit five = mesh_audit(fill_holes(without(fan), 100).mesh);
  auto ok = [](const MeshAudit& a) {
    return a.boundary_edges == 0 && a.euler_characteristic == 2 && a.non_manifold_edges == 0;
  };
  return {fan.size() == 5 && ok(one) && ok(five),
          fmt("minus 1: boundary %zu Euler %ld nm %zu; minus %zu: boundary %zu Euler %ld nm %zu", one.boundary_edges,
              one.euler_characteristic, one.non_manifold_edges, fan.size(), five.boundary_edges,
              five.euler_characteristic, five.non_manifold_edges)};
}

Outcome laplacian() {
  const double r = 0.1;
  std::mt19937_64 rng(53);
  std::normal_distribution<double> g(0.0, 0.01 * r);
  TriangleMesh start = make_icosphere(r, 4);
  for (Vec3& v : start.vertices) v *= 1.0 + g(rng) / r;
  auto rms_radial = [&](const TriangleMesh& m) {
    double s = 0.0;
    for (const Vec3& v : m.vertices) s += (v.norm() - r) * (v.norm() - r);
    return std::sqrt(s / m.vertices.size());
  };
  LaplacianParams one;  // relaxation 0.1, feature angle 45
  one.iterations = 1;
  TriangleMesh m = start;
  bool decreasing = true;
  double previous = rms_radial(m);
  const double initial = previous;
  for (int i = 0; i < 10; ++i) {
    m = laplacian_smooth(m, one);
    const double now = rms_radial(m);
    decreasing &= now < previous;
    previous = now;
  }
  const TriangleMesh full = laplacian_smooth(start, LaplacianParams{});  // 20 iterations
  const double shrink = 1.0 - signed_volume(full) / signed_volume(start);

  const TriangleMesh cube = make_notched_cube(0.2, 4, 0);
  const TriangleMesh smoothed = laplacian_smooth(cube, LaplacianParams{});
  int corners = 0, moved = 0;
  for (std::size_t i = 0; i < cube.vertices.size(); ++i)
    if ((cube.vertices[i].cwiseAbs().array() > 0.0999).all()) {
      ++corners;
      moved += smoothed.vertices[i] != cube.vertices[i];
    }
  return {decreasing && shrink <= kLaplacianShrink && corners == 8 && moved == 0,
          fmt("RMS %.2e -> %.2e after 10 iterations (%s), 20-iteration shrinkage %.2f%% (<= %.0f%%), %d of %d corners moved",
              initial, previous, decreasing ? "strictly decreasing" : "NOT DECREASING", 100 * shrink,
              100 * kLaplacianShrink, moved, corners)};
}

Outcome turntable_protocol() {
  const char alphabet[] = {kCommandStop, kCommandStart, kCommandHalt, kCommandReset};
  std::size_t checked = 0, violations = 0;
  std::vector<TurntableState> frontier{TurntableState{}};
  for (int depth = 0; depth < 6; ++depth) {
    std::vector<TurntableState> next;
    for (const TurntableState& s : frontier)
      for (char c : alphabet) {
        const TurntableState t = advance(turntable_command(s, c), 1.8);
        violations += !is_consistent(t);
        next.push_back(t);
        ++checked;
      }
    frontier = std::move(next);
  }
  ScanConfig cfg;
  cfg.camera.width = 160;
  cfg.camera.height = 120;
  cfg.camera.fx = cfg.camera.fy = 140.0;
  cfg.camera.cx = 79.5;
  cfg.camera.cy = 59.5;
  const ScanSession s = simulate_scan(make_notched_cube(0.2), cfg, 5);
  const bool ends = s.clouds.size() == 36 && std::abs(s.final_state.angle - 360.0) <= 1e-9 && s.final_state.halted &&
                    s.command_log.back() == kCommandHalt;
  return {violations == 0 && checked == 5460 && ends,
          fmt("%zu sequences checked, %zu violations; 36-cycle run ends at %.1f deg, %s, last byte '%c'", checked,
              violations, s.final_state.angle, s.final_state.halted ? "halted" : "NOT HALTED", s.command_log.back())};
}

Outcome spatial_oracle() {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<Vec3> pts(1000);
  for (auto& p : pts) p = Vec3(u(rng), u(rng), u(rng));
  const KdTree tree(pts);
  std::size_t mismatches = 0;
  for (int i = 0; i < 200; ++i) {
    // Every fourth query sits on an indexed point.
    const Vec3 q = i % 4 == 0 ? pts[i * 5] : Vec3(u(rng), u(rng), u(rng));
    switch (i % 3) {
      case 0:
        mismatches += tree.nearest(q) != oracle::knn(pts, q, 1)[0];
        break;
      case 1:
        mismatches += tree.k_nearest(q, 1 + i % 60) != oracle::knn(pts, q, 1 + i % 60);
        break;
      default:
        mismatches += tree.radius_search(q, 0.02 + 0.001 * (i % 150)) != oracle::radius(pts, q, 0.02 + 0.001 * (i % 150));
    }
  }
  return {mismatches == 0, fmt("200 queries (nearest / k-nearest / radius), %zu mismatches", mismatches)};
}

Outcome io_round_trip() {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<float> u(-2.0f, 2.0f);
  PointCloud c;
  c.normals.emplace();
  for (int i = 0; i < 1000; ++i) {
    c.points.emplace_back(u(rng), u(rng), u(rng));
    c.normals->push_back(Vec3::Unit(i % 3));
  }
  const Bytes ply = write_ply(c, PlyFormat::binary_little_endian);
  const auto back = std::get<PointCloud>(read_ply(ply));
  const bool ply_ok = back.points == c.points && back.normals == c.normals &&
                      write_ply(back, PlyFormat::binary_little_endian) == ply;

  const TriangleMesh m = make_notched_cube(0.2);
  const Bytes stl = write_stl(m);
  std::vector<oracle::StlFacet> facets;
  bool stl_ok = stl.size() == 84 + 50 * m.triangles.size() && oracle::read_stl(stl, facets) &&
                facets.size() == m.triangles.size();
  for (std::size_t i = 0; stl_ok && i < facets.size(); ++i)
    for (int k = 0; k < 3; ++k)
      for (int a = 0; a < 3; ++a)
        stl_ok &= facets[i].v[k][a] == static_cast<float>(m.vertices[m.triangles[i][k]][a]);
  return {ply_ok && stl_ok,
          fmt("PLY binary round trip %s; STL %zu bytes for %zu triangles (84 + 50 n = %zu), reader recovered %zu",
              ply_ok ? "bit-exact" : "DIFFERS", stl.size(), m.triangles.size(), 84 + 50 * m.triangles.size(),
              facets.size())};
}

int run(const std::string& args) {
  const std::string cmd = std::string(TURNSCAN_BINARY) + " " + args + " > /dev/null";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

Outcome determinism() {
  const fs::path root = fs::temp_directory_path() / "turnscan_acceptance_determinism";
  fs::remove_all(root);
  const auto t0 = std::chrono::steady_clock::now();
  int code = 0;
  for (const char* name : {"a", "b"}) {
    const fs::path dir = root / name;
    code |= run("simulate --seed 42 --out " + (dir / "scan").string());
    code |= run("reconstruct --input " + (dir / "scan").string() + " --out " + (dir / "rec").string());
  }
  if (code != 0) return {false, fmt("a CLI run exited with status %d", code)};
  const Bytes a = read_file(root / "a" / "rec" / "mesh.stl"), b = read_file(root / "b" / "rec" / "mesh.stl");
  return {a == b && !a.empty(), fmt("mesh.stl %zu vs %zu bytes, %s, %.1f s for both runs", a.size(), b.size(),
                                    a == b ? "byte-identical" : "DIFFERENT", seconds_since(t0))};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"kabsch exactness", kabsch_exactness},
      {"icp ground-truth recovery", icp_recovery},
      {"end-to-end turntable registration", turntable_registration},
      {"statistical outlier removal", sor_outliers},
      {"moving least squares", mls_smoothing},
      {"greedy triangulation", greedy_grid},
      {"grid projection", grid_projection_sphere},
      {"hole filling", hole_filling},
      {"laplacian smoothing", laplacian},
      {"turntable protocol", turntable_protocol},
      {"spatial oracle", spatial_oracle},
      {"ply / stl i/o", io_round_trip},
      {"determinism", determinism},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    failed += !o.pass;
    std::printf("%s %2zu %s: %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria failed\n", failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
