#include <random>

#include "turnscan/error.hpp"
#include "turnscan/scansim.hpp"

namespace turnscan {
namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

ScanSession simulate_scan(const TriangleMesh& ground_truth, const ScanConfig& config, std::uint64_t seed,
                          Exec exec) {
  if (config.views < 2) throw InvalidInput("simulate_scan: need at least 2 views");
  validate(config.camera);
  validate(ground_truth);

  ScanSession session;
  TurntableState state;
  std::mt19937_64 jitter_rng(splitmix64(seed ^ 0x6a09e667f3bcc909ULL));
  std::normal_distribution<double> jitter(0.0, 1.0);
  auto send = [&](char c) {
    state = turntable_command(state, c);
    session.command_log.push_back(c);
  };
  auto rotate_one_step = [&](char closing) {
    send(kCommandStart);
    double increment = config.degrees_per_view;
    if (config.angle_jitter > 0.0) increment += config.angle_jitter * jitter(jitter_rng);
    state = advance(state, config.interval_seconds, increment, config.interval_seconds);
    send(closing);
  };

  session.view_angles.push_back(state.angle);
  for (int i = 1; i < config.views; ++i) {
    rotate_one_step(kCommandStop);
    session.view_angles.push_back(state.angle);
  }
  rotate_one_step(kCommandHalt);
  session.final_state = state;

  const auto views = static_cast<std::size_t>(config.views);
  session.clouds.resize(views);
  session.depth_images.resize(views);
  session.object_to_view.resize(views);
  parallel_for<2, 1>(exec, views, [&](std::size_t i) {
    const double angle = session.view_angles[i];
    session.object_to_view[i] = object_to_camera(angle, config.camera_pose, config.geometry);
    RenderOutput frame = render(ground_truth, angle, config.camera, config.camera_pose, config.geometry,
                                config.specular_triangles, Exec::serial);
    DepthImage depth = add_noise(frame.depth, config.noise, frame.surface, splitmix64(seed + 0x9e37 * (i + 1)));
    if (config.bilateral)
      depth = bilateral_filter(depth, config.bilateral_sigma_space, config.bilateral_sigma_depth, Exec::serial);
    session.clouds[i] = backproject(depth, config.camera);
    session.depth_images[i] = std::move(depth);
  });
  return session;
}

}  // namespace turnscan
