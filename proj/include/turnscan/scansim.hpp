#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "turnscan/core.hpp"
#include "turnscan/exec.hpp"

namespace turnscan {

// --- turntable controller ----------------------------------------------------

/// Serial-controlled turntable: '1' starts the motor (green LED), '0' stops it
/// (red LED), '2' halts with every output low until reset.
struct TurntableState {
  bool motor = false;
  bool green_led = false;
  bool red_led = true;
  bool halted = false;
  double angle = 0.0;         // degrees accumulated since the last reset
  int ignored_commands = 0;   // unknown bytes, and start/stop while halted

  friend bool operator==(const TurntableState&, const TurntableState&) = default;
};

inline constexpr char kCommandStop = '0';
inline constexpr char kCommandStart = '1';
inline constexpr char kCommandHalt = '2';
inline constexpr char kCommandReset = 'r';  // the reset button; not a serial byte

inline constexpr double kDefaultIntervalSeconds = 1.8;
inline constexpr double kDefaultDegreesPerInterval = 10.0;

TurntableState turntable_command(TurntableState state, char command);

/// Rotates by seconds / interval_seconds * degrees_per_interval while the
/// motor runs.
TurntableState advance(TurntableState state, double seconds,
                       double degrees_per_interval = kDefaultDegreesPerInterval,
                       double interval_seconds = kDefaultIntervalSeconds);

/// The LED/motor/halt invariants.
bool is_consistent(const TurntableState& state);

// --- sensor model --------------------------------------------------------------

/// Pinhole depth camera; +z along the optical axis, +x right, +y down.
struct CameraIntrinsics {
  int width = 640;
  int height = 480;
  double fx = 525.0, fy = 525.0;
  double cx = 319.5, cy = 239.5;
  double depth_min = 0.3, depth_max = 3.0;  // meters
};

void validate(const CameraIntrinsics& cam);

/// Row-major depth in meters; 0 marks a pixel without a return.
struct DepthImage {
  int width = 0;
  int height = 0;
  double depth_min = 0.0, depth_max = 0.0;
  std::vector<double> depth;

  double at(int u, int v) const { return depth[static_cast<std::size_t>(v) * width + u]; }
  double& at(int u, int v) { return depth[static_cast<std::size_t>(v) * width + u]; }
};

/// Object placement on the turntable: rotation axis through `pivot`, world
/// frame.
struct TurntableGeometry {
  Vec3 pivot = Vec3::Zero();
  Vec3 axis = Vec3::UnitY();
};

/// World-to-camera pose with the camera at `eye` looking at `target`; `down`
/// fixes the image +y direction.
RigidTransform look_at(const Vec3& eye, const Vec3& target, const Vec3& down = Vec3::UnitY());

/// Per-pixel surface information gathered while rendering.
struct PixelSurface {
  std::vector<double> incidence_degrees;     // angle between ray and surface normal; 90 where no hit
  std::vector<std::int32_t> triangle;        // -1 where no hit
  std::vector<std::uint8_t> specular;        // 1 where the hit triangle is non-reflective
};

struct RenderOutput {
  DepthImage depth;
  PixelSurface surface;
};

/// Object -> camera transform for a given turntable angle.
RigidTransform object_to_camera(double object_angle, const RigidTransform& cam_pose,
                                const TurntableGeometry& geometry = {});

/// Casts one ray per pixel center against `mesh` rotated by `object_angle`
/// degrees about the turntable axis. Nearest hit wins; misses and depths
/// outside [depth_min, depth_max] are 0. Triangles with a vertex closer than
/// 1e-6 m to the camera plane are skipped.
RenderOutput render(const TriangleMesh& mesh, double object_angle, const CameraIntrinsics& cam,
                    const RigidTransform& cam_pose, const TurntableGeometry& geometry = {},
                    const std::set<std::uint32_t>& specular_triangles = {}, Exec exec = Exec::parallel);

DepthImage render_depth(const TriangleMesh& mesh, double object_angle, const CameraIntrinsics& cam,
                        const RigidTransform& cam_pose, const TurntableGeometry& geometry = {});

struct NoiseModel {
  double gaussian_sigma = 0.002;     // meters, along the depth axis
  double edge_dropout_angle = 80.0;  // degrees; >= 90 disables dropout
  double specular_hole_rate = 0.0;   // probability per specular pixel
};

/// Deterministic for a given seed. Pixels at or beyond the dropout incidence
/// angle are cleared, specular pixels are cleared with the hole rate, the rest
/// get N(0, sigma^2) depth noise (results leaving the depth range are cleared).
DepthImage add_noise(const DepthImage& image, const NoiseModel& noise, const PixelSurface& surface,
                     std::uint64_t seed);

/// Edge-preserving smoothing over a (2 * ceil(3 * sigma_space) + 1)^2 window.
/// Zero pixels carry no weight; a zero pixel is filled when its nonzero
/// neighbors hold at least half of the spatial window weight.
DepthImage bilateral_filter(const DepthImage& image, double sigma_space, double sigma_depth,
                            Exec exec = Exec::parallel);

/// Camera-frame points for all nonzero pixels, row-major.
PointCloud backproject(const DepthImage& image, const CameraIntrinsics& cam);

/// 16-bit binary PGM in millimeters.
std::vector<std::uint8_t> write_pgm(const DepthImage& image);

// --- scan session ------------------------------------------------------------

struct ScanConfig {
  int views = 36;
  double degrees_per_view = kDefaultDegreesPerInterval;
  double interval_seconds = kDefaultIntervalSeconds;
  double angle_jitter = 0.0;  // stddev of the per-view increment, degrees
  CameraIntrinsics camera;
  RigidTransform camera_pose = look_at(Vec3(0.0, -0.35, -0.9), Vec3::Zero());
  TurntableGeometry geometry;
  NoiseModel noise;
  bool bilateral = true;
  double bilateral_sigma_space = 1.0;  // pixels
  double bilateral_sigma_depth = 0.01; // meters
  std::set<std::uint32_t> specular_triangles;
};

struct ScanSession {
  std::vector<PointCloud> clouds;            // camera frame
  std::vector<RigidTransform> object_to_view; // ground truth per view
  std::vector<double> view_angles;           // turntable angle at capture, degrees
  std::vector<DepthImage> depth_images;      // after filtering
  TurntableState final_state;
  std::vector<char> command_log;             // bytes sent to the controller, in order
};

/// Drives the controller (capture, then start / 1.8 s / stop / capture ...,
/// one closing rotation and '2' at the end) and renders each view through the
/// noise model, bilateral filter, and backprojection. Per-view noise seeds
/// derive from (seed, view index).
ScanSession simulate_scan(const TriangleMesh& ground_truth, const ScanConfig& config, std::uint64_t seed,
                          Exec exec = Exec::parallel);

}  // namespace turnscan
