#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "turnscan/error.hpp"
#include "turnscan/scansim.hpp"

namespace turnscan {

DepthImage add_noise(const DepthImage& image, const NoiseModel& noise, const PixelSurface& surface,
                     std::uint64_t seed) {
  if (noise.gaussian_sigma < 0.0 || noise.specular_hole_rate < 0.0 || noise.specular_hole_rate > 1.0)
    throw InvalidInput("add_noise: sigma must be >= 0 and the hole rate within [0, 1]");
  const std::size_t pixels = image.depth.size();
  if ((!surface.incidence_degrees.empty() && surface.incidence_degrees.size() != pixels) ||
      (!surface.specular.empty() && surface.specular.size() != pixels))
    throw InvalidInput("add_noise: surface data does not match the image size");

  DepthImage out = image;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  const bool dropout = noise.edge_dropout_angle < 90.0;

  for (std::size_t px = 0; px < pixels; ++px) {
    double& d = out.depth[px];
    if (d == 0.0) continue;
    if (dropout && !surface.incidence_degrees.empty() && surface.incidence_degrees[px] >= noise.edge_dropout_angle) {
      d = 0.0;
      continue;
    }
    if (noise.specular_hole_rate > 0.0 && !surface.specular.empty() && surface.specular[px] &&
        uniform(rng) < noise.specular_hole_rate) {
      d = 0.0;
      continue;
    }
    if (noise.gaussian_sigma > 0.0) {
      d += noise.gaussian_sigma * gauss(rng);
      if (d < image.depth_min || d > image.depth_max) d = 0.0;
    }
  }
  return out;
}

DepthImage bilateral_filter(const DepthImage& image, double sigma_space, double sigma_depth, Exec exec) {
  if (!(sigma_space > 0.0) || !(sigma_depth > 0.0))
    throw InvalidInput("bilateral_filter: sigmas must be positive");
  const int radius = static_cast<int>(std::ceil(3.0 * sigma_space));
  const int side = 2 * radius + 1;
  std::vector<double> spatial(static_cast<std::size_t>(side * side));
  for (int dv = -radius; dv <= radius; ++dv)
    for (int du = -radius; du <= radius; ++du)
      spatial[static_cast<std::size_t>((dv + radius) * side + du + radius)] =
          std::exp(-(du * du + dv * dv) / (2.0 * sigma_space * sigma_space));
  const double range_scale = 1.0 / (2.0 * sigma_depth * sigma_depth);

  DepthImage out = image;
  const int w = image.width, h = image.height;
  parallel_for(exec, static_cast<std::size_t>(h), [&](std::size_t row) {
    const int v = static_cast<int>(row);
    for (int u = 0; u < w; ++u) {
      double reference = image.at(u, v);
      if (reference == 0.0) {
        // Hole: needs half the spatial weight from valid neighbors.
        double support = 0.0, total = 0.0;
        int best = -1;
        double best_dist = 0.0;
        for (int dv = -radius; dv <= radius; ++dv) {
          const int y = v + dv;
          if (y < 0 || y >= h) continue;
          for (int du = -radius; du <= radius; ++du) {
            const int x = u + du;
            if (x < 0 || x >= w || (du == 0 && dv == 0)) continue;
            const double ws = spatial[static_cast<std::size_t>((dv + radius) * side + du + radius)];
            total += ws;
            if (image.at(x, y) == 0.0) continue;
            support += ws;
            const double dist = du * du + dv * dv;
            if (best < 0 || dist < best_dist) {
              best = y * w + x;
              best_dist = dist;
            }
          }
        }
        if (best < 0 || support < 0.5 * total) continue;
        reference = image.depth[static_cast<std::size_t>(best)];
      }
      double sum = 0.0, weight = 0.0;
      for (int dv = -radius; dv <= radius; ++dv) {
        const int y = v + dv;
        if (y < 0 || y >= h) continue;
        for (int du = -radius; du <= radius; ++du) {
          const int x = u + du;
          if (x < 0 || x >= w) continue;
          const double z = image.at(x, y);
          if (z == 0.0) continue;
          const double wt = spatial[static_cast<std::size_t>((dv + radius) * side + du + radius)] *
                            std::exp(-(z - reference) * (z - reference) * range_scale);
          sum += wt * z;
          weight += wt;
        }
      }
      if (weight > 0.0) out.at(u, v) = sum / weight;
    }
  });
  return out;
}

PointCloud backproject(const DepthImage& image, const CameraIntrinsics& cam) {
  PointCloud cloud;
  for (int v = 0; v < image.height; ++v) {
    for (int u = 0; u < image.width; ++u) {
      const double z = image.at(u, v);
      if (z == 0.0) continue;
      cloud.points.emplace_back((u - cam.cx) * z / cam.fx, (v - cam.cy) * z / cam.fy, z);
    }
  }
  return cloud;
}

std::vector<std::uint8_t> write_pgm(const DepthImage& image) {
  const std::string header = "P5\n" + std::to_string(image.width) + " " + std::to_string(image.height) + "\n65535\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  out.reserve(out.size() + image.depth.size() * 2);
  for (double d : image.depth) {
    const auto mm = static_cast<std::uint16_t>(std::clamp(std::lround(d * 1000.0), 0L, 65535L));
    out.push_back(static_cast<std::uint8_t>(mm >> 8));
    out.push_back(static_cast<std::uint8_t>(mm & 0xff));
  }
  return out;
}

}  // namespace turnscan
