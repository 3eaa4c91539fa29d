#pragma once

#include <span>
#include <string>
#include <vector>

#include "turnscan/core.hpp"
#include "turnscan/exec.hpp"

namespace turnscan {

/// Least-squares rigid pose mapping `source` onto `target` (fixed
/// correspondences), by SVD of the cross-covariance with reflection
/// correction. Throws InvalidInput on size mismatch, fewer than 3 pairs, or a
/// collinear source.
RigidTransform kabsch(std::span<const Vec3> source, std::span<const Vec3> target);

struct IcpParams {
  int max_iterations = 50;
  double max_correspondence_distance = 0.05;  // meters
  double transform_epsilon = 1e-8;
  double fitness_epsilon = 1e-6;  // relative change of the MSE
  // When > 0, a second pass from the converged pose with this tighter gate.
  double refine_correspondence_distance = 0.0;
};

struct IcpResult {
  RigidTransform transform;        // maps source into the target frame
  double fitness = 0.0;            // final mean squared correspondence distance, m^2
  int iterations_used = 0;
  bool converged = false;
  std::vector<double> fitness_history;  // one entry per iteration
};

/// Point-to-point ICP from the identity. Throws InsufficientOverlap when fewer
/// than 3 correspondences survive the distance gate. max_iterations bounds
/// both passes together.
IcpResult icp(const PointCloud& source, const PointCloud& target, const IcpParams& params,
              Exec exec = Exec::parallel);

enum class AlignStrategy { pairwise_chain, incremental_model };

struct OutlierParams {
  std::size_t k = 50;
  double stddev_mult = 1.0;
};

struct AlignmentReport {
  std::vector<RigidTransform> cumulative;  // TC_i, maps cloud i into cloud 0's frame
  std::vector<RigidTransform> pairwise;    // T_i as returned by ICP; pairwise[0] = identity
  std::vector<double> pair_fitness;        // fitness[0] = 0
  std::vector<PointCloud> aligned;         // preprocessed clouds after TC_i
  PointCloud merged;
};

/// Downsamples (leaf > 0) and outlier-filters every cloud, then registers
/// them into the frame of the first one. ICP failures are rethrown as
/// InsufficientOverlap naming the failing pair.
AlignmentReport align_sequence(std::span<const PointCloud> clouds, const IcpParams& params,
                               AlignStrategy strategy, double leaf, const OutlierParams& sor,
                               Exec exec = Exec::parallel);

/// The registration part of align_sequence, on clouds used as given.
AlignmentReport register_sequence(std::span<const PointCloud> clouds, const IcpParams& params,
                                  AlignStrategy strategy, Exec exec = Exec::parallel);

/// One transform per line: r00 r01 r02 r10 ... r22 tx ty tz.
std::string format_transforms(std::span<const RigidTransform> transforms);
std::vector<RigidTransform> parse_transforms(const std::string& text);

}  // namespace turnscan
