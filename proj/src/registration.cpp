#include "turnscan/registration.hpp"

#include <charconv>
#include <cmath>
#include <limits>
#include <optional>
#include <sstream>

#include <Eigen/SVD>

#include "turnscan/error.hpp"
#include "turnscan/filters.hpp"
#include "turnscan/spatial.hpp"

namespace turnscan {

RigidTransform kabsch(std::span<const Vec3> source, std::span<const Vec3> target) {
  if (source.size() != target.size()) throw InvalidInput("kabsch: point sets differ in size");
  if (source.size() < 3) throw InvalidInput("kabsch: need at least 3 correspondences");
  const auto n = static_cast<double>(source.size());
  Vec3 cs = Vec3::Zero(), ct = Vec3::Zero();
  for (std::size_t i = 0; i < source.size(); ++i) {
    cs += source[i];
    ct += target[i];
  }
  cs /= n;
  ct /= n;
  Mat3 cross = Mat3::Zero();
  Mat3 spread = Mat3::Zero();
  for (std::size_t i = 0; i < source.size(); ++i) {
    const Vec3 s = source[i] - cs;
    cross += s * (target[i] - ct).transpose();
    spread += s * s.transpose();
  }
  const Eigen::JacobiSVD<Mat3> spread_svd(spread);
  const Vec3 sv = spread_svd.singularValues();
  if (!(sv[0] > 0.0) || sv[1] <= 1e-12 * sv[0])
    throw InvalidInput("kabsch: source points are collinear or coincident");

  const Eigen::JacobiSVD<Mat3> svd(cross, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Mat3& u = svd.matrixU();
  const Mat3& v = svd.matrixV();
  Mat3 d = Mat3::Identity();
  if ((v * u.transpose()).determinant() < 0.0) d(2, 2) = -1.0;
  const Mat3 r = v * d * u.transpose();
  return {r, ct - r * cs};
}

namespace {

double transform_change(const RigidTransform& delta) {
  return (delta.rotation() - Mat3::Identity()).norm() + delta.translation().norm();
}

}  // namespace

IcpResult icp(const PointCloud& source, const PointCloud& target, const IcpParams& params, Exec exec) {
  if (source.size() < 3 || target.size() < 3) throw InvalidInput("icp: both clouds need at least 3 points");
  if (params.max_iterations < 1 || !(params.max_correspondence_distance > 0.0) ||
      !(params.transform_epsilon > 0.0) || !(params.fitness_epsilon > 0.0) ||
      !(params.refine_correspondence_distance >= 0.0))
    throw InvalidInput("icp: all parameters must be positive");

  const KdTree tree(target.points);
  const std::size_t n = source.size();
  std::vector<Vec3> moved(source.points);
  std::vector<Neighbor> match(n);
  std::vector<Vec3> src, dst;
  src.reserve(n);
  dst.reserve(n);

  IcpResult result;
  // One pass per gate; the refinement pass continues from the first one's
  // pose and shares the iteration budget.
  auto run = [&](double gate) {
    std::optional<double> previous;
    while (result.iterations_used < params.max_iterations) {
      parallel_for(exec, n, [&](std::size_t i) { match[i] = tree.nearest(moved[i]); });
      src.clear();
      dst.clear();
      for (std::size_t i = 0; i < n; ++i) {
        if (match[i].distance > gate) continue;
        src.push_back(moved[i]);
        dst.push_back(target.points[match[i].index]);
      }
      if (src.size() < 3)
        throw InsufficientOverlap("icp: insufficient overlap (" + std::to_string(src.size()) +
                                  " correspondences within " + std::to_string(gate) + " m)");

      const RigidTransform delta = kabsch(src, dst);
      result.transform = compose(delta, result.transform);
      double sse = 0.0;
      for (std::size_t j = 0; j < src.size(); ++j) sse += (dst[j] - delta.apply(src[j])).squaredNorm();
      const double fitness = sse / static_cast<double>(src.size());
      result.fitness = fitness;
      result.fitness_history.push_back(fitness);
      ++result.iterations_used;
      for (std::size_t i = 0; i < n; ++i) moved[i] = result.transform.apply(source.points[i]);

      const bool small_step = transform_change(delta) < params.transform_epsilon;
      bool small_gain = false;
      if (previous) {
        const double scale = std::max(*previous, std::numeric_limits<double>::min());
        small_gain = std::abs(*previous - fitness) / scale < params.fitness_epsilon;
      }
      if (small_step || small_gain || fitness == 0.0) return true;
      previous = fitness;
    }
    return false;
  };
  result.converged = run(params.max_correspondence_distance);
  if (params.refine_correspondence_distance > 0.0 && result.fitness > 0.0)
    result.converged = run(params.refine_correspondence_distance);
  return result;
}

AlignmentReport align_sequence(std::span<const PointCloud> clouds, const IcpParams& params,
                               AlignStrategy strategy, double leaf, const OutlierParams& sor, Exec exec) {
  if (clouds.size() < 2) throw InvalidInput("align_sequence: need at least 2 clouds");

  std::vector<PointCloud> prepared(clouds.size());
  for (std::size_t i = 0; i < clouds.size(); ++i) {
    PointCloud c = leaf > 0.0 ? voxel_downsample(clouds[i], leaf, exec) : clouds[i];
    prepared[i] = statistical_outlier_removal(c, sor.k, sor.stddev_mult, exec).kept;
  }
  return register_sequence(prepared, params, strategy, exec);
}

AlignmentReport register_sequence(std::span<const PointCloud> prepared, const IcpParams& params,
                                  AlignStrategy strategy, Exec exec) {
  if (prepared.size() < 2) throw InvalidInput("register_sequence: need at least 2 clouds");

  AlignmentReport report;
  report.cumulative.push_back(RigidTransform::identity());
  report.pairwise.push_back(RigidTransform::identity());
  report.pair_fitness.push_back(0.0);
  report.aligned.push_back(prepared[0]);

  PointCloud model = prepared[0];
  for (std::size_t i = 1; i < prepared.size(); ++i) {
    try {
      if (strategy == AlignStrategy::pairwise_chain) {
        const IcpResult r = icp(prepared[i], prepared[i - 1], params, exec);
        report.pairwise.push_back(r.transform);
        report.cumulative.push_back(compose(report.cumulative.back(), r.transform));
        report.pair_fitness.push_back(r.fitness);
      } else {
        // Start from the previous pose: the turntable step is small relative
        // to the last registered view.
        const RigidTransform& prior = report.cumulative.back();
        const IcpResult r = icp(apply_transform(prior, prepared[i]), model, params, exec);
        const RigidTransform cumulative = compose(r.transform, prior);
        report.pairwise.push_back(compose(invert(prior), cumulative));
        report.cumulative.push_back(cumulative);
        report.pair_fitness.push_back(r.fitness);
      }
    } catch (const InsufficientOverlap& e) {
      throw InsufficientOverlap("aligning cloud " + std::to_string(i) + " to " +
                                (strategy == AlignStrategy::pairwise_chain ? "cloud " + std::to_string(i - 1)
                                                                           : std::string("the model")) +
                                ": " + e.what());
    }
    report.aligned.push_back(apply_transform(report.cumulative.back(), prepared[i]));
    if (strategy == AlignStrategy::incremental_model) {
      const PointCloud parts[] = {std::move(model), report.aligned.back()};
      model = merge(parts);
    }
  }
  report.merged = merge(report.aligned);
  return report;
}

std::string format_transforms(std::span<const RigidTransform> transforms) {
  std::ostringstream out;
  out.precision(17);
  for (const RigidTransform& t : transforms) {
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 3; ++c) out << t.rotation()(r, c) << ' ';
    }
    out << t.translation().x() << ' ' << t.translation().y() << ' ' << t.translation().z() << '\n';
  }
  return out.str();
}

std::vector<RigidTransform> parse_transforms(const std::string& text) {
  std::vector<RigidTransform> out;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream row(line);
    double v[12];
    int count = 0;
    while (count < 12 && row >> v[count]) ++count;
    if (count == 0 && line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::string rest;
    if (count != 12 || (row >> rest))
      throw ParseError("expected 12 numbers per transform line", line_no, ParseError::Unit::line);
    Mat3 r;
    r << v[0], v[1], v[2], v[3], v[4], v[5], v[6], v[7], v[8];
    out.emplace_back(r, Vec3(v[9], v[10], v[11]));
  }
  return out;
}

}  // namespace turnscan
