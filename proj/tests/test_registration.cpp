#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "turnscan/error.hpp"
#include "turnscan/registration.hpp"
#include "turnscan/shapes.hpp"

using namespace turnscan;

namespace {

std::vector<Vec3> random_points(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<Vec3> pts(n);
  for (auto& p : pts) p = Vec3(u(rng), u(rng), u(rng));
  return pts;
}

std::vector<Vec3> transformed(const RigidTransform& t, const std::vector<Vec3>& pts) {
  std::vector<Vec3> out;
  for (const Vec3& p : pts) out.push_back(t.apply(p));
  return out;
}

double mse(const RigidTransform& t, const std::vector<Vec3>& src, const std::vector<Vec3>& dst) {
  double s = 0.0;
  for (std::size_t i = 0; i < src.size(); ++i) s += (dst[i] - t.apply(src[i])).squaredNorm();
  return s / static_cast<double>(src.size());
}

PointCloud notched_cube_samples(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  PointCloud c;
  c.points = oracle::sample_surface(make_notched_cube(0.2), n, rng);
  return c;
}

}  // namespace

TEST(Kabsch, IdentityForEqualSets) {
  std::mt19937_64 rng(30);
  const auto pts = random_points(rng, 50);
  const RigidTransform t = kabsch(pts, pts);
  EXPECT_LE(rotation_distance(t, RigidTransform::identity()), 1e-12);
  EXPECT_LE(t.translation().norm(), 1e-12);
}

TEST(Kabsch, ExactRecovery) {
  std::mt19937_64 rng(31);
  const auto pts = random_points(rng, 100);
  const RigidTransform truth(RigidTransform::rotation_about(Vec3::UnitZ(), 37).rotation(), Vec3(0.1, -0.2, 0.3));
  const RigidTransform t = kabsch(pts, transformed(truth, pts));
  EXPECT_LE(rotation_distance(t, truth), 1e-9);
  EXPECT_LE((t.translation() - truth.translation()).norm(), 1e-9);
}

TEST(Kabsch, NoisyIsAtLeastAsGoodAsTruth) {
  std::mt19937_64 rng(32);
  std::normal_distribution<double> g(0.0, 0.001);
  const auto pts = random_points(rng, 500);
  const RigidTransform truth = oracle::random_transform(rng);
  auto dst = transformed(truth, pts);
  for (auto& p : dst) p += Vec3(g(rng), g(rng), g(rng));
  const RigidTransform t = kabsch(pts, dst);
  EXPECT_LE(mse(t, pts, dst), mse(truth, pts, dst) + 1e-9);
}

TEST(Kabsch, NoReflectionForMirroredInput) {
  std::mt19937_64 rng(33);
  const auto pts = random_points(rng, 40);
  std::vector<Vec3> mirrored;
  for (const Vec3& p : pts) mirrored.emplace_back(p.x(), p.y(), -p.z());
  EXPECT_NEAR(kabsch(pts, mirrored).rotation().determinant(), 1.0, 1e-9);
}

TEST(Kabsch, CommonFrameCovariance) {
  std::mt19937_64 rng(34);
  std::normal_distribution<double> g(0.0, 0.01);
  const auto src = random_points(rng, 200);
  auto dst = transformed(oracle::random_transform(rng), src);
  for (auto& p : dst) p += Vec3(g(rng), g(rng), g(rng));
  const RigidTransform frame = oracle::random_transform(rng, 3.0);
  const RigidTransform direct = kabsch(src, dst);
  const RigidTransform moved = kabsch(transformed(frame, src), transformed(frame, dst));
  const RigidTransform expected = compose(frame, compose(direct, invert(frame)));
  EXPECT_LE(rotation_distance(moved, expected), 1e-9);
  EXPECT_LE((moved.translation() - expected.translation()).norm(), 1e-9);
}

TEST(Kabsch, RejectsBadInput) {
  std::vector<Vec3> two{Vec3::Zero(), Vec3::UnitX()};
  EXPECT_THROW(kabsch(two, two), InvalidInput);
  std::vector<Vec3> line{Vec3::Zero(), Vec3::UnitX(), Vec3(2, 0, 0), Vec3(3, 0, 0)};
  EXPECT_THROW(kabsch(line, line), InvalidInput);
  std::vector<Vec3> three{Vec3::Zero(), Vec3::UnitX(), Vec3::UnitY()};
  EXPECT_THROW(kabsch(three, line), InvalidInput);
}

TEST(Icp, IdenticalClouds) {
  const PointCloud c = notched_cube_samples(3000, 35);
  const IcpResult r = icp(c, c, IcpParams{});
  EXPECT_LE(rotation_distance(r.transform, RigidTransform::identity()), 1e-12);
  EXPECT_LE(r.fitness, 1e-20);
  EXPECT_TRUE(r.converged);
  EXPECT_LE(r.iterations_used, 2);
}

TEST(Icp, RecoversTurntableStep) {
  const PointCloud target = notched_cube_samples(20000, 36);
  const RigidTransform step = RigidTransform::rotation_about(Vec3::UnitY(), 10.0);
  // target = step(source)
  const PointCloud source = apply_transform(invert(step), target);
  IcpParams p;
  p.max_iterations = 200;
  p.fitness_epsilon = 1e-12;
  const IcpResult r = icp(source, target, p);
  EXPECT_LE(rotation_error_degrees(r.transform, step), 0.1);
  EXPECT_LE(r.transform.translation().norm(), 1e-4);
  EXPECT_LE(r.iterations_used, p.max_iterations);
  for (std::size_t i = 1; i < r.fitness_history.size(); ++i)
    EXPECT_LE(r.fitness_history[i], r.fitness_history[i - 1] + 1e-12) << i;
}

TEST(Icp, DisjointCloudsLackOverlap) {
  const PointCloud a = notched_cube_samples(500, 37);
  const PointCloud b = apply_transform(RigidTransform::translation(Vec3(10, 0, 0)), a);
  EXPECT_THROW(icp(a, b, IcpParams{}), InsufficientOverlap);
}

TEST(Icp, ParallelEqualsSerial) {
  const PointCloud target = notched_cube_samples(5000, 38);
  const PointCloud source = apply_transform(RigidTransform::rotation_about(Vec3::UnitY(), -7.0), target);
  const IcpResult s = icp(source, target, IcpParams{}, Exec::serial);
  const IcpResult p = icp(source, target, IcpParams{}, Exec::parallel);
  EXPECT_EQ(s.fitness_history, p.fitness_history);
  EXPECT_EQ(s.transform.rotation(), p.transform.rotation());
  EXPECT_EQ(s.transform.translation(), p.transform.translation());
}

TEST(AlignSequence, IdenticalClouds) {
  const PointCloud c = notched_cube_samples(4000, 39);
  const std::vector<PointCloud> clouds{c, c};
  for (auto strategy : {AlignStrategy::pairwise_chain, AlignStrategy::incremental_model}) {
    const AlignmentReport r = align_sequence(clouds, IcpParams{}, strategy, 0.0, OutlierParams{});
    ASSERT_EQ(r.cumulative.size(), 2u);
    EXPECT_LE(rotation_distance(r.cumulative[0], RigidTransform::identity()), 0.0);
    EXPECT_LE(rotation_distance(r.cumulative[1], RigidTransform::identity()), 1e-9);
    EXPECT_LE(r.cumulative[1].translation().norm(), 1e-9);
  }
}

TEST(AlignSequence, ChainComposition) {
  // View i sees the object rotated by i steps; TC_i maps view i back to view 0.
  const PointCloud base = notched_cube_samples(8000, 40);
  std::vector<PointCloud> clouds;
  for (int i = 0; i < 6; ++i)
    clouds.push_back(apply_transform(RigidTransform::rotation_about(Vec3::UnitY(), 10.0 * i), base));
  IcpParams p;
  p.max_iterations = 200;
  p.fitness_epsilon = 1e-12;
  const AlignmentReport r = register_sequence(clouds, p, AlignStrategy::pairwise_chain);
  for (std::size_t i = 1; i < clouds.size(); ++i) {
    const RigidTransform expected = compose(r.cumulative[i - 1], r.pairwise[i]);
    EXPECT_LE(rotation_distance(expected, r.cumulative[i]), 1e-12);
    EXPECT_NEAR(r.cumulative[i].angle_degrees(), 10.0 * static_cast<double>(i), 0.1);
  }
  EXPECT_EQ(r.merged.size(), 6 * base.size());
}

TEST(AlignSequence, IncrementalModelRecoversSteps) {
  const PointCloud base = notched_cube_samples(8000, 41);
  std::vector<PointCloud> clouds;
  for (int i = 0; i < 5; ++i)
    clouds.push_back(apply_transform(RigidTransform::rotation_about(Vec3::UnitY(), -10.0 * i), base));
  IcpParams p;
  p.max_iterations = 200;
  p.fitness_epsilon = 1e-12;
  const AlignmentReport r = register_sequence(clouds, p, AlignStrategy::incremental_model);
  for (std::size_t i = 1; i < clouds.size(); ++i) {
    const RigidTransform truth = RigidTransform::rotation_about(Vec3::UnitY(), 10.0 * static_cast<double>(i));
    EXPECT_LE(rotation_error_degrees(r.cumulative[i], truth), 0.1) << i;
  }
}

TEST(AlignSequence, FailureNamesThePair) {
  const PointCloud a = notched_cube_samples(1000, 42);
  const std::vector<PointCloud> clouds{a, a, apply_transform(RigidTransform::translation(Vec3(5, 0, 0)), a)};
  try {
    register_sequence(clouds, IcpParams{}, AlignStrategy::pairwise_chain);
    FAIL();
  } catch (const InsufficientOverlap& e) {
    EXPECT_NE(std::string(e.what()).find("cloud 2 to cloud 1"), std::string::npos) << e.what();
  }
  EXPECT_THROW(register_sequence(std::vector<PointCloud>{a}, IcpParams{}, AlignStrategy::pairwise_chain),
               InvalidInput);
}

TEST(Transforms, TextRoundTrip) {
  std::mt19937_64 rng(43);
  std::vector<RigidTransform> ts;
  for (int i = 0; i < 5; ++i) ts.push_back(oracle::random_transform(rng));
  const auto back = parse_transforms(format_transforms(ts));
  ASSERT_EQ(back.size(), ts.size());
  for (std::size_t i = 0; i < ts.size(); ++i) {
    EXPECT_LE(rotation_distance(back[i], ts[i]), 1e-15);
    EXPECT_EQ(back[i].translation(), ts[i].translation());
  }
  EXPECT_THROW(parse_transforms("1 2 3\n"), ParseError);
}
