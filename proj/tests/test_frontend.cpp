#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <set>
#include <tuple>

#include "support.hpp"

using namespace elio;

TEST(VoxelDownsample, CubeCornersCollapse) {
  std::vector<Vec3> pts;
  for (int i = 0; i < 8; ++i) pts.emplace_back(i & 1, (i >> 1) & 1, (i >> 2) & 1);
  EXPECT_EQ(voxel_downsample(pts, 2.0).size(), 1u);
}

TEST(VoxelDownsample, FineGridKeepsEverything) {
  std::vector<Vec3> pts;
  for (int i = 0; i < 5; ++i) {
    for (int j = 0; j < 5; ++j) pts.emplace_back(0.3 * i, 0.3 * j, 0.1);
  }
  // A voxel diagonal shorter than the spacing cannot hold two points.
  EXPECT_EQ(voxel_downsample(pts, 0.15).size(), pts.size());
}

TEST(VoxelDownsample, MatchesBruteForceCensus) {
  test::Rng rng(1);
  std::vector<Vec3> pts;
  for (int i = 0; i < 10000; ++i) pts.push_back(test::random_vec(rng, 5.0));
  std::set<std::tuple<long, long, long>> census;
  for (const auto& p : pts) {
    census.emplace(std::lround(std::floor(p.x())), std::lround(std::floor(p.y())), std::lround(std::floor(p.z())));
  }
  const auto out = voxel_downsample(pts, 1.0);
  EXPECT_EQ(out.size(), census.size());
}

TEST(VoxelDownsample, OrderIndependent) {
  test::Rng rng(2);
  std::vector<Vec3> pts;
  for (int i = 0; i < 2000; ++i) pts.push_back(test::random_vec(rng, 3.0));
  auto shuffled = pts;
  std::shuffle(shuffled.begin(), shuffled.end(), rng);
  const auto a = voxel_downsample(pts, 0.4), b = voxel_downsample(shuffled, 0.4);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i], b[i]);
}

TEST(AdaptVoxel, OnTargetUnchanged) {
  AdaptiveVoxelState s;
  EXPECT_DOUBLE_EQ(adapt_voxel(s, 2000).voxel, 0.2);
}

TEST(AdaptVoxel, PowerLaw) {
  AdaptiveVoxelState s;
  s.voxel = 0.2;
  EXPECT_NEAR(adapt_voxel(s, 4000).voxel, 0.2 * std::pow(2.0, 1.0 / 1.2), 1e-12);
  EXPECT_NEAR(adapt_voxel(s, 4000).voxel, 0.3564, 1e-4);
}

TEST(AdaptVoxel, Clamped) {
  AdaptiveVoxelState s;
  s.voxel = 0.7;
  EXPECT_EQ(adapt_voxel(s, 8000).voxel, 0.8);
  s.voxel = 0.06;
  EXPECT_EQ(adapt_voxel(s, 10).voxel, 0.05);
}

TEST(Preprocess, DropsInvalidPoints) {
  test::Rng rng(3);
  Scan scan;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (int i = 0; i < 1000; ++i) {
    if (i % 10 < 3) {
      scan.points.emplace_back(nan, 1.0, 1.0);
    } else {
      scan.points.push_back(Vec3(2.0, 0.0, 0.0) + test::random_vec(rng, 1.0));
    }
  }
  FrontendOptions opts;
  opts.adapt = false;
  const auto out = preprocess(scan, AdaptiveVoxelState{}, opts);
  EXPECT_EQ(out.filtered.size(), 700u);
  for (const auto& p : out.downsampled) EXPECT_TRUE(p.allFinite());
}

TEST(Preprocess, EmptyScanThrows) {
  Scan scan;
  scan.points.emplace_back(0.1, 0.0, 0.0);
  try {
    preprocess(scan, AdaptiveVoxelState{}, FrontendOptions{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::EmptyScan);
  }
}

TEST(Preprocess, WithoutUndistortionEqualsDownsample) {
  test::Rng rng(4);
  Scan scan;
  for (int i = 0; i < 3000; ++i) {
    scan.points.push_back(test::random_vec(rng, 8.0));
    scan.offsets.push_back(-0.1 * test::uniform(rng, 0.0, 1.0));
  }
  FrontendOptions opts;
  const auto out = preprocess(scan, AdaptiveVoxelState{}, opts, {Vec3(0, 0, 1), Vec3(1, 0, 0)});
  const auto ref = voxel_downsample(out.filtered, 0.2);
  ASSERT_EQ(out.downsampled.size(), ref.size());
  for (std::size_t i = 0; i < ref.size(); ++i) EXPECT_EQ(out.downsampled[i], ref[i]);
}

TEST(Undistort, ConstantMotionOracle) {
  // A point seen dt before the scan end under pure translation moves by v*dt.
  const std::vector<Vec3> pts{{2, 0, 0}};
  const std::vector<double> offs{-0.05};
  const auto out = undistort(pts, offs, {Vec3::Zero(), Vec3(1, 0, 0)}, Extrinsics{});
  EXPECT_LT((out[0] - Vec3(1.95, 0, 0)).norm(), 1e-12);
  const auto zero = undistort(pts, std::vector<double>{0.0}, {Vec3(0, 0, 1), Vec3(1, 0, 0)}, Extrinsics{});
  EXPECT_EQ(zero[0], pts[0]);
}
