#include <gtest/gtest.h>

#include <numbers>

#include "support.hpp"
#include "elio/sim/profile.hpp"

using namespace elio;

namespace {

std::vector<Vec3> ring(std::size_t n, double radius, double z = 0.0) {
  std::vector<Vec3> out;
  for (std::size_t i = 0; i < n; ++i) {
    const double a = 2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n);
    out.emplace_back(radius * std::cos(a), radius * std::sin(a), z);
  }
  return out;
}

}  // namespace

TEST(RobustMaxDepth, ConstantRadius) {
  const auto d = robust_max_depth(ring(100, 2.0, 0.7));
  ASSERT_TRUE(d);
  EXPECT_NEAR(*d, 2.0, 1e-12);
}

TEST(RobustMaxDepth, IgnoresOutliersAboveRank) {
  auto pts = ring(94, 1.0);
  for (const auto& p : ring(6, 50.0)) pts.push_back(p);
  const auto d = robust_max_depth(pts);
  ASSERT_TRUE(d);
  EXPECT_NEAR(*d, 1.0, 1e-12);
}

TEST(RobustMaxDepth, UniformRadiiOrderStatistic) {
  test::Rng rng(1);
  std::vector<Vec3> pts;
  for (int i = 0; i < 20000; ++i) {
    const double r = test::uniform(rng, 0.0, 10.0), a = test::uniform(rng, 0.0, 2.0 * std::numbers::pi);
    pts.emplace_back(r * std::cos(a), r * std::sin(a), test::uniform(rng, -1.0, 1.0));
  }
  const auto d = robust_max_depth(pts);
  ASSERT_TRUE(d);
  EXPECT_NEAR(*d, 9.4, 0.05);
}

TEST(RobustMaxDepth, TooFewPoints) { EXPECT_FALSE(robust_max_depth(ring(10, 1.0))); }

TEST(EntryDetector, SustainedConfinement) {
  EntryDetector det;
  int flags = 0;
  double flagged_at = -1.0;
  for (int i = 0; i <= 30; ++i) {
    const double t = 0.1 * i;
    if (det.update(1.5, t)) {
      ++flags;
      flagged_at = t;
    }
  }
  EXPECT_EQ(flags, 1);
  EXPECT_NEAR(flagged_at, 2.0, 1e-9);
}

TEST(EntryDetector, InterruptionResetsTimer) {
  EntryDetector det;
  for (int i = 0; i <= 19; ++i) EXPECT_FALSE(det.update(1.5, 0.1 * i));
  EXPECT_FALSE(det.update(3.5, 2.0));
  EXPECT_FALSE(det.below_since());
  for (int i = 21; i < 40; ++i) EXPECT_FALSE(det.update(1.5, 0.1 * i));
}

TEST(EntryDetector, StrictThreshold) {
  EntryDetector det;
  bool flagged = false;
  for (int i = 0; i <= 20; ++i) flagged |= det.update(2.9, 0.1 * i);
  EXPECT_TRUE(flagged);
  det.reset();
  flagged = false;
  for (int i = 0; i <= 40; ++i) flagged |= det.update(3.0, 0.1 * i);
  EXPECT_FALSE(flagged);
}

TEST(ExitFsm, NoisyTrapezoidFlagsOnce) {
  // 1 m/s^2 for 1.5 s, cruise 4 s at 1.5 m/s, -1 m/s^2 for 1.5 s.
  sim::TrapezoidProfile prof;
  prof.travel = 1.5 * 1.5 + 1.5 * 4.0;
  prof.a_max = 1.0;
  prof.v_peak = 1.5;
  prof.t_acc = 1.5;
  prof.t_cruise = 4.0;
  const double start = 2.0, stop = start + prof.duration();
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    test::Rng rng(seed);
    std::normal_distribution<double> noise(0.0, 0.02);
    ExitFsm fsm;
    std::vector<double> flags;
    for (int i = 0; i <= 300; ++i) {
      const double t = 0.1 * i;
      if (fsm.update(prof.at(t - start).v + noise(rng), t)) flags.push_back(t);
    }
    ASSERT_EQ(flags.size(), 1u) << "seed " << seed;
    EXPECT_GE(flags.front(), stop);
    EXPECT_LE(flags.front(), stop + 1.5 + 1e-9);
  }
}

TEST(ExitFsm, ZeroVelocityNeverFlags) {
  ExitFsm fsm;
  for (int i = 0; i < 600; ++i) EXPECT_FALSE(fsm.update(0.0, 0.1 * i));
  EXPECT_EQ(fsm.phase(), ExitFsm::Phase::Idle);
}

TEST(ExitFsm, EndlessCruiseNeverFlags) {
  ExitFsm fsm;
  for (int i = 0; i < 600; ++i) {
    const double t = 0.1 * i;
    EXPECT_FALSE(fsm.update(std::min(t, 1.5), t));
  }
  EXPECT_EQ(fsm.phase(), ExitFsm::Phase::Cruise);
}

TEST(ExitFsm, ShortTriangularRide) {
  // Peak velocity 1 m/s reached and shed without a cruise.
  const auto prof = sim::trapezoid_profile(1.0, 1.0, 10.0);
  ExitFsm fsm;
  int flags = 0;
  for (int i = 0; i <= 100; ++i) {
    const double t = 0.1 * i;
    flags += fsm.update(prof.at(t - 1.0).v, t) ? 1 : 0;
  }
  EXPECT_EQ(flags, 1);
}

TEST(TriggerQueue, DrainsInTimeOrder) {
  TriggerQueue q;
  q.push({2.0, Trigger::Exit});
  q.push({1.0, Trigger::Entry});
  q.push({3.0, Trigger::Entry});
  EXPECT_TRUE(q.drain(0.5).empty());
  const auto first = q.drain(2.0);
  ASSERT_EQ(first.size(), 2u);
  EXPECT_EQ(first[0].trigger, Trigger::Entry);
  EXPECT_EQ(first[1].trigger, Trigger::Exit);
  EXPECT_EQ(q.drain(10.0).size(), 1u);
}
