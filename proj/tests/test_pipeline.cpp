#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include "support.hpp"
#include "elio/config.hpp"

using namespace elio;

namespace {

ImuSample imu_at(double t, const Vec3& acc = Vec3(0, 0, 9.81)) { return ImuSample{t, acc, Vec3::Zero()}; }

std::vector<ImuSample> constant_samples(const Vec3& acc, const Vec3& gyro, std::size_t n) {
  std::vector<ImuSample> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back({0.005 * i, acc, gyro});
  return out;
}

TrajectoryRecord record(double t, double z, unsigned flags = 0) {
  TrajectoryRecord r;
  r.t = t;
  r.position = Vec3(0, 0, z);
  r.flags = flags;
  return r;
}

GroundTruthRow truth(double t, double z, Mode mode = Mode::Inertial, double v = 0.0) {
  GroundTruthRow r;
  r.t = t;
  r.position = Vec3(0, 0, z);
  r.mode = mode;
  r.elevator_vel = v;
  return r;
}

std::string csv(const std::vector<TrajectoryRecord>& traj) {
  std::ostringstream out;
  for (const auto& r : traj) out << to_csv(r) << '\n';
  return out.str();
}

}  // namespace

TEST(SequenceBuffer, OrdersByTimeWithImuFirst) {
  SequenceBuffer buf;
  Scan scan;
  scan.t = 0.1;
  buf.push(scan);
  buf.push(imu_at(0.2));
  buf.push(imu_at(0.1));
  buf.push(imu_at(0.05));
  std::vector<std::pair<double, bool>> order;
  while (auto e = buf.pop()) order.emplace_back(event_time(*e), is_scan(*e));
  const std::vector<std::pair<double, bool>> expected{{0.05, false}, {0.1, false}, {0.1, true}, {0.2, false}};
  EXPECT_EQ(order, expected);
}

TEST(SequenceBuffer, HoldsBackInsideWindow) {
  SequenceBuffer buf;
  buf.push(imu_at(1.0));
  EXPECT_FALSE(buf.pop(0.1, false));
  buf.push(imu_at(1.2));
  const auto e = buf.pop(0.1, false);
  ASSERT_TRUE(e);
  EXPECT_EQ(event_time(*e), 1.0);
  EXPECT_FALSE(buf.pop(0.1, false));
}

TEST(StaticInit, LevelIsIdentity) {
  const auto x = static_init(constant_samples({0, 0, 9.81}, Vec3::Zero(), 100));
  EXPECT_LT(log_so3(x.rotation).norm(), 1e-12);
  EXPECT_EQ(x.gravity, Vec3(0, 0, -9.81));
}

TEST(StaticInit, PitchedMount) {
  const double a = 10.0 * std::numbers::pi / 180.0;
  const Vec3 acc(9.81 * std::sin(a), 0, 9.81 * std::cos(a));
  const auto x = static_init(constant_samples(acc, Vec3::Zero(), 100));
  // The rotated specific force must oppose gravity.
  EXPECT_LT((x.rotation * -acc).normalized().cross(x.gravity.normalized()).norm(), 1e-9);
  EXPECT_GT((x.rotation * -acc).dot(x.gravity), 0.0);
  const Vec3 w = log_so3(x.rotation);
  EXPECT_NEAR(std::abs(w.y()), a, 1e-9);
  EXPECT_NEAR(w.y(), -a, 1e-9);
}

TEST(StaticInit, GyroBias) {
  const auto x = static_init(constant_samples({0, 0, 9.81}, {0.01, 0, 0}, 100));
  EXPECT_LT((x.gyro_bias - Vec3(0.01, 0, 0)).norm(), 1e-15);
}

TEST(StaticInit, RejectsMotionAndShortWindows) {
  auto samples = constant_samples({0, 0, 9.81}, Vec3::Zero(), 100);
  samples[50].acc.z() += 0.5;
  EXPECT_THROW(static_init(samples), Error);
  EXPECT_THROW(static_init(constant_samples({0, 0, 9.81}, Vec3::Zero(), 10)), Error);
}

TEST(Config, DefaultsValidate) { EXPECT_NO_THROW(RunConfig{}.validate()); }

TEST(Config, ParsesKeys) {
  const auto j = nlohmann::json::parse(R"({
    "noise": {"elevator_acc": 0.3},
    "update": {"kappa_max": 3, "neighbors": 6},
    "zupt": {"r_v": 2e-5, "reset_prior": [1e-5, 1e-5, 1e-5]},
    "entry": {"d_th": 2.5},
    "frontend": {"adapt": false},
    "zupt_enabled": false
  })");
  const auto c = config_from_json(j);
  EXPECT_EQ(c.noise.elevator_acc, 0.3);
  EXPECT_EQ(c.update.max_iterations, 3);
  EXPECT_EQ(c.update.neighbors, 6);
  EXPECT_EQ(c.exit.zupt_noise(0), 2e-5);
  EXPECT_EQ(c.exit.reset_prior(2), 1e-5);
  EXPECT_EQ(c.entry.depth_threshold, 2.5);
  EXPECT_FALSE(c.frontend.adapt);
  EXPECT_FALSE(c.zupt);
  EXPECT_EQ(c.voxel_state().voxel, c.fixed_voxel);
}

TEST(Config, RejectsInvalid) {
  EXPECT_THROW(config_from_json(nlohmann::json::parse(R"({"noise": {"acc": -1}})")), Error);
  EXPECT_THROW(config_from_json(nlohmann::json::parse(R"({"entry": {"percentile": 1.5}})")), Error);
  EXPECT_THROW(config_from_json(nlohmann::json::parse(R"({"update": {"neighbors": "five"}})")), Error);
}

TEST(Io, EventRoundTrip) {
  const ImuSample u{1.25, Vec3(0.1, -0.2, 9.8), Vec3(0.001, 0.002, -0.003)};
  const auto back = std::get<ImuSample>(parse_event(to_jsonl(u)));
  EXPECT_EQ(back.t, u.t);
  EXPECT_EQ(back.acc, u.acc);
  EXPECT_EQ(back.gyro, u.gyro);

  Scan s;
  s.t = 2.5;
  s.points = {{1.0, 2.0, 3.0}, {-4.5, 0.25, 0.125}};
  const auto scan = std::get<Scan>(parse_event(to_jsonl(s)));
  EXPECT_EQ(scan.t, 2.5);
  ASSERT_EQ(scan.points.size(), 2u);
  EXPECT_EQ(scan.points[1], s.points[1]);
}

TEST(Io, ParseErrors) {
  EXPECT_THROW(parse_event("{\"t\": 1.0}"), Error);
  EXPECT_THROW(parse_event("not json"), Error);
  EXPECT_THROW(parse_event(R"({"t":1,"imu":{"acc":[1,2],"gyr":[0,0,0]}})"), Error);
}

TEST(Io, FlagsRoundTrip) {
  for (unsigned f = 0; f < 32; ++f) EXPECT_EQ(flags_from_string(flags_to_string(f)), f);
}

TEST(Io, Triggers) {
  std::istringstream in("# manual\n12.5 entry\n\n30 exit  # door\n");
  const auto items = parse_triggers(in);
  ASSERT_EQ(items.size(), 2u);
  EXPECT_EQ(items[0].t, 12.5);
  EXPECT_EQ(items[0].trigger, Trigger::Entry);
  EXPECT_EQ(items[1].trigger, Trigger::Exit);
  std::istringstream bad("5 open\n");
  EXPECT_THROW(parse_triggers(bad), Error);
}

TEST(Evaluate, TerminalError) {
  const std::vector<TrajectoryRecord> traj{record(0.0, 0.0), record(10.0, 0.002)};
  EXPECT_NEAR(evaluate_against_height(traj, 0.0).e_z, 0.002, 1e-15);
}

TEST(Evaluate, ReturnErrorAtLastRide) {
  const std::vector<GroundTruthRow> gt{truth(0.0, 0.5), truth(1.0, 0.5, Mode::NonInertial, 1.0),
                                       truth(5.0, 6.5, Mode::NonInertial), truth(6.0, 6.5), truth(9.0, 6.5)};
  const std::vector<TrajectoryRecord> traj{record(0.0, 0.0), record(2.0, 1.0, flag::kEntry),
                                           record(5.5, 6.01, flag::kExit), record(9.0, 6.02)};
  const auto m = evaluate(traj, gt);
  EXPECT_NEAR(m.e_ret, 0.01, 1e-12);
  EXPECT_NEAR(m.e_z, 0.02, 1e-12);
  EXPECT_EQ(m.entry_ratio(), "1/1");
  EXPECT_EQ(m.exit_ratio(), "1/1");
  EXPECT_EQ(m.false_entries, 0);
}

TEST(Evaluate, DetectionRatioFormat) { EXPECT_EQ(detection_ratio(6, 7), "6/7"); }

TEST(Evaluate, FalseEntryOutsideDoorInterval) {
  const std::vector<GroundTruthRow> gt{truth(0.0, 0.0), truth(5.0, 0.0, Mode::NonInertial), truth(8.0, 0.0)};
  const std::vector<TrajectoryRecord> traj{record(0.0, 0.0), record(2.0, 0.0, flag::kEntry)};
  const auto m = evaluate(traj, gt);
  EXPECT_EQ(m.false_entries, 1);
  EXPECT_EQ(m.entries_detected, 0);
}

TEST(Estimator, StationaryDrift) {
  sim::Scenario s;
  s.rides.clear();
  s.timing.initial_static = 27.0;
  s.timing.tail = 3.0;
  const auto run = test::simulate_and_run(s);
  ASSERT_FALSE(run.aborted);
  ASSERT_FALSE(run.traj.empty());
  EXPECT_LT((run.traj.back().position - run.traj.front().position).norm(), 0.02);
  for (const auto& r : run.traj) EXPECT_EQ(r.mode, Mode::Inertial);
}

TEST(Estimator, NominalRideModesAndDeterminism) {
  const sim::Scenario s;
  const auto a = test::simulate_and_run(s);
  ASSERT_FALSE(a.aborted);
  const auto doors = door_intervals(a.gt);
  ASSERT_EQ(doors.size(), 1u);
  // Exit waits for the deceleration to leave the variance window, then for
  // the stop to be confirmed. Allow 0.5 s on top for the velocity to settle.
  const ExitFsm::Config fsm;
  const double latest = sim::Timeline(s).rides().front().motion_end + fsm.window + fsm.confirm_time + 0.5;
  int non_inertial = 0;
  for (const auto& r : a.traj) {
    if (r.mode != Mode::NonInertial) continue;
    ++non_inertial;
    EXPECT_GE(r.t, doors[0].close);
    EXPECT_LE(r.t, latest);
  }
  EXPECT_GT(non_inertial, 30);
  // Once per scan, and the same bytes twice.
  EXPECT_EQ(a.traj.size(), a.stats.scans - a.stats.dropped_scans);
  const auto b = test::simulate_and_run(s);
  EXPECT_EQ(csv(a.traj), csv(b.traj));
}

TEST(Estimator, ManualTriggersForceModes) {
  sim::Scenario s;
  const sim::Timeline tl(s);
  const auto& ride = tl.rides().front();
  RunConfig cfg;
  cfg.entry.depth_threshold = 0.1;  // automatic entry never fires
  std::vector<TrajectoryRecord> traj;
  Estimator est(cfg, [&](const TrajectoryRecord& r) { traj.push_back(r); });
  est.triggers().push({ride.motion_start - 1.0, Trigger::Entry});
  sim::generate(s, {[&](const SensorEvent& e) { est.process(e); }, {}});
  unsigned seen = 0;
  for (const auto& r : traj) seen |= r.flags;
  EXPECT_TRUE(seen & flag::kManual);
  EXPECT_TRUE(seen & flag::kExit);
}

TEST(Estimator, NonMonotonicTimeAborts) {
  Estimator est(RunConfig{});
  for (int i = 0; i < 150; ++i) est.process(imu_at(0.005 * i));
  ASSERT_TRUE(est.initialized());
  try {
    est.process(imu_at(0.1));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NonMonotonicTime);
  }
}

TEST(Estimator, DataGapAborts) {
  Estimator est(RunConfig{});
  for (int i = 0; i < 150; ++i) est.process(imu_at(0.005 * i));
  try {
    est.process(imu_at(2.0));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::DataGap);
  }
}

TEST(RunSequence, ReadsFileAndReportsAbort) {
  const auto dir = std::filesystem::temp_directory_path() / "elio_run_sequence_test";
  std::filesystem::create_directories(dir);
  const auto path = (dir / "seq.jsonl").string();
  {
    std::ofstream out(path);
    for (int i = 0; i < 150; ++i) out << to_jsonl(imu_at(0.005 * i)) << '\n';
    out << to_jsonl(imu_at(5.0)) << '\n';
  }
  const auto outcome = run_sequence(path, RunConfig{}, {});
  EXPECT_TRUE(outcome.aborted);
  EXPECT_NE(outcome.abort_reason.find("gap"), std::string::npos);
  EXPECT_EQ(outcome.stats.imu, 151u);
  std::filesystem::remove_all(dir);
}
