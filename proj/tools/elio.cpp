#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "elio/config.hpp"
#include "elio/evaluate.hpp"
#include "elio/io.hpp"
#include "elio/pipeline.hpp"
#include "elio/sim/generate.hpp"

namespace {

int simulate(const std::string& scenario_path, const std::string& out, std::optional<std::uint64_t> seed) {
  auto s = elio::sim::load_scenario(scenario_path);
  if (seed) s.seed = *seed;
  elio::sim::write_generated(s, out);
  std::cout << "wrote " << out << "/sequence.jsonl and " << out << "/ground_truth.csv\n";
  return 0;
}

int run(const std::string& seq, const std::string& config, const std::string& out, bool no_zupt, bool no_adapt,
        bool no_elevator, const std::string& triggers) {
  elio::RunConfig cfg = config.empty() ? elio::RunConfig{} : elio::load_config(config);
  if (no_zupt) cfg.zupt = false;
  if (no_adapt) cfg.frontend.adapt = false;
  if (no_elevator) cfg.elevator_mode = false;
  cfg.validate();
  std::vector<elio::TriggerQueue::Item> manual;
  if (!triggers.empty()) manual = elio::read_triggers(triggers);

  std::filesystem::create_directories(out);
  const auto dir = std::filesystem::path(out);
  std::ofstream traj(dir / "trajectory.csv");
  if (!traj) throw elio::Error(elio::ErrorKind::ConfigError, "cannot write into " + out);
  traj << elio::kTrajectoryHeader << '\n';
  const auto outcome =
      elio::run_sequence(seq, cfg, [&](const elio::TrajectoryRecord& r) { traj << elio::to_csv(r) << '\n'; }, manual);
  traj.flush();

  const auto& st = outcome.stats;
  nlohmann::json report;
  report["aborted"] = outcome.aborted;
  if (outcome.aborted) report["abort_reason"] = outcome.abort_reason;
  report["seconds"] = outcome.seconds;
  report["imu"] = st.imu;
  report["scans"] = st.scans;
  report["dropped_scans"] = st.dropped_scans;
  report["propagations"] = st.propagations;
  report["updates"] = st.updates;
  report["degenerate"] = st.degenerate;
  report["entries"] = st.entries;
  report["exits"] = st.exits;
  report["zupt"] = cfg.zupt;
  report["adapt"] = cfg.frontend.adapt;
  report["elevator_mode"] = cfg.elevator_mode;
  std::ofstream(dir / "report.json") << report.dump(2) << '\n';
  if (outcome.aborted) {
    std::cerr << "run aborted: " << outcome.abort_reason << '\n';
    return 2;
  }
  return 0;
}

int eval(const std::string& traj_path, const std::string& gt_path, std::optional<double> zref) {
  const auto traj = elio::read_trajectory(traj_path);
  elio::Metrics m;
  if (!gt_path.empty()) {
    const auto gt = elio::read_ground_truth(gt_path);
    m = elio::evaluate(traj, gt);
  } else if (zref) {
    m = elio::evaluate_against_height(traj, *zref);
  } else {
    throw elio::Error(elio::ErrorKind::MissingReference, "eval needs --gt or --zref");
  }
  std::cout << elio::to_json(m).dump(2) << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Elevator-aware LiDAR-inertial odometry"};
  app.require_subcommand(1);

  std::string scenario, sim_out;
  std::optional<std::uint64_t> seed;
  auto* sim = app.add_subcommand("simulate", "Generate a synthetic elevator sequence");
  sim->add_option("--scenario", scenario, "Scenario JSON")->required()->check(CLI::ExistingFile);
  sim->add_option("--out", sim_out, "Output directory")->required();
  sim->add_option("--seed", seed, "Override the scenario seed");

  std::string seq, config, run_out, triggers;
  bool no_zupt = false, no_adapt = false, no_elevator = false;
  auto* runc = app.add_subcommand("run", "Run the estimator over a sequence");
  runc->add_option("--seq", seq, "Sequence JSON-lines file")->required()->check(CLI::ExistingFile);
  runc->add_option("--config", config, "Run configuration JSON")->check(CLI::ExistingFile);
  runc->add_option("--out", run_out, "Output directory")->required();
  runc->add_flag("--no-zupt", no_zupt, "Skip the exit-time zero-state update");
  runc->add_flag("--no-adapt", no_adapt, "Fixed 0.2 m voxel grid");
  runc->add_flag("--no-elevator-mode", no_elevator, "Never leave the inertial formulation");
  runc->add_option("--triggers", triggers, "Manual trigger file (lines 't entry|exit')")->check(CLI::ExistingFile);

  std::string traj, gt;
  std::optional<double> zref;
  auto* evalc = app.add_subcommand("eval", "Vertical error metrics");
  evalc->add_option("--traj", traj, "Trajectory CSV")->required()->check(CLI::ExistingFile);
  auto* gt_opt = evalc->add_option("--gt", gt, "Ground-truth CSV")->check(CLI::ExistingFile);
  evalc->add_option("--zref", zref, "Reference end height [m]")->excludes(gt_opt);

  CLI11_PARSE(app, argc, argv);
  try {
    if (*sim) return simulate(scenario, sim_out, seed);
    if (*runc) return run(seq, config, run_out, no_zupt, no_adapt, no_elevator, triggers);
    if (*evalc) return eval(traj, gt, zref);
  } catch (const elio::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
