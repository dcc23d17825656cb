#pragma once

#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "elio/errors.hpp"
#include "elio/mode_manager.hpp"
#include "elio/propagation.hpp"
#include "elio/scan_update.hpp"

namespace elio {

using SensorEvent = std::variant<ImuSample, Scan>;

inline double event_time(const SensorEvent& e) {
  return std::visit([](const auto& v) { return v.t; }, e);
}

inline bool is_scan(const SensorEvent& e) { return std::holds_alternative<Scan>(e); }

/// One JSON-lines record per sensor event.
inline std::string to_jsonl(const SensorEvent& e) {
  std::string out;
  char buf[256];
  if (const auto* u = std::get_if<ImuSample>(&e)) {
    std::snprintf(buf, sizeof(buf), "{\"t\":%.17g,\"imu\":{\"acc\":[%.17g,%.17g,%.17g],\"gyr\":[%.17g,%.17g,%.17g]}}",
                  u->t, u->acc.x(), u->acc.y(), u->acc.z(), u->gyro.x(), u->gyro.y(), u->gyro.z());
    return buf;
  }
  const auto& s = std::get<Scan>(e);
  std::snprintf(buf, sizeof(buf), "{\"t\":%.17g,\"scan\":{\"points\":[", s.t);
  out.reserve(s.points.size() * 32 + 64);
  out += buf;
  for (std::size_t i = 0; i < s.points.size(); ++i) {
    const auto& p = s.points[i];
    std::snprintf(buf, sizeof(buf), "%s[%.6f,%.6f,%.6f]", i ? "," : "", p.x(), p.y(), p.z());
    out += buf;
  }
  out += "]";
  if (!s.offsets.empty()) {
    out += ",\"offsets\":[";
    for (std::size_t i = 0; i < s.offsets.size(); ++i) {
      std::snprintf(buf, sizeof(buf), "%s%.9g", i ? "," : "", s.offsets[i]);
      out += buf;
    }
    out += "]";
  }
  out += "}}";
  return out;
}

inline SensorEvent parse_event(const std::string& line) {
  try {
    const auto j = nlohmann::json::parse(line);
    const double t = j.at("t").get<double>();
    auto vec = [](const nlohmann::json& a) {
      if (!a.is_array() || a.size() != 3) throw Error(ErrorKind::ParseError, "expected [x,y,z]");
      return Vec3(a[0].get<double>(), a[1].get<double>(), a[2].get<double>());
    };
    if (j.contains("imu")) {
      const auto& m = j.at("imu");
      return ImuSample{t, vec(m.at("acc")), vec(m.at("gyr"))};
    }
    if (j.contains("scan")) {
      const auto& s = j.at("scan");
      Scan scan;
      scan.t = t;
      const auto& pts = s.at("points");
      scan.points.reserve(pts.size());
      for (const auto& p : pts) scan.points.push_back(vec(p));
      if (s.contains("offsets")) scan.offsets = s.at("offsets").get<std::vector<double>>();
      return scan;
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::ParseError, e.what());
  }
  throw Error(ErrorKind::ParseError, "record has neither imu nor scan");
}

/// Streams events from a JSON-lines file in file order.
inline void read_sequence(const std::string& path, const std::function<void(SensorEvent&&)>& sink) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::ParseError, "cannot open " + path);
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.empty()) continue;
    try {
      sink(parse_event(line));
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::ParseError) throw;
      throw Error(ErrorKind::ParseError, path + ":" + std::to_string(n) + ": " + e.what());
    }
  }
}

// --- ground truth -----------------------------------------------------------

struct GroundTruthRow {
  double t = 0.0;
  Vec3 position = Vec3::Zero();
  Rotation rotation = Rotation::Identity();
  double elevator_pos = 0.0;
  double elevator_vel = 0.0;
  double elevator_acc = 0.0;
  Mode mode = Mode::Inertial;
};

inline constexpr const char* kGroundTruthHeader = "t,px,py,pz,qw,qx,qy,qz,p_Ez,v_Ez,a_Ez,mode";
inline constexpr const char* kTrajectoryHeader = "t,px,py,pz,qw,qx,qy,qz,p_Ez,v_Ez,a_Ez,mode,flags";

namespace detail {

inline std::string pose_fields(double t, const Vec3& p, const Rotation& q, double pe, double ve, double ae,
                               Mode mode) {
  char buf[320];
  std::snprintf(buf, sizeof(buf), "%.6f,%.9f,%.9f,%.9f,%.9f,%.9f,%.9f,%.9f,%.9f,%.9f,%.9f,%s", t, p.x(), p.y(),
                p.z(), q.w(), q.x(), q.y(), q.z(), pe, ve, ae, to_string(mode));
  return buf;
}

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) out.push_back(cur);
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

inline Mode parse_mode(const std::string& s) {
  if (s == "inertial") return Mode::Inertial;
  if (s == "non_inertial") return Mode::NonInertial;
  throw Error(ErrorKind::ParseError, "unknown mode '" + s + "'");
}

inline double parse_double(const std::string& s) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw Error(ErrorKind::ParseError, "bad number '" + s + "'");
  }
}

}  // namespace detail

inline std::string to_csv(const GroundTruthRow& r) {
  return detail::pose_fields(r.t, r.position, r.rotation, r.elevator_pos, r.elevator_vel, r.elevator_acc, r.mode);
}

inline std::vector<GroundTruthRow> read_ground_truth(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::MissingReference, "cannot open " + path);
  std::string line;
  std::getline(in, line);
  std::vector<GroundTruthRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = detail::split(line, ',');
    if (f.size() < 12) throw Error(ErrorKind::ParseError, "ground truth row has " + std::to_string(f.size()) + " fields");
    GroundTruthRow r;
    r.t = detail::parse_double(f[0]);
    r.position = {detail::parse_double(f[1]), detail::parse_double(f[2]), detail::parse_double(f[3])};
    r.rotation = Rotation(detail::parse_double(f[4]), detail::parse_double(f[5]), detail::parse_double(f[6]),
                          detail::parse_double(f[7]));
    r.elevator_pos = detail::parse_double(f[8]);
    r.elevator_vel = detail::parse_double(f[9]);
    r.elevator_acc = detail::parse_double(f[10]);
    r.mode = detail::parse_mode(f[11]);
    rows.push_back(r);
  }
  return rows;
}

// --- trajectory -------------------------------------------------------------

namespace flag {
inline constexpr unsigned kEntry = 1u << 0;
inline constexpr unsigned kExit = 1u << 1;
inline constexpr unsigned kDegenerate = 1u << 2;
inline constexpr unsigned kEmpty = 1u << 3;
inline constexpr unsigned kManual = 1u << 4;
}  // namespace flag

inline std::string flags_to_string(unsigned f) {
  static constexpr std::pair<unsigned, const char*> kNames[] = {
      {flag::kEntry, "entry"}, {flag::kExit, "exit"}, {flag::kDegenerate, "degenerate"},
      {flag::kEmpty, "empty"}, {flag::kManual, "manual"}};
  std::string s;
  for (const auto& [bit, name] : kNames) {
    if (!(f & bit)) continue;
    if (!s.empty()) s += '|';
    s += name;
  }
  return s.empty() ? "-" : s;
}

inline unsigned flags_from_string(const std::string& s) {
  if (s == "-" || s.empty()) return 0;
  unsigned f = 0;
  for (const auto& part : detail::split(s, '|')) {
    if (part == "entry") f |= flag::kEntry;
    else if (part == "exit") f |= flag::kExit;
    else if (part == "degenerate") f |= flag::kDegenerate;
    else if (part == "empty") f |= flag::kEmpty;
    else if (part == "manual") f |= flag::kManual;
    else throw Error(ErrorKind::ParseError, "unknown flag '" + part + "'");
  }
  return f;
}

/// One record per processed scan; the pose is the global composition.
struct TrajectoryRecord {
  double t = 0.0;
  Vec3 position = Vec3::Zero();
  Rotation rotation = Rotation::Identity();
  Vec3 velocity = Vec3::Zero();
  double elevator_pos = 0.0;
  double elevator_vel = 0.0;
  double elevator_acc = 0.0;
  Mode mode = Mode::Inertial;
  unsigned flags = 0;
};

inline std::string to_csv(const TrajectoryRecord& r) {
  return detail::pose_fields(r.t, r.position, r.rotation, r.elevator_pos, r.elevator_vel, r.elevator_acc, r.mode) +
         "," + flags_to_string(r.flags);
}

inline std::vector<TrajectoryRecord> read_trajectory(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::ParseError, "cannot open " + path);
  std::string line;
  std::getline(in, line);
  std::vector<TrajectoryRecord> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = detail::split(line, ',');
    if (f.size() < 13) throw Error(ErrorKind::ParseError, "trajectory row has " + std::to_string(f.size()) + " fields");
    TrajectoryRecord r;
    r.t = detail::parse_double(f[0]);
    r.position = {detail::parse_double(f[1]), detail::parse_double(f[2]), detail::parse_double(f[3])};
    r.rotation = Rotation(detail::parse_double(f[4]), detail::parse_double(f[5]), detail::parse_double(f[6]),
                          detail::parse_double(f[7]));
    r.elevator_pos = detail::parse_double(f[8]);
    r.elevator_vel = detail::parse_double(f[9]);
    r.elevator_acc = detail::parse_double(f[10]);
    r.mode = detail::parse_mode(f[11]);
    r.flags = flags_from_string(f[12]);
    rows.push_back(r);
  }
  return rows;
}

// --- manual triggers --------------------------------------------------------

/// Lines of `t entry|exit`; blank lines and '#' comments are skipped.
inline std::vector<TriggerQueue::Item> parse_triggers(std::istream& in) {
  std::vector<TriggerQueue::Item> out;
  std::string line;
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    std::istringstream ls(line);
    double t = 0.0;
    std::string what;
    if (!(ls >> t)) {
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      throw Error(ErrorKind::ParseError, "bad trigger line '" + line + "'");
    }
    if (!(ls >> what) || (what != "entry" && what != "exit")) {
      throw Error(ErrorKind::ParseError, "trigger must be 'entry' or 'exit': '" + line + "'");
    }
    out.push_back({t, what == "entry" ? Trigger::Entry : Trigger::Exit});
  }
  return out;
}

inline std::vector<TriggerQueue::Item> read_triggers(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::ParseError, "cannot open " + path);
  return parse_triggers(in);
}

}  // namespace elio
