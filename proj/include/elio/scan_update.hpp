#pragma once

#include <cmath>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "elio/kd_tree.hpp"
#include "elio/state.hpp"

namespace elio {

struct Scan {
  double t = 0.0;  // scan end time [s]
  std::vector<Vec3> points;   // LiDAR frame [m]
  std::vector<double> offsets;  // optional per-point time relative to t (<= 0)
};

struct Plane {
  Vec3 normal;
  Vec3 point;
};

struct PlaneMatch {
  Vec3 normal;      // unit, elevator-local frame
  Vec3 point;       // on the plane
  Vec3 point_body;  // scan point in the IMU frame
};

struct UpdateConfig {
  int neighbors = 5;
  double plane_threshold = 0.1;    // max neighbour-to-plane distance [m]
  double max_neighbor_dist = 0.5;  // farthest of the k neighbours [m]
  double collinear_ratio = 1e-3;   // middle/largest eigenvalue below this -> no plane
  double residual_gate = 0.1;      // applied from the second iteration on [m]
  int max_iterations = 5;
  double epsilon = 1e-4;
  int min_matches = 10;
};

struct UpdateReport {
  int iterations = 0;
  int matched = 0;
  int attempted = 0;
  double mean_abs_residual = 0.0;
  bool converged = false;
  bool degenerate = false;
};

/// Least-squares plane through the neighbours, or nothing when the support is
/// not planar (collinear, or any neighbour off the plane by more than threshold).
inline std::optional<Plane> fit_plane(std::span<const Vec3> pts, double threshold = 0.1,
                                      double collinear_ratio = 1e-3) {
  if (pts.size() < 3) return std::nullopt;
  Vec3 c = Vec3::Zero();
  for (const auto& p : pts) c += p;
  c /= static_cast<double>(pts.size());
  Mat3 cov = Mat3::Zero();
  for (const auto& p : pts) {
    const Vec3 d = p - c;
    cov += d * d.transpose();
  }
  Eigen::SelfAdjointEigenSolver<Mat3> es;
  es.computeDirect(cov);
  const Vec3 ev = es.eigenvalues();
  if (!(ev(2) > 0.0) || ev(1) <= collinear_ratio * ev(2)) return std::nullopt;
  const Vec3 n = es.eigenvectors().col(0).normalized();
  for (const auto& p : pts) {
    if (std::abs(n.dot(p - c)) > threshold) return std::nullopt;
  }
  return Plane{n, c};
}

inline double point_residual(const FilterState& x, const Extrinsics& ext, const PlaneMatch& m,
                             const Vec3& p_lidar) {
  const Vec3 p_local = x.rotation * ext.lidar_to_imu(p_lidar) + x.position;
  return m.normal.dot(p_local - m.point);
}

using JacobianRow = Eigen::Matrix<double, 1, kStateDim>;

inline JacobianRow point_jacobian(const FilterState& x, const Extrinsics& ext, const PlaneMatch& m,
                                  const Vec3& p_lidar) {
  JacobianRow h = JacobianRow::Zero();
  const Vec3 p_body = ext.lidar_to_imu(p_lidar);
  h.segment<3>(idx::kPos) = m.normal.transpose();
  h.segment<3>(idx::kRot) = -m.normal.transpose() * x.rotation.toRotationMatrix() * skew(p_body);
  return h;
}

struct UpdateResult {
  FilterState state;
  Covariance covariance;
  UpdateReport report;
};

namespace detail {

using Block6 = Eigen::Matrix<double, 6, 6>;
using Vec6 = Eigen::Matrix<double, 6, 1>;

struct Normal {
  Block6 hth = Block6::Zero();  // H^T H restricted to position/rotation columns
  Vec6 htr = Vec6::Zero();
  int matched = 0;
  double abs_sum = 0.0;
};

inline Normal associate(const FilterState& x, const Extrinsics& ext, std::span<const Vec3> points,
                        const KdTree& map, const UpdateConfig& cfg, bool gate) {
  Normal out;
  const Mat3 r = x.rotation.toRotationMatrix();
  const Mat3 rt = r.transpose();
  const double max_d2 = cfg.max_neighbor_dist * cfg.max_neighbor_dist;
  const auto k = static_cast<std::size_t>(cfg.neighbors);
  std::vector<Vec3> support(k);
  for (const auto& p_lidar : points) {
    const Vec3 p_body = ext.lidar_to_imu(p_lidar);
    const Vec3 p_local = r * p_body + x.position;
    const auto nn = map.nearest(p_local, k);
    if (nn.back().dist2 > max_d2) continue;
    for (std::size_t i = 0; i < k; ++i) support[i] = nn[i].point;
    const auto plane = fit_plane(support, cfg.plane_threshold, cfg.collinear_ratio);
    if (!plane) continue;
    const double res = plane->normal.dot(p_local - plane->point);
    if (gate && std::abs(res) > cfg.residual_gate) continue;
    Vec6 h;
    h.head<3>() = plane->normal;
    h.tail<3>() = p_body.cross(rt * plane->normal);
    out.hth.noalias() += h * h.transpose();
    out.htr.noalias() += h * res;
    out.abs_sum += std::abs(res);
    ++out.matched;
  }
  return out;
}

/// Cholesky factor of an SPD matrix; a tiny diagonal load is added if needed.
inline Covariance spd_factor(const Covariance& p) {
  Eigen::LLT<Covariance> llt(p);
  if (llt.info() == Eigen::Success) return llt.matrixL();
  const double load = 1e-15 * std::max(p.trace(), 1.0);
  Eigen::LLT<Covariance> loaded(p + load * Covariance::Identity());
  return loaded.matrixL();
}

}  // namespace detail

/// Iterated error-state update against point-to-plane correspondences. The map
/// must be expressed in the frame of `prior.position` (elevator-local frame).
inline UpdateResult ieskf_update(const FilterState& prior, const Covariance& p_prior,
                                 std::span<const Vec3> points, const KdTree& map,
                                 const Extrinsics& ext, const NoiseParams& noise,
                                 const UpdateConfig& cfg) {
  using Mat18 = Covariance;
  UpdateResult out{prior, p_prior, {}};
  out.report.attempted = static_cast<int>(points.size());
  if (map.size() < static_cast<std::size_t>(cfg.neighbors)) {
    out.report.degenerate = true;
    return out;
  }

  const double inv_r = 1.0 / noise.lidar;
  FilterState x = prior;
  Mat18 kh = Mat18::Zero();
  Mat18 gain_cov = Mat18::Zero();  // (H^T R^-1 H + Pj^-1)^-1
  Mat18 pj = p_prior;
  Mat18 info = Mat18::Zero();

  for (int it = 0; it < cfg.max_iterations; ++it) {
    const auto normal = detail::associate(x, ext, points, map, cfg, it > 0);
    out.report.iterations = it + 1;
    out.report.matched = normal.matched;
    out.report.mean_abs_residual = normal.matched > 0 ? normal.abs_sum / normal.matched : 0.0;
    if (normal.matched < cfg.min_matches) {
      out.state = prior;
      out.covariance = p_prior;
      out.report.degenerate = true;
      out.report.converged = false;
      return out;
    }

    const ErrorState dx_prior = boxminus(x, prior);
    // Inverse of the manifold correction: Jr of the current rotation error.
    Mat18 j_inv = Mat18::Identity();
    j_inv.block<3, 3>(idx::kRot, idx::kRot) = right_jacobian_so3(dx_prior.segment<3>(idx::kRot));
    pj = j_inv * p_prior * j_inv.transpose();

    info.setZero();
    info.topLeftCorner<6, 6>() = normal.hth * inv_r;
    ErrorState htr = ErrorState::Zero();
    htr.head<6>() = normal.htr * inv_r;

    // (M + Pj^-1)^-1 = L (I + L^T M L)^-1 L^T with Pj = L L^T.
    const Mat18 l = detail::spd_factor(pj);
    const Mat18 inner = Mat18::Identity() + l.transpose() * info * l;
    Eigen::LLT<Mat18> inner_llt(inner);
    gain_cov = l * inner_llt.solve(l.transpose());
    gain_cov = symmetrized(gain_cov);

    kh = gain_cov * info;
    const ErrorState kr = gain_cov * htr;
    const ErrorState step = -kr - (Mat18::Identity() - kh) * (j_inv * dx_prior);
    x = boxplus(x, step);
    if (step.norm() < cfg.epsilon) {
      out.report.converged = true;
      break;
    }
  }

  const Mat18 ikh = Mat18::Identity() - kh;
  const Mat18 joseph = ikh * pj * ikh.transpose() + gain_cov * info * gain_cov;
  out.state = x;
  out.covariance = symmetrized(joseph);
  return out;
}

}  // namespace elio
