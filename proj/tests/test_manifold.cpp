#include <gtest/gtest.h>

#include <numbers>

#include "support.hpp"

using namespace elio;
using elio::test::Rng;

namespace {

constexpr double kPi = std::numbers::pi;

void expect_valid_rotation(const Rotation& q) {
  EXPECT_NEAR(q.norm(), 1.0, 1e-9);
  const Mat3 r = q.toRotationMatrix();
  EXPECT_TRUE((r.transpose() * r).isApprox(Mat3::Identity(), 1e-9));
  EXPECT_NEAR(r.determinant(), 1.0, 1e-9);
}

}  // namespace

TEST(Skew, CrossProductIdentity) {
  const Vec3 out = skew(Vec3(1, 2, 3)) * Vec3(4, 5, 6);
  EXPECT_EQ(out, Vec3(-3, 6, -3));
  EXPECT_EQ(skew(Vec3::Zero()), Mat3::Zero());
}

TEST(Skew, Antisymmetric) {
  Rng rng(1);
  for (int i = 0; i < 100; ++i) {
    const Vec3 v = test::random_vec(rng, 10.0);
    EXPECT_EQ(skew(v) + skew(v).transpose(), Mat3::Zero());
  }
}

TEST(ExpSo3, Examples) {
  EXPECT_TRUE(exp_so3(Vec3::Zero()).isApprox(Rotation::Identity(), 1e-15));
  const Vec3 y = exp_so3(Vec3(0, 0, kPi / 2)) * Vec3::UnitX();
  EXPECT_LT((y - Vec3::UnitY()).norm(), 1e-12);
}

TEST(ExpSo3, InvertsLogOnIndependentRotations) {
  Rng rng(2);
  for (int i = 0; i < 100; ++i) {
    const Mat3 r = test::random_rotation_matrix(rng);
    const Rotation back = exp_so3(log_so3(rotation_from_matrix(r)));
    expect_valid_rotation(back);
    EXPECT_LT((back.toRotationMatrix() - r).cwiseAbs().maxCoeff(), 1e-10);
  }
}

TEST(LogSo3, Examples) {
  EXPECT_EQ(log_so3(Rotation::Identity()), Vec3::Zero());
  const Vec3 w(0.1, -0.2, 0.3);
  EXPECT_LT((log_so3(exp_so3(w)) - w).norm(), 1e-10);
}

TEST(LogSo3, HalfTurnAboutX) {
  Mat3 r;
  r << 1, 0, 0, 0, -1, 0, 0, 0, -1;
  const Vec3 w = log_so3(rotation_from_matrix(r));
  EXPECT_NEAR(w.norm(), kPi, 1e-9);
  // The axis is the unit eigenvector of R with eigenvalue 1.
  EXPECT_NEAR(std::abs(w.normalized().dot(Vec3::UnitX())), 1.0, 1e-9);
  EXPECT_LT((r * w - w).norm(), 1e-9);
}

TEST(RightJacobian, ZeroIsIdentity) {
  EXPECT_TRUE(right_jacobian_so3(Vec3::Zero()).isApprox(Mat3::Identity()));
  EXPECT_TRUE(right_jacobian_inv_so3(Vec3::Zero()).isApprox(Mat3::Identity()));
}

TEST(RightJacobian, FirstOrderProperty) {
  Rng rng(3);
  for (int i = 0; i < 100; ++i) {
    const Vec3 theta = test::random_vec(rng, 2.0);
    const Vec3 delta = test::random_vec(rng, 1.0).normalized() * 1e-4;
    const Vec3 lhs = log_so3(exp_so3(theta).conjugate() * exp_so3(theta + delta));
    EXPECT_LT((lhs - right_jacobian_so3(theta) * delta).norm(), 1e-6);
  }
}

TEST(RightJacobian, InverseMatches) {
  Rng rng(4);
  for (int i = 0; i < 100; ++i) {
    const Vec3 theta = test::random_vec(rng, 2.0);
    const Mat3 prod = right_jacobian_so3(theta) * right_jacobian_inv_so3(theta);
    EXPECT_LT((prod - Mat3::Identity()).cwiseAbs().maxCoeff(), 1e-10);
  }
}

TEST(RightJacobian, SymmetricPartEigenvalues) {
  const Mat3 a = right_jacobian_so3(Vec3(kPi / 2, 0, 0));
  const Mat3 sym = 0.5 * (a + a.transpose());
  Eigen::SelfAdjointEigenSolver<Mat3> es(sym);
  for (int i = 0; i < 3; ++i) {
    EXPECT_GT(es.eigenvalues()(i), 0.0);
    EXPECT_LE(es.eigenvalues()(i), 1.0 + 1e-12);
  }
}

TEST(BoxPlus, ZeroIsIdentity) {
  Rng rng(5);
  const FilterState x = test::random_state(rng, Mode::NonInertial);
  const FilterState y = boxplus(x, ErrorState::Zero());
  EXPECT_EQ(y.position, x.position);
  EXPECT_EQ(y.rotation.coeffs(), x.rotation.coeffs());
  EXPECT_EQ(y.velocity, x.velocity);
  EXPECT_EQ(y.elevator_pos, x.elevator_pos);
}

TEST(BoxPlus, QuarterYaw) {
  ErrorState d = ErrorState::Zero();
  d.segment<3>(idx::kRot) = Vec3(0, 0, kPi / 2);
  const FilterState y = boxplus(default_state(), d);
  const Mat3 expected = Eigen::AngleAxisd(kPi / 2, Vec3::UnitZ()).toRotationMatrix();
  EXPECT_LT((y.rotation.toRotationMatrix() - expected).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(BoxPlus, LocalInverseProperty) {
  Rng rng(6);
  for (int i = 0; i < 1000; ++i) {
    const FilterState x = test::random_state(rng, i % 2 ? Mode::Inertial : Mode::NonInertial);
    ErrorState d;
    for (int k = 0; k < kStateDim; ++k) d(k) = test::uniform(rng, -1.0, 1.0);
    d.segment<3>(idx::kRot) = test::random_vec(rng, 1.0).normalized() * test::uniform(rng, 0.0, 0.99);
    const FilterState y = boxplus(x, d);
    expect_valid_rotation(y.rotation);
    EXPECT_LT((boxminus(y, x) - d).cwiseAbs().maxCoeff(), 1e-9);
  }
}
