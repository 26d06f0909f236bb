#include "jfbvo/geometry.hpp"

#include <gtest/gtest.h>

#include <Eigen/Geometry>

#include <cmath>
#include <numbers>
#include <random>

using namespace jfbvo;

namespace {

constexpr double kPi = std::numbers::pi;

Vec3 random_unit(std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Vec3 v(g(rng), g(rng), g(rng));
  return v.normalized();
}

Rotation random_rotation(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> angle(0.0, kPi - 1e-3);
  return so3_exp(angle(rng) * random_unit(rng));
}

Pose random_pose(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> t(-10.0, 10.0);
  return Pose{random_rotation(rng), Vec3(t(rng), t(rng), t(rng))};
}

double pose_diff(const Pose& a, const Pose& b) {
  return (a.matrix() - b.matrix()).cwiseAbs().maxCoeff();
}

}  // namespace

TEST(Rotation, ProjectsNonOrthonormalInput) {
  Mat3 m = Rotation::aboutZ(0.3).matrix();
  m(0, 0) += 1e-3;
  Rotation r(m);
  EXPECT_LT(Rotation::orthonormalityResidual(r.matrix()), 1e-12);
  EXPECT_NEAR(r.matrix().determinant(), 1.0, 1e-12);
  EXPECT_LT(geodesic_distance(r, Rotation::aboutZ(0.3)), 1e-3);
}

TEST(Pose, ComposeExample) {
  const Pose a{Rotation::aboutZ(kPi / 2), Vec3(1, 0, 0)};
  const Pose b{Rotation(), Vec3(1, 0, 0)};
  const Pose c = compose(a, b);
  EXPECT_LT(geodesic_distance(c.rotation, Rotation::aboutZ(kPi / 2)), 1e-12);
  EXPECT_NEAR(c.translation.x(), 1.0, 1e-12);
  EXPECT_NEAR(c.translation.y(), 1.0, 1e-12);
  EXPECT_NEAR(c.translation.z(), 0.0, 1e-12);
}

TEST(Pose, ComposeMatchesMatrixProduct) {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 100; ++i) {
    const Pose a = random_pose(rng), b = random_pose(rng);
    EXPECT_LT((compose(a, b).matrix() - a.matrix() * b.matrix()).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(Pose, InverseRoundTrip) {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 1000; ++i) {
    const Pose p = random_pose(rng);
    EXPECT_LT(pose_diff(compose(p, inverse(p)), Pose::identity()), 1e-12);
    EXPECT_LT(pose_diff(compose(inverse(p), p), Pose::identity()), 1e-12);
  }
}

TEST(Pose, LongChainsStayOrthonormal) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> small(-0.05, 0.05);
  Pose p;
  for (int i = 0; i < 10000; ++i) {
    p = compose(p, Pose{so3_exp(Vec3(small(rng), small(rng), small(rng))), Vec3(0, 0, 1)});
  }
  EXPECT_LT(Rotation::orthonormalityResidual(p.rotation.matrix()), 1e-9);
  EXPECT_NEAR(p.rotation.matrix().determinant(), 1.0, 1e-9);
}

TEST(So3, ExpLogRoundTrip) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> angle(0.0, kPi - 1e-6);
  for (int i = 0; i < 2000; ++i) {
    const Vec3 v = angle(rng) * random_unit(rng);
    EXPECT_LT((so3_log(so3_exp(v)) - v).norm(), 1e-9) << v.transpose();
  }
}

TEST(So3, SmallAngles) {
  const Vec3 v(1e-10, -2e-10, 3e-10);
  EXPECT_LT((so3_log(so3_exp(v)) - v).norm(), 1e-20);
  EXPECT_EQ(so3_log(Rotation()).norm(), 0.0);
}

TEST(So3, LogOfHalfTurn) {
  const Vec3 w = so3_log(Rotation::aboutX(kPi));
  EXPECT_NEAR(w.norm(), kPi, 1e-12);
  EXPECT_NEAR(std::abs(w.x()), kPi, 1e-12);
  for (const Vec3& axis : {Vec3(0, 1, 0), Vec3(1, 1, 0).normalized(), Vec3(-1, 2, 3).normalized()}) {
    const Vec3 l = so3_log(so3_exp(kPi * axis));
    EXPECT_NEAR(l.norm(), kPi, 1e-9);
    EXPECT_NEAR(std::abs(l.normalized().dot(axis)), 1.0, 1e-9);
  }
}

TEST(So3, NearHalfTurnKeepsSign) {
  const Vec3 axis = Vec3(0.3, -0.5, 0.8).normalized();
  for (double eps : {1e-4, 1e-6, 1e-8}) {
    const Vec3 v = (kPi - eps) * axis;
    EXPECT_LT((so3_log(so3_exp(v)) - v).norm(), 1e-6) << eps;
  }
}

TEST(Midpoint, AgreesWithQuaternionSlerp) {
  std::mt19937_64 rng(23);
  for (int i = 0; i < 2000; ++i) {
    const Rotation a = random_rotation(rng);
    const Rotation b = a * random_rotation(rng);
    const auto mid = rotation_midpoint(a, b);
    ASSERT_TRUE(mid.has_value());
    const Eigen::Quaterniond qa(a.matrix()), qb(b.matrix());
    const Rotation oracle(Mat3(qa.slerp(0.5, qb).toRotationMatrix()));
    EXPECT_LT(geodesic_distance(*mid, oracle), 1e-9);
  }
}

TEST(Midpoint, EquidistantSymmetricLeftInvariant) {
  std::mt19937_64 rng(29);
  for (int i = 0; i < 500; ++i) {
    const Rotation a = random_rotation(rng);
    const Rotation b = a * random_rotation(rng);
    const Rotation g = random_rotation(rng);
    const Rotation m = *rotation_midpoint(a, b);
    EXPECT_NEAR(geodesic_distance(a, m), geodesic_distance(m, b), 1e-9);
    EXPECT_NEAR(geodesic_distance(a, m), 0.5 * geodesic_distance(a, b), 1e-9);
    EXPECT_LT(geodesic_distance(m, *rotation_midpoint(b, a)), 1e-9);
    EXPECT_LT(geodesic_distance(g * m, *rotation_midpoint(g * a, g * b)), 1e-9);
  }
}

TEST(Midpoint, IdenticalInputs) {
  const Rotation r = Rotation::aboutY(0.7);
  EXPECT_LT(geodesic_distance(*rotation_midpoint(r, r), r), 1e-15);
}

TEST(Midpoint, HalfTurnIsDegenerate) {
  EXPECT_FALSE(rotation_midpoint(Rotation(), Rotation::aboutZ(kPi)).has_value());
  EXPECT_TRUE(rotation_midpoint(Rotation(), Rotation::aboutZ(kPi - 1e-6)).has_value());
}

TEST(Fuse, AveragesTranslationAndRotation) {
  const Pose a{Rotation::aboutZ(deg2rad(10)), Vec3(1, 0, 0)};
  const Pose b{Rotation::aboutZ(deg2rad(20)), Vec3(3, 2, 0)};
  const Pose f = *fuse_motions(a, b);
  EXPECT_LT(geodesic_distance(f.rotation, Rotation::aboutZ(deg2rad(15))), 1e-12);
  EXPECT_LT((f.translation - Vec3(2, 1, 0)).norm(), 1e-12);
}

TEST(Fuse, IdenticalInputsReturnInput) {
  const Pose a{Rotation::aboutX(0.2), Vec3(0.1, 0.2, 0.3)};
  EXPECT_LT(pose_diff(*fuse_motions(a, a), a), 1e-15);
}

TEST(Fuse, HalfTurnApartIsDegenerate) {
  EXPECT_FALSE(fuse_motions(Pose{}, Pose{Rotation::aboutX(kPi), Vec3::Zero()}).has_value());
}

TEST(Stereo, ProjectionExample) {
  const StereoRig rig{100, 50, 50, 0.5, 100, 100};
  const StereoProjection p = project_stereo(rig, Vec3(0, 0, 10));
  EXPECT_DOUBLE_EQ(p.left.x(), 50.0);
  EXPECT_DOUBLE_EQ(p.left.y(), 50.0);
  EXPECT_DOUBLE_EQ(p.right.x(), 45.0);
  EXPECT_DOUBLE_EQ(p.right.y(), 50.0);
}

TEST(Stereo, ProjectionBehindCameraThrows) {
  const StereoRig rig{100, 50, 50, 0.5, 100, 100};
  EXPECT_THROW(project_stereo(rig, Vec3(0, 0, 0)), GeometryError);
  EXPECT_THROW(project_stereo(rig, Vec3(1, 0, -1)), GeometryError);
}

TEST(Stereo, TriangulateInvertsProjection) {
  const StereoRig rig = kitti_like_rig();
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> xy(-5, 5), z(2, 80);
  for (int i = 0; i < 500; ++i) {
    const Vec3 x(xy(rng), xy(rng), z(rng));
    const StereoProjection p = project_stereo(rig, x);
    EXPECT_LT((triangulate(rig, p.left, p.right).position - x).norm(), 1e-9 * x.norm());
  }
}

TEST(Stereo, TriangulateRejectsSmallDisparity) {
  const StereoRig rig{100, 50, 50, 0.5, 100, 100};
  EXPECT_THROW(triangulate(rig, Vec2(50, 50), Vec2(50, 50)), GeometryError);
  EXPECT_THROW(triangulate(rig, Vec2(50, 50), Vec2(49.6, 50)), GeometryError);
  EXPECT_THROW(triangulate(rig, Vec2(50, 50), Vec2(52, 50)), GeometryError);
  EXPECT_NO_THROW(triangulate(rig, Vec2(50, 50), Vec2(49.4, 50)));
}

TEST(Stereo, RigValidation) {
  EXPECT_NO_THROW(kitti_like_rig().validate());
  StereoRig r = kitti_like_rig();
  r.baseline = 0.0;
  EXPECT_THROW(r.validate(), GeometryError);
  r = kitti_like_rig();
  r.focal = -1.0;
  EXPECT_THROW(r.validate(), GeometryError);
  r = kitti_like_rig();
  r.width = 0;
  EXPECT_THROW(r.validate(), GeometryError);
}
