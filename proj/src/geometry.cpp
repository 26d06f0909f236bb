#include "jfbvo/geometry.hpp"

#include <Eigen/LU>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <numbers>

namespace jfbvo {

Rotation::Rotation(const Mat3& m) : m_(m) {
  if (orthonormalityResidual(m_) > kOrthonormalTolerance) m_ = nearestRotation(m_);
}

Rotation Rotation::aboutX(double a) {
  Mat3 m;
  m << 1, 0, 0, 0, std::cos(a), -std::sin(a), 0, std::sin(a), std::cos(a);
  return Rotation(m);
}

Rotation Rotation::aboutY(double a) {
  Mat3 m;
  m << std::cos(a), 0, std::sin(a), 0, 1, 0, -std::sin(a), 0, std::cos(a);
  return Rotation(m);
}

Rotation Rotation::aboutZ(double a) {
  Mat3 m;
  m << std::cos(a), -std::sin(a), 0, std::sin(a), std::cos(a), 0, 0, 0, 1;
  return Rotation(m);
}

Rotation Rotation::inverse() const {
  Rotation r;
  r.m_ = m_.transpose();
  return r;
}

Rotation Rotation::operator*(const Rotation& other) const { return Rotation(Mat3(m_ * other.m_)); }

double Rotation::orthonormalityResidual(const Mat3& m) {
  return (m.transpose() * m - Mat3::Identity()).cwiseAbs().maxCoeff();
}

Mat3 Rotation::nearestRotation(const Mat3& m) {
  Eigen::JacobiSVD<Mat3> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Mat3 d = Mat3::Identity();
  if ((svd.matrixU() * svd.matrixV().transpose()).determinant() < 0) d(2, 2) = -1.0;
  return svd.matrixU() * d * svd.matrixV().transpose();
}

Pose Pose::fromMatrix(const Mat4& m) {
  return Pose{Rotation(Mat3(m.topLeftCorner<3, 3>())), m.topRightCorner<3, 1>()};
}

Mat4 Pose::matrix() const {
  Mat4 m = Mat4::Identity();
  m.topLeftCorner<3, 3>() = rotation.matrix();
  m.topRightCorner<3, 1>() = translation;
  return m;
}

Pose compose(const Pose& a, const Pose& b) {
  return Pose{a.rotation * b.rotation, a.rotation * b.translation + a.translation};
}

Pose inverse(const Pose& p) {
  Rotation rt = p.rotation.inverse();
  return Pose{rt, -(rt * p.translation)};
}

Mat3 skew(const Vec3& v) {
  Mat3 s;
  s << 0, -v.z(), v.y(), v.z(), 0, -v.x(), -v.y(), v.x(), 0;
  return s;
}

Rotation so3_exp(const Vec3& w) {
  const double theta2 = w.squaredNorm();
  const Mat3 k = skew(w);
  double a, b;
  if (theta2 < 1e-16) {
    a = 1.0 - theta2 / 6.0;
    b = 0.5 - theta2 / 24.0;
  } else {
    const double theta = std::sqrt(theta2);
    a = std::sin(theta) / theta;
    b = (1.0 - std::cos(theta)) / theta2;
  }
  return Rotation(Mat3(Mat3::Identity() + a * k + b * k * k));
}

Vec3 so3_log(const Rotation& rot) {
  const Mat3& r = rot.matrix();
  // w = sin(theta) * axis
  const Vec3 w(0.5 * (r(2, 1) - r(1, 2)), 0.5 * (r(0, 2) - r(2, 0)), 0.5 * (r(1, 0) - r(0, 1)));
  const double cos_theta = std::clamp(0.5 * (r.trace() - 1.0), -1.0, 1.0);
  const double sin_theta = w.norm();
  const double theta = std::atan2(sin_theta, cos_theta);

  if (cos_theta > -0.9) {
    if (sin_theta < 1e-12) return w;
    return (theta / sin_theta) * w;
  }

  // Near a half-turn the antisymmetric part vanishes; read the axis from the
  // symmetric part instead: (R + Rᵀ)/2 = cos(theta) I + (1 - cos(theta)) a aᵀ.
  const Mat3 aat = (0.5 * (r + r.transpose()) - cos_theta * Mat3::Identity()) / (1.0 - cos_theta);
  int k = 0;
  aat.diagonal().maxCoeff(&k);
  Vec3 axis = aat.col(k) / std::sqrt(std::max(aat(k, k), 1e-300));
  axis.normalize();
  if (axis.dot(w) < 0.0) {
    axis = -axis;
  } else if (sin_theta < 1e-15) {
    // Exact half-turn: first nonzero component positive.
    for (int i = 0; i < 3; ++i) {
      if (std::abs(axis[i]) > 1e-12) {
        if (axis[i] < 0) axis = -axis;
        break;
      }
    }
  }
  return theta * axis;
}

double geodesic_distance(const Rotation& a, const Rotation& b) {
  return so3_log(a.inverse() * b).norm();
}

std::optional<Rotation> rotation_midpoint(const Rotation& rf, const Rotation& rf_prime) {
  const Vec3 half = 0.5 * so3_log(rf.inverse() * rf_prime);
  if (2.0 * half.norm() >= std::numbers::pi - kHalfTurnTolerance) return std::nullopt;
  return rf * so3_exp(half);
}

std::optional<Pose> fuse_motions(const Pose& tf, const Pose& tf_prime) {
  auto r = rotation_midpoint(tf.rotation, tf_prime.rotation);
  if (!r) return std::nullopt;
  return Pose{*r, 0.5 * (tf.translation + tf_prime.translation)};
}

void StereoRig::validate() const {
  if (!(focal > 0.0)) throw GeometryError("stereo rig: focal length must be positive");
  if (!(baseline > 0.0)) throw GeometryError("stereo rig: baseline must be positive");
  if (width <= 0 || height <= 0) throw GeometryError("stereo rig: image size must be positive");
  if (!(cu >= 0.0 && cu < width && cv >= 0.0 && cv < height))
    throw GeometryError("stereo rig: principal point outside the image");
}

bool StereoRig::contains(const Vec2& px, double margin) const {
  return px.x() >= margin && px.y() >= margin && px.x() <= width - 1 - margin &&
         px.y() <= height - 1 - margin;
}

StereoRig kitti_like_rig() {
  return StereoRig{718.856, 607.1928, 185.2157, 386.1448 / 718.856, 1241, 376};
}

StereoProjection project_stereo(const StereoRig& rig, const Vec3& x) {
  if (!(x.z() > 0.0)) throw GeometryError("project_stereo: point behind the camera");
  const double inv_z = 1.0 / x.z();
  const double u = rig.focal * x.x() * inv_z + rig.cu;
  const double v = rig.focal * x.y() * inv_z + rig.cv;
  return {Vec2(u, v), Vec2(u - rig.focal * rig.baseline * inv_z, v)};
}

Landmark triangulate(const StereoRig& rig, const Vec2& left, const Vec2& right,
                     double min_disparity) {
  const double disparity = left.x() - right.x();
  if (!(disparity > min_disparity))
    throw GeometryError("triangulate: disparity " + std::to_string(disparity) +
                        " px too small for a reliable depth");
  const double z = rig.focal * rig.baseline / disparity;
  return Landmark{Vec3((left.x() - rig.cu) * z / rig.focal, (left.y() - rig.cv) * z / rig.focal, z)};
}

}  // namespace jfbvo
