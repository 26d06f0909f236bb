#pragma once

#include <Eigen/Core>

#include <optional>
#include <stdexcept>
#include <string>
#include <utility>

namespace jfbvo {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Mat4 = Eigen::Matrix4d;

class GeometryError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Element of SO(3) stored as an orthonormal 3x3 matrix.
///
/// Construction from an arbitrary matrix projects onto the nearest rotation
/// whenever the orthonormality residual exceeds kOrthonormalTolerance.
class Rotation {
 public:
  static constexpr double kOrthonormalTolerance = 1e-9;

  Rotation() : m_(Mat3::Identity()) {}
  explicit Rotation(const Mat3& m);

  static Rotation identity() { return Rotation(); }
  static Rotation aboutX(double radians);
  static Rotation aboutY(double radians);
  static Rotation aboutZ(double radians);

  const Mat3& matrix() const { return m_; }
  Rotation inverse() const;
  Vec3 operator*(const Vec3& v) const { return m_ * v; }
  Rotation operator*(const Rotation& other) const;

  /// Max-abs entry of mᵀm - I.
  static double orthonormalityResidual(const Mat3& m);
  static Mat3 nearestRotation(const Mat3& m);

 private:
  Mat3 m_;
};

/// Rigid transform x -> R x + t.
struct Pose {
  Rotation rotation;
  Vec3 translation = Vec3::Zero();

  static Pose identity() { return Pose{}; }
  static Pose fromMatrix(const Mat4& m);
  Mat4 matrix() const;
  Vec3 operator*(const Vec3& x) const { return rotation * x + translation; }
};

/// Result applies `b` first, then `a`.
Pose compose(const Pose& a, const Pose& b);
Pose inverse(const Pose& p);
inline Pose operator*(const Pose& a, const Pose& b) { return compose(a, b); }

Rotation so3_exp(const Vec3& axis_angle);
/// Principal logarithm; the norm of the result lies in [0, pi].
Vec3 so3_log(const Rotation& r);
/// Geodesic (angle) distance on SO(3), in radians.
double geodesic_distance(const Rotation& a, const Rotation& b);
Mat3 skew(const Vec3& v);

/// Relative angles closer to pi than this make the half-turn square root
/// ambiguous.
inline constexpr double kHalfTurnTolerance = 1e-9;

/// Geodesic midpoint rf * (rfᵀ rf')^(1/2), with the square root taken as
/// exp(log(.)/2). Returns nullopt when the inputs are a half-turn apart.
std::optional<Rotation> rotation_midpoint(const Rotation& rf, const Rotation& rf_prime);

/// Averages a forward motion with the inverted backward motion: geodesic
/// midpoint of the rotations, arithmetic mean of the translations.
/// Returns nullopt in the half-turn case (see rotation_midpoint).
std::optional<Pose> fuse_motions(const Pose& tf, const Pose& tf_prime);

/// Rectified stereo pair. The right camera sits `baseline` meters along +x
/// of the left camera; both share focal length and principal point.
struct StereoRig {
  double focal = 0.0;
  double cu = 0.0;
  double cv = 0.0;
  double baseline = 0.0;
  int width = 0;
  int height = 0;

  /// Throws GeometryError if the calibration is not physically valid.
  void validate() const;
  bool contains(const Vec2& px, double margin = 0.0) const;
};

/// Grayscale camera pair of the KITTI odometry benchmark (sequence 00).
StereoRig kitti_like_rig();

/// 3D point in a camera frame, meters.
struct Landmark {
  Vec3 position = Vec3::Zero();
};

struct StereoProjection {
  Vec2 left;
  Vec2 right;
};

inline constexpr double kMinDisparity = 0.5;

StereoProjection project_stereo(const StereoRig& rig, const Vec3& x);
inline StereoProjection project_stereo(const StereoRig& rig, const Landmark& x) {
  return project_stereo(rig, x.position);
}

/// Throws GeometryError when the disparity is at most `min_disparity`.
Landmark triangulate(const StereoRig& rig, const Vec2& left, const Vec2& right,
                     double min_disparity = kMinDisparity);

constexpr double deg2rad(double deg) { return deg * 0.017453292519943295; }
constexpr double rad2deg(double rad) { return rad * 57.29577951308232; }

}  // namespace jfbvo
