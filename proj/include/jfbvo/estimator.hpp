#pragma once

#include "jfbvo/features.hpp"
#include "jfbvo/geometry.hpp"
#include "jfbvo/trajectory.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

namespace jfbvo {

class EstimationFailed : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct EstimatorConfig {
  int ransac_iterations = 200;
  double inlier_threshold = 2.0;  ///< Per-camera residual norm, pixels.
  int gn_max_iterations = 20;
  double gn_step_tolerance = 1e-9;
  int min_matches = 6;
  std::uint64_t rng_seed = 42;

  void validate() const;
};

/// Fitted frame-to-frame motion. `pose` maps points from the source frame
/// (where landmarks were triangulated) into the target frame: for the
/// forward direction that is previous -> current.
struct MotionEstimate {
  Pose pose;
  std::vector<int> inliers;
  double rms_residual = 0.0;
  int iterations = 0;
  bool converged = false;
  /// Normal equations were rank deficient.
  bool singular = false;
  /// Objective after the initial guess and after every accepted update.
  std::vector<double> objective_trace;
};

struct JointEstimate {
  std::optional<MotionEstimate> forward;
  std::optional<MotionEstimate> backward;
  /// Previous -> current motion after fusion (or the surviving direction).
  Pose fused;
  bool fusion_degenerate = false;
};

enum class Direction { Forward, Backward };

struct StereoObservation {
  Vec2 left;
  Vec2 right;
};

/// Residual assigned to every coordinate of a point that lands behind the
/// camera.
inline constexpr double kBehindCameraResidual = 1e4;

struct Residuals {
  Eigen::VectorXd values;  ///< 4N: (left u, left v, right u, right v) per point.
  std::vector<bool> behind_camera;

  double objective() const { return values.squaredNorm(); }
};

/// observation - projection(pose * landmark), per point and camera.
Residuals reprojection_residuals(const StereoRig& rig, const Pose& pose, std::span<const Landmark> landmarks,
                                 std::span<const StereoObservation> observations);

/// Analytic 4N x 6 Jacobian of reprojection_residuals with respect to the
/// increment (dw, dt) applied as R <- exp(dw) R, t <- t + dt. Rows of points
/// behind the camera are zero.
Eigen::MatrixXd reprojection_jacobian(const StereoRig& rig, const Pose& pose,
                                      std::span<const Landmark> landmarks);

using Increment = Eigen::Matrix<double, 6, 1>;
Pose apply_increment(const Pose& pose, const Increment& delta);

MotionEstimate gauss_newton_refine(const StereoRig& rig, std::span<const Landmark> landmarks,
                                   std::span<const StereoObservation> observations, const Pose& initial,
                                   const EstimatorConfig& cfg);

/// RANSAC over minimal 3-point samples, each fitted by Gauss-Newton from the
/// identity, followed by refinement on the largest inlier set. Throws
/// EstimationFailed below cfg.min_matches.
MotionEstimate ransac_estimate(const StereoRig& rig, std::span<const QuadMatch> matches, Direction direction,
                               const EstimatorConfig& cfg);

/// Seed used for the backward RANSAC run.
std::uint64_t backward_seed(std::uint64_t seed);

/// Forward and backward estimates on the same matches, fused. Throws
/// EstimationFailed only when both directions fail.
JointEstimate estimate_joint(const StereoRig& rig, std::span<const QuadMatch> matches, const EstimatorConfig& cfg);

/// Appends last_pose * step^-1: `step` maps previous-frame coordinates into
/// the current frame, the trajectory stores camera-in-world poses.
Trajectory accumulate(Trajectory trajectory, const Pose& step);

}  // namespace jfbvo
