#include "jfbvo/estimator.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

namespace jfbvo {

namespace {

constexpr int kMinimalSample = 3;
constexpr int kMaxStepHalvings = 5;
constexpr double kSingularRatio = 1e-12;
constexpr std::uint64_t kBackwardSeedMask = 0x9E3779B97F4A7C15ULL;

struct Correspondences {
  std::vector<Landmark> landmarks;
  std::vector<StereoObservation> observations;
  std::vector<int> source_index;  ///< Position in the input match list.
};

Correspondences build_correspondences(const StereoRig& rig, std::span<const QuadMatch> matches, Direction dir) {
  Correspondences c;
  c.landmarks.reserve(matches.size());
  c.observations.reserve(matches.size());
  c.source_index.reserve(matches.size());
  for (int i = 0; i < static_cast<int>(matches.size()); ++i) {
    const QuadMatch& m = matches[i];
    const bool fwd = dir == Direction::Forward;
    const Vec2& src_l = fwd ? m.prev_left : m.cur_left;
    const Vec2& src_r = fwd ? m.prev_right : m.cur_right;
    if (!(src_l.x() - src_r.x() > kMinDisparity)) continue;
    c.landmarks.push_back(triangulate(rig, src_l, src_r));
    c.observations.push_back(fwd ? StereoObservation{m.cur_left, m.cur_right}
                                 : StereoObservation{m.prev_left, m.prev_right});
    c.source_index.push_back(i);
  }
  return c;
}

/// Squared left and right residual norms of one point; nullopt if behind.
struct PointError {
  double left2;
  double right2;
};

std::optional<PointError> point_error(const StereoRig& rig, const Pose& pose, const Landmark& x,
                                      const StereoObservation& obs) {
  const Vec3 y = pose * x.position;
  if (!(y.z() > 0.0)) return std::nullopt;
  const StereoProjection p = project_stereo(rig, y);
  return PointError{(obs.left - p.left).squaredNorm(), (obs.right - p.right).squaredNorm()};
}

std::vector<int> score_inliers(const StereoRig& rig, const Pose& pose, const Correspondences& c,
                               double threshold) {
  const double t2 = threshold * threshold;
  std::vector<int> inliers;
  for (int i = 0; i < static_cast<int>(c.landmarks.size()); ++i) {
    const auto e = point_error(rig, pose, c.landmarks[i], c.observations[i]);
    if (e && e->left2 < t2 && e->right2 < t2) inliers.push_back(i);
  }
  return inliers;
}

MotionEstimate refine_subset(const StereoRig& rig, const Correspondences& c, const std::vector<int>& subset,
                             const Pose& initial, const EstimatorConfig& cfg) {
  std::vector<Landmark> lm;
  std::vector<StereoObservation> ob;
  lm.reserve(subset.size());
  ob.reserve(subset.size());
  for (int i : subset) {
    lm.push_back(c.landmarks[i]);
    ob.push_back(c.observations[i]);
  }
  return gauss_newton_refine(rig, lm, ob, initial, cfg);
}

}  // namespace

void EstimatorConfig::validate() const {
  if (ransac_iterations < 1 || gn_max_iterations < 1 || min_matches < 1)
    throw std::invalid_argument("estimator config: iteration and match counts must be >= 1");
  if (!(inlier_threshold > 0.0) || !(gn_step_tolerance > 0.0))
    throw std::invalid_argument("estimator config: thresholds must be positive");
}

Residuals reprojection_residuals(const StereoRig& rig, const Pose& pose, std::span<const Landmark> landmarks,
                                 std::span<const StereoObservation> observations) {
  if (landmarks.size() != observations.size())
    throw std::invalid_argument("reprojection_residuals: landmark and observation counts differ");
  const std::size_t n = landmarks.size();
  Residuals r;
  r.values.resize(4 * static_cast<Eigen::Index>(n));
  r.behind_camera.assign(n, false);
  for (std::size_t i = 0; i < n; ++i) {
    const Vec3 y = pose * landmarks[i].position;
    const auto row = static_cast<Eigen::Index>(4 * i);
    if (!(y.z() > 0.0)) {
      r.values.segment<4>(row).setConstant(kBehindCameraResidual);
      r.behind_camera[i] = true;
      continue;
    }
    const StereoProjection p = project_stereo(rig, y);
    r.values.segment<2>(row) = observations[i].left - p.left;
    r.values.segment<2>(row + 2) = observations[i].right - p.right;
  }
  return r;
}

Eigen::MatrixXd reprojection_jacobian(const StereoRig& rig, const Pose& pose,
                                      std::span<const Landmark> landmarks) {
  const std::size_t n = landmarks.size();
  Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(4 * static_cast<Eigen::Index>(n), 6);
  const double f = rig.focal;
  for (std::size_t i = 0; i < n; ++i) {
    const Vec3 rx = pose.rotation * landmarks[i].position;
    const Vec3 y = rx + pose.translation;
    if (!(y.z() > 0.0)) continue;
    const double iz = 1.0 / y.z();

    // d(projection)/dy for the left and right cameras.
    Eigen::Matrix<double, 4, 3> dproj;
    dproj << f * iz, 0, -f * y.x() * iz * iz,
             0, f * iz, -f * y.y() * iz * iz,
             f * iz, 0, -f * (y.x() - rig.baseline) * iz * iz,
             0, f * iz, -f * y.y() * iz * iz;

    // dy/d(dw) = -[R x]_x, dy/d(dt) = I; residual = obs - projection.
    Eigen::Matrix<double, 3, 6> dy;
    dy.leftCols<3>() = -skew(rx);
    dy.rightCols<3>().setIdentity();
    jac.block<4, 6>(static_cast<Eigen::Index>(4 * i), 0) = -dproj * dy;
  }
  return jac;
}

Pose apply_increment(const Pose& pose, const Increment& delta) {
  return Pose{so3_exp(delta.head<3>()) * pose.rotation, pose.translation + delta.tail<3>()};
}

MotionEstimate gauss_newton_refine(const StereoRig& rig, std::span<const Landmark> landmarks,
                                   std::span<const StereoObservation> observations, const Pose& initial,
                                   const EstimatorConfig& cfg) {
  MotionEstimate est;
  est.pose = initial;
  Residuals res = reprojection_residuals(rig, est.pose, landmarks, observations);
  double objective = res.objective();
  est.objective_trace.push_back(objective);

  if (landmarks.size() < static_cast<std::size_t>(kMinimalSample)) {
    est.singular = true;
  } else {
    for (int it = 1; it <= cfg.gn_max_iterations; ++it) {
      est.iterations = it;
      const Eigen::MatrixXd jac = reprojection_jacobian(rig, est.pose, landmarks);
      const Eigen::Matrix<double, 6, 6> h = jac.transpose() * jac;
      const Increment g = jac.transpose() * res.values;

      Eigen::SelfAdjointEigenSolver<Eigen::Matrix<double, 6, 6>> eig(h, Eigen::EigenvaluesOnly);
      const double lmax = eig.eigenvalues().maxCoeff();
      if (!(lmax > 0.0) || eig.eigenvalues().minCoeff() <= kSingularRatio * lmax) {
        est.singular = true;
        break;
      }
      const Increment delta = -h.ldlt().solve(g);
      const double step_norm = delta.norm();

      Increment step = delta;
      bool accepted = false;
      Pose candidate;
      Residuals cand_res;
      for (int halving = 0; halving <= kMaxStepHalvings; ++halving) {
        candidate = apply_increment(est.pose, step);
        cand_res = reprojection_residuals(rig, candidate, landmarks, observations);
        if (cand_res.objective() <= objective) {
          accepted = true;
          break;
        }
        step *= 0.5;
      }
      if (!accepted) {
        // At the floating-point floor the objective cannot decrease further.
        est.converged = step_norm < cfg.gn_step_tolerance;
        break;
      }
      est.pose = candidate;
      res = std::move(cand_res);
      objective = res.objective();
      est.objective_trace.push_back(objective);
      if (step_norm < cfg.gn_step_tolerance) {
        est.converged = true;
        break;
      }
    }
  }

  const std::size_t n = landmarks.size();
  est.inliers.resize(n);
  for (std::size_t i = 0; i < n; ++i) est.inliers[i] = static_cast<int>(i);
  est.rms_residual = n > 0 ? std::sqrt(objective / (4.0 * static_cast<double>(n))) : 0.0;
  return est;
}

MotionEstimate ransac_estimate(const StereoRig& rig, std::span<const QuadMatch> matches, Direction direction,
                               const EstimatorConfig& cfg) {
  cfg.validate();
  const int required = std::max(cfg.min_matches, kMinimalSample);
  if (static_cast<int>(matches.size()) < required)
    throw EstimationFailed("ransac: " + std::to_string(matches.size()) + " matches, need " +
                           std::to_string(required));

  const Correspondences c = build_correspondences(rig, matches, direction);
  const int n = static_cast<int>(c.landmarks.size());
  if (n < required)
    throw EstimationFailed("ransac: only " + std::to_string(n) + " matches triangulate, need " +
                           std::to_string(required));

  std::mt19937_64 rng(cfg.rng_seed);
  std::uniform_int_distribution<int> pick(0, n - 1);
  std::vector<int> best_inliers;
  Pose best_pose;

  for (int it = 0; it < cfg.ransac_iterations; ++it) {
    std::vector<int> sample;
    while (static_cast<int>(sample.size()) < kMinimalSample) {
      const int k = pick(rng);
      if (std::find(sample.begin(), sample.end(), k) == sample.end()) sample.push_back(k);
    }
    const MotionEstimate hyp = refine_subset(rig, c, sample, Pose::identity(), cfg);
    if (hyp.singular) continue;
    std::vector<int> inliers = score_inliers(rig, hyp.pose, c, cfg.inlier_threshold);
    if (inliers.size() > best_inliers.size()) {
      best_inliers = std::move(inliers);
      best_pose = hyp.pose;
    }
  }

  if (static_cast<int>(best_inliers.size()) < required)
    throw EstimationFailed("ransac: best consensus has " + std::to_string(best_inliers.size()) +
                           " inliers, need " + std::to_string(required));

  MotionEstimate final_est = refine_subset(rig, c, best_inliers, best_pose, cfg);
  // Re-score with the refined pose; refine again if the consensus moved.
  for (int round = 0; round < 2; ++round) {
    std::vector<int> rescored = score_inliers(rig, final_est.pose, c, cfg.inlier_threshold);
    if (rescored == best_inliers || static_cast<int>(rescored.size()) < required) break;
    best_inliers = std::move(rescored);
    final_est = refine_subset(rig, c, best_inliers, final_est.pose, cfg);
  }

  final_est.inliers.clear();
  for (int i : best_inliers) final_est.inliers.push_back(c.source_index[i]);
  if (final_est.inliers.empty()) final_est.converged = false;
  return final_est;
}

std::uint64_t backward_seed(std::uint64_t seed) { return seed ^ kBackwardSeedMask; }

JointEstimate estimate_joint(const StereoRig& rig, std::span<const QuadMatch> matches, const EstimatorConfig& cfg) {
  JointEstimate joint;
  std::string failures;
  try {
    joint.forward = ransac_estimate(rig, matches, Direction::Forward, cfg);
  } catch (const EstimationFailed& e) {
    failures += std::string("forward: ") + e.what();
  }
  EstimatorConfig bcfg = cfg;
  bcfg.rng_seed = backward_seed(cfg.rng_seed);
  try {
    joint.backward = ransac_estimate(rig, matches, Direction::Backward, bcfg);
  } catch (const EstimationFailed& e) {
    failures += std::string(failures.empty() ? "" : "; ") + "backward: " + e.what();
  }

  if (joint.forward && joint.backward) {
    const Pose forward_from_backward = inverse(joint.backward->pose);
    if (auto fused = fuse_motions(joint.forward->pose, forward_from_backward)) {
      joint.fused = *fused;
    } else {
      joint.fused = joint.forward->pose;
      joint.fusion_degenerate = true;
    }
  } else if (joint.forward) {
    joint.fused = joint.forward->pose;
    joint.fusion_degenerate = true;
  } else if (joint.backward) {
    joint.fused = inverse(joint.backward->pose);
    joint.fusion_degenerate = true;
  } else {
    throw EstimationFailed("joint estimation: " + failures);
  }
  return joint;
}

Trajectory accumulate(Trajectory trajectory, const Pose& step) {
  if (trajectory.empty()) trajectory = Trajectory::start();
  trajectory.append(compose(trajectory.back(), inverse(step)));
  return trajectory;
}

}  // namespace jfbvo
