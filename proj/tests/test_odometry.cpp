#include "jfbvo/metrics.hpp"
#include "jfbvo/odometry.hpp"
#include "jfbvo/synth.hpp"

#include <gtest/gtest.h>

#include <sstream>

using namespace jfbvo;

namespace {

Scenario noiseless(int frames, TrajectoryKind kind = TrajectoryKind::Arc) {
  ScenarioConfig c;
  c.frame_count = frames;
  c.landmark_count = 150;
  c.trajectory_kind = kind;
  c.yaw_rate = deg2rad(1.0);
  c.rng_seed = 3;
  return generate_scenario(kitti_like_rig(), c);
}

double max_error(const Trajectory& gt, const Trajectory& est) {
  double e = 0.0;
  for (std::size_t i = 0; i < gt.size(); ++i) {
    e = std::max(e, (gt.poses[i].translation - est.poses[i].translation).norm());
    e = std::max(e, geodesic_distance(gt.poses[i].rotation, est.poses[i].rotation));
  }
  return e;
}

}  // namespace

TEST(Odometry, AllModesRecoverNoiselessTrajectory) {
  const Scenario s = noiseless(10);
  for (Mode mode : {Mode::Forward, Mode::Backward, Mode::Joint}) {
    StereoOdometry odo(s.rig, mode, EstimatorConfig{});
    for (const FrameObservations& f : s.frames) {
      const FrameDiagnostics& d = odo.process(f.quad_matches);
      EXPECT_FALSE(d.failed);
      EXPECT_EQ(d.frame, f.frame);
    }
    ASSERT_EQ(odo.trajectory().size(), s.ground_truth.size());
    EXPECT_LT(max_error(s.ground_truth, odo.trajectory()), 1e-6) << to_string(mode);
    EXPECT_EQ(odo.trajectory().frame_indices, s.ground_truth.frame_indices);
  }
}

TEST(Odometry, JointKeepsBothDirections) {
  const Scenario s = noiseless(8);
  StereoOdometry odo(s.rig, Mode::Joint, EstimatorConfig{});
  for (const FrameObservations& f : s.frames) odo.process(f.quad_matches);
  EXPECT_LT(max_error(s.ground_truth, odo.forward_trajectory()), 1e-6);
  const Trajectory b = odo.backward_native_trajectory();
  for (const ErrorSample& e : fb_rpe(odo.forward_trajectory(), b)) EXPECT_LT(e.translation_norm, 1e-6);
  for (const FrameDiagnostics& d : odo.diagnostics()) {
    EXPECT_GT(d.forward_inliers, 0);
    EXPECT_GT(d.backward_inliers, 0);
    EXPECT_FALSE(d.fusion_degenerate);
  }
}

TEST(Odometry, ForwardModeSkipsBackward) {
  const Scenario s = noiseless(4);
  StereoOdometry odo(s.rig, Mode::Forward, EstimatorConfig{});
  for (const FrameObservations& f : s.frames) {
    const FrameDiagnostics& d = odo.process(f.quad_matches);
    EXPECT_GT(d.forward_inliers, 0);
    EXPECT_EQ(d.backward_inliers, -1);
  }
}

TEST(Odometry, FailedFrameUsesIdentity) {
  const Scenario s = noiseless(3);
  StereoOdometry odo(s.rig, Mode::Joint, EstimatorConfig{});
  odo.process(s.frames[0].quad_matches);
  const FrameDiagnostics& d = odo.process(std::vector<QuadMatch>{});
  EXPECT_TRUE(d.failed);
  const Trajectory& t = odo.trajectory();
  EXPECT_EQ(t.poses[2].matrix(), t.poses[1].matrix());
}

TEST(Odometry, ModeNames) {
  for (Mode m : {Mode::Forward, Mode::Backward, Mode::Joint}) EXPECT_EQ(mode_from_string(to_string(m)), m);
  EXPECT_THROW(mode_from_string("sideways"), std::invalid_argument);
}

TEST(Odometry, DiagnosticsCsv) {
  const Scenario s = noiseless(4);
  StereoOdometry odo(s.rig, Mode::Joint, EstimatorConfig{});
  for (const FrameObservations& f : s.frames) odo.process(f.quad_matches);
  std::ostringstream out;
  write_diagnostics_csv(out, odo.diagnostics());
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line,
            "frame,matches,forward_inliers,backward_inliers,forward_rms_px,backward_rms_px,fusion_degenerate,"
            "failed,match_ms,estimate_ms");
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  EXPECT_EQ(rows, 3);
}

TEST(FrontEnd, RenderedSequenceEndToEnd) {
  const Scenario s = noiseless(4, TrajectoryKind::Straight);
  StereoFrontEnd front;
  StereoOdometry odo(s.rig, Mode::Joint, EstimatorConfig{});
  for (std::size_t i = 0; i < s.ground_truth.size(); ++i) {
    const Pose& cam = s.ground_truth.poses[i];
    const Image l = render_frame(s.rig, s.landmarks, cam, s.rig.width, s.rig.height, CameraSide::Left);
    const Image r = render_frame(s.rig, s.landmarks, cam, s.rig.width, s.rig.height, CameraSide::Right);
    auto m = front.push(l, r);
    EXPECT_EQ(m.has_value(), i > 0);
    if (m) {
      EXPECT_GT(m->size(), 50u);
      EXPECT_FALSE(odo.process(*m).failed);
    }
  }
  // Sub-pixel dot localization limits accuracy to centimeters.
  EXPECT_LT(ate_rmse(s.ground_truth, odo.trajectory()), 0.05);
}
