#pragma once

#include "jfbvo/features.hpp"
#include "jfbvo/geometry.hpp"
#include "jfbvo/trajectory.hpp"

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace jfbvo {

enum class TrajectoryKind { Straight, Arc, RandomWalk };

const char* to_string(TrajectoryKind kind);
TrajectoryKind trajectory_kind_from_string(std::string_view s);

struct ScenarioConfig {
  int frame_count = 10;
  TrajectoryKind trajectory_kind = TrajectoryKind::Straight;
  double speed = 1.0;     ///< meters per frame
  double yaw_rate = 0.0;  ///< radians per frame
  /// Minimum number of landmarks visible in every frame; the field is topped
  /// up with points drawn uniformly in the current frustum.
  int landmark_count = 300;
  double depth_min = 5.0;
  double depth_max = 60.0;
  double pixel_noise_sigma = 0.0;
  double outlier_fraction = 0.0;
  std::uint64_t rng_seed = 1;

  void validate() const;
};

/// JSON object with the ScenarioConfig field names; missing keys keep
/// their defaults.
ScenarioConfig scenario_config_from_json(std::string_view json_text);
std::string scenario_config_to_json(const ScenarioConfig& cfg);

class ScenarioInfeasible : public std::runtime_error {
 public:
  ScenarioInfeasible(int frame, const std::string& what) : std::runtime_error(what), frame_(frame) {}
  int frame() const { return frame_; }

 private:
  int frame_;
};

struct WorldLandmark {
  int id = 0;
  Vec3 position = Vec3::Zero();  ///< world frame (= camera frame of frame 0)
};

/// Matches between frame `frame - 1` and `frame`.
struct FrameObservations {
  int frame = 1;
  /// True previous -> current motion (the quantity the estimator fits).
  Pose ground_truth_pose;
  std::vector<QuadMatch> quad_matches;
  /// Landmark id per match, -1 for injected outliers.
  std::vector<int> landmark_ids;
  /// true = genuine match, false = injected outlier.
  std::vector<bool> truth_mask;
};

struct Scenario {
  StereoRig rig;
  ScenarioConfig config;
  Trajectory ground_truth;  ///< camera-in-world
  std::vector<WorldLandmark> landmarks;
  std::vector<FrameObservations> frames;  ///< frames[k-1] holds pair (k-1, k)
};

/// Throws ScenarioInfeasible naming the first frame pair with no landmark
/// visible in all four images.
Scenario generate_scenario(const StereoRig& rig, const ScenarioConfig& cfg);

/// Noiseless stereo projection of a world landmark seen from `camera_pose`
/// (camera-in-world); false if it is not visible in both images.
bool observe(const StereoRig& rig, const Pose& camera_pose, const Vec3& world, StereoProjection& out);

enum class CameraSide { Left, Right };

/// Black image with one 3x3 Gaussian dot per visible landmark, centred on
/// the nearest pixel; the dot brightness is derived from the landmark id.
Image render_frame(const StereoRig& rig, const std::vector<WorldLandmark>& landmarks, const Pose& camera_pose,
                   int width, int height, CameraSide side = CameraSide::Left);

/// Line-oriented text dump:
///   jfbvo-scenario 1
///   rig <focal> <cu> <cv> <baseline> <width> <height>
///   config <json>
///   pose <frame> <12 reals, row-major 3x4 camera-in-world>
///   landmark <id> <x> <y> <z>
///   pair <frame> <12 reals, previous->current motion>
///   match <frame> <landmark id or -1> <genuine 0/1> <class> <8 reals: pl.u pl.v pr.u pr.v cl.u cl.v cr.u cr.v>
std::string dump_scenario(const Scenario& s);
Scenario load_scenario(std::string_view text);

}  // namespace jfbvo
