#pragma once

#include "jfbvo/estimator.hpp"
#include "jfbvo/features.hpp"
#include "jfbvo/trajectory.hpp"

#include <iosfwd>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace jfbvo {

enum class Mode { Forward, Backward, Joint };

const char* to_string(Mode mode);
Mode mode_from_string(std::string_view s);

struct FrameDiagnostics {
  int frame = 0;
  int matches = 0;
  int forward_inliers = -1;  ///< -1 when the direction did not run or failed
  int backward_inliers = -1;
  double forward_rms = 0.0;
  double backward_rms = 0.0;
  bool fusion_degenerate = false;
  bool failed = false;  ///< identity motion substituted
  double match_ms = 0.0;
  double estimate_ms = 0.0;
};

/// Frame-to-frame driver. Every mode emits a forward-sense camera-in-world
/// trajectory; the per-direction trajectories are kept for self-checks.
class StereoOdometry {
 public:
  StereoOdometry(const StereoRig& rig, Mode mode, const EstimatorConfig& cfg);

  /// Consumes the matches between the previous and the current frame.
  const FrameDiagnostics& process(std::span<const QuadMatch> matches, double match_ms = 0.0);

  const Trajectory& trajectory() const { return trajectory_; }
  /// From forward estimates only (forward and joint modes).
  const Trajectory& forward_trajectory() const { return forward_; }
  /// Backward estimates accumulated in their native, reversed sense
  /// (backward and joint modes).
  Trajectory backward_native_trajectory() const { return running_inverse(backward_forward_sense_); }
  const std::vector<FrameDiagnostics>& diagnostics() const { return diagnostics_; }

  /// Mean estimation time per frame, milliseconds.
  double mean_estimate_ms() const;

 private:
  StereoRig rig_;
  Mode mode_;
  EstimatorConfig cfg_;
  Trajectory trajectory_ = Trajectory::start();
  Trajectory forward_ = Trajectory::start();
  Trajectory backward_forward_sense_ = Trajectory::start();
  std::vector<FrameDiagnostics> diagnostics_;
};

/// CSV columns:
///   frame,matches,forward_inliers,backward_inliers,forward_rms_px,backward_rms_px,fusion_degenerate,failed,match_ms,estimate_ms
void write_diagnostics_csv(std::ostream& out, const std::vector<FrameDiagnostics>& rows);

/// Detects features on each incoming stereo pair and matches them against
/// the previous pair.
class StereoFrontEnd {
 public:
  explicit StereoFrontEnd(const DetectorParams& detector = {}, const MatchParams& matcher = {})
      : detector_(detector), matcher_(matcher) {}

  /// Matches against the previous pair; nullopt on the first pair.
  std::optional<std::vector<QuadMatch>> push(const Image& left, const Image& right);

 private:
  DetectorParams detector_;
  MatchParams matcher_;
  bool has_previous_ = false;
  std::vector<Feature> prev_left_;
  std::vector<Feature> prev_right_;
};

}  // namespace jfbvo
