#pragma once

#include "jfbvo/geometry.hpp"
#include "jfbvo/trajectory.hpp"

#include <iosfwd>
#include <stdexcept>
#include <vector>

namespace jfbvo {

class MetricInputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct ErrorSample {
  int frame = 0;
  Pose error;
  double translation_norm = 0.0;  ///< meters
  double rotation_angle = 0.0;    ///< radians
};

/// Ground-truth-free consistency between a forward-mode trajectory F and a
/// backward-mode trajectory B accumulated in its native (reversed) sense.
struct ReliabilityReport {
  std::vector<ErrorSample> relative;  ///< (B_{i-1}^-1 B_i)(F_{i-1}^-1 F_i), i >= 1
  std::vector<ErrorSample> absolute;  ///< B_i F_i, every frame
};

/// Relative forward-backward error, one sample per frame i >= 1.
std::vector<ErrorSample> fb_rpe(const Trajectory& forward, const Trajectory& backward);
/// Absolute forward-backward error, one sample per frame.
std::vector<ErrorSample> fb_ape(const Trajectory& forward, const Trajectory& backward);
ReliabilityReport reliability_report(const Trajectory& forward, const Trajectory& backward);

struct SegmentStats {
  double length = 0.0;  ///< meters
  int segments = 0;
  double t_rel = 0.0;  ///< percent
  double r_rel = 0.0;  ///< degrees per 100 m
};

struct EvaluationReport {
  double t_rel = 0.0;  ///< percent, mean over all segments
  double r_rel = 0.0;  ///< degrees per 100 m
  double t_abs = 0.0;  ///< meters, RMSE without alignment
  int segments = 0;
  /// Only lengths with at least one segment appear here.
  std::vector<SegmentStats> by_length;
};

std::vector<double> default_segment_lengths();

/// KITTI-style relative errors over every start frame and segment length.
/// A segment of length L ends at the first frame whose ground-truth arc
/// length from the start reaches L.
EvaluationReport kitti_segment_errors(const Trajectory& gt, const Trajectory& est,
                                      const std::vector<double>& distances = default_segment_lengths());

/// Root-mean-square translation difference per frame, no alignment.
double ate_rmse(const Trajectory& gt, const Trajectory& est);

/// Segment errors plus t_abs.
EvaluationReport evaluate(const Trajectory& gt, const Trajectory& est,
                          const std::vector<double>& distances = default_segment_lengths());

/// CSV columns:
///   frame,rpe_trans_m,rpe_rot_rad,ape_trans_m,ape_rot_rad
/// One row per frame, every `stride`-th frame starting at frame 0. Frame 0
/// has no relative pair; its rpe columns are 0.
void write_reliability_csv(std::ostream& out, const ReliabilityReport& report, int stride = 1);

/// CSV columns:
///   length_m,segments,t_rel_pct,r_rel_deg_per_100m
void write_evaluation_csv(std::ostream& out, const EvaluationReport& report);

}  // namespace jfbvo
