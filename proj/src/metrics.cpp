#include "jfbvo/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <string>

namespace jfbvo {

namespace {

void require_same_length(const Trajectory& a, const Trajectory& b, const char* what) {
  if (a.size() != b.size())
    throw MetricInputError(std::string(what) + ": trajectory lengths differ (" + std::to_string(a.size()) +
                           " vs " + std::to_string(b.size()) + ")");
}

ErrorSample make_sample(int frame, const Pose& e) {
  return ErrorSample{frame, e, e.translation.norm(), so3_log(e.rotation).norm()};
}

std::vector<double> arc_lengths(const Trajectory& t) {
  std::vector<double> dist(t.size(), 0.0);
  for (std::size_t i = 1; i < t.size(); ++i)
    dist[i] = dist[i - 1] + (t.poses[i].translation - t.poses[i - 1].translation).norm();
  return dist;
}

// Tolerates round-off in the accumulated chord lengths.
constexpr double kArcSlack = 1e-9;

}  // namespace

std::vector<ErrorSample> fb_rpe(const Trajectory& forward, const Trajectory& backward) {
  require_same_length(forward, backward, "fb_rpe");
  std::vector<ErrorSample> out;
  for (std::size_t i = 1; i < forward.size(); ++i) {
    const Pose b_rel = compose(inverse(backward.poses[i - 1]), backward.poses[i]);
    const Pose f_rel = compose(inverse(forward.poses[i - 1]), forward.poses[i]);
    out.push_back(make_sample(forward.frame_indices[i], compose(b_rel, f_rel)));
  }
  return out;
}

std::vector<ErrorSample> fb_ape(const Trajectory& forward, const Trajectory& backward) {
  require_same_length(forward, backward, "fb_ape");
  std::vector<ErrorSample> out;
  for (std::size_t i = 0; i < forward.size(); ++i)
    out.push_back(make_sample(forward.frame_indices[i], compose(backward.poses[i], forward.poses[i])));
  return out;
}

ReliabilityReport reliability_report(const Trajectory& forward, const Trajectory& backward) {
  return ReliabilityReport{fb_rpe(forward, backward), fb_ape(forward, backward)};
}

std::vector<double> default_segment_lengths() { return {100, 200, 300, 400, 500, 600, 700, 800}; }

EvaluationReport kitti_segment_errors(const Trajectory& gt, const Trajectory& est,
                                      const std::vector<double>& distances) {
  require_same_length(gt, est, "kitti_segment_errors");
  EvaluationReport report;
  if (gt.size() < 2) return report;
  const std::vector<double> dist = arc_lengths(gt);
  const std::size_t n = gt.size();

  double t_sum = 0.0, r_sum = 0.0;
  for (double length : distances) {
    SegmentStats stats;
    stats.length = length;
    double seg_t = 0.0, seg_r = 0.0;
    std::size_t last = 0;
    for (std::size_t first = 0; first < n; ++first) {
      // The end frame is monotone in the start frame.
      last = std::max(last, first);
      while (last < n && dist[last] < dist[first] + length - kArcSlack) ++last;
      if (last >= n) break;
      const Pose gt_delta = compose(inverse(gt.poses[first]), gt.poses[last]);
      const Pose est_delta = compose(inverse(est.poses[first]), est.poses[last]);
      const Pose err = compose(inverse(est_delta), gt_delta);
      seg_t += err.translation.norm() / length;
      seg_r += so3_log(err.rotation).norm() / length;
      ++stats.segments;
    }
    if (stats.segments == 0) continue;
    stats.t_rel = 100.0 * seg_t / stats.segments;
    stats.r_rel = 100.0 * rad2deg(seg_r / stats.segments);
    t_sum += seg_t;
    r_sum += seg_r;
    report.segments += stats.segments;
    report.by_length.push_back(stats);
  }
  if (report.segments > 0) {
    report.t_rel = 100.0 * t_sum / report.segments;
    report.r_rel = 100.0 * rad2deg(r_sum / report.segments);
  }
  return report;
}

double ate_rmse(const Trajectory& gt, const Trajectory& est) {
  require_same_length(gt, est, "ate_rmse");
  if (gt.empty()) return 0.0;
  double sum = 0.0;
  for (std::size_t i = 0; i < gt.size(); ++i)
    sum += (est.poses[i].translation - gt.poses[i].translation).squaredNorm();
  return std::sqrt(sum / static_cast<double>(gt.size()));
}

EvaluationReport evaluate(const Trajectory& gt, const Trajectory& est, const std::vector<double>& distances) {
  EvaluationReport report = kitti_segment_errors(gt, est, distances);
  report.t_abs = ate_rmse(gt, est);
  return report;
}

void write_reliability_csv(std::ostream& out, const ReliabilityReport& report, int stride) {
  if (stride < 1) stride = 1;
  out << "frame,rpe_trans_m,rpe_rot_rad,ape_trans_m,ape_rot_rad\n";
  out.precision(10);
  for (std::size_t i = 0; i < report.absolute.size(); i += static_cast<std::size_t>(stride)) {
    const ErrorSample& a = report.absolute[i];
    double rt = 0.0, rr = 0.0;
    if (i >= 1 && i - 1 < report.relative.size()) {
      rt = report.relative[i - 1].translation_norm;
      rr = report.relative[i - 1].rotation_angle;
    }
    out << a.frame << ',' << rt << ',' << rr << ',' << a.translation_norm << ',' << a.rotation_angle << '\n';
  }
}

void write_evaluation_csv(std::ostream& out, const EvaluationReport& report) {
  out << "length_m,segments,t_rel_pct,r_rel_deg_per_100m\n";
  out.precision(10);
  for (const SegmentStats& s : report.by_length)
    out << s.length << ',' << s.segments << ',' << s.t_rel << ',' << s.r_rel << '\n';
}

}  // namespace jfbvo
