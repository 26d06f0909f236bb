#include "jfbvo/odometry.hpp"

#include <chrono>
#include <ostream>
#include <stdexcept>
#include <string>

namespace jfbvo {

const char* to_string(Mode mode) {
  switch (mode) {
    case Mode::Forward: return "forward";
    case Mode::Backward: return "backward";
    case Mode::Joint: return "joint";
  }
  return "joint";
}

Mode mode_from_string(std::string_view s) {
  if (s == "forward") return Mode::Forward;
  if (s == "backward") return Mode::Backward;
  if (s == "joint") return Mode::Joint;
  throw std::invalid_argument("unknown mode '" + std::string(s) + "'");
}

StereoOdometry::StereoOdometry(const StereoRig& rig, Mode mode, const EstimatorConfig& cfg)
    : rig_(rig), mode_(mode), cfg_(cfg) {
  rig_.validate();
  cfg_.validate();
}

const FrameDiagnostics& StereoOdometry::process(std::span<const QuadMatch> matches, double match_ms) {
  FrameDiagnostics d;
  d.frame = static_cast<int>(trajectory_.size());
  d.matches = static_cast<int>(matches.size());
  d.match_ms = match_ms;

  EstimatorConfig cfg = cfg_;
  cfg.rng_seed = cfg_.rng_seed + static_cast<std::uint64_t>(d.frame);

  Pose step;  // previous -> current; identity on failure
  Pose forward_step, backward_step;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    switch (mode_) {
      case Mode::Forward: {
        const MotionEstimate f = ransac_estimate(rig_, matches, Direction::Forward, cfg);
        step = forward_step = f.pose;
        d.forward_inliers = static_cast<int>(f.inliers.size());
        d.forward_rms = f.rms_residual;
        break;
      }
      case Mode::Backward: {
        EstimatorConfig bcfg = cfg;
        bcfg.rng_seed = backward_seed(cfg.rng_seed);
        const MotionEstimate b = ransac_estimate(rig_, matches, Direction::Backward, bcfg);
        step = backward_step = inverse(b.pose);
        d.backward_inliers = static_cast<int>(b.inliers.size());
        d.backward_rms = b.rms_residual;
        break;
      }
      case Mode::Joint: {
        const JointEstimate j = estimate_joint(rig_, matches, cfg);
        step = j.fused;
        d.fusion_degenerate = j.fusion_degenerate;
        if (j.forward) {
          forward_step = j.forward->pose;
          d.forward_inliers = static_cast<int>(j.forward->inliers.size());
          d.forward_rms = j.forward->rms_residual;
        }
        if (j.backward) {
          backward_step = inverse(j.backward->pose);
          d.backward_inliers = static_cast<int>(j.backward->inliers.size());
          d.backward_rms = j.backward->rms_residual;
        }
        break;
      }
    }
  } catch (const EstimationFailed&) {
    d.failed = true;
    step = forward_step = backward_step = Pose::identity();
  }
  d.estimate_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();

  trajectory_ = accumulate(std::move(trajectory_), step);
  forward_ = accumulate(std::move(forward_), forward_step);
  backward_forward_sense_ = accumulate(std::move(backward_forward_sense_), backward_step);
  diagnostics_.push_back(d);
  return diagnostics_.back();
}

double StereoOdometry::mean_estimate_ms() const {
  if (diagnostics_.empty()) return 0.0;
  double sum = 0.0;
  for (const FrameDiagnostics& d : diagnostics_) sum += d.estimate_ms;
  return sum / static_cast<double>(diagnostics_.size());
}

void write_diagnostics_csv(std::ostream& out, const std::vector<FrameDiagnostics>& rows) {
  out << "frame,matches,forward_inliers,backward_inliers,forward_rms_px,backward_rms_px,fusion_degenerate,failed,"
         "match_ms,estimate_ms\n";
  out.precision(8);
  for (const FrameDiagnostics& d : rows) {
    out << d.frame << ',' << d.matches << ',' << d.forward_inliers << ',' << d.backward_inliers << ','
        << d.forward_rms << ',' << d.backward_rms << ',' << (d.fusion_degenerate ? 1 : 0) << ','
        << (d.failed ? 1 : 0) << ',' << d.match_ms << ',' << d.estimate_ms << '\n';
  }
}

std::optional<std::vector<QuadMatch>> StereoFrontEnd::push(const Image& left, const Image& right) {
  std::vector<Feature> cur_left = detect_features(left, detector_);
  std::vector<Feature> cur_right = detect_features(right, detector_);
  std::optional<std::vector<QuadMatch>> result;
  if (has_previous_) result = circular_match(prev_left_, prev_right_, cur_left, cur_right, matcher_);
  prev_left_ = std::move(cur_left);
  prev_right_ = std::move(cur_right);
  has_previous_ = true;
  return result;
}

}  // namespace jfbvo
