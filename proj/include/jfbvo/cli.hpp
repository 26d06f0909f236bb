#pragma once

#include "jfbvo/estimator.hpp"
#include "jfbvo/features.hpp"
#include "jfbvo/odometry.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace jfbvo::cli {

struct RunConfig {
  Mode mode = Mode::Joint;
  std::string dataset_root;  ///< KITTI layout root, or empty
  std::string sequence = "00";
  std::string scenario;  ///< scenario JSON config or scenario dump, or empty
  std::string out;       ///< trajectory file (KITTI format)
  std::string diagnostics;  ///< per-frame CSV; defaults to <out>.diag.csv
  std::string forward_trajectory;   ///< optional: forward-direction trajectory
  std::string backward_trajectory;  ///< optional: backward-direction, native sense
  std::string svg;                  ///< optional: top-down x-z trajectory plot
  int max_frames = -1;
  EstimatorConfig estimator;
  DetectorParams detector;
  MatchParams matcher;
};

struct EvalConfig {
  std::string gt;
  std::string est;
  std::vector<double> distances;  ///< empty = 100..800 m
  std::string out;                ///< optional per-length CSV
  std::string svg;                ///< optional error-vs-length plot
};

struct SelfcheckConfig {
  std::string forward;
  std::string backward;
  std::string out;  ///< optional CSV
  int stride = 1;
  std::string svg;  ///< optional translation-error plot
};

struct SynthConfig {
  std::string scenario;  ///< JSON config; empty = defaults
  std::string out_dir;
  std::string sequence = "00";
  bool render = false;
  std::optional<std::uint64_t> seed;
};

int cmd_run(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_eval(const EvalConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_selfcheck(const SelfcheckConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_synth(const SynthConfig& cfg, std::ostream& out, std::ostream& err);

/// Parses argv and dispatches to the commands above.
int main_entry(int argc, char** argv);

}  // namespace jfbvo::cli
