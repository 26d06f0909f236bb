#include "jfbvo/cli.hpp"

#include "jfbvo/io.hpp"
#include "jfbvo/metrics.hpp"
#include "jfbvo/plot.hpp"
#include "jfbvo/synth.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <sstream>

namespace jfbvo::cli {

namespace fs = std::filesystem;

namespace {

PlotSeries top_down(const std::string& name, const Trajectory& t) {
  PlotSeries s{name, {}, {}};
  for (const Pose& p : t.poses) {
    s.x.push_back(p.translation.x());
    s.y.push_back(p.translation.z());
  }
  return s;
}

Trajectory truncate(const Trajectory& t, std::size_t n) {
  Trajectory out;
  for (std::size_t i = 0; i < std::min(n, t.size()); ++i) out.append(t.poses[i], t.frame_indices[i]);
  return out;
}

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

}  // namespace

int cmd_run(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const bool has_dataset = !cfg.dataset_root.empty();
  const bool has_scenario = !cfg.scenario.empty();
  if (has_dataset == has_scenario) {
    err << "run: specify exactly one of --dataset or --scenario\n";
    return 2;
  }
  if (cfg.out.empty()) {
    err << "run: --out is required\n";
    return 2;
  }

  try {
    std::optional<StereoOdometry> odo;
    std::optional<Trajectory> gt;
    int failed = 0;
    auto log_frame = [&](const FrameDiagnostics& d) {
      if (d.failed) {
        ++failed;
        err << "frame " << d.frame << ": estimation failed (" << d.matches << " matches), identity motion used\n";
      }
    };

    if (has_scenario) {
      const std::string text = read_text_file(cfg.scenario);
      const Scenario s = text.rfind("jfbvo-scenario", 0) == 0
                             ? load_scenario(text)
                             : generate_scenario(kitti_like_rig(), scenario_config_from_json(text));
      odo.emplace(s.rig, cfg.mode, cfg.estimator);
      std::size_t pairs = s.frames.size();
      if (cfg.max_frames > 0) pairs = std::min(pairs, static_cast<std::size_t>(std::max(cfg.max_frames - 1, 0)));
      for (std::size_t k = 0; k < pairs; ++k) log_frame(odo->process(s.frames[k].quad_matches));
      gt = truncate(s.ground_truth, pairs + 1);
    } else {
      const DatasetHandle ds = open_dataset(cfg.dataset_root, cfg.sequence);
      odo.emplace(ds.rig, cfg.mode, cfg.estimator);
      StereoFrontEnd front(cfg.detector, cfg.matcher);
      int frames = ds.frame_count;
      if (cfg.max_frames > 0) frames = std::min(frames, cfg.max_frames);
      for (int k = 0; k < frames; ++k) {
        const auto t0 = std::chrono::steady_clock::now();
        const Image left = load_image(ds.image_path(0, k));
        const Image right = load_image(ds.image_path(1, k));
        auto matches = front.push(left, right);
        const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
        if (matches) log_frame(odo->process(*matches, ms));
      }
      if (ds.ground_truth && ds.ground_truth->size() >= static_cast<std::size_t>(frames))
        gt = truncate(*ds.ground_truth, static_cast<std::size_t>(frames));
    }

    const auto& diag = odo->diagnostics();
    write_text_file(cfg.out, write_trajectory(odo->trajectory()));
    std::ostringstream csv;
    write_diagnostics_csv(csv, diag);
    write_text_file(cfg.diagnostics.empty() ? cfg.out + ".diag.csv" : cfg.diagnostics, csv.str());
    if (!cfg.forward_trajectory.empty())
      write_text_file(cfg.forward_trajectory, write_trajectory(odo->forward_trajectory()));
    if (!cfg.backward_trajectory.empty())
      write_text_file(cfg.backward_trajectory, write_trajectory(odo->backward_native_trajectory()));
    if (!cfg.svg.empty()) {
      std::vector<PlotSeries> series{top_down(to_string(cfg.mode), odo->trajectory())};
      if (gt) series.push_back(top_down("ground truth", *gt));
      write_text_file(cfg.svg, svg_line_plot("Trajectory (top-down)", "x [m]", "z [m]", series, true));
    }

    double match_ms = 0.0;
    for (const FrameDiagnostics& d : diag) match_ms += d.match_ms;
    if (!diag.empty()) match_ms /= static_cast<double>(diag.size());
    out << "mode " << to_string(cfg.mode) << ": " << odo->trajectory().size() << " poses, " << failed
        << " failed frames\n";
    out << "mean per-frame runtime: estimation " << fixed(odo->mean_estimate_ms(), 3) << " ms, front end "
        << fixed(match_ms, 3) << " ms\n";
    if (gt && gt->size() == odo->trajectory().size())
      out << "t_abs vs ground truth: " << fixed(ate_rmse(*gt, odo->trajectory()), 4) << " m\n";

    if (!diag.empty() && failed == static_cast<int>(diag.size())) {
      err << "run: estimation failed on every frame\n";
      return 1;
    }
    return 0;
  } catch (const ScenarioInfeasible& e) {
    err << "run: " << e.what() << '\n';
  } catch (const std::exception& e) {
    err << "run: " << e.what() << '\n';
  }
  return 1;
}

int cmd_eval(const EvalConfig& cfg, std::ostream& out, std::ostream& err) {
  try {
    const Trajectory gt = read_poses(read_text_file(cfg.gt));
    Trajectory est;
    try {
      est = read_poses(read_text_file(cfg.est));
    } catch (const ParseError& e) {
      err << "eval: " << cfg.est << ": " << e.what() << '\n';
      return 1;
    }
    const EvaluationReport r =
        evaluate(gt, est, cfg.distances.empty() ? default_segment_lengths() : cfg.distances);
    out << "# t_rel_pct r_rel_deg_per_100m t_abs_m\n";
    out << fixed(r.t_rel, 2) << ' ' << fixed(r.r_rel, 3) << ' ' << fixed(r.t_abs, 2) << '\n';
    if (r.segments == 0) out << "# no segment reached the shortest evaluation length\n";
    if (!cfg.out.empty()) {
      std::ostringstream csv;
      write_evaluation_csv(csv, r);
      write_text_file(cfg.out, csv.str());
    }
    if (!cfg.svg.empty()) {
      PlotSeries t{"t_rel [%]", {}, {}}, rr{"r_rel [deg/100m]", {}, {}};
      for (const SegmentStats& s : r.by_length) {
        t.x.push_back(s.length);
        t.y.push_back(s.t_rel);
        rr.x.push_back(s.length);
        rr.y.push_back(s.r_rel);
      }
      write_text_file(cfg.svg, svg_line_plot("Error vs path length", "path length [m]", "error", {t, rr}));
    }
    return 0;
  } catch (const std::exception& e) {
    err << "eval: " << e.what() << '\n';
    return 1;
  }
}

int cmd_selfcheck(const SelfcheckConfig& cfg, std::ostream& out, std::ostream& err) {
  try {
    const Trajectory f = read_poses(read_text_file(cfg.forward));
    const Trajectory b = read_poses(read_text_file(cfg.backward));
    const ReliabilityReport r = reliability_report(f, b);
    std::ostringstream csv;
    write_reliability_csv(csv, r, cfg.stride);
    if (!cfg.out.empty()) write_text_file(cfg.out, csv.str());
    else out << csv.str();

    double mean_rel = 0.0, max_rel = 0.0;
    for (const ErrorSample& e : r.relative) {
      mean_rel += e.translation_norm;
      max_rel = std::max(max_rel, e.translation_norm);
    }
    if (!r.relative.empty()) mean_rel /= static_cast<double>(r.relative.size());
    const double final_abs = r.absolute.empty() ? 0.0 : r.absolute.back().translation_norm;
    out << "FB-RPE translation: mean " << fixed(mean_rel, 4) << " m, max " << fixed(max_rel, 4) << " m\n";
    out << "FB-APE translation at last frame: " << fixed(final_abs, 4) << " m\n";

    if (!cfg.svg.empty()) {
      const int stride = std::max(cfg.stride, 1);
      PlotSeries rel{"FB-RPE", {}, {}}, abs{"FB-APE", {}, {}};
      for (std::size_t i = 0; i < r.absolute.size(); i += static_cast<std::size_t>(stride)) {
        abs.x.push_back(r.absolute[i].frame);
        abs.y.push_back(r.absolute[i].translation_norm);
        if (i >= 1) {
          rel.x.push_back(r.relative[i - 1].frame);
          rel.y.push_back(r.relative[i - 1].translation_norm);
        }
      }
      write_text_file(cfg.svg,
                      svg_line_plot("Forward-backward translation error", "frame", "||t|| [m]", {rel, abs}));
    }
    return 0;
  } catch (const std::exception& e) {
    err << "selfcheck: " << e.what() << '\n';
    return 1;
  }
}

int cmd_synth(const SynthConfig& cfg, std::ostream& out, std::ostream& err) {
  if (cfg.out_dir.empty()) {
    err << "synth: --out is required\n";
    return 2;
  }
  try {
    ScenarioConfig sc = cfg.scenario.empty() ? ScenarioConfig{} : scenario_config_from_json(read_text_file(cfg.scenario));
    if (cfg.seed) sc.rng_seed = *cfg.seed;
    const StereoRig rig = kitti_like_rig();
    const Scenario s = generate_scenario(rig, sc);

    const fs::path root(cfg.out_dir);
    const fs::path seq_dir = root / "sequences" / cfg.sequence;
    write_text_file(root / "scenario.txt", dump_scenario(s));
    write_text_file(root / "poses" / (cfg.sequence + ".txt"), write_trajectory(s.ground_truth));
    write_text_file(seq_dir / "calib.txt", format_calibration(rig));
    if (cfg.render) {
      for (std::size_t i = 0; i < s.ground_truth.size(); ++i) {
        const int frame = s.ground_truth.frame_indices[i];
        for (int cam = 0; cam < 2; ++cam) {
          const Image img = render_frame(rig, s.landmarks, s.ground_truth.poses[i], rig.width, rig.height,
                                         cam == 0 ? CameraSide::Left : CameraSide::Right);
          save_pgm(seq_dir / ("image_" + std::to_string(cam)) / (frame_stem(frame) + ".pgm"), img);
        }
      }
    }
    out << "wrote " << s.ground_truth.size() << " frames, " << s.landmarks.size() << " landmarks to " << root.string()
        << (cfg.render ? " (rendered)" : "") << '\n';
    return 0;
  } catch (const ScenarioInfeasible& e) {
    err << "synth: " << e.what() << " (frame " << e.frame() << ")\n";
  } catch (const std::exception& e) {
    err << "synth: " << e.what() << '\n';
  }
  return 1;
}

int main_entry(int argc, char** argv) {
  CLI::App app{"Joint forward-backward stereo visual odometry"};
  app.require_subcommand(1);

  RunConfig run;
  std::string mode = "joint";
  std::uint64_t seed = run.estimator.rng_seed;
  auto* run_cmd = app.add_subcommand("run", "Estimate a trajectory from a dataset or a synthetic scenario");
  run_cmd->add_option("--mode", mode, "forward | backward | joint")
      ->check(CLI::IsMember({"forward", "backward", "joint"}))
      ->capture_default_str();
  auto* dataset_opt = run_cmd->add_option("--dataset", run.dataset_root, "KITTI odometry root");
  run_cmd->add_option("--seq", run.sequence, "Sequence id")->capture_default_str();
  auto* scenario_opt = run_cmd->add_option("--scenario", run.scenario, "Scenario JSON config or scenario dump");
  run_cmd->add_option("--out", run.out, "Output trajectory (KITTI format)")->required();
  run_cmd->add_option("--diagnostics", run.diagnostics, "Per-frame CSV (default <out>.diag.csv)");
  run_cmd->add_option("--forward-traj", run.forward_trajectory, "Forward-direction trajectory output");
  run_cmd->add_option("--backward-traj", run.backward_trajectory, "Backward-direction trajectory output (native sense)");
  run_cmd->add_option("--svg", run.svg, "Top-down trajectory plot");
  run_cmd->add_option("--max-frames", run.max_frames, "Process at most this many frames");
  run_cmd->add_option("--seed", seed, "RANSAC seed")->capture_default_str();
  run_cmd->add_option("--ransac-iters", run.estimator.ransac_iterations)->capture_default_str();
  run_cmd->add_option("--inlier-thresh", run.estimator.inlier_threshold, "pixels")->capture_default_str();
  run_cmd->add_option("--gn-iters", run.estimator.gn_max_iterations)->capture_default_str();
  run_cmd->add_option("--gn-tol", run.estimator.gn_step_tolerance)->capture_default_str();
  run_cmd->add_option("--min-matches", run.estimator.min_matches)->capture_default_str();
  run_cmd->add_option("--nms-radius", run.detector.nms_radius)->capture_default_str();
  run_cmd->add_option("--max-features", run.detector.max_count)->capture_default_str();
  run_cmd->add_option("--epipolar-tol", run.matcher.epipolar_tol, "pixels")->capture_default_str();
  dataset_opt->excludes(scenario_opt);

  EvalConfig eval;
  auto* eval_cmd = app.add_subcommand("eval", "Compare a trajectory with ground truth (t_rel, r_rel, t_abs)");
  eval_cmd->add_option("--gt", eval.gt, "Ground-truth poses")->required();
  eval_cmd->add_option("--est", eval.est, "Estimated poses")->required();
  eval_cmd->add_option("--distances", eval.distances, "Segment lengths in meters")->delimiter(',');
  eval_cmd->add_option("--out", eval.out, "Per-length CSV");
  eval_cmd->add_option("--svg", eval.svg, "Error vs path length plot");

  SelfcheckConfig check;
  auto* check_cmd = app.add_subcommand("selfcheck", "Forward-backward consistency without ground truth");
  check_cmd->add_option("--forward", check.forward, "Forward-direction trajectory")->required();
  check_cmd->add_option("--backward", check.backward, "Backward-direction trajectory (native sense)")->required();
  check_cmd->add_option("--out", check.out, "CSV output (stdout if omitted)");
  check_cmd->add_option("--stride", check.stride, "Report every n-th frame")->check(CLI::PositiveNumber);
  check_cmd->add_option("--svg", check.svg, "Error plot");

  SynthConfig synth;
  std::uint64_t synth_seed = 0;
  auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic scenario in KITTI layout");
  synth_cmd->add_option("--scenario", synth.scenario, "Scenario JSON config");
  synth_cmd->add_option("--out", synth.out_dir, "Output directory")->required();
  synth_cmd->add_option("--seq", synth.sequence, "Sequence id")->capture_default_str();
  synth_cmd->add_flag("--render", synth.render, "Also render PGM stereo frames");
  auto* synth_seed_opt = synth_cmd->add_option("--seed", synth_seed, "Override the scenario seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  if (run_cmd->parsed()) {
    run.mode = mode_from_string(mode);
    run.estimator.rng_seed = seed;
    return cmd_run(run, std::cout, std::cerr);
  }
  if (eval_cmd->parsed()) return cmd_eval(eval, std::cout, std::cerr);
  if (check_cmd->parsed()) return cmd_selfcheck(check, std::cout, std::cerr);
  if (synth_cmd->parsed()) {
    if (synth_seed_opt->count() > 0) synth.seed = synth_seed;
    return cmd_synth(synth, std::cout, std::cerr);
  }
  return 2;
}

}  // namespace jfbvo::cli
