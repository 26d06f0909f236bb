#include "jfbvo/cli.hpp"
#include "jfbvo/io.hpp"
#include "jfbvo/synth.hpp"

#include "test_util.hpp"

#include <gtest/gtest.h>

#include <sstream>

using namespace jfbvo;
namespace fs = std::filesystem;

namespace {

int count_lines(const std::string& text) {
  int n = 0;
  for (char c : text) n += c == '\n';
  return n;
}

Trajectory straight(int n, double step) {
  Trajectory t = Trajectory::start();
  for (int i = 1; i < n; ++i) t.append(Pose{Rotation(), Vec3(0, 0, step * i)});
  return t;
}

fs::path write_config(const fs::path& dir, const std::string& json) {
  write_text_file(dir / "scenario.json", json);
  return dir / "scenario.json";
}

int run_main(std::vector<std::string> args) {
  args.insert(args.begin(), "jfbvo");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  return cli::main_entry(static_cast<int>(argv.size()), argv.data());
}

}  // namespace

TEST(CliRun, NoiselessScenarioAllModes) {
  const auto dir = test_support::scratch_dir();
  const auto cfg = write_config(dir, R"({"frame_count": 10, "landmark_count": 150, "trajectory_kind": "arc",
                                         "yaw_rate": 0.01, "rng_seed": 4})");
  const Scenario s = generate_scenario(kitti_like_rig(), scenario_config_from_json(read_text_file(cfg)));
  for (Mode mode : {Mode::Joint, Mode::Forward, Mode::Backward}) {
    cli::RunConfig rc;
    rc.mode = mode;
    rc.scenario = cfg.string();
    rc.out = (dir / (std::string(to_string(mode)) + ".txt")).string();
    std::ostringstream out, err;
    ASSERT_EQ(cli::cmd_run(rc, out, err), 0) << err.str();
    const Trajectory t = read_poses(read_text_file(rc.out));
    ASSERT_EQ(t.size(), 10u);
    for (std::size_t i = 0; i < t.size(); ++i) {
      EXPECT_LT((t.poses[i].translation - s.ground_truth.poses[i].translation).norm(), 1e-5);
      EXPECT_LT(geodesic_distance(t.poses[i].rotation, s.ground_truth.poses[i].rotation), 1e-5);
    }
    const std::string diag = read_text_file(rc.out + ".diag.csv");
    EXPECT_EQ(count_lines(diag), 10);
    EXPECT_NE(out.str().find("t_abs"), std::string::npos);
  }
}

TEST(CliRun, WritesDirectionTrajectoriesForSelfcheck) {
  const auto dir = test_support::scratch_dir();
  const auto cfg = write_config(dir, R"({"frame_count": 6, "landmark_count": 120})");
  cli::RunConfig rc;
  rc.scenario = cfg.string();
  rc.out = (dir / "joint.txt").string();
  rc.forward_trajectory = (dir / "fwd.txt").string();
  rc.backward_trajectory = (dir / "bwd.txt").string();
  rc.svg = (dir / "traj.svg").string();
  std::ostringstream out, err;
  ASSERT_EQ(cli::cmd_run(rc, out, err), 0) << err.str();
  EXPECT_EQ(read_text_file(rc.svg).rfind("<svg", 0), 0u);

  cli::SelfcheckConfig sc;
  sc.forward = rc.forward_trajectory;
  sc.backward = rc.backward_trajectory;
  std::ostringstream sout, serr;
  ASSERT_EQ(cli::cmd_selfcheck(sc, sout, serr), 0) << serr.str();
  EXPECT_NE(sout.str().find("FB-RPE translation: mean 0.0000"), std::string::npos) << sout.str();
}

TEST(CliRun, InputErrors) {
  const auto dir = test_support::scratch_dir();
  cli::RunConfig rc;
  rc.out = (dir / "x.txt").string();
  std::ostringstream out, err;
  EXPECT_EQ(cli::cmd_run(rc, out, err), 2);
  rc.dataset_root = (dir / "no_such_dataset").string();
  EXPECT_NE(cli::cmd_run(rc, out, err), 0);
  EXPECT_NE(err.str().find("no sequence directory"), std::string::npos) << err.str();
  rc.scenario = "also.json";
  EXPECT_EQ(cli::cmd_run(rc, out, err), 2);
}

TEST(CliEval, PerfectAndBiased) {
  const auto dir = test_support::scratch_dir();
  write_text_file(dir / "gt.txt", write_trajectory(straight(1000, 1.0)));
  write_text_file(dir / "est.txt", write_trajectory(straight(1000, 1.02)));
  cli::EvalConfig ec;
  ec.gt = (dir / "gt.txt").string();
  ec.est = ec.gt;
  std::ostringstream out, err;
  ASSERT_EQ(cli::cmd_eval(ec, out, err), 0);
  EXPECT_EQ(out.str(), "# t_rel_pct r_rel_deg_per_100m t_abs_m\n0.00 0.000 0.00\n");

  ec.est = (dir / "est.txt").string();
  ec.out = (dir / "eval.csv").string();
  ec.svg = (dir / "eval.svg").string();
  std::ostringstream out2;
  ASSERT_EQ(cli::cmd_eval(ec, out2, err), 0);
  EXPECT_NE(out2.str().find("\n2.00 0.000 "), std::string::npos) << out2.str();
  EXPECT_EQ(count_lines(read_text_file(ec.out)), 9);
}

TEST(CliEval, MalformedEstimate) {
  const auto dir = test_support::scratch_dir();
  write_text_file(dir / "gt.txt", write_trajectory(straight(5, 1.0)));
  write_text_file(dir / "bad.txt", "1 0 0 0 0 1 0 0 0 0 1 0\n1 0 0\n");
  cli::EvalConfig ec;
  ec.gt = (dir / "gt.txt").string();
  ec.est = (dir / "bad.txt").string();
  std::ostringstream out, err;
  EXPECT_EQ(cli::cmd_eval(ec, out, err), 1);
  EXPECT_NE(err.str().find("line 2"), std::string::npos) << err.str();

  write_text_file(dir / "short.txt", write_trajectory(straight(3, 1.0)));
  ec.est = (dir / "short.txt").string();
  EXPECT_EQ(cli::cmd_eval(ec, out, err), 1);
}

TEST(CliSelfcheck, ConsistentPairAndStride) {
  const auto dir = test_support::scratch_dir();
  const Trajectory f = straight(100, 1.0);
  write_text_file(dir / "f.txt", write_trajectory(f));
  write_text_file(dir / "b.txt", write_trajectory(running_inverse(f)));
  cli::SelfcheckConfig sc;
  sc.forward = (dir / "f.txt").string();
  sc.backward = (dir / "b.txt").string();
  sc.out = (dir / "check.csv").string();
  sc.stride = 10;
  std::ostringstream out, err;
  ASSERT_EQ(cli::cmd_selfcheck(sc, out, err), 0) << err.str();
  const std::string csv = read_text_file(sc.out);
  EXPECT_EQ(count_lines(csv), 11);
  EXPECT_NE(csv.find("\n10,0,0,"), std::string::npos) << csv;
}

TEST(CliSelfcheck, MissingInput) {
  cli::SelfcheckConfig sc;
  sc.forward = "/nonexistent/f.txt";
  sc.backward = "/nonexistent/b.txt";
  std::ostringstream out, err;
  EXPECT_EQ(cli::cmd_selfcheck(sc, out, err), 1);
}

TEST(CliSynth, WritesKittiLayoutDeterministically) {
  const auto dir = test_support::scratch_dir();
  const auto cfg = write_config(dir, R"({"frame_count": 7, "landmark_count": 100})");
  for (const char* name : {"a", "b"}) {
    cli::SynthConfig sc;
    sc.scenario = cfg.string();
    sc.out_dir = (dir / name).string();
    sc.seed = 99;
    std::ostringstream out, err;
    ASSERT_EQ(cli::cmd_synth(sc, out, err), 0) << err.str();
  }
  const std::string poses = read_text_file(dir / "a" / "poses" / "00.txt");
  EXPECT_EQ(count_lines(poses), 7);
  EXPECT_EQ(poses, read_text_file(dir / "b" / "poses" / "00.txt"));
  EXPECT_EQ(read_text_file(dir / "a" / "scenario.txt"), read_text_file(dir / "b" / "scenario.txt"));
  EXPECT_NEAR(parse_calibration(read_text_file(dir / "a" / "sequences" / "00" / "calib.txt")).baseline, 0.5372,
              1e-4);
}

TEST(CliSynth, InfeasibleScenario) {
  const auto dir = test_support::scratch_dir();
  const auto cfg = write_config(dir, R"({"frame_count": 3, "speed": 1000})");
  cli::SynthConfig sc;
  sc.scenario = cfg.string();
  sc.out_dir = (dir / "out").string();
  std::ostringstream out, err;
  EXPECT_EQ(cli::cmd_synth(sc, out, err), 1);
  EXPECT_NE(err.str().find("frame 1"), std::string::npos) << err.str();
}

TEST(CliMain, RenderThenRunAndEvaluate) {
  const auto dir = test_support::scratch_dir();
  const auto cfg = write_config(dir, R"({"frame_count": 5, "landmark_count": 200, "rng_seed": 8})");
  const fs::path data = dir / "data";
  ASSERT_EQ(run_main({"synth", "--scenario", cfg.string(), "--out", data.string(), "--render"}), 0);
  ASSERT_TRUE(fs::exists(data / "sequences" / "00" / "image_1" / "000004.pgm"));

  const fs::path est = dir / "est.txt";
  ASSERT_EQ(run_main({"run", "--dataset", data.string(), "--seq", "00", "--mode", "joint", "--out", est.string()}),
            0);
  const Trajectory gt = read_poses(read_text_file(data / "poses" / "00.txt"));
  const Trajectory t = read_poses(read_text_file(est));
  ASSERT_EQ(t.size(), gt.size());
  EXPECT_LT((t.back().translation - gt.back().translation).norm(), 0.1);

  EXPECT_EQ(run_main({"eval", "--gt", (data / "poses" / "00.txt").string(), "--est", est.string(), "--distances",
                      "1,2"}),
            0);
  EXPECT_EQ(run_main({"run", "--scenario", (data / "scenario.txt").string(), "--out",
                      (dir / "from_dump.txt").string(), "--mode", "forward"}),
            0);
}

TEST(CliMain, BadArguments) {
  EXPECT_NE(run_main({}), 0);
  EXPECT_NE(run_main({"run", "--mode", "sideways", "--out", "x"}), 0);
  EXPECT_NE(run_main({"eval", "--gt", "only.txt"}), 0);
}
