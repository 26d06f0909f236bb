#include "jfbvo/synth.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

namespace jfbvo {

namespace {

using json = nlohmann::json;

constexpr double kDotSigma = 0.7;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::string num(double v) {
  std::array<char, 32> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), ptr);
}

void append_pose(std::ostringstream& out, const Pose& p) {
  const Mat4 m = p.matrix();
  for (int i = 0; i < 12; ++i) out << ' ' << num(m(i / 4, i % 4));
}

Trajectory make_trajectory(const ScenarioConfig& cfg) {
  Trajectory t = Trajectory::start();
  std::mt19937_64 rng(splitmix64(cfg.rng_seed));
  std::normal_distribution<double> gauss(0.0, 1.0);
  Pose current = Pose::identity();
  for (int i = 1; i < cfg.frame_count; ++i) {
    Pose next;
    switch (cfg.trajectory_kind) {
      case TrajectoryKind::Straight:
        next = Pose{Rotation(), Vec3(0.0, 0.0, cfg.speed * i)};
        break;
      case TrajectoryKind::Arc:
        next = Pose{Rotation::aboutY(cfg.yaw_rate * i), current.translation + current.rotation * Vec3(0, 0, cfg.speed)};
        break;
      case TrajectoryKind::RandomWalk: {
        const Vec3 turn(deg2rad(0.2) * gauss(rng), cfg.yaw_rate + deg2rad(0.5) * gauss(rng), deg2rad(0.2) * gauss(rng));
        const double step = cfg.speed * (1.0 + 0.1 * gauss(rng));
        next = Pose{current.rotation * so3_exp(turn), current.translation + current.rotation * Vec3(0, 0, step)};
        break;
      }
    }
    t.append(next, i);
    current = next;
  }
  return t;
}

QuadMatch random_outlier(const StereoRig& rig, std::mt19937_64& rng) {
  const double m = kDescriptorMargin;
  std::uniform_real_distribution<double> v_dist(m, rig.height - 1 - m);
  std::uniform_real_distribution<double> jitter(-0.5, 0.5);
  auto stereo_pair = [&](Vec2& left, Vec2& right) {
    std::uniform_real_distribution<double> u_dist(m + 2.0, rig.width - 1 - m);
    left = Vec2(u_dist(rng), v_dist(rng));
    std::uniform_real_distribution<double> d_dist(1.0, std::min(100.0, left.x() - m));
    right = Vec2(left.x() - d_dist(rng), left.y() + jitter(rng));
  };
  QuadMatch q;
  stereo_pair(q.prev_left, q.prev_right);
  stereo_pair(q.cur_left, q.cur_right);
  return q;
}

bool satisfies_gate(const QuadMatch& q) {
  return std::abs(q.prev_left.y() - q.prev_right.y()) <= 1.0 && std::abs(q.cur_left.y() - q.cur_right.y()) <= 1.0 &&
         q.prev_left.x() - q.prev_right.x() > kMinDisparity && q.cur_left.x() - q.cur_right.x() > kMinDisparity;
}

}  // namespace

const char* to_string(TrajectoryKind kind) {
  switch (kind) {
    case TrajectoryKind::Straight: return "straight";
    case TrajectoryKind::Arc: return "arc";
    case TrajectoryKind::RandomWalk: return "random-walk";
  }
  return "straight";
}

TrajectoryKind trajectory_kind_from_string(std::string_view s) {
  if (s == "straight") return TrajectoryKind::Straight;
  if (s == "arc") return TrajectoryKind::Arc;
  if (s == "random-walk") return TrajectoryKind::RandomWalk;
  throw std::invalid_argument("unknown trajectory kind '" + std::string(s) + "'");
}

void ScenarioConfig::validate() const {
  if (frame_count < 2) throw std::invalid_argument("scenario: frame_count must be >= 2");
  if (landmark_count < 1) throw std::invalid_argument("scenario: landmark_count must be >= 1");
  if (!(depth_min > 0.0) || !(depth_max > depth_min))
    throw std::invalid_argument("scenario: need 0 < depth_min < depth_max");
  if (!(pixel_noise_sigma >= 0.0)) throw std::invalid_argument("scenario: pixel_noise_sigma must be >= 0");
  if (!(outlier_fraction >= 0.0 && outlier_fraction <= 1.0))
    throw std::invalid_argument("scenario: outlier_fraction must lie in [0, 1]");
}

ScenarioConfig scenario_config_from_json(std::string_view json_text) {
  const json j = json::parse(json_text);
  ScenarioConfig c;
  c.frame_count = j.value("frame_count", c.frame_count);
  c.trajectory_kind = trajectory_kind_from_string(j.value("trajectory_kind", std::string(to_string(c.trajectory_kind))));
  c.speed = j.value("speed", c.speed);
  c.yaw_rate = j.value("yaw_rate", c.yaw_rate);
  c.landmark_count = j.value("landmark_count", c.landmark_count);
  if (j.contains("depth_range")) {
    c.depth_min = j.at("depth_range").at(0).get<double>();
    c.depth_max = j.at("depth_range").at(1).get<double>();
  }
  c.pixel_noise_sigma = j.value("pixel_noise_sigma", c.pixel_noise_sigma);
  c.outlier_fraction = j.value("outlier_fraction", c.outlier_fraction);
  c.rng_seed = j.value("rng_seed", c.rng_seed);
  c.validate();
  return c;
}

std::string scenario_config_to_json(const ScenarioConfig& c) {
  json j;
  j["frame_count"] = c.frame_count;
  j["trajectory_kind"] = to_string(c.trajectory_kind);
  j["speed"] = c.speed;
  j["yaw_rate"] = c.yaw_rate;
  j["landmark_count"] = c.landmark_count;
  j["depth_range"] = {c.depth_min, c.depth_max};
  j["pixel_noise_sigma"] = c.pixel_noise_sigma;
  j["outlier_fraction"] = c.outlier_fraction;
  j["rng_seed"] = c.rng_seed;
  return j.dump();
}

bool observe(const StereoRig& rig, const Pose& camera_pose, const Vec3& world, StereoProjection& out) {
  const Vec3 x = inverse(camera_pose) * world;
  if (!(x.z() > 0.0)) return false;
  out = project_stereo(rig, x);
  const double m = kDescriptorMargin;
  return rig.contains(out.left, m) && rig.contains(out.right, m) && out.left.x() - out.right.x() > kMinDisparity;
}

Scenario generate_scenario(const StereoRig& rig, const ScenarioConfig& cfg) {
  rig.validate();
  cfg.validate();
  Scenario s;
  s.rig = rig;
  s.config = cfg;
  s.ground_truth = make_trajectory(cfg);

  std::mt19937_64 lm_rng(splitmix64(cfg.rng_seed + 1));
  std::uniform_real_distribution<double> u_dist(0.0, rig.width - 1.0);
  std::uniform_real_distribution<double> v_dist(0.0, rig.height - 1.0);
  std::uniform_real_distribution<double> z_dist(cfg.depth_min, cfg.depth_max);
  // Keep landmark_count landmarks visible in every frame by topping up the
  // field with fresh points in the current frustum.
  for (int i = 0; i < cfg.frame_count; ++i) {
    const Pose& cam = s.ground_truth.poses[i];
    StereoProjection p;
    int visible = 0;
    for (const WorldLandmark& lm : s.landmarks) visible += observe(rig, cam, lm.position, p) ? 1 : 0;
    while (visible < cfg.landmark_count) {
      const double u = u_dist(lm_rng), v = v_dist(lm_rng), z = z_dist(lm_rng);
      const Vec3 x((u - rig.cu) * z / rig.focal, (v - rig.cv) * z / rig.focal, z);
      const Vec3 world = cam * x;
      if (!observe(rig, cam, world, p)) continue;
      s.landmarks.push_back({static_cast<int>(s.landmarks.size()), world});
      ++visible;
    }
  }

  for (int k = 1; k < cfg.frame_count; ++k) {
    const Pose& prev = s.ground_truth.poses[k - 1];
    const Pose& cur = s.ground_truth.poses[k];
    FrameObservations fo;
    fo.frame = k;
    fo.ground_truth_pose = compose(inverse(cur), prev);

    std::mt19937_64 rng(splitmix64(cfg.rng_seed ^ splitmix64(static_cast<std::uint64_t>(k))));
    std::normal_distribution<double> noise(0.0, 1.0);
    for (const WorldLandmark& lm : s.landmarks) {
      StereoProjection a, b;
      if (!observe(rig, prev, lm.position, a) || !observe(rig, cur, lm.position, b)) continue;
      QuadMatch q;
      q.prev_left = a.left;
      q.prev_right = a.right;
      q.cur_left = b.left;
      q.cur_right = b.right;
      if (cfg.pixel_noise_sigma > 0.0) {
        for (Vec2* p : {&q.prev_left, &q.prev_right, &q.cur_left, &q.cur_right}) {
          p->x() += cfg.pixel_noise_sigma * noise(rng);
          p->y() += cfg.pixel_noise_sigma * noise(rng);
        }
        // A real matcher rejects these at the epipolar gate.
        if (!satisfies_gate(q)) continue;
      }
      fo.quad_matches.push_back(q);
      fo.landmark_ids.push_back(lm.id);
      fo.truth_mask.push_back(true);
    }
    if (fo.quad_matches.empty())
      throw ScenarioInfeasible(k, "scenario infeasible: no landmark visible in all four images of frames " +
                                      std::to_string(k - 1) + " and " + std::to_string(k));

    const auto outliers = static_cast<std::size_t>(std::lround(cfg.outlier_fraction * fo.quad_matches.size()));
    if (outliers > 0) {
      std::vector<std::size_t> order(fo.quad_matches.size());
      std::iota(order.begin(), order.end(), 0);
      std::shuffle(order.begin(), order.end(), rng);
      for (std::size_t j = 0; j < outliers; ++j) {
        fo.quad_matches[order[j]] = random_outlier(rig, rng);
        fo.landmark_ids[order[j]] = -1;
        fo.truth_mask[order[j]] = false;
      }
    }
    s.frames.push_back(std::move(fo));
  }
  return s;
}

Image render_frame(const StereoRig& rig, const std::vector<WorldLandmark>& landmarks, const Pose& camera_pose,
                   int width, int height, CameraSide side) {
  Image img(width, height, 0);
  const Pose world_to_cam = inverse(camera_pose);
  for (const WorldLandmark& lm : landmarks) {
    const Vec3 x = world_to_cam * lm.position;
    if (!(x.z() > 0.0)) continue;
    const StereoProjection p = project_stereo(rig, x);
    const Vec2& c = side == CameraSide::Left ? p.left : p.right;
    const int cu = static_cast<int>(std::lround(c.x()));
    const int cv = static_cast<int>(std::lround(c.y()));
    if (cu < 1 || cv < 1 || cu > width - 2 || cv > height - 2) continue;
    // Dots sit on the nearest pixel so a landmark renders identically in every frame.
    const double peak = 40.0 + static_cast<double>(splitmix64(static_cast<std::uint64_t>(lm.id)) % 216);
    for (int dv = -1; dv <= 1; ++dv) {
      for (int du = -1; du <= 1; ++du) {
        const double val = peak * std::exp(-(du * du + dv * dv) / (2.0 * kDotSigma * kDotSigma));
        std::uint8_t& px = img.at(cu + du, cv + dv);
        px = static_cast<std::uint8_t>(std::max<double>(px, std::min(255.0, std::round(val))));
      }
    }
  }
  return img;
}

std::string dump_scenario(const Scenario& s) {
  std::ostringstream out;
  out << "jfbvo-scenario 1\n";
  out << "rig " << num(s.rig.focal) << ' ' << num(s.rig.cu) << ' ' << num(s.rig.cv) << ' ' << num(s.rig.baseline)
      << ' ' << s.rig.width << ' ' << s.rig.height << '\n';
  out << "config " << scenario_config_to_json(s.config) << '\n';
  for (std::size_t i = 0; i < s.ground_truth.size(); ++i) {
    out << "pose " << s.ground_truth.frame_indices[i];
    append_pose(out, s.ground_truth.poses[i]);
    out << '\n';
  }
  for (const WorldLandmark& lm : s.landmarks)
    out << "landmark " << lm.id << ' ' << num(lm.position.x()) << ' ' << num(lm.position.y()) << ' '
        << num(lm.position.z()) << '\n';
  for (const FrameObservations& fo : s.frames) {
    out << "pair " << fo.frame;
    append_pose(out, fo.ground_truth_pose);
    out << '\n';
    for (std::size_t j = 0; j < fo.quad_matches.size(); ++j) {
      const QuadMatch& q = fo.quad_matches[j];
      out << "match " << fo.frame << ' ' << fo.landmark_ids[j] << ' ' << (fo.truth_mask[j] ? 1 : 0) << ' '
          << static_cast<int>(q.cls);
      for (const Vec2* p : {&q.prev_left, &q.prev_right, &q.cur_left, &q.cur_right})
        out << ' ' << num(p->x()) << ' ' << num(p->y());
      out << '\n';
    }
  }
  return out.str();
}

Scenario load_scenario(std::string_view text) {
  Scenario s;
  std::istringstream in{std::string(text)};
  std::string line;
  int line_no = 0;
  auto fail = [&](const std::string& why) {
    throw std::runtime_error("scenario line " + std::to_string(line_no) + ": " + why);
  };
  auto read_pose = [&](std::istringstream& ls) {
    Mat4 m = Mat4::Identity();
    for (int i = 0; i < 12; ++i)
      if (!(ls >> m(i / 4, i % 4))) fail("expected 12 pose values");
    return Pose::fromMatrix(m);
  };
  bool header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string tag;
    ls >> tag;
    if (!header) {
      int version = 0;
      if (tag != "jfbvo-scenario" || !(ls >> version) || version != 1) fail("not a scenario dump");
      header = true;
    } else if (tag == "rig") {
      if (!(ls >> s.rig.focal >> s.rig.cu >> s.rig.cv >> s.rig.baseline >> s.rig.width >> s.rig.height))
        fail("malformed rig");
    } else if (tag == "config") {
      std::string rest;
      std::getline(ls, rest);
      s.config = scenario_config_from_json(rest);
    } else if (tag == "pose") {
      int frame = 0;
      if (!(ls >> frame)) fail("malformed pose");
      s.ground_truth.append(read_pose(ls), frame);
    } else if (tag == "landmark") {
      WorldLandmark lm;
      if (!(ls >> lm.id >> lm.position.x() >> lm.position.y() >> lm.position.z())) fail("malformed landmark");
      s.landmarks.push_back(lm);
    } else if (tag == "pair") {
      FrameObservations fo;
      if (!(ls >> fo.frame)) fail("malformed pair");
      fo.ground_truth_pose = read_pose(ls);
      s.frames.push_back(std::move(fo));
    } else if (tag == "match") {
      int frame = 0, id = 0, genuine = 0, cls = 0;
      QuadMatch q;
      if (!(ls >> frame >> id >> genuine >> cls)) fail("malformed match");
      for (Vec2* p : {&q.prev_left, &q.prev_right, &q.cur_left, &q.cur_right})
        if (!(ls >> p->x() >> p->y())) fail("malformed match coordinates");
      if (s.frames.empty() || s.frames.back().frame != frame) fail("match before its pair line");
      q.cls = static_cast<FeatureClass>(cls);
      s.frames.back().quad_matches.push_back(q);
      s.frames.back().landmark_ids.push_back(id);
      s.frames.back().truth_mask.push_back(genuine != 0);
    } else {
      fail("unknown record '" + tag + "'");
    }
  }
  if (!header) throw std::runtime_error("scenario: empty input");
  return s;
}

}  // namespace jfbvo
