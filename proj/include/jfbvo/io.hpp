#pragma once

#include "jfbvo/features.hpp"
#include "jfbvo/geometry.hpp"
#include "jfbvo/trajectory.hpp"

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace jfbvo {

class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Reads the grayscale pair (P0, P1) of a KITTI calib.txt.
StereoRig parse_calibration(std::string_view text, int width = 1241, int height = 376);
std::string format_calibration(const StereoRig& rig);

/// KITTI pose format: 12 reals per line, row-major 3x4 camera-in-world.
Trajectory read_poses(std::string_view text);
std::string write_trajectory(const Trajectory& t);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view text);

/// 8-bit grayscale PGM (P5/P2) or PNG; color PNGs are converted by luma.
Image load_image(const std::filesystem::path& path);
void save_pgm(const std::filesystem::path& path, const Image& img);

/// `<root>/sequences/<seq>/{image_0,image_1,calib.txt}`, `<root>/poses/<seq>.txt`.
struct DatasetHandle {
  std::filesystem::path root;
  std::string sequence;
  int frame_count = 0;
  StereoRig rig;
  std::optional<Trajectory> ground_truth;
  std::string image_extension;  ///< ".png" or ".pgm"

  std::filesystem::path image_path(int camera, int frame) const;
};

DatasetHandle open_dataset(const std::filesystem::path& root, const std::string& sequence);

/// Zero-padded six-digit frame file stem.
std::string frame_stem(int frame);

}  // namespace jfbvo
