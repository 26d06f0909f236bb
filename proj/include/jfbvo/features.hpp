#pragma once

#include "jfbvo/geometry.hpp"

#include <array>
#include <cstdint>
#include <vector>

namespace jfbvo {

/// Row-major 8-bit grayscale image.
struct Image {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> data;

  Image() = default;
  Image(int w, int h, std::uint8_t fill = 0)
      : width(w), height(h), data(static_cast<std::size_t>(w) * h, fill) {}

  std::uint8_t at(int u, int v) const { return data[static_cast<std::size_t>(v) * width + u]; }
  std::uint8_t& at(int u, int v) { return data[static_cast<std::size_t>(v) * width + u]; }
  bool valid() const { return width > 0 && height > 0 && data.size() == static_cast<std::size_t>(width) * height; }
};

enum class FeatureClass : std::uint8_t { BlobMax = 0, BlobMin = 1, CornerMax = 2, CornerMin = 3 };

const char* to_string(FeatureClass c);

inline constexpr int kDescriptorLength = 32;
/// Features keep this distance from the border so every descriptor sample
/// and its 3x3 gradient stencil stay inside the image.
inline constexpr int kDescriptorMargin = 8;

using Descriptor = std::array<std::int16_t, kDescriptorLength>;

struct Feature {
  Vec2 location;  ///< Sub-pixel position.
  FeatureClass cls = FeatureClass::BlobMax;
  int response = 0;  ///< Filter response at the integer peak.
  Descriptor descriptor{};
};

struct DetectorParams {
  int nms_radius = 5;
  int max_count = 2000;
  /// Minimum |filter response| for a peak to count.
  int response_threshold = 50;
};

/// Blob (5x5 center-surround) and corner (5x5 checkerboard) responses,
/// local maxima and minima per class within nms_radius, strongest first.
std::vector<Feature> detect_features(const Image& img, const DetectorParams& params = {});
std::vector<Feature> detect_features(const Image& img, int nms_radius, int max_count);

/// Descriptor of the integer pixel (u, v); requires kDescriptorMargin.
Descriptor compute_descriptor(const Image& img, int u, int v);
int descriptor_sad(const Descriptor& a, const Descriptor& b);

/// One feature seen in both images of the previous and the current stereo
/// pair. The index fields refer to the input feature lists (-1 when the
/// match did not come from a detector, e.g. synthetic observations).
struct QuadMatch {
  Vec2 prev_left;
  Vec2 prev_right;
  Vec2 cur_left;
  Vec2 cur_right;
  FeatureClass cls = FeatureClass::BlobMax;
  int prev_left_index = -1;
  int prev_right_index = -1;
  int cur_left_index = -1;
  int cur_right_index = -1;
};

struct MatchParams {
  /// Max |v_left - v_right| on the stereo legs, pixels.
  double epipolar_tol = 1.0;
  /// Half-width of the temporal search window in u and v, pixels.
  double temporal_window = 50.0;
  /// Stereo candidates need u_left - u_right above this.
  double min_disparity = kMinDisparity;
};

/// Circular matching cur_left -> prev_left -> prev_right -> cur_right ->
/// cur_left; a match is emitted only when the loop closes on the starting
/// feature. Each leg picks the minimum-SAD candidate of the same class
/// (lowest index on ties).
std::vector<QuadMatch> circular_match(const std::vector<Feature>& prev_left,
                                      const std::vector<Feature>& prev_right,
                                      const std::vector<Feature>& cur_left,
                                      const std::vector<Feature>& cur_right,
                                      const MatchParams& params = {});

/// The four indices visited when walking the loop from cur_left[start]
/// (prev_left, prev_right, cur_right, back at cur_left); -1 where a leg found
/// no candidate.
std::array<int, 4> trace_loop(const std::vector<Feature>& prev_left,
                              const std::vector<Feature>& prev_right,
                              const std::vector<Feature>& cur_left,
                              const std::vector<Feature>& cur_right, int start,
                              const MatchParams& params = {});

}  // namespace jfbvo
