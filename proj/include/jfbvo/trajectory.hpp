#pragma once

#include "jfbvo/geometry.hpp"

#include <cstddef>
#include <vector>

namespace jfbvo {

/// Time-ordered absolute poses (camera-in-world, left camera), starting at
/// the identity. Frame indices are strictly increasing.
struct Trajectory {
  std::vector<Pose> poses;
  std::vector<int> frame_indices;

  /// One-pose trajectory at the identity, frame 0.
  static Trajectory start();

  std::size_t size() const { return poses.size(); }
  bool empty() const { return poses.empty(); }
  const Pose& back() const { return poses.back(); }
  void append(const Pose& pose, int frame_index);
  void append(const Pose& pose);

  /// Throws GeometryError if the invariants do not hold.
  void validate() const;
};

/// Backward-sense companion of `t`: starts at the identity and chains the
/// inverse of every relative step of `t`, i.e. B_i = B_{i-1} (T_{i-1}^-1 T_i)^-1.
Trajectory running_inverse(const Trajectory& t);

/// Per-frame inverse of every pose, B_i = T_i^-1.
Trajectory pointwise_inverse(const Trajectory& t);

}  // namespace jfbvo
