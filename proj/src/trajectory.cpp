#include "jfbvo/trajectory.hpp"

#include <string>

namespace jfbvo {

Trajectory Trajectory::start() {
  Trajectory t;
  t.append(Pose::identity(), 0);
  return t;
}

void Trajectory::append(const Pose& pose, int frame_index) {
  poses.push_back(pose);
  frame_indices.push_back(frame_index);
}

void Trajectory::append(const Pose& pose) {
  append(pose, frame_indices.empty() ? 0 : frame_indices.back() + 1);
}

void Trajectory::validate() const {
  if (poses.size() != frame_indices.size())
    throw GeometryError("trajectory: pose and frame index counts differ");
  if (poses.empty()) return;
  const Pose& first = poses.front();
  if ((first.matrix() - Mat4::Identity()).cwiseAbs().maxCoeff() > 1e-6)
    throw GeometryError("trajectory: first pose is not the identity");
  for (std::size_t i = 1; i < frame_indices.size(); ++i) {
    if (frame_indices[i] <= frame_indices[i - 1])
      throw GeometryError("trajectory: frame indices not strictly increasing at position " +
                          std::to_string(i));
  }
}

Trajectory running_inverse(const Trajectory& t) {
  Trajectory out;
  if (t.empty()) return out;
  out.append(Pose::identity(), t.frame_indices.front());
  for (std::size_t i = 1; i < t.size(); ++i) {
    const Pose step = compose(inverse(t.poses[i - 1]), t.poses[i]);
    out.append(compose(out.back(), inverse(step)), t.frame_indices[i]);
  }
  return out;
}

Trajectory pointwise_inverse(const Trajectory& t) {
  Trajectory out;
  for (std::size_t i = 0; i < t.size(); ++i) out.append(inverse(t.poses[i]), t.frame_indices[i]);
  return out;
}

}  // namespace jfbvo
