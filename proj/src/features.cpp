#include "jfbvo/features.hpp"

#include <algorithm>
#include <climits>
#include <cmath>
#include <cstdlib>

namespace jfbvo {

namespace {

constexpr int kBlobMask[5][5] = {{-1, -1, -1, -1, -1},
                                 {-1, 1, 1, 1, -1},
                                 {-1, 1, 8, 1, -1},
                                 {-1, 1, 1, 1, -1},
                                 {-1, -1, -1, -1, -1}};

constexpr int kCornerMask[5][5] = {{-1, -1, 0, 1, 1},
                                   {-1, -1, 0, 1, 1},
                                   {0, 0, 0, 0, 0},
                                   {1, 1, 0, -1, -1},
                                   {1, 1, 0, -1, -1}};

constexpr int kDescriptorOffsets[4] = {-5, -1, 1, 5};

std::vector<int> filter5x5(const Image& img, const int (&mask)[5][5]) {
  const int w = img.width;
  const int h = img.height;
  std::vector<int> out(static_cast<std::size_t>(w) * h, 0);
  for (int v = 2; v < h - 2; ++v) {
    for (int u = 2; u < w - 2; ++u) {
      int acc = 0;
      for (int dv = -2; dv <= 2; ++dv) {
        const std::uint8_t* row = &img.data[static_cast<std::size_t>(v + dv) * w + u - 2];
        const int* m = mask[dv + 2];
        acc += m[0] * row[0] + m[1] * row[1] + m[2] * row[2] + m[3] * row[3] + m[4] * row[4];
      }
      out[static_cast<std::size_t>(v) * w + u] = acc;
    }
  }
  return out;
}

double parabolic_offset(double left, double center, double right) {
  const double denom = left - 2.0 * center + right;
  if (denom == 0.0) return 0.0;
  return std::clamp(0.5 * (left - right) / denom, -0.5, 0.5);
}

struct Peak {
  int u;
  int v;
  int response;
  FeatureClass cls;
};

/// Block-wise suppression: a pixel survives iff its signed score is strictly
/// greater than every window neighbor earlier in scan order and not less than
/// every later one.
void suppress(const std::vector<int>& response, int sign, FeatureClass cls, int w, int h,
              const DetectorParams& params, std::vector<Peak>& out) {
  const int n = std::max(params.nms_radius, 1);
  const int lo = kDescriptorMargin;
  const int hi_u = w - 1 - kDescriptorMargin;
  const int hi_v = h - 1 - kDescriptorMargin;
  auto score = [&](int u, int v) { return sign * response[static_cast<std::size_t>(v) * w + u]; };

  for (int bv = lo; bv <= hi_v; bv += n + 1) {
    for (int bu = lo; bu <= hi_u; bu += n + 1) {
      int best_u = -1, best_v = -1, best = INT_MIN;
      for (int v = bv; v <= std::min(bv + n, hi_v); ++v) {
        for (int u = bu; u <= std::min(bu + n, hi_u); ++u) {
          const int s = score(u, v);
          if (s > best) {
            best = s;
            best_u = u;
            best_v = v;
          }
        }
      }
      if (best < params.response_threshold) continue;

      bool keep = true;
      for (int v = std::max(best_v - n, 2); keep && v <= std::min(best_v + n, h - 3); ++v) {
        for (int u = std::max(best_u - n, 2); u <= std::min(best_u + n, w - 3); ++u) {
          if (u == best_u && v == best_v) continue;
          const int s = score(u, v);
          const bool earlier = v < best_v || (v == best_v && u < best_u);
          if (s > best || (s == best && earlier)) {
            keep = false;
            break;
          }
        }
      }
      if (keep) out.push_back({best_u, best_v, sign * best, cls});
    }
  }
}

/// Spatial hash of feature indices, one bucket list per class.
class FeatureGrid {
 public:
  static constexpr double kCell = 16.0;

  explicit FeatureGrid(const std::vector<Feature>& features) : features_(features) {
    double max_u = 0.0, max_v = 0.0;
    for (const Feature& f : features) {
      max_u = std::max(max_u, f.location.x());
      max_v = std::max(max_v, f.location.y());
    }
    cols_ = static_cast<int>(max_u / kCell) + 1;
    rows_ = static_cast<int>(max_v / kCell) + 1;
    for (auto& c : cells_) c.resize(static_cast<std::size_t>(cols_) * rows_);
    for (int i = 0; i < static_cast<int>(features.size()); ++i) {
      const Feature& f = features[i];
      cells_[static_cast<int>(f.cls)][cellIndex(col(f.location.x()), row(f.location.y()))].push_back(i);
    }
  }

  template <typename Visit>
  void query(FeatureClass cls, double umin, double umax, double vmin, double vmax, Visit&& visit) const {
    if (features_.empty() || umax < umin || vmax < vmin) return;
    const int c0 = col(umin), c1 = col(umax), r0 = row(vmin), r1 = row(vmax);
    const auto& cells = cells_[static_cast<int>(cls)];
    for (int r = r0; r <= r1; ++r) {
      for (int c = c0; c <= c1; ++c) {
        for (int idx : cells[cellIndex(c, r)]) {
          const Vec2& p = features_[idx].location;
          if (p.x() >= umin && p.x() <= umax && p.y() >= vmin && p.y() <= vmax) visit(idx);
        }
      }
    }
  }

  const std::vector<Feature>& features() const { return features_; }

 private:
  int col(double u) const { return std::clamp(static_cast<int>(std::floor(u / kCell)), 0, cols_ - 1); }
  int row(double v) const { return std::clamp(static_cast<int>(std::floor(v / kCell)), 0, rows_ - 1); }
  std::size_t cellIndex(int c, int r) const { return static_cast<std::size_t>(r) * cols_ + c; }

  const std::vector<Feature>& features_;
  int cols_ = 1;
  int rows_ = 1;
  std::array<std::vector<std::vector<int>>, 4> cells_;
};

enum class Leg { Temporal, LeftToRight, RightToLeft };

int best_candidate(const Feature& from, const FeatureGrid& grid, Leg leg, const MatchParams& params) {
  const Vec2& p = from.location;
  double umin = 0.0, umax = 0.0, vmin = 0.0, vmax = 0.0;
  switch (leg) {
    case Leg::Temporal:
      umin = p.x() - params.temporal_window;
      umax = p.x() + params.temporal_window;
      vmin = p.y() - params.temporal_window;
      vmax = p.y() + params.temporal_window;
      break;
    case Leg::LeftToRight:
      umin = -1e9;
      umax = p.x() - params.min_disparity;
      vmin = p.y() - params.epipolar_tol;
      vmax = p.y() + params.epipolar_tol;
      break;
    case Leg::RightToLeft:
      umin = p.x() + params.min_disparity;
      umax = 1e9;
      vmin = p.y() - params.epipolar_tol;
      vmax = p.y() + params.epipolar_tol;
      break;
  }

  int best = -1;
  int best_cost = INT_MAX;
  const auto& candidates = grid.features();
  grid.query(from.cls, umin, umax, vmin, vmax, [&](int idx) {
    // Strict disparity inequality; the grid query bounds are inclusive.
    const double u = candidates[idx].location.x();
    if (leg == Leg::LeftToRight && !(p.x() - u > params.min_disparity)) return;
    if (leg == Leg::RightToLeft && !(u - p.x() > params.min_disparity)) return;
    const int cost = descriptor_sad(from.descriptor, candidates[idx].descriptor);
    if (cost < best_cost || (cost == best_cost && idx < best)) {
      best_cost = cost;
      best = idx;
    }
  });
  return best;
}

std::array<int, 4> walk(const std::vector<Feature>& cur_left, const FeatureGrid& pl, const FeatureGrid& pr,
                        const FeatureGrid& cr, const FeatureGrid& cl, int start, const MatchParams& params) {
  std::array<int, 4> loop{-1, -1, -1, -1};
  loop[0] = best_candidate(cur_left[start], pl, Leg::Temporal, params);
  if (loop[0] < 0) return loop;
  loop[1] = best_candidate(pl.features()[loop[0]], pr, Leg::LeftToRight, params);
  if (loop[1] < 0) return loop;
  loop[2] = best_candidate(pr.features()[loop[1]], cr, Leg::Temporal, params);
  if (loop[2] < 0) return loop;
  loop[3] = best_candidate(cr.features()[loop[2]], cl, Leg::RightToLeft, params);
  return loop;
}

}  // namespace

const char* to_string(FeatureClass c) {
  switch (c) {
    case FeatureClass::BlobMax: return "blob-max";
    case FeatureClass::BlobMin: return "blob-min";
    case FeatureClass::CornerMax: return "corner-max";
    case FeatureClass::CornerMin: return "corner-min";
  }
  return "unknown";
}

Descriptor compute_descriptor(const Image& img, int u, int v) {
  auto px = [&](int x, int y) { return static_cast<int>(img.at(x, y)); };
  Descriptor d{};
  int k = 0;
  for (int dv : kDescriptorOffsets) {
    for (int du : kDescriptorOffsets) {
      const int x = u + du, y = v + dv;
      const int gx = (px(x + 1, y - 1) + 2 * px(x + 1, y) + px(x + 1, y + 1)) -
                     (px(x - 1, y - 1) + 2 * px(x - 1, y) + px(x - 1, y + 1));
      const int gy = (px(x - 1, y + 1) + 2 * px(x, y + 1) + px(x + 1, y + 1)) -
                     (px(x - 1, y - 1) + 2 * px(x, y - 1) + px(x + 1, y - 1));
      d[k++] = static_cast<std::int16_t>(gx);
      d[k++] = static_cast<std::int16_t>(gy);
    }
  }
  return d;
}

int descriptor_sad(const Descriptor& a, const Descriptor& b) {
  int sum = 0;
  for (int i = 0; i < kDescriptorLength; ++i) sum += std::abs(a[i] - b[i]);
  return sum;
}

std::vector<Feature> detect_features(const Image& img, const DetectorParams& params) {
  std::vector<Feature> features;
  if (!img.valid() || img.width < 2 * kDescriptorMargin + 1 || img.height < 2 * kDescriptorMargin + 1)
    return features;

  const int w = img.width;
  const int h = img.height;
  const std::vector<int> blob = filter5x5(img, kBlobMask);
  const std::vector<int> corner = filter5x5(img, kCornerMask);

  std::vector<Peak> peaks;
  suppress(blob, +1, FeatureClass::BlobMax, w, h, params, peaks);
  suppress(blob, -1, FeatureClass::BlobMin, w, h, params, peaks);
  suppress(corner, +1, FeatureClass::CornerMax, w, h, params, peaks);
  suppress(corner, -1, FeatureClass::CornerMin, w, h, params, peaks);

  std::stable_sort(peaks.begin(), peaks.end(), [](const Peak& a, const Peak& b) {
    const int ma = std::abs(a.response), mb = std::abs(b.response);
    if (ma != mb) return ma > mb;
    if (a.v != b.v) return a.v < b.v;
    if (a.u != b.u) return a.u < b.u;
    return a.cls < b.cls;
  });
  if (params.max_count >= 0 && peaks.size() > static_cast<std::size_t>(params.max_count))
    peaks.resize(params.max_count);

  features.reserve(peaks.size());
  for (const Peak& p : peaks) {
    const std::vector<int>& r =
        (p.cls == FeatureClass::BlobMax || p.cls == FeatureClass::BlobMin) ? blob : corner;
    auto at = [&](int u, int v) { return static_cast<double>(r[static_cast<std::size_t>(v) * w + u]); };
    const double du = parabolic_offset(at(p.u - 1, p.v), at(p.u, p.v), at(p.u + 1, p.v));
    const double dv = parabolic_offset(at(p.u, p.v - 1), at(p.u, p.v), at(p.u, p.v + 1));
    Feature f;
    f.location = Vec2(p.u + du, p.v + dv);
    f.cls = p.cls;
    f.response = p.response;
    f.descriptor = compute_descriptor(img, p.u, p.v);
    features.push_back(f);
  }
  return features;
}

std::vector<Feature> detect_features(const Image& img, int nms_radius, int max_count) {
  DetectorParams params;
  params.nms_radius = nms_radius;
  params.max_count = max_count;
  return detect_features(img, params);
}

std::array<int, 4> trace_loop(const std::vector<Feature>& prev_left, const std::vector<Feature>& prev_right,
                              const std::vector<Feature>& cur_left, const std::vector<Feature>& cur_right,
                              int start, const MatchParams& params) {
  const FeatureGrid pl(prev_left), pr(prev_right), cr(cur_right), cl(cur_left);
  return walk(cur_left, pl, pr, cr, cl, start, params);
}

std::vector<QuadMatch> circular_match(const std::vector<Feature>& prev_left,
                                      const std::vector<Feature>& prev_right,
                                      const std::vector<Feature>& cur_left,
                                      const std::vector<Feature>& cur_right, const MatchParams& params) {
  std::vector<QuadMatch> matches;
  if (prev_left.empty() || prev_right.empty() || cur_left.empty() || cur_right.empty()) return matches;

  const FeatureGrid pl(prev_left), pr(prev_right), cr(cur_right), cl(cur_left);
  for (int i = 0; i < static_cast<int>(cur_left.size()); ++i) {
    const std::array<int, 4> loop = walk(cur_left, pl, pr, cr, cl, i, params);
    if (loop[3] != i) continue;
    QuadMatch m;
    m.prev_left = prev_left[loop[0]].location;
    m.prev_right = prev_right[loop[1]].location;
    m.cur_right = cur_right[loop[2]].location;
    m.cur_left = cur_left[i].location;
    m.cls = cur_left[i].cls;
    m.prev_left_index = loop[0];
    m.prev_right_index = loop[1];
    m.cur_right_index = loop[2];
    m.cur_left_index = i;
    matches.push_back(m);
  }
  return matches;
}

}  // namespace jfbvo
