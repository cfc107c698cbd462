#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>

namespace rotassign {

struct ImagePoint {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const ImagePoint&, const ImagePoint&) = default;
};

// Ground-truth oriented box. theta is in degrees, measured counterclockwise
// from the image y-axis to the side of length h. Canonical boxes keep
// h >= w and theta in [0, 180).
struct OrientedBox {
  double cx = 0.0;
  double cy = 0.0;
  double w = 1.0;
  double h = 1.0;
  double theta = 0.0;
  int category = 0;

  double long_side() const { return std::max(w, h); }
  double short_side() const { return std::min(w, h); }

  friend bool operator==(const OrientedBox&, const OrientedBox&) = default;
};

// Offsets of a point expressed along the box axes: a pairs with w, b with h.
struct BoxFrameOffset {
  double a = 0.0;
  double b = 0.0;
};

inline double deg_to_rad(double deg) { return deg * (std::numbers::pi / 180.0); }

// Reduce an angle in degrees to [0, 180).
inline double normalize_angle(double deg) {
  double r = std::fmod(deg, 180.0);
  if (r < 0.0) r += 180.0;
  if (r >= 180.0) r = 0.0;
  return r;
}

// Swaps sides so that h is the long side (rotating theta by 90 degrees) and
// reduces theta to [0, 180). Squares keep their orientation.
inline OrientedBox canonicalize(OrientedBox box) {
  if (box.w > box.h) {
    std::swap(box.w, box.h);
    box.theta += 90.0;
  }
  box.theta = normalize_angle(box.theta);
  return box;
}

inline void validate_box(const OrientedBox& box) {
  if (!std::isfinite(box.cx) || !std::isfinite(box.cy) || !std::isfinite(box.w) ||
      !std::isfinite(box.h) || !std::isfinite(box.theta)) {
    throw std::invalid_argument("oriented box has non-finite fields");
  }
  if (!(box.w > 0.0) || !(box.h > 0.0)) {
    throw std::invalid_argument("oriented box needs positive sides, got w=" +
                                std::to_string(box.w) + " h=" + std::to_string(box.h));
  }
}

// Validating factory; the result is canonical.
inline OrientedBox make_box(double cx, double cy, double w, double h, double theta_deg,
                            int category = 0) {
  OrientedBox box{cx, cy, w, h, theta_deg, category};
  validate_box(box);
  return canonicalize(box);
}

inline bool is_canonical(const OrientedBox& box) {
  return box.h >= box.w && box.theta >= 0.0 && box.theta < 180.0;
}

// (x*, y*): box center minus point.
inline ImagePoint center_offset(const OrientedBox& box, ImagePoint p) {
  return {box.cx - p.x, box.cy - p.y};
}

inline BoxFrameOffset to_box_frame(const OrientedBox& box, ImagePoint p) {
  const ImagePoint off = center_offset(box, p);
  const double t = deg_to_rad(box.theta);
  const double c = std::cos(t);
  const double s = std::sin(t);
  return {off.x * c + off.y * s, off.x * s - off.y * c};
}

// Shape-adaptive threshold: 1 - min/(2 max). Lies in [0.5, 1).
inline double ratio_factor(const OrientedBox& box) {
  const double lo = std::min(box.w, box.h);
  const double hi = std::max(box.w, box.h);
  return 1.0 - lo / (2.0 * hi);
}

// Either the shape-adaptive threshold or a fixed value in (0, 1].
class RatioMode {
 public:
  static RatioMode adaptive() { return RatioMode{}; }
  static RatioMode fixed(double value) {
    if (!(value > 0.0 && value <= 1.0)) {
      throw std::invalid_argument("fixed ratio factor must lie in (0, 1], got " +
                                  std::to_string(value));
    }
    RatioMode m;
    m.value_ = value;
    return m;
  }

  bool is_adaptive() const { return !value_.has_value(); }
  double fixed_value() const { return value_.value_or(0.0); }
  double threshold_for(const OrientedBox& box) const {
    return value_ ? *value_ : ratio_factor(box);
  }

  friend bool operator==(const RatioMode&, const RatioMode&) = default;

 private:
  std::optional<double> value_;
};

// Left-hand side of the ellipse test: a^2/(w/2)^2 + b^2/(h/2)^2.
inline double ellipse_measure(const OrientedBox& box, ImagePoint p) {
  const BoxFrameOffset f = to_box_frame(box, p);
  const double ha = 0.5 * box.w;
  const double hb = 0.5 * box.h;
  return (f.a * f.a) / (ha * ha) + (f.b * f.b) / (hb * hb);
}

// Dynamic elliptical membership. Strict inequality: boundary points are out.
inline bool ded_contains(const OrientedBox& box, ImagePoint p,
                         const RatioMode& mode = RatioMode::adaptive()) {
  return ellipse_measure(box, p) < mode.threshold_for(box);
}

inline bool obb_contains(const OrientedBox& box, ImagePoint p) {
  const BoxFrameOffset f = to_box_frame(box, p);
  return std::abs(f.a) <= 0.5 * box.w && std::abs(f.b) <= 0.5 * box.h;
}

// Center-sampling window of half-size radius_factor * stride, aligned to the
// box axes. Not clipped to the box.
inline bool central_area_contains(const OrientedBox& box, ImagePoint p, double radius_factor,
                                  double stride) {
  const BoxFrameOffset f = to_box_frame(box, p);
  const double r = radius_factor * stride;
  return std::abs(f.a) <= r && std::abs(f.b) <= r;
}

// Largest distance from p to the four box sides, measured in the box frame.
// This is the oriented analogue of max(l, t, r, b) used by scale-range
// assignment.
inline double max_side_distance(const OrientedBox& box, ImagePoint p) {
  const BoxFrameOffset f = to_box_frame(box, p);
  return std::max(0.5 * box.w + std::abs(f.a), 0.5 * box.h + std::abs(f.b));
}

inline double l2_distance(const OrientedBox& box, ImagePoint p) {
  const double dx = box.cx - p.x;
  const double dy = box.cy - p.y;
  return std::sqrt(dx * dx + dy * dy);
}

// Image-space half extents of a region spanning +-ea along the a-axis and
// +-eb along the b-axis.
inline ImagePoint aabb_half_extent(const OrientedBox& box, double ea, double eb) {
  const double t = deg_to_rad(box.theta);
  const double c = std::abs(std::cos(t));
  const double s = std::abs(std::sin(t));
  return {c * ea + s * eb, s * ea + c * eb};
}

}  // namespace rotassign
