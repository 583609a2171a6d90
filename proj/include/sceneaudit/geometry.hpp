#pragma once

#include <cmath>
#include <numbers>
#include <string>

#include "sceneaudit/errors.hpp"

namespace sceneaudit {

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  Vec3 operator*(double k) const { return {x * k, y * k, z * k}; }
  bool operator==(const Vec3& o) const = default;

  double norm() const { return std::sqrt(x * x + y * y + z * z); }
  bool finite() const { return std::isfinite(x) && std::isfinite(y) && std::isfinite(z); }
};

inline double distance(const Vec3& a, const Vec3& b) { return (a - b).norm(); }

/// An oriented 3D bounding box: center, extents along the local axes, and yaw
/// about the vertical axis. Extents must be strictly positive and all fields
/// finite; degenerate boxes are rejected at construction. Yaw is normalized
/// into [-pi, pi]. Immutable after construction.
class Box3D {
public:
  Box3D(const Vec3& center, double length, double width, double height, double yaw = 0.0)
      : center_(center), length_(length), width_(width), height_(height), yaw_(yaw) {
    if (!center_.finite()) throw ValidationError("box center must be finite");
    if (!std::isfinite(length_) || !std::isfinite(width_) || !std::isfinite(height_))
      throw ValidationError("box extents must be finite");
    if (length_ <= 0.0 || width_ <= 0.0 || height_ <= 0.0)
      throw ValidationError("box extents must be > 0 (got " + std::to_string(length_) + " x " +
                            std::to_string(width_) + " x " + std::to_string(height_) + ")");
    if (!std::isfinite(yaw_)) throw ValidationError("box yaw must be finite");
    yaw_ = std::remainder(yaw_, 2.0 * std::numbers::pi);
  }

  const Vec3& center() const { return center_; }
  double length() const { return length_; }
  double width() const { return width_; }
  double height() const { return height_; }
  double yaw() const { return yaw_; }

  bool operator==(const Box3D& o) const {
    return center_ == o.center_ && length_ == o.length_ && width_ == o.width_ &&
           height_ == o.height_ && yaw_ == o.yaw_;
  }

private:
  Vec3 center_;
  double length_, width_, height_;
  double yaw_;
};

inline double volume(const Box3D& b) { return b.length() * b.width() * b.height(); }

namespace detail {
inline double axis_overlap(double c1, double e1, double c2, double e2) {
  double lo = std::max(c1 - 0.5 * e1, c2 - 0.5 * e2);
  double hi = std::min(c1 + 0.5 * e1, c2 + 0.5 * e2);
  return std::max(0.0, hi - lo);
}

// Extent measured through the same face arithmetic as axis_overlap, so that
// identical boxes yield a bitwise-equal intersection and volume.
inline double axis_span(double c, double e) { return (c + 0.5 * e) - (c - 0.5 * e); }
}  // namespace detail

/// Intersection-over-union of two boxes, treating both as axis-aligned
/// (yaw is ignored; length maps to x, width to y, height to z). Symmetric,
/// in [0, 1], exactly 1 for identical boxes and 0 for disjoint ones.
inline double iou3d(const Box3D& a, const Box3D& b) {
  double ox = detail::axis_overlap(a.center().x, a.length(), b.center().x, b.length());
  double oy = detail::axis_overlap(a.center().y, a.width(), b.center().y, b.width());
  double oz = detail::axis_overlap(a.center().z, a.height(), b.center().z, b.height());
  double inter = ox * oy * oz;
  if (inter <= 0.0) return 0.0;
  double va = detail::axis_span(a.center().x, a.length()) *
              detail::axis_span(a.center().y, a.width()) *
              detail::axis_span(a.center().z, a.height());
  double vb = detail::axis_span(b.center().x, b.length()) *
              detail::axis_span(b.center().y, b.width()) *
              detail::axis_span(b.center().z, b.height());
  double uni = va + vb - inter;
  return inter / uni;
}

inline double center_distance(const Box3D& a, const Box3D& b) {
  return distance(a.center(), b.center());
}

}  // namespace sceneaudit
