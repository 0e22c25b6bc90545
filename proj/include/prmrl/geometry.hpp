#pragma once

#include <cmath>
#include <numbers>

#include <Eigen/Core>

namespace prmrl {

/// Workspace point in meters.
using Point2 = Eigen::Vector2d;

/// Wraps an angle into [-pi, pi).
inline double normalize_angle(double a) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  a = std::fmod(a + std::numbers::pi, two_pi);
  if (a < 0.0) a += two_pi;
  return a - std::numbers::pi;
}

struct Pose2 {
  Point2 position = Point2::Zero();
  double heading = 0.0;

  Pose2() = default;
  Pose2(double x, double y, double theta) : position(x, y), heading(normalize_angle(theta)) {}
  Pose2(const Point2& p, double theta) : position(p), heading(normalize_angle(theta)) {}

  double x() const { return position.x(); }
  double y() const { return position.y(); }

  /// Expresses a world point in this pose's frame (x forward, y left).
  Point2 to_local(const Point2& world) const {
    const Point2 d = world - position;
    const double c = std::cos(heading), s = std::sin(heading);
    return {c * d.x() + s * d.y(), -s * d.x() + c * d.y()};
  }
};

inline double distance(const Point2& a, const Point2& b) { return (a - b).norm(); }

}  // namespace prmrl
