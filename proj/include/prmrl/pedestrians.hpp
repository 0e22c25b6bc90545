#pragma once

#include <optional>
#include <vector>

#include "prmrl/geometry.hpp"
#include "prmrl/gridmap.hpp"
#include "prmrl/rng.hpp"

namespace prmrl {

struct Pedestrian {
  Point2 position = Point2::Zero();
  Eigen::Vector2d velocity = Eigen::Vector2d::Zero();
  Point2 goal = Point2::Zero();
  double radius = 0.3;
  /// Turnaround point for scenarios where pedestrians pace back and forth.
  Point2 home = Point2::Zero();
};

/// Helbing-style social force constants (SI units).
struct SocialForceParams {
  double relaxation_time = 0.5;  // tau, s
  double strength = 7.0;         // A = V0 / sigma with V0 = 2.1 m^2/s^2, m/s^2
  double range = 0.3;            // B = sigma, m
  double desired_speed = 1.3;    // m/s
  double radius = 0.3;           // m
  double goal_radius = 0.3;      // desired speed drops to 0 inside this
  double obstacle_cutoff = 1.5;  // nearest-obstacle search radius, m
  double max_speed_factor = 1.3;
};

/// Nearest blocked cell center within `cutoff`, if any.
std::optional<Point2> nearest_obstacle(const InflatedGrid& grid, const Point2& p, double cutoff);

/// One explicit-Euler step of the social force model. Pedestrians are
/// repelled by each other, by the robot disc and by their nearest obstacle.
std::vector<Pedestrian> step_pedestrians(const std::vector<Pedestrian>& peds, const InflatedGrid& grid,
                                         const Point2& robot_position, double robot_radius, double dt,
                                         const SocialForceParams& params = {});

/// Scenario: `count` pedestrians placed on free cells, each walking between
/// two free points and turning around on arrival.
struct CrowdConfig {
  int count = 0;
  SocialForceParams params;
  double min_spawn_distance = 1.0;  // from the robot start
};

std::vector<Pedestrian> spawn_pedestrians(const CrowdConfig& cfg, const InflatedGrid& grid, const Point2& robot_start,
                                          Rng& rng);

}  // namespace prmrl
