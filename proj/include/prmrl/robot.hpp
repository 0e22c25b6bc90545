#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include <Eigen/Core>

#include "prmrl/geometry.hpp"
#include "prmrl/gridmap.hpp"
#include "prmrl/rng.hpp"

namespace prmrl {

/// Commanded linear (m/s) and angular (rad/s) velocity.
struct Action {
  double v = 0.0;
  double w = 0.0;
  friend bool operator==(const Action&, const Action&) = default;
};

/// Bounds a policy must respect before noise is applied.
struct ActuatorLimits {
  double v_min = -0.2;
  double v_max = 1.0;
  double w_max = 1.0;
  bool turn_in_place = true;

  Action clamp(const Action& a) const {
    return {std::clamp(a.v, v_min, v_max), std::clamp(a.w, -w_max, w_max)};
  }
};

struct DiffDriveLimits {
  double v_min = -0.2;
  double v_max = 1.0;
  double w_max = 1.0;
};

/// Single-track (bicycle) limits. Defaults follow an F1/10-class car.
struct CarLimits {
  double v_min = -0.5;
  double v_max = 2.0;
  double a_max = 2.0;
  double wheelbase = 0.3;
  double steer_max = 0.35;
  double steer_rate_max = 2.0;
  double min_speed_for_steering = 1e-3;

  double min_turn_radius() const { return wheelbase / std::tan(steer_max); }
  /// Largest yaw rate reachable at full speed and full lock.
  double w_max() const { return v_max / min_turn_radius(); }
};

enum class DriveModel { DiffDrive, Car };

struct RobotModel {
  DriveModel drive = DriveModel::DiffDrive;
  DiffDriveLimits diff;
  CarLimits car;
  double radius = 0.3;
  double dt = 0.2;  // 5 Hz control

  /// Lidar frames stacked into an observation.
  int frame_stack() const { return drive == DriveModel::Car ? 3 : 1; }
  ActuatorLimits limits() const {
    if (drive == DriveModel::Car) return {car.v_min, car.v_max, car.w_max(), false};
    return {diff.v_min, diff.v_max, diff.w_max, true};
  }
  double v_max() const { return drive == DriveModel::Car ? car.v_max : diff.v_max; }

  static RobotModel diff_drive() { return {}; }
  static RobotModel car_like() {
    RobotModel m;
    m.drive = DriveModel::Car;
    return m;
  }
};

struct DiffDriveState {
  Pose2 pose;
};

struct CarState {
  Pose2 pose;
  double speed = 0.0;     // signed, m/s
  double steering = 0.0;  // rad
};

/// State carried by the simulator for either drive model.
struct RobotState {
  Pose2 pose;
  double speed = 0.0;
  double steering = 0.0;
};

/// Zero-mean Gaussian noise standard deviations.
struct NoiseConfig {
  double sigma_lidar = 0.0;  // m, per ray
  double sigma_goal = 0.0;   // m, per Cartesian goal coordinate
  double sigma_v = 0.0;      // m/s
  double sigma_w = 0.0;      // rad/s
  /// Draw the goal offset once per episode instead of every step.
  bool persistent_goal_bias = false;

  bool valid() const { return sigma_lidar >= 0 && sigma_goal >= 0 && sigma_v >= 0 && sigma_w >= 0; }
};

/// Sole input to a policy: stacked noisy scans plus the relative goal.
/// Bearing is counter-clockwise positive (goal on the left > 0).
struct Observation {
  std::vector<Eigen::VectorXd> lidar_stack;  // oldest first, most recent last
  double goal_distance = 0.0;
  double goal_bearing = 0.0;
  LidarConfig lidar;

  Eigen::Vector2d goal_polar() const { return {goal_distance, goal_bearing}; }
  bool has_scan() const { return !lidar_stack.empty(); }
  const Eigen::VectorXd& latest_scan() const { return lidar_stack.back(); }
};

/// Fixed-length frame stack; the first push fills every slot.
class ScanHistory {
 public:
  explicit ScanHistory(int frames = 1) : frames_(frames < 1 ? 1 : frames) {}
  void push(const Eigen::VectorXd& scan);
  const std::vector<Eigen::VectorXd>& frames() const { return stack_; }
  bool empty() const { return stack_.empty(); }
  void clear() { stack_.clear(); }

 private:
  int frames_;
  std::vector<Eigen::VectorXd> stack_;
};

}  // namespace prmrl
