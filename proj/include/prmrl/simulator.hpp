#pragma once

#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "prmrl/gridmap.hpp"
#include "prmrl/pedestrians.hpp"
#include "prmrl/policy.hpp"
#include "prmrl/robot.hpp"

namespace prmrl {

/// x += v cos(th) dt, y += v sin(th) dt, th += w dt.
DiffDriveState step_diff_drive(const DiffDriveState& state, const Action& action, double dt);

/// Bicycle kinematics with speed slew (a_max), steering slew and saturation.
/// Commanded yaw rate maps to target steering atan(L w / max(|v|, eps)).
CarState step_car(const CarState& state, const Action& action, double dt, const CarLimits& limits = {});

RobotState step_robot(const RobotModel& model, const RobotState& state, const Action& action);

/// Adds independent N(0, sigma_v), N(0, sigma_w) then clamps to the limits.
Action apply_action_noise(const Action& action, const NoiseConfig& noise, const ActuatorLimits& limits, Rng& rng);

/// Noisy scan pushed onto `history` and a noisy polar goal. `goal_offset`,
/// when given, replaces the per-step goal noise draw (persistent bias).
/// Pedestrian discs, when supplied, are visible to the lidar.
Observation observe(const InflatedGrid& grid, const Pose2& pose, const Point2& goal, ScanHistory& history,
                    const LidarConfig& lidar, const NoiseConfig& noise, Rng& rng, bool with_lidar = true,
                    const std::optional<Eigen::Vector2d>& goal_offset = std::nullopt,
                    const std::vector<Pedestrian>* pedestrians = nullptr);

/// Immutable world shared by any number of concurrent rollouts.
struct Environment {
  std::shared_ptr<const InflatedGrid> grid;  // inflated by robot.radius
  RobotModel robot;
  LidarConfig lidar;
  NoiseConfig noise;
  CrowdConfig crowd;
  std::string map_id;

  static Environment make(const OccupancyGrid& map, RobotModel robot = {}, NoiseConfig noise = {},
                          std::string map_id = "unnamed");
  const InflatedGrid& inflated() const { return *grid; }
};

/// Default step budget: max(500, ceil(4 d / (v_max dt))).
int default_step_budget(double straight_line_distance, const RobotModel& model);

enum class Outcome { Success, Collision, Timeout };
const char* to_string(Outcome o);

struct TrajectorySample {
  double t = 0.0;
  Pose2 pose;
  Action command;       // applied (noisy, clamped) command
  double clearance = 0.0;
};

struct RolloutResult {
  Outcome outcome = Outcome::Timeout;
  int steps = 0;
  double length = 0.0;  // traveled, plus residual to goal on success
  double min_clearance = 0.0;
  std::vector<TrajectorySample> trajectory;
  std::uint64_t collision_checks = 0;
};

/// Mutable state of one simulated robot run. Owns its pedestrians, frame
/// stack and policy memory; reads the environment only.
class Episode {
 public:
  Episode(const Environment& env, const Policy& policy, const RobotState& start, Rng& rng, bool record = false);

  void set_goal(const Point2& goal);
  const Point2& goal() const { return goal_; }
  double distance_to_goal() const { return distance(state_.pose.position, goal_); }

  /// One control cycle: observe, act, perturb, integrate, collision check.
  /// Returns false when the new pose is in collision.
  bool step();

  const RobotState& state() const { return state_; }
  int steps() const { return steps_; }
  double length() const { return length_; }
  double min_clearance() const { return min_clearance_; }
  std::uint64_t collision_checks() const { return checks_; }
  const std::vector<Pedestrian>& pedestrians() const { return pedestrians_; }
  std::vector<TrajectorySample>& trajectory() { return trajectory_; }

 private:
  double clearance_now() const;
  bool in_collision() const;

  const Environment& env_;
  const Policy& policy_;
  Rng& rng_;
  RobotState state_;
  Point2 goal_ = Point2::Zero();
  ScanHistory history_;
  PolicyMemory memory_;
  std::vector<Pedestrian> pedestrians_;
  std::optional<Eigen::Vector2d> goal_bias_;
  bool record_;
  int steps_ = 0;
  double length_ = 0.0;
  double min_clearance_;
  std::uint64_t checks_ = 0;
  std::vector<TrajectorySample> trajectory_;
};

struct RolloutParams {
  double goal_radius = 0.25;  // d_G
  int max_steps = 0;          // K_w; 0 selects default_step_budget
  bool record_trajectory = false;
};

/// Runs one trajectory until success (distance < d_G), collision or timeout.
/// Throws CollisionError when the start pose is not free.
RolloutResult execute_rollout(const Policy& policy, const Environment& env, const RobotState& start,
                              const Point2& goal, const RolloutParams& params, Rng& rng);

/// CSV with header t,x,y,theta,v,w,min_clearance (running minimum).
void write_trajectory_csv(std::ostream& out, const std::vector<TrajectorySample>& trajectory);

}  // namespace prmrl
