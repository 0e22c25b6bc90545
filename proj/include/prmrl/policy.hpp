#pragma once

#include <limits>
#include <string>

#include "prmrl/robot.hpp"
#include "prmrl/rng.hpp"

namespace prmrl {

/// Per-episode scratch owned by the rollout, never by the policy. Lets
/// stateless policy values serve concurrent rollouts.
struct PolicyMemory {
  Action previous;  // last command issued, before actuator noise
  double best_goal_distance = std::numeric_limits<double>::infinity();
  int stall_steps = 0;
  int escape_steps = 0;  // > 0 while in an escape manoeuvre
  int escape_side = 1;   // +1 left, -1 right

  /// Called whenever the goal changes (new waypoint).
  void new_goal() {
    best_goal_distance = std::numeric_limits<double>::infinity();
    stall_steps = 0;
    escape_steps = 0;
  }
};

/// Local planner: maps an observation to a velocity command.
class Policy {
 public:
  virtual ~Policy() = default;

  virtual Action act(const Observation& obs, PolicyMemory& memory, Rng& rng) const = 0;
  /// Declared capability radius d_pi in meters.
  virtual double effective_range() const = 0;
  virtual std::string descriptor() const = 0;
  /// Policies that ignore lidar let the simulator skip raycasting.
  virtual bool uses_lidar() const { return true; }
};

}  // namespace prmrl
