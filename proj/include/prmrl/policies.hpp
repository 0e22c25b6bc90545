#pragma once

#include <functional>
#include <memory>
#include <string>
#include <utility>

#include "prmrl/policy.hpp"
#include "prmrl/robot.hpp"

namespace prmrl {

/// Rotate-then-drive controller that ignores lidar (PRM-SL execution).
struct StraightLineParams {
  double k_v = 0.5;                // v = min(v_max, k_v * distance)
  double k_theta = 2.0;            // w = k_theta * bearing while driving
  double rotate_threshold = 0.1;   // rad; rotate in place above this
  double range = 10.0;             // declared d_pi
};

/// Artificial potential field over lidar returns.
struct ApfParams {
  double k_att = 1.0;
  double k_rep = 0.3;
  double influence = 1.5;  // r_0, m
  StraightLineParams drive;
};

/// Dynamic window over (v, w) scored by heading, clearance and velocity.
struct DwaParams {
  double alpha = 0.8;  // heading
  double beta = 0.1;   // clearance
  double gamma = 0.1;  // velocity
  double horizon = 1.5;
  int n_v = 7;
  int n_w = 15;
  double accel_v = 2.5;   // m/s^2 reachable within one control period
  double accel_w = 5.0;   // rad/s^2
  double sim_dt = 0.1;
  double robot_radius = 0.3;
  double margin = 0.1;  // added to the radius when checking candidates
  double clearance_cap = 2.0;
  double k_goal = 0.5;    // caps window speed at k_goal * distance near the goal
  double goal_tolerance = 0.2;  // m; a rollout this close to the goal scores full heading
  double range = 10.0;
};

/// Scripted obstacle-avoiding point-to-point controller standing in for a
/// learned policy: goal-seeking gap selection blended with lidar repulsion,
/// a sideways escape manoeuvre when progress stalls, and a small angular
/// dither that breaks symmetric deadlocks.
struct ScriptedP2PParams {
  double range = 10.0;
  double robot_radius = 0.3;
  double margin = 0.12;
  double lookahead = 1.5;
  double k_w = 1.5;
  double k_v = 0.6;
  double min_cruise = 0.15;
  double rotate_threshold = 0.9;
  double repulsion_range = 0.7;
  double k_rep = 0.3;
  int median_window = 9;  // rays; wide enough to suppress single-ray noise
  int stall_steps = 25;
  int escape_steps = 30;
  double progress_epsilon = 0.05;
  double dither = 0.05;
};

Action straight_line_act(const Observation& obs, const ActuatorLimits& limits, const StraightLineParams& params = {});

/// Attractive + repulsive resultant in the robot frame (x forward).
Eigen::Vector2d apf_force(const Observation& obs, const ApfParams& params);
Action apf_act(const Observation& obs, const ActuatorLimits& limits, const ApfParams& params = {});

struct DwaCandidate {
  Action action;
  bool collides = false;
  double heading = 0.0, clearance = 0.0, velocity = 0.0;
  double score = 0.0;
};
/// Every window candidate, in enumeration order (v outer, w inner).
std::vector<DwaCandidate> dwa_candidates(const Observation& obs, const Action& current, const ActuatorLimits& limits,
                                         const DwaParams& params);
Action dwa_act(const Observation& obs, const Action& current, const ActuatorLimits& limits, const DwaParams& params = {});

Action scripted_p2p_act(const Observation& obs, PolicyMemory& memory, const ActuatorLimits& limits,
                        const ScriptedP2PParams& params, Rng& rng);

class StraightLinePolicy final : public Policy {
 public:
  StraightLinePolicy(ActuatorLimits limits, StraightLineParams params = {}) : limits_(limits), params_(params) {}
  Action act(const Observation& obs, PolicyMemory&, Rng&) const override { return straight_line_act(obs, limits_, params_); }
  double effective_range() const override { return params_.range; }
  std::string descriptor() const override { return "straight_line"; }
  bool uses_lidar() const override { return false; }

 private:
  ActuatorLimits limits_;
  StraightLineParams params_;
};

class ApfPolicy final : public Policy {
 public:
  ApfPolicy(ActuatorLimits limits, ApfParams params = {}) : limits_(limits), params_(params) {}
  Action act(const Observation& obs, PolicyMemory&, Rng&) const override { return apf_act(obs, limits_, params_); }
  double effective_range() const override { return params_.drive.range; }
  std::string descriptor() const override { return "apf"; }

 private:
  ActuatorLimits limits_;
  ApfParams params_;
};

class DwaPolicy final : public Policy {
 public:
  DwaPolicy(ActuatorLimits limits, DwaParams params = {}) : limits_(limits), params_(params) {}
  Action act(const Observation& obs, PolicyMemory& memory, Rng&) const override {
    return dwa_act(obs, memory.previous, limits_, params_);
  }
  double effective_range() const override { return params_.range; }
  std::string descriptor() const override { return "dwa"; }

 private:
  ActuatorLimits limits_;
  DwaParams params_;
};

class ScriptedP2PPolicy final : public Policy {
 public:
  ScriptedP2PPolicy(ActuatorLimits limits, ScriptedP2PParams params = {}) : limits_(limits), params_(params) {}
  Action act(const Observation& obs, PolicyMemory& memory, Rng& rng) const override {
    return scripted_p2p_act(obs, memory, limits_, params_, rng);
  }
  double effective_range() const override { return params_.range; }
  std::string descriptor() const override { return "scripted_p2p"; }

 private:
  ActuatorLimits limits_;
  ScriptedP2PParams params_;
};

/// Policy selection by name plus every parameter table.
struct PolicySpec {
  std::string name = "scripted_p2p";  // straight_line | apf | dwa | scripted_p2p
  StraightLineParams straight_line;
  ApfParams apf;
  DwaParams dwa;
  ScriptedP2PParams scripted;

  /// Default parameters for the named policy.
  static PolicySpec named(std::string policy) {
    PolicySpec s;
    s.name = std::move(policy);
    return s;
  }
};

std::shared_ptr<const Policy> make_policy(const PolicySpec& spec, const ActuatorLimits& limits);

/// Task indicator: 1 iff the position is strictly within d_G of the goal.
int true_objective(const Point2& position, const Point2& goal, double goal_radius);

}  // namespace prmrl
