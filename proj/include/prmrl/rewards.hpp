#pragma once

#include <Eigen/Core>

#include "prmrl/geometry.hpp"
#include "prmrl/robot.hpp"

namespace prmrl {

/// One simulator step as seen by a dense reward.
struct Transition {
  Pose2 prev_pose;
  Pose2 pose;
  Action action;
  Point2 goal = Point2::Zero();
  double goal_radius = 0.25;
  bool collided = false;
  double clearance = 0.0;  // distance to the nearest obstacle, m
};

/// Weights for [goal, goalDist, collision, clearance, step, turning].
struct DiffDriveRewardWeights {
  Eigen::Matrix<double, 6, 1> theta = Eigen::Matrix<double, 6, 1>::Zero();

  static DiffDriveRewardWeights tuned();
  static Eigen::Matrix<double, 6, 1> lower_bounds();
  static Eigen::Matrix<double, 6, 1> upper_bounds();
  bool within_bounds() const;
};

/// Weights for [goal, goalProg, collision, step, backward].
struct CarRewardWeights {
  Eigen::Matrix<double, 5, 1> theta = Eigen::Matrix<double, 5, 1>::Zero();

  static CarRewardWeights tuned();
  static Eigen::Matrix<double, 5, 1> lower_bounds();
  static Eigen::Matrix<double, 5, 1> upper_bounds();
  bool within_bounds() const;
};

Eigen::Matrix<double, 6, 1> diff_drive_components(const Transition& t);
Eigen::Matrix<double, 5, 1> car_components(const Transition& t);

/// theta . components. Throws PreconditionError for out-of-bounds weights.
double reward_dd(const Transition& t, const DiffDriveRewardWeights& w);
double reward_car(const Transition& t, const CarRewardWeights& w);

}  // namespace prmrl
