#include "prmrl/rewards.hpp"

#include <algorithm>
#include <cmath>

#include "prmrl/errors.hpp"

namespace prmrl {

namespace {
template <typename V>
bool inside(const V& v, const V& lo, const V& hi) {
  return (v.array() >= lo.array()).all() && (v.array() <= hi.array()).all();
}
}  // namespace

DiffDriveRewardWeights DiffDriveRewardWeights::tuned() {
  DiffDriveRewardWeights w;
  w.theta << 62.0, 0.38, -57.90, 0.67, -0.43, 0.415;
  return w;
}
Eigen::Matrix<double, 6, 1> DiffDriveRewardWeights::lower_bounds() {
  return (Eigen::Matrix<double, 6, 1>() << 0.0, 0.0, -100.0, 0.0, -1.0, 0.0).finished();
}
Eigen::Matrix<double, 6, 1> DiffDriveRewardWeights::upper_bounds() {
  return (Eigen::Matrix<double, 6, 1>() << 100.0, 1.0, 0.0, 1.0, 0.0, 1.0).finished();
}
bool DiffDriveRewardWeights::within_bounds() const { return inside(theta, lower_bounds(), upper_bounds()); }

CarRewardWeights CarRewardWeights::tuned() {
  CarRewardWeights w;
  w.theta << 0.82, 2.03, -1.80, -0.10, -0.64;
  return w;
}
Eigen::Matrix<double, 5, 1> CarRewardWeights::lower_bounds() {
  return (Eigen::Matrix<double, 5, 1>() << 0.0, 0.0, -100.0, -1.0, -1.0).finished();
}
Eigen::Matrix<double, 5, 1> CarRewardWeights::upper_bounds() {
  return (Eigen::Matrix<double, 5, 1>() << 100.0, 5.0, 0.0, 0.0, 0.0).finished();
}
bool CarRewardWeights::within_bounds() const { return inside(theta, lower_bounds(), upper_bounds()); }

Eigen::Matrix<double, 6, 1> diff_drive_components(const Transition& t) {
  const double d = distance(t.pose.position, t.goal);
  Eigen::Matrix<double, 6, 1> r;
  r << (d < t.goal_radius ? 1.0 : 0.0), -d, (t.collided ? 1.0 : 0.0), t.clearance, 1.0, -std::abs(t.action.w);
  return r;
}

Eigen::Matrix<double, 5, 1> car_components(const Transition& t) {
  const double d_prev = distance(t.prev_pose.position, t.goal);
  const double d = distance(t.pose.position, t.goal);
  Eigen::Matrix<double, 5, 1> r;
  r << (d < t.goal_radius ? 1.0 : 0.0), d_prev - d, (t.collided ? 1.0 : 0.0), 1.0, -std::max(0.0, -t.action.v);
  return r;
}

double reward_dd(const Transition& t, const DiffDriveRewardWeights& w) {
  if (!w.within_bounds()) throw PreconditionError("diff-drive reward weights outside their bounds");
  return w.theta.dot(diff_drive_components(t));
}

double reward_car(const Transition& t, const CarRewardWeights& w) {
  if (!w.within_bounds()) throw PreconditionError("car reward weights outside their bounds");
  return w.theta.dot(car_components(t));
}

}  // namespace prmrl
