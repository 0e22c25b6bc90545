#include "prmrl/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "prmrl/errors.hpp"

namespace prmrl {

DiffDriveState step_diff_drive(const DiffDriveState& state, const Action& action, double dt) {
  const Pose2& p = state.pose;
  return {Pose2(p.x() + action.v * std::cos(p.heading) * dt, p.y() + action.v * std::sin(p.heading) * dt,
                p.heading + action.w * dt)};
}

CarState step_car(const CarState& state, const Action& action, double dt, const CarLimits& lim) {
  CarState next = state;
  const double target_speed = std::clamp(action.v, lim.v_min, lim.v_max);
  const double dv_max = lim.a_max * dt;
  next.speed = std::clamp(state.speed + std::clamp(target_speed - state.speed, -dv_max, dv_max), lim.v_min, lim.v_max);

  const double target_steer = std::clamp(
      std::atan(lim.wheelbase * action.w / std::max(std::abs(action.v), lim.min_speed_for_steering)), -lim.steer_max,
      lim.steer_max);
  const double ds_max = lim.steer_rate_max * dt;
  next.steering = std::clamp(state.steering + std::clamp(target_steer - state.steering, -ds_max, ds_max),
                             -lim.steer_max, lim.steer_max);

  const Pose2& p = state.pose;
  next.pose = Pose2(p.x() + next.speed * std::cos(p.heading) * dt, p.y() + next.speed * std::sin(p.heading) * dt,
                    p.heading + next.speed / lim.wheelbase * std::tan(next.steering) * dt);
  return next;
}

RobotState step_robot(const RobotModel& model, const RobotState& state, const Action& action) {
  if (model.drive == DriveModel::DiffDrive) {
    const auto next = step_diff_drive({state.pose}, action, model.dt);
    return {next.pose, action.v, 0.0};
  }
  const auto next = step_car({state.pose, state.speed, state.steering}, action, model.dt, model.car);
  return {next.pose, next.speed, next.steering};
}

Action apply_action_noise(const Action& action, const NoiseConfig& noise, const ActuatorLimits& limits, Rng& rng) {
  Action noisy{action.v + gaussian(rng, noise.sigma_v), action.w + gaussian(rng, noise.sigma_w)};
  return limits.clamp(noisy);
}

void ScanHistory::push(const Eigen::VectorXd& scan) {
  if (stack_.empty()) {
    stack_.assign(frames_, scan);
    return;
  }
  std::rotate(stack_.begin(), stack_.begin() + 1, stack_.end());
  stack_.back() = scan;
}

namespace {

// Distance along the ray to the first pedestrian disc, or `range`.
double clip_to_pedestrians(const Point2& o, double angle, double range, const std::vector<Pedestrian>& peds) {
  const Eigen::Vector2d d(std::cos(angle), std::sin(angle));
  for (const auto& p : peds) {
    const Eigen::Vector2d oc = p.position - o;
    const double c2 = oc.squaredNorm();
    const double r2 = p.radius * p.radius;
    if (c2 <= r2) return 0.0;
    const double m = oc.dot(d);
    if (m <= 0.0) continue;
    const double perp2 = c2 - m * m;
    if (perp2 > r2) continue;
    range = std::min(range, m - std::sqrt(r2 - perp2));
  }
  return range;
}

}  // namespace

Observation observe(const InflatedGrid& grid, const Pose2& pose, const Point2& goal, ScanHistory& history,
                    const LidarConfig& lidar, const NoiseConfig& noise, Rng& rng, bool with_lidar,
                    const std::optional<Eigen::Vector2d>& goal_offset, const std::vector<Pedestrian>* pedestrians) {
  Observation obs;
  obs.lidar = lidar;
  if (with_lidar) {
    Eigen::VectorXd scan = lidar_scan(grid, pose, lidar);
    if (pedestrians && !pedestrians->empty())
      for (int i = 0; i < scan.size(); ++i)
        scan(i) = clip_to_pedestrians(pose.position, pose.heading + lidar_ray_angle(lidar, i), scan(i), *pedestrians);
    if (noise.sigma_lidar > 0.0)
      for (int i = 0; i < scan.size(); ++i)
        scan(i) = std::clamp(scan(i) + gaussian(rng, noise.sigma_lidar), 0.0, lidar.max_range);
    history.push(scan);
    obs.lidar_stack = history.frames();
  }
  Eigen::Vector2d offset;
  if (goal_offset) {
    offset = *goal_offset;
  } else {
    offset.x() = gaussian(rng, noise.sigma_goal);
    offset.y() = gaussian(rng, noise.sigma_goal);
  }
  const Point2 local = pose.to_local(goal + offset);
  obs.goal_distance = local.norm();
  obs.goal_bearing = normalize_angle(std::atan2(local.y(), local.x()));
  return obs;
}

Environment Environment::make(const OccupancyGrid& map, RobotModel robot, NoiseConfig noise, std::string map_id) {
  Environment env;
  env.grid = std::make_shared<const InflatedGrid>(std::make_shared<const OccupancyGrid>(map), robot.radius);
  env.robot = robot;
  env.noise = noise;
  env.map_id = std::move(map_id);
  return env;
}

int default_step_budget(double straight_line_distance, const RobotModel& model) {
  const double per_step = model.v_max() * model.dt;
  return std::max(500, static_cast<int>(std::ceil(4.0 * straight_line_distance / per_step)));
}

const char* to_string(Outcome o) {
  switch (o) {
    case Outcome::Success: return "success";
    case Outcome::Collision: return "collision";
    case Outcome::Timeout: return "timeout";
  }
  return "unknown";
}

Episode::Episode(const Environment& env, const Policy& policy, const RobotState& start, Rng& rng, bool record)
    : env_(env), policy_(policy), rng_(rng), state_(start), history_(env.robot.frame_stack()), record_(record) {
  if (!is_free(env.inflated(), start.pose.position))
    throw CollisionError("start pose (" + std::to_string(start.pose.x()) + ", " + std::to_string(start.pose.y()) +
                         ") is in collision");
  if (env.crowd.count > 0) pedestrians_ = spawn_pedestrians(env.crowd, env.inflated(), start.pose.position, rng_);
  if (env.noise.persistent_goal_bias)
    goal_bias_ = Eigen::Vector2d(gaussian(rng_, env.noise.sigma_goal), gaussian(rng_, env.noise.sigma_goal));
  min_clearance_ = clearance_now();
  if (record_) trajectory_.push_back({0.0, state_.pose, {}, min_clearance_});
}

void Episode::set_goal(const Point2& goal) {
  goal_ = goal;
  memory_.new_goal();
}

double Episode::clearance_now() const {
  // Off-map space counts as obstacle, so the map border bounds clearance.
  const OccupancyGrid& g = env_.inflated().base();
  const Point2 rel = state_.pose.position - g.origin();
  double c = std::min({env_.inflated().clearance(state_.pose.position), rel.x(), rel.y(), g.width_m() - rel.x(),
                       g.height_m() - rel.y()});
  for (const auto& p : pedestrians_) c = std::min(c, distance(p.position, state_.pose.position) - p.radius);
  return c;
}

bool Episode::in_collision() const {
  if (!is_free(env_.inflated(), state_.pose.position)) return true;
  for (const auto& p : pedestrians_)
    if (distance(p.position, state_.pose.position) < p.radius + env_.robot.radius) return true;
  return false;
}

bool Episode::step() {
  const ActuatorLimits limits = env_.robot.limits();
  const Observation obs = observe(env_.inflated(), state_.pose, goal_, history_, env_.lidar, env_.noise, rng_,
                                  policy_.uses_lidar(), goal_bias_, &pedestrians_);
  const Action command = limits.clamp(policy_.act(obs, memory_, rng_));
  memory_.previous = command;
  const Action applied = apply_action_noise(command, env_.noise, limits, rng_);

  const Point2 before = state_.pose.position;
  state_ = step_robot(env_.robot, state_, applied);
  ++steps_;
  length_ += distance(before, state_.pose.position);

  if (!pedestrians_.empty()) {
    pedestrians_ = step_pedestrians(pedestrians_, env_.inflated(), state_.pose.position, env_.robot.radius,
                                    env_.robot.dt, env_.crowd.params);
    for (auto& p : pedestrians_)
      if (distance(p.position, p.goal) < env_.crowd.params.goal_radius) std::swap(p.goal, p.home);
  }

  ++checks_;
  const double c = clearance_now();
  min_clearance_ = std::min(min_clearance_, c);
  if (record_) trajectory_.push_back({steps_ * env_.robot.dt, state_.pose, applied, c});
  return !in_collision();
}

RolloutResult execute_rollout(const Policy& policy, const Environment& env, const RobotState& start,
                              const Point2& goal, const RolloutParams& params, Rng& rng) {
  Episode ep(env, policy, start, rng, params.record_trajectory);
  ep.set_goal(goal);
  const int budget = params.max_steps > 0 ? params.max_steps
                                          : default_step_budget(distance(start.pose.position, goal), env.robot);
  RolloutResult r;
  r.outcome = Outcome::Success;
  while (ep.distance_to_goal() >= params.goal_radius) {
    if (ep.steps() >= budget) {
      r.outcome = Outcome::Timeout;
      break;
    }
    if (!ep.step()) {
      r.outcome = Outcome::Collision;
      break;
    }
  }
  r.steps = ep.steps();
  r.length = ep.length();
  if (r.outcome == Outcome::Success) r.length += ep.distance_to_goal();
  r.min_clearance = ep.min_clearance();
  r.collision_checks = ep.collision_checks();
  r.trajectory = std::move(ep.trajectory());
  return r;
}

void write_trajectory_csv(std::ostream& out, const std::vector<TrajectorySample>& trajectory) {
  out << "t,x,y,theta,v,w,min_clearance\n";
  double running = std::numeric_limits<double>::infinity();
  const auto old_precision = out.precision(10);
  for (const auto& s : trajectory) {
    running = std::min(running, s.clearance);
    out << s.t << ',' << s.pose.x() << ',' << s.pose.y() << ',' << s.pose.heading << ',' << s.command.v << ','
        << s.command.w << ',' << running << '\n';
  }
  out.precision(old_precision);
}

}  // namespace prmrl
