#include "prmrl/navigation.hpp"

#include <chrono>
#include <cmath>

#include "prmrl/errors.hpp"

namespace prmrl {

std::vector<Query> generate_queries(const InflatedGrid& inflated, int n, double d_min, double d_max, Rng& rng,
                                    int max_attempts) {
  if (n < 0) throw PreconditionError("query count must be >= 0");
  if (!(d_min < d_max)) throw PreconditionError("query distance band needs d_min < d_max");
  if (max_attempts <= 0) max_attempts = std::max(1000, 200 * n);
  std::vector<Query> out;
  out.reserve(n);
  int attempts = 0;
  while (static_cast<int>(out.size()) < n) {
    if (attempts++ >= max_attempts)
      throw SamplingExhausted("found only " + std::to_string(out.size()) + " of " + std::to_string(n) +
                              " queries with shortest path in [" + std::to_string(d_min) + ", " +
                              std::to_string(d_max) + "] m after " + std::to_string(max_attempts) + " attempts");
    const Point2 s = sample_free(inflated, rng);
    const Point2 g = sample_free(inflated, rng);
    // Cheap reject before A*: the path is never shorter than the chord.
    if (distance(s, g) > d_max + inflated.base().resolution()) continue;
    const auto len = shortest_feasible_path(inflated, s, g);
    if (!len || *len < d_min || *len > d_max) continue;
    out.push_back({s, g, *len});
  }
  return out;
}

NavResult navigate(const Roadmap& roadmap, const Policy& attach_policy, const Policy& exec_policy,
                   const Environment& env, const Point2& start, const Point2& goal, const NavParams& params,
                   std::uint64_t seed) {
  const auto t0 = std::chrono::steady_clock::now();
  NavResult res;
  if (!is_free(env.inflated(), start))
    throw CollisionError("start (" + std::to_string(start.x()) + ", " + std::to_string(start.y()) +
                         ") is in collision");
  if (!is_free(env.inflated(), goal))
    throw CollisionError("goal (" + std::to_string(goal.x()) + ", " + std::to_string(goal.y()) + ") is in collision");

  Rng rng = make_rng(seed, {stream::kNavigate});
  const RobotState initial{Pose2(start, uniform(rng, 0.0, 2.0 * std::numbers::pi))};

  if (distance(start, goal) < params.goal_radius) {
    res.outcome = Outcome::Success;
    res.waypoints = {start, goal};
    res.waypoints_used = 2;
    res.waypoints_reached = 2;
    res.min_clearance = env.inflated().clearance(start);
    if (params.record_trajectory) res.trajectory.push_back({0.0, initial.pose, {}, res.min_clearance});
    return res;
  }

  AttachParams attach = params.attach;
  attach.edge.goal_radius = params.goal_radius;
  // Pedestrians are runtime obstacles; planning-time attachment does not see them.
  Environment plan_env = env;
  plan_env.crowd.count = 0;
  AugmentedRoadmap graph(roadmap);
  const Attachment s = connect_query_point(graph, start, attach_policy, plan_env, attach, derive_seed(seed, {0}));
  const Attachment g = connect_query_point(graph, goal, attach_policy, plan_env, attach, derive_seed(seed, {1}));
  const PathQuery path = query_path(graph, s.id, g.id);
  res.attach_collision_checks = s.collision_checks + g.collision_checks;
  res.fallback_path = path.fallback;
  res.waypoints = path.waypoints;
  // Reused endpoints resolve to the exact query points.
  res.waypoints.front() = start;
  res.waypoints.back() = goal;
  res.waypoints_used = static_cast<int>(res.waypoints.size());
  res.planning_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  Episode ep(env, exec_policy, initial, rng, params.record_trajectory);
  res.outcome = Outcome::Success;
  res.waypoints_reached = 1;
  for (std::size_t k = 1; k < res.waypoints.size() && res.outcome == Outcome::Success; ++k) {
    const Point2& w = res.waypoints[k];
    ep.set_goal(w);
    const int budget = params.max_steps > 0 ? params.max_steps
                                            : default_step_budget(distance(ep.state().pose.position, w), env.robot);
    int used = 0;
    while (ep.distance_to_goal() >= params.goal_radius) {
      if (used >= budget) {
        res.outcome = Outcome::Timeout;
        break;
      }
      ++used;
      if (!ep.step()) {
        res.outcome = Outcome::Collision;
        break;
      }
    }
    if (res.outcome == Outcome::Success) ++res.waypoints_reached;
  }
  res.execution_steps = ep.steps();
  res.execution_time_s = ep.steps() * env.robot.dt;
  res.executed_length = ep.length();
  res.min_clearance = ep.min_clearance();
  if (params.record_trajectory) res.trajectory = std::move(ep.trajectory());
  return res;
}

}  // namespace prmrl
