#include "prmrl/policies.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "prmrl/errors.hpp"

namespace prmrl {

namespace {

double sign(double x) { return x > 0.0 ? 1.0 : x < 0.0 ? -1.0 : 0.0; }

// Robot-frame endpoints of rays that returned before max range.
std::vector<Eigen::Vector2d> obstacle_points(const Eigen::VectorXd& scan, const LidarConfig& lidar) {
  std::vector<Eigen::Vector2d> pts;
  pts.reserve(scan.size());
  for (int i = 0; i < scan.size(); ++i) {
    if (scan(i) >= lidar.max_range * 0.999) continue;
    const double a = lidar_ray_angle(lidar, i);
    pts.emplace_back(scan(i) * std::cos(a), scan(i) * std::sin(a));
  }
  return pts;
}

// Rotate-then-drive law shared by the straight-line and APF controllers.
Action drive_toward(double distance, double bearing, const ActuatorLimits& limits, const StraightLineParams& p) {
  if (std::abs(bearing) > p.rotate_threshold) {
    if (limits.turn_in_place) return {0.0, limits.w_max * sign(bearing)};
    // A car cannot pivot: creep forward at full lock instead.
    return limits.clamp({0.25 * limits.v_max, limits.w_max * sign(bearing)});
  }
  return limits.clamp({std::min(limits.v_max, p.k_v * distance), p.k_theta * bearing});
}

}  // namespace

Action straight_line_act(const Observation& obs, const ActuatorLimits& limits, const StraightLineParams& params) {
  return drive_toward(obs.goal_distance, obs.goal_bearing, limits, params);
}

Eigen::Vector2d apf_force(const Observation& obs, const ApfParams& params) {
  Eigen::Vector2d f = params.k_att * Eigen::Vector2d(std::cos(obs.goal_bearing), std::sin(obs.goal_bearing));
  if (!obs.has_scan()) return f;
  // Repulsion fades inside r_0 of the goal so goals near walls stay reachable.
  const double near_goal = std::min(1.0, obs.goal_distance / params.influence);
  const Eigen::VectorXd& scan = obs.latest_scan();
  for (int i = 0; i < scan.size(); ++i) {
    const double r = scan(i);
    if (r >= params.influence) continue;
    const double rr = std::max(r, 0.05);
    const double mag = near_goal * params.k_rep * (1.0 / rr - 1.0 / params.influence) / (rr * rr);
    const double a = lidar_ray_angle(obs.lidar, i);
    f -= mag * Eigen::Vector2d(std::cos(a), std::sin(a));
  }
  return f;
}

Action apf_act(const Observation& obs, const ActuatorLimits& limits, const ApfParams& params) {
  const Eigen::Vector2d total = apf_force(obs, params);
  const Eigen::Vector2d attract =
      params.k_att * Eigen::Vector2d(std::cos(obs.goal_bearing), std::sin(obs.goal_bearing));
  if ((total - attract).squaredNorm() == 0.0) return straight_line_act(obs, limits, params.drive);

  // Speed follows the resultant's projection on the heading; turn rate
  // follows its bearing.
  const double bearing = std::atan2(total.y(), total.x());
  const double forward = total.norm() > 0.0 ? std::max(0.0, std::cos(bearing)) : 0.0;
  Action a{std::min(limits.v_max, params.drive.k_v * obs.goal_distance) * forward, params.drive.k_theta * bearing};
  if (!limits.turn_in_place && a.v < 0.25 * limits.v_max) a.v = 0.25 * limits.v_max;
  return limits.clamp(a);
}

std::vector<DwaCandidate> dwa_candidates(const Observation& obs, const Action& current, const ActuatorLimits& limits,
                                         const DwaParams& p) {
  const double dt_ctrl = 0.2;
  double v_lo = std::max(std::max(0.0, limits.v_min), current.v - p.accel_v * dt_ctrl);
  double v_hi = std::min(limits.v_max, current.v + p.accel_v * dt_ctrl);
  v_hi = std::min(v_hi, std::max(v_lo, p.k_goal * obs.goal_distance));
  if (v_hi < v_lo) v_hi = v_lo;
  const double w_lo = std::max(-limits.w_max, current.w - p.accel_w * dt_ctrl);
  const double w_hi = std::min(limits.w_max, current.w + p.accel_w * dt_ctrl);

  const std::vector<Eigen::Vector2d> obstacles =
      obs.has_scan() ? obstacle_points(obs.latest_scan(), obs.lidar) : std::vector<Eigen::Vector2d>{};
  const Eigen::Vector2d goal(obs.goal_distance * std::cos(obs.goal_bearing),
                             obs.goal_distance * std::sin(obs.goal_bearing));
  const int steps = std::max(1, static_cast<int>(std::lround(p.horizon / p.sim_dt)));

  std::vector<DwaCandidate> out;
  out.reserve(static_cast<std::size_t>(p.n_v) * p.n_w);
  for (int iv = 0; iv < p.n_v; ++iv) {
    const double v = p.n_v == 1 ? v_hi : v_lo + (v_hi - v_lo) * iv / (p.n_v - 1);
    for (int iw = 0; iw < p.n_w; ++iw) {
      const double w = p.n_w == 1 ? 0.5 * (w_lo + w_hi) : w_lo + (w_hi - w_lo) * iw / (p.n_w - 1);
      DwaCandidate c;
      c.action = {v, w};
      double x = 0.0, y = 0.0, th = 0.0;
      const double body = p.robot_radius + p.margin;
      double min_d = p.clearance_cap + body;
      bool arrived = false;
      for (int k = 0; k <= steps && !c.collides && !arrived; ++k) {
        if (k > 0) {
          x += v * std::cos(th) * p.sim_dt;
          y += v * std::sin(th) * p.sim_dt;
          th += w * p.sim_dt;
        }
        // Passing within the tolerance counts as facing the goal; the rest of
        // the horizon is not simulated.
        arrived = std::hypot(goal.x() - x, goal.y() - y) < p.goal_tolerance;
        for (const auto& o : obstacles) {
          const double d = std::hypot(o.x() - x, o.y() - y);
          min_d = std::min(min_d, d);
          if (d <= body) {
            c.collides = true;
            break;
          }
        }
      }
      const double to_goal = std::atan2(goal.y() - y, goal.x() - x);
      c.heading = arrived ? 1.0 : 1.0 - std::abs(normalize_angle(to_goal - th)) / std::numbers::pi;
      c.clearance = std::clamp(min_d - body, 0.0, p.clearance_cap) / p.clearance_cap;
      c.velocity = limits.v_max > 0.0 ? v / limits.v_max : 0.0;
      c.score = p.alpha * c.heading + p.beta * c.clearance + p.gamma * c.velocity;
      out.push_back(c);
    }
  }
  return out;
}

Action dwa_act(const Observation& obs, const Action& current, const ActuatorLimits& limits, const DwaParams& params) {
  const auto candidates = dwa_candidates(obs, current, limits, params);
  const DwaCandidate* best = nullptr;
  // Standing still never reaches the goal, so away from it the stop command
  // is not admissible; a blocked robot falls back to the recovery rotation.
  const bool at_goal = obs.goal_distance < params.goal_tolerance;
  for (const auto& c : candidates) {
    if (c.collides || (!at_goal && c.action.v == 0.0 && c.action.w == 0.0)) continue;
    if (!best) {
      best = &c;
      continue;
    }
    const double tol = 1e-12 * std::max(1.0, std::abs(best->score));
    if (c.score > best->score + tol) {
      best = &c;
    } else if (std::abs(c.score - best->score) <= tol && std::abs(c.action.w) < std::abs(best->action.w)) {
      best = &c;  // equal score: prefer straighter; earlier index already wins otherwise
    }
  }
  if (!best) return {0.0, limits.w_max};
  return limits.clamp(best->action);
}

namespace {

Eigen::VectorXd median_filter(const Eigen::VectorXd& scan, int window) {
  const int n = static_cast<int>(scan.size());
  const int half = std::max(0, window / 2);
  Eigen::VectorXd out(n);
  std::vector<double> buf;
  for (int i = 0; i < n; ++i) {
    buf.clear();
    for (int k = std::max(0, i - half); k <= std::min(n - 1, i + half); ++k) buf.push_back(scan(k));
    std::nth_element(buf.begin(), buf.begin() + buf.size() / 2, buf.end());
    out(i) = buf[buf.size() / 2];
  }
  return out;
}

// Distance a disc of radius `r` can travel along `dir` before touching a point.
double free_length(const std::vector<Eigen::Vector2d>& pts, double dir, double r, double cap) {
  const double c = std::cos(dir), s = std::sin(dir);
  double len = cap;
  for (const auto& p : pts) {
    const double along = p.x() * c + p.y() * s;
    const double perp = std::abs(-p.x() * s + p.y() * c);
    if (perp >= r || along <= 0.0) continue;
    len = std::min(len, along - std::sqrt(r * r - perp * perp));
  }
  return std::max(0.0, len);
}

}  // namespace

Action scripted_p2p_act(const Observation& obs, PolicyMemory& mem, const ActuatorLimits& limits,
                        const ScriptedP2PParams& p, Rng& rng) {
  const double d = obs.goal_distance;
  const double b = obs.goal_bearing;
  const double dither = p.dither > 0.0 ? uniform(rng, -p.dither, p.dither) : 0.0;

  if (d < mem.best_goal_distance - p.progress_epsilon) {
    mem.best_goal_distance = d;
    mem.stall_steps = 0;
  } else {
    ++mem.stall_steps;
  }

  if (!obs.has_scan()) {
    Action a = straight_line_act(obs, limits, {p.k_v, 1.0, 0.1, p.range});
    a.w += dither;
    return limits.clamp(a);
  }

  const Eigen::VectorXd scan = median_filter(obs.latest_scan(), p.median_window);
  const auto pts = obstacle_points(scan, obs.lidar);
  const double half_fov = 0.5 * obs.lidar.fov;
  const double body = p.robot_radius + p.margin;
  const double cap = obs.lidar.max_range;

  const double goal_free = std::abs(b) < half_fov ? free_length(pts, b, body, cap) : 0.0;
  const double need = std::min(d, p.lookahead);

  // Escape bookkeeping: enter when progress stalls, leave once the goal
  // direction opens up again (or the manoeuvre times out).
  if (mem.escape_steps > 0) {
    --mem.escape_steps;
    const bool goal_open = goal_free >= need && std::abs(b) < half_fov;
    if (mem.escape_steps == 0 || (goal_open && mem.escape_steps < p.escape_steps - 5)) {
      mem.escape_steps = 0;
      mem.stall_steps = 0;
      mem.best_goal_distance = d;
      mem.escape_side = -mem.escape_side;
    }
  } else if (mem.stall_steps >= p.stall_steps) {
    mem.escape_steps = p.escape_steps;
    mem.stall_steps = 0;
  }
  const bool escaping = mem.escape_steps > 0;

  if (!escaping && std::abs(b) > half_fov) {
    Action a = drive_toward(d, b, limits, {p.k_v, 1.0, 0.0, p.range});
    a.w += dither;
    return limits.clamp(a);
  }

  const double target = escaping ? normalize_angle(b + mem.escape_side * 0.5 * std::numbers::pi) : b;
  double heading = 0.0;
  double best_len = -1.0;
  double best_err = std::numeric_limits<double>::infinity();
  bool found = false;
  if (!escaping && goal_free >= need) {
    heading = b;
    found = true;
  } else {
    for (int i = 0; i < scan.size(); ++i) {
      const double a = lidar_ray_angle(obs.lidar, i);
      const double len = free_length(pts, a, body, cap);
      const double err = std::abs(normalize_angle(a - target));
      if (len >= need && (!found || err < best_err)) {
        found = true;
        best_err = err;
        heading = a;
      } else if (!found && (len > best_len || (len == best_len && err < best_err))) {
        best_len = len;
        best_err = err;
        heading = a;
      }
    }
  }

  double w = p.k_w * heading;
  // Lateral repulsion from close returns keeps the body off walls.
  double rep = 0.0;
  int close = 0;
  for (int i = 0; i < scan.size(); ++i) {
    if (scan(i) >= p.repulsion_range) continue;
    const double r = std::max(scan(i), 0.05);
    rep += (1.0 / r - 1.0 / p.repulsion_range) * std::sin(lidar_ray_angle(obs.lidar, i));
    ++close;
  }
  if (close > 0) w -= p.k_rep * rep / close;
  w += dither;

  double v = 0.0;
  if (std::abs(heading) <= p.rotate_threshold) {
    const double front = free_length(pts, 0.0, body, cap);
    const double c = std::cos(heading);
    v = std::min({limits.v_max, std::max(p.min_cruise, p.k_v * d), 0.8 * front}) * c * c;
  }
  if (!limits.turn_in_place && v <= 0.05) {
    // Cars cannot pivot: creep forward if possible, else back out turning the other way.
    const double front = free_length(pts, 0.0, body, cap);
    if (front > 0.6) {
      v = 0.25 * limits.v_max;
    } else {
      v = limits.v_min;
      w = -w;
    }
  }
  return limits.clamp({v, w});
}

std::shared_ptr<const Policy> make_policy(const PolicySpec& spec, const ActuatorLimits& limits) {
  if (spec.name == "straight_line") return std::make_shared<StraightLinePolicy>(limits, spec.straight_line);
  if (spec.name == "apf") return std::make_shared<ApfPolicy>(limits, spec.apf);
  if (spec.name == "dwa") return std::make_shared<DwaPolicy>(limits, spec.dwa);
  if (spec.name == "scripted_p2p") return std::make_shared<ScriptedP2PPolicy>(limits, spec.scripted);
  throw PreconditionError("unknown policy '" + spec.name + "' (expected straight_line, apf, dwa, scripted_p2p)");
}

int true_objective(const Point2& position, const Point2& goal, double goal_radius) {
  return distance(position, goal) < goal_radius ? 1 : 0;
}

}  // namespace prmrl
