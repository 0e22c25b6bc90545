#include "prmrl/pedestrians.hpp"

#include <cmath>

namespace prmrl {

std::optional<Point2> nearest_obstacle(const InflatedGrid& grid, const Point2& p, double cutoff) {
  const OccupancyGrid& g = grid.base();
  const auto c = g.world_to_cell(p);
  if (!c) return std::nullopt;
  if (grid.clearance(*c) > cutoff + g.resolution()) return std::nullopt;
  const int reach = static_cast<int>(std::ceil(cutoff / g.resolution())) + 1;
  std::optional<Point2> best;
  double best_d2 = cutoff * cutoff;
  for (int row = c->row - reach; row <= c->row + reach; ++row)
    for (int col = c->col - reach; col <= c->col + reach; ++col) {
      if (!g.contains(CellIndex{col, row}) || !g.blocked({col, row})) continue;
      const Point2 center = g.cell_center({col, row});
      const double d2 = (center - p).squaredNorm();
      if (d2 <= best_d2) {
        best_d2 = d2;
        best = center;
      }
    }
  return best;
}

namespace {

Eigen::Vector2d repulsion(const Point2& self, const Point2& other, double contact, const SocialForceParams& sf) {
  const Eigen::Vector2d diff = self - other;
  const double d = diff.norm();
  if (d < 1e-9) return Eigen::Vector2d::Zero();
  return sf.strength * std::exp((contact - d) / sf.range) * (diff / d);
}

}  // namespace

std::vector<Pedestrian> step_pedestrians(const std::vector<Pedestrian>& peds, const InflatedGrid& grid,
                                         const Point2& robot_position, double robot_radius, double dt,
                                         const SocialForceParams& sf) {
  std::vector<Pedestrian> next = peds;
  const double v_cap = sf.max_speed_factor * sf.desired_speed;
  for (std::size_t i = 0; i < peds.size(); ++i) {
    const Pedestrian& a = peds[i];
    const Eigen::Vector2d to_goal = a.goal - a.position;
    const double goal_dist = to_goal.norm();
    const Eigen::Vector2d desired =
        goal_dist < sf.goal_radius ? Eigen::Vector2d::Zero() : Eigen::Vector2d(to_goal / goal_dist * sf.desired_speed);
    Eigen::Vector2d force = (desired - a.velocity) / sf.relaxation_time;
    for (std::size_t j = 0; j < peds.size(); ++j)
      if (j != i) force += repulsion(a.position, peds[j].position, a.radius + peds[j].radius, sf);
    force += repulsion(a.position, robot_position, a.radius + robot_radius, sf);
    if (const auto wall = nearest_obstacle(grid, a.position, sf.obstacle_cutoff))
      force += repulsion(a.position, *wall, a.radius, sf);

    Eigen::Vector2d v = a.velocity + force * dt;
    if (const double s = v.norm(); s > v_cap) v *= v_cap / s;
    next[i].velocity = v;
    next[i].position = a.position + v * dt;
  }

  // Bodies do not interpenetrate: overlapping pairs are pushed apart along
  // their center line and lose their approaching velocity component.
  for (int pass = 0; pass < 4; ++pass) {
    bool moved = false;
    for (std::size_t i = 0; i < next.size(); ++i)
      for (std::size_t j = i + 1; j < next.size(); ++j) {
        Eigen::Vector2d diff = next[i].position - next[j].position;
        double d = diff.norm();
        const double contact = next[i].radius + next[j].radius + 1e-3;
        if (d >= contact) continue;
        const Eigen::Vector2d n = d > 1e-9 ? Eigen::Vector2d(diff / d) : Eigen::Vector2d(0.0, 1.0);
        const double push = 0.5 * (contact - d);
        next[i].position += push * n;
        next[j].position -= push * n;
        const double closing = (next[i].velocity - next[j].velocity).dot(n);
        if (closing < 0.0) {
          next[i].velocity -= 0.5 * closing * n;
          next[j].velocity += 0.5 * closing * n;
        }
        moved = true;
      }
    if (!moved) break;
  }
  return next;
}

namespace {

bool line_of_sight(const InflatedGrid& grid, const Point2& a, const Point2& b) {
  const double len = distance(a, b);
  const int n = std::max(1, static_cast<int>(std::ceil(len / (0.5 * grid.base().resolution()))));
  for (int k = 0; k <= n; ++k)
    if (!is_free(grid, a + (b - a) * (static_cast<double>(k) / n))) return false;
  return true;
}

}  // namespace

std::vector<Pedestrian> spawn_pedestrians(const CrowdConfig& cfg, const InflatedGrid& grid, const Point2& robot_start,
                                          Rng& rng) {
  std::vector<Pedestrian> peds;
  peds.reserve(cfg.count);
  for (int k = 0; k < cfg.count; ++k) {
    Pedestrian p;
    p.radius = cfg.params.radius;
    for (int tries = 0; tries < 200; ++tries) {
      p.position = sample_free(grid, rng);
      bool ok = distance(p.position, robot_start) >= cfg.min_spawn_distance;
      for (const auto& q : peds) ok = ok && distance(p.position, q.position) > p.radius + q.radius + 0.1;
      if (ok) break;
    }
    p.home = p.position;
    p.goal = p.position;
    for (int tries = 0; tries < 50; ++tries) {
      const Point2 g = sample_free(grid, rng);
      if (distance(g, p.position) >= 3.0 && line_of_sight(grid, p.position, g)) {
        p.goal = g;
        break;
      }
    }
    peds.push_back(p);
  }
  return peds;
}

}  // namespace prmrl
