#include "prmrl/roadmap.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <queue>
#include <unordered_map>
#include <unordered_set>

#include "prmrl/errors.hpp"
#include "prmrl/parallel.hpp"

namespace prmrl {

namespace {
constexpr double kSlack = 1e-9;
}

EdgeCheck validate_edge(const std::function<TrialOutcome(int)>& trial, const EdgeValidationParams& p) {
  if (p.attempts < 1) throw PreconditionError("n_w must be at least 1");
  if (p.success_threshold < 0.0 || p.success_threshold > 1.0) throw PreconditionError("p_s must lie in [0, 1]");
  const double failure_budget = (1.0 - p.success_threshold) * p.attempts;
  EdgeCheck check;
  double length = 0.0;
  for (int k = 0; k < p.attempts; ++k) {
    const TrialOutcome t = trial(k);
    ++check.rollouts_run;
    check.collision_checks += t.collision_checks;
    if (t.success) {
      ++check.successes;
      length += t.length;
    } else {
      ++check.failures;
      if (p.early_termination && check.failures > failure_budget + kSlack) {
        check.terminated_early = true;
        return check;
      }
    }
  }
  check.success_rate = static_cast<double>(check.successes) / p.attempts;
  check.mean_length = check.successes > 0 ? length / check.successes : 0.0;
  // Strictly above p_s; a flawless run also passes p_s = 1, whose bar cannot be exceeded.
  check.accepted = check.successes > p.success_threshold * p.attempts + kSlack || check.failures == 0;
  return check;
}

EdgeCheck add_edge(const Point2& start, const Point2& goal, const Policy& policy, const Environment& env,
                   const EdgeValidationParams& params, std::uint64_t edge_seed) {
  RolloutParams rp;
  rp.goal_radius = params.goal_radius;
  rp.max_steps = params.max_steps;
  const double toward = std::atan2(goal.y() - start.y(), goal.x() - start.x());
  return validate_edge(
      [&](int k) {
        Rng rng(trial_seed(edge_seed, k));
        const double heading =
            params.heading == HeadingMode::Uniform ? uniform(rng, 0.0, 2.0 * std::numbers::pi) : toward;
        const RolloutResult r = execute_rollout(policy, env, RobotState{Pose2(start, heading)}, goal, rp, rng);
        return TrialOutcome{r.outcome == Outcome::Success, r.length, r.collision_checks};
      },
      params);
}

bool Roadmap::operator==(const Roadmap& o) const {
  return nodes.size() == o.nodes.size() && std::equal(nodes.begin(), nodes.end(), o.nodes.begin()) &&
         edges == o.edges && meta == o.meta;
}

std::vector<Point2> sample_nodes(const InflatedGrid& inflated, double density, Rng& rng) {
  if (!(density > 0.0)) throw PreconditionError("sampling density must be positive");
  const double area = inflated.free_area();
  if (area <= 0.0) throw SamplingExhausted("map has no free space");
  const auto n = static_cast<std::size_t>(std::llround(density * area));
  if (n > inflated.free_cell_count())
    throw PreconditionError("density asks for " + std::to_string(n) + " nodes but only " +
                            std::to_string(inflated.free_cell_count()) + " free cells exist");
  const OccupancyGrid& g = inflated.base();
  std::unordered_set<std::int64_t> used;
  std::vector<Point2> nodes;
  nodes.reserve(n);
  while (nodes.size() < n) {
    const Point2 p = sample_free(inflated, rng);
    const CellIndex c = *g.world_to_cell(p);
    if (used.insert(static_cast<std::int64_t>(c.row) * g.width() + c.col).second) nodes.push_back(p);
  }
  return nodes;
}

std::vector<std::pair<std::uint32_t, std::uint32_t>> candidate_edges(const std::vector<Point2>& nodes,
                                                                     double d, bool both_directions) {
  if (!(d > 0.0)) throw PreconditionError("connection distance must be positive");
  std::vector<std::pair<std::uint32_t, std::uint32_t>> out;
  if (nodes.empty()) return out;
  const auto key = [d](const Point2& p) {
    return std::pair<std::int64_t, std::int64_t>{static_cast<std::int64_t>(std::floor(p.x() / d)),
                                                 static_cast<std::int64_t>(std::floor(p.y() / d))};
  };
  const auto hash = [](std::int64_t bx, std::int64_t by) {
    return static_cast<std::uint64_t>(bx) * 0x9e3779b97f4a7c15ULL ^ static_cast<std::uint64_t>(by);
  };
  std::unordered_map<std::uint64_t, std::vector<std::uint32_t>> buckets;
  for (std::uint32_t i = 0; i < nodes.size(); ++i) {
    const auto [bx, by] = key(nodes[i]);
    buckets[hash(bx, by)].push_back(i);
  }
  const double d2 = d * d;
  for (std::uint32_t i = 0; i < nodes.size(); ++i) {
    const auto [bx, by] = key(nodes[i]);
    for (std::int64_t ox = -1; ox <= 1; ++ox)
      for (std::int64_t oy = -1; oy <= 1; ++oy) {
        const auto it = buckets.find(hash(bx + ox, by + oy));
        if (it == buckets.end()) continue;
        for (std::uint32_t j : it->second) {
          if (j == i || (!both_directions && j < i)) continue;
          // Bucket hashes can collide; the distance test keeps the result exact.
          if (key(nodes[j]) != std::pair{bx + ox, by + oy}) continue;
          if ((nodes[i] - nodes[j]).squaredNorm() <= d2) out.emplace_back(i, j);
        }
      }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

BuildParams BuildParams::sparse() { return BuildParams{}; }

BuildParams BuildParams::dense() {
  BuildParams p;
  p.density = 1.0;
  p.edge.success_threshold = 1.0;
  return p;
}

BuildReport build_roadmap(const Environment& env, const Policy& policy, const BuildParams& params) {
  const auto t0 = std::chrono::steady_clock::now();
  const int workers = resolve_workers(params.workers);
  BuildReport report;
  if (policy.effective_range() < params.connection_distance)
    report.warnings.push_back("policy range d_pi = " + std::to_string(policy.effective_range()) +
                              " m is shorter than connection distance d_w = " +
                              std::to_string(params.connection_distance) + " m; consider d_w <= d_pi");

  Rng node_rng = make_rng(params.master_seed, {stream::kNodes});
  const std::vector<Point2> sampled = sample_nodes(env.inflated(), params.density, node_rng);
  const auto candidates = candidate_edges(sampled, params.connection_distance, params.validate_reverse);

  std::vector<EdgeCheck> checks(candidates.size());
  parallel_for(candidates.size(), workers, [&](std::size_t k) {
    const auto [i, j] = candidates[k];
    checks[k] = add_edge(sampled[i], sampled[j], policy, env, params.edge, edge_stream_seed(params.master_seed, k));
  });

  // Assemble in ordinal order: keep accepted edges and renumber their endpoints.
  std::vector<RoadmapEdge> accepted;
  RoadmapMetadata meta;
  for (std::size_t k = 0; k < candidates.size(); ++k) {
    meta.rollouts += static_cast<std::uint64_t>(checks[k].rollouts_run);
    meta.collision_checks += checks[k].collision_checks;
    if (!checks[k].accepted) continue;
    const auto [i, j] = candidates[k];
    const RoadmapEdge e{i, j, checks[k].success_rate, checks[k].mean_length,
                        static_cast<std::uint32_t>(checks[k].rollouts_run)};
    accepted.push_back(e);
    if (!params.validate_reverse) accepted.push_back({j, i, e.success_rate, e.mean_length, e.attempts});
  }
  std::vector<std::int64_t> remap(sampled.size(), -1);
  for (const auto& e : accepted) remap[e.from] = remap[e.to] = 0;
  Roadmap& rm = report.roadmap;
  for (std::size_t i = 0; i < sampled.size(); ++i)
    if (remap[i] == 0) {
      remap[i] = static_cast<std::int64_t>(rm.nodes.size());
      rm.nodes.push_back(sampled[i]);
    }
  for (auto e : accepted) {
    e.from = static_cast<std::uint32_t>(remap[e.from]);
    e.to = static_cast<std::uint32_t>(remap[e.to]);
    rm.edges.push_back(e);
  }
  std::sort(rm.edges.begin(), rm.edges.end(),
            [](const RoadmapEdge& a, const RoadmapEdge& b) { return std::tie(a.from, a.to) < std::tie(b.from, b.to); });

  meta.map_id = env.map_id;
  meta.policy = policy.descriptor();
  meta.density = params.density;
  meta.connection_distance = params.connection_distance;
  meta.success_threshold = params.edge.success_threshold;
  meta.attempts = static_cast<std::uint32_t>(params.edge.attempts);
  meta.goal_radius = params.edge.goal_radius;
  meta.max_steps = static_cast<std::uint32_t>(params.edge.max_steps);
  meta.validate_reverse = params.validate_reverse;
  meta.early_termination = params.edge.early_termination;
  meta.master_seed = params.master_seed;
  meta.sampled_nodes = sampled.size();
  meta.candidate_edges = candidates.size();
  rm.meta = meta;
  report.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return report;
}

const Point2& AugmentedRoadmap::node(std::size_t id) const {
  if (id < base_->nodes.size()) return base_->nodes[id];
  return extra_nodes_.at(id - base_->nodes.size());
}

std::uint32_t AugmentedRoadmap::add_node(const Point2& p) {
  extra_nodes_.push_back(p);
  return static_cast<std::uint32_t>(node_count() - 1);
}

Attachment connect_query_point(AugmentedRoadmap& graph, const Point2& point, const Policy& policy,
                               const Environment& env, const AttachParams& params, std::uint64_t seed) {
  if (!is_free(env.inflated(), point))
    throw CollisionError("query point (" + std::to_string(point.x()) + ", " + std::to_string(point.y()) +
                         ") is in collision");
  Attachment a;
  for (std::size_t i = 0; i < graph.node_count(); ++i)
    if ((graph.node(i) - point).squaredNorm() <= 1e-18) {
      a.id = static_cast<std::uint32_t>(i);
      a.reused = true;
      return a;
    }
  const std::size_t existing = graph.node_count();
  a.id = graph.add_node(point);
  EdgeValidationParams ep = params.edge;
  if (params.optimistic) {
    ep.attempts = 1;
    ep.success_threshold = 0.0;
  }
  const double d2 = params.connection_distance * params.connection_distance;
  for (std::size_t i = 0; i < existing; ++i) {
    const Point2& q = graph.node(i);
    if ((q - point).squaredNorm() > d2) continue;
    const auto n = static_cast<std::uint32_t>(i);
    for (std::uint64_t dir = 0; dir < 2; ++dir) {
      const Point2& from = dir == 0 ? point : q;
      const Point2& to = dir == 0 ? q : point;
      const EdgeCheck c = add_edge(from, to, policy, env, ep, derive_seed(seed, {stream::kAttach, dir, i}));
      a.collision_checks += c.collision_checks;
      if (!c.accepted) continue;
      graph.add_edge({dir == 0 ? a.id : n, dir == 0 ? n : a.id, c.success_rate, c.mean_length,
                      static_cast<std::uint32_t>(c.rollouts_run)});
      ++a.edges_added;
    }
  }
  return a;
}

PathQuery query_path(const AugmentedRoadmap& graph, std::uint32_t start, std::uint32_t goal) {
  const std::size_t n = graph.node_count();
  if (start >= n || goal >= n) throw PreconditionError("query node id out of range");
  std::vector<std::vector<const RoadmapEdge*>> out(n);
  for (const auto& e : graph.base().edges) out[e.from].push_back(&e);
  for (const auto& e : graph.extra_edges()) out[e.from].push_back(&e);

  constexpr double inf = std::numeric_limits<double>::infinity();
  std::vector<double> dist(n, inf);
  std::vector<std::int64_t> parent(n, -1);
  std::vector<bool> done(n, false);
  using Entry = std::pair<double, std::uint32_t>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> open;
  dist[start] = 0.0;
  open.emplace(0.0, start);
  while (!open.empty()) {
    const auto [d, u] = open.top();
    open.pop();
    if (done[u]) continue;
    done[u] = true;
    if (u == goal) break;
    for (const RoadmapEdge* e : out[u]) {
      const double nd = d + e->mean_length;
      if (nd < dist[e->to] || (nd == dist[e->to] && !done[e->to] && u < parent[e->to])) {
        dist[e->to] = nd;
        parent[e->to] = u;
        open.emplace(nd, e->to);
      }
    }
  }

  PathQuery q;
  if (start == goal) {
    q.ids = {start, goal};
  } else if (!std::isfinite(dist[goal])) {
    q.fallback = true;
    q.ids = {start, goal};
    q.cost = distance(graph.node(start), graph.node(goal));
  } else {
    for (std::int64_t v = goal; v != -1; v = parent[v]) q.ids.push_back(static_cast<std::uint32_t>(v));
    std::reverse(q.ids.begin(), q.ids.end());
    q.cost = dist[goal];
  }
  for (auto id : q.ids) q.waypoints.push_back(graph.node(id));
  return q;
}

}  // namespace prmrl
