#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "prmrl/gridmap.hpp"
#include "prmrl/policy.hpp"
#include "prmrl/simulator.hpp"

namespace prmrl {

/// How AddEdge picks the start heading of each rollout.
enum class HeadingMode {
  Uniform,        // uniform in [0, 2pi)
  TowardGoal,     // facing the edge goal (useful for car-like robots)
};

/// Monte Carlo edge validation settings.
struct EdgeValidationParams {
  double success_threshold = 0.9;  // p_s, strict: accepted iff rate > p_s or no rollout failed
  int attempts = 20;               // n_w
  double goal_radius = 0.25;       // d_G
  int max_steps = 0;               // K_w per rollout; 0 selects default_step_budget
  bool early_termination = true;
  HeadingMode heading = HeadingMode::Uniform;
};

struct EdgeCheck {
  bool accepted = false;
  double success_rate = 0.0;  // 0 after early termination
  double mean_length = 0.0;   // over successful rollouts; 0 after early termination
  int rollouts_run = 0;
  int successes = 0;
  int failures = 0;
  bool terminated_early = false;
  std::uint64_t collision_checks = 0;
};

struct TrialOutcome {
  bool success = false;
  double length = 0.0;
  std::uint64_t collision_checks = 0;
};

/// Runs trials 0, 1, ... of an edge in order. `trial(k)` must depend only on k.
EdgeCheck validate_edge(const std::function<TrialOutcome(int)>& trial, const EdgeValidationParams& params);

/// Seed of trial k of an edge whose stream seed is `edge_seed`.
inline std::uint64_t trial_seed(std::uint64_t edge_seed, int trial) {
  return derive_seed(edge_seed, {static_cast<std::uint64_t>(trial)});
}

/// AddEdge: rollouts of `policy` from `start` (random heading, zero velocity)
/// to `goal`, trial k seeded by trial_seed(edge_seed, k).
EdgeCheck add_edge(const Point2& start, const Point2& goal, const Policy& policy, const Environment& env,
                   const EdgeValidationParams& params, std::uint64_t edge_seed);

struct RoadmapEdge {
  std::uint32_t from = 0;
  std::uint32_t to = 0;
  double success_rate = 0.0;
  double mean_length = 0.0;
  std::uint32_t attempts = 0;
  friend bool operator==(const RoadmapEdge&, const RoadmapEdge&) = default;
};

struct RoadmapMetadata {
  std::string map_id;
  std::string policy;
  double density = 0.0;              // rho_w, nodes per m^2 of free space
  double connection_distance = 0.0;  // d_w, m
  double success_threshold = 0.0;    // p_s
  std::uint32_t attempts = 0;        // n_w
  double goal_radius = 0.0;          // d_G
  std::uint32_t max_steps = 0;       // K_w, 0 = automatic
  bool validate_reverse = true;
  bool early_termination = true;
  std::uint64_t master_seed = 0;
  std::uint64_t sampled_nodes = 0;
  std::uint64_t candidate_edges = 0;
  std::uint64_t rollouts = 0;
  std::uint64_t collision_checks = 0;
  friend bool operator==(const RoadmapMetadata&, const RoadmapMetadata&) = default;
};

/// Directed graph of free workspace points joined by validated edges.
/// Edges are sorted by (from, to).
struct Roadmap {
  std::vector<Point2> nodes;
  std::vector<RoadmapEdge> edges;
  RoadmapMetadata meta;

  std::size_t node_count() const { return nodes.size(); }
  std::size_t edge_count() const { return edges.size(); }
  bool operator==(const Roadmap& o) const;
};

/// n = round(rho * free_area) distinct-cell samples.
std::vector<Point2> sample_nodes(const InflatedGrid& inflated, double density, Rng& rng);

/// Ordered pairs (i, j), i != j, with |n_i - n_j| <= d_w, sorted. With
/// `both_directions` false only i < j is listed.
std::vector<std::pair<std::uint32_t, std::uint32_t>> candidate_edges(const std::vector<Point2>& nodes,
                                                                     double connection_distance,
                                                                     bool both_directions = true);

struct BuildParams {
  double density = 0.4;
  double connection_distance = 10.0;
  EdgeValidationParams edge;
  bool validate_reverse = true;  // false: validate i->j once and store both directions
  int workers = 1;               // 0 = hardware concurrency
  std::uint64_t master_seed = 0;

  static BuildParams sparse();  // rho 0.4, p_s 0.9
  static BuildParams dense();   // rho 1.0, p_s 1.0
};

struct BuildReport {
  Roadmap roadmap;
  std::vector<std::string> warnings;
  double wall_time_s = 0.0;
  std::uint64_t accepted_edges() const { return roadmap.edges.size(); }
};

/// Samples nodes, validates candidates in parallel and keeps accepted edges
/// plus their endpoints. Output is identical for every worker count.
BuildReport build_roadmap(const Environment& env, const Policy& policy, const BuildParams& params);

/// Edge validation seed for candidate ordinal `ordinal` of a build.
inline std::uint64_t edge_stream_seed(std::uint64_t master_seed, std::uint64_t ordinal) {
  return derive_seed(master_seed, {stream::kEdges, ordinal});
}

/// Roadmap plus query-local nodes and edges; the base is never modified.
class AugmentedRoadmap {
 public:
  explicit AugmentedRoadmap(const Roadmap& base) : base_(&base) {}

  std::size_t node_count() const { return base_->nodes.size() + extra_nodes_.size(); }
  const Point2& node(std::size_t id) const;
  const Roadmap& base() const { return *base_; }
  const std::vector<RoadmapEdge>& extra_edges() const { return extra_edges_; }

  std::uint32_t add_node(const Point2& p);
  void add_edge(const RoadmapEdge& e) { extra_edges_.push_back(e); }

 private:
  const Roadmap* base_;
  std::vector<Point2> extra_nodes_;
  std::vector<RoadmapEdge> extra_edges_;
};

struct AttachParams {
  EdgeValidationParams edge;
  double connection_distance = 10.0;
  bool optimistic = false;  // single rollout per direction
};

struct Attachment {
  std::uint32_t id = 0;
  bool reused = false;
  int edges_added = 0;
  std::uint64_t collision_checks = 0;
};

/// Adds `point` to `graph` and validates edges in both directions to every
/// roadmap node within d_w. A point coinciding with a node reuses it.
/// Throws CollisionError when the point is not free.
Attachment connect_query_point(AugmentedRoadmap& graph, const Point2& point, const Policy& policy,
                               const Environment& env, const AttachParams& params, std::uint64_t seed);

struct PathQuery {
  std::vector<std::uint32_t> ids;
  std::vector<Point2> waypoints;
  double cost = 0.0;
  bool fallback = false;  // no route: [start, goal]
};

/// Dijkstra over directed edges weighted by mean_length. Equal-cost routes
/// resolve to the smaller predecessor id.
PathQuery query_path(const AugmentedRoadmap& graph, std::uint32_t start, std::uint32_t goal);

/// Versioned binary container with CRC-32 trailer.
inline constexpr std::uint32_t kRoadmapFormatVersion = 1;
void save_roadmap(const Roadmap& roadmap, const std::filesystem::path& path);
Roadmap load_roadmap(const std::filesystem::path& path);
std::string serialize_roadmap(const Roadmap& roadmap);
Roadmap deserialize_roadmap(const std::string& bytes);

/// Lossless line-oriented text form: `meta key value`, `node id x y`,
/// `edge from to success_rate mean_length attempts`.
void export_roadmap_text(const Roadmap& roadmap, std::ostream& out);
Roadmap import_roadmap_text(std::istream& in);

}  // namespace prmrl
