#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "prmrl/gridmap.hpp"
#include "prmrl/policies.hpp"
#include "prmrl/roadmap.hpp"
#include "prmrl/simulator.hpp"

namespace prmrl {

struct Query {
  Point2 start = Point2::Zero();
  Point2 goal = Point2::Zero();
  double shortest_feasible = 0.0;  // m, 8-connected grid A*
};

/// Rejection-samples free start/goal pairs whose shortest feasible path lies
/// in [d_min, d_max]. Throws SamplingExhausted after `max_attempts` pairs.
std::vector<Query> generate_queries(const InflatedGrid& inflated, int n, double d_min, double d_max, Rng& rng,
                                    int max_attempts = 0);

struct NavParams {
  double goal_radius = 0.25;  // d_G
  int max_steps = 0;          // K_w per waypoint; 0 selects default_step_budget
  AttachParams attach;
  bool record_trajectory = false;
};

struct NavResult {
  Outcome outcome = Outcome::Timeout;
  double executed_length = 0.0;
  double planning_time_s = 0.0;  // attach + graph search, wall clock
  int execution_steps = 0;
  double execution_time_s = 0.0;  // simulated: steps * dt
  int waypoints_used = 0;         // waypoints in the planned path
  int waypoints_reached = 0;
  double min_clearance = 0.0;
  bool fallback_path = false;
  std::uint64_t attach_collision_checks = 0;
  std::vector<Point2> waypoints;
  std::vector<TrajectorySample> trajectory;
};

/// Attaches start and goal to a query-local copy of the roadmap, plans a
/// waypoint path, then drives the policy waypoint by waypoint. Each waypoint
/// gets its own step budget. Attachment ignores pedestrians. Throws
/// CollisionError when start or goal is not free.
NavResult navigate(const Roadmap& roadmap, const Policy& attach_policy, const Policy& exec_policy,
                   const Environment& env, const Point2& start, const Point2& goal, const NavParams& params,
                   std::uint64_t seed);

/// Everything needed to evaluate one experimental condition.
struct Condition {
  std::string name;
  Environment env;
  std::shared_ptr<const Roadmap> roadmap;
  std::shared_ptr<const Policy> attach_policy;  // the roadmap's build policy
  std::shared_ptr<const Policy> exec_policy;
  NavParams nav;
};

/// Aggregates over one condition. Path, ratio and clearance statistics use
/// successful episodes only.
struct MetricsTable {
  std::string condition;
  std::string roadmap_id;
  int episodes = 0;
  int successes = 0;
  int collisions = 0;
  int timeouts = 0;
  double success_pct = 0.0;
  double ci99_pct = 0.0;
  double path_mean = 0.0, path_std = 0.0;
  double ratio_mean = 0.0, ratio_std = 0.0;
  double clearance_mean = 0.0, clearance_std = 0.0;
  double plan_time_mean = 0.0;
  double exec_time_success_mean = 0.0;
  double exec_time_all_mean = 0.0;
  std::uint64_t roadmap_nodes = 0;
  std::uint64_t roadmap_edges = 0;
  std::uint64_t collision_checks = 0;  // roadmap build
  std::vector<Outcome> outcomes;       // per (query, repetition), query-major
};

/// z * sqrt(p (1 - p) / n) with z = 2.576; 0 when n = 0.
double ci99_halfwidth(double p, int n);

/// Hex CRC-32 of the serialized roadmap body; equals the file checksum trailer.
std::string roadmap_id(const Roadmap& roadmap);

/// Runs navigate for every (query, repetition) pair. Episode seeds derive from
/// (seed, query, repetition) so results do not depend on `workers`.
MetricsTable evaluate(const Condition& condition, const std::vector<Query>& queries, int repetitions,
                      std::uint64_t seed, int workers = 1);

struct CsvOptions {
  bool wall_time = false;  // otherwise planning time is written as NA
};

/// Long form: condition,metric,value.
void write_metrics_csv(std::ostream& out, const std::vector<MetricsTable>& tables, const CsvOptions& opts = {});
void write_metrics_text(std::ostream& out, const std::vector<MetricsTable>& tables, const CsvOptions& opts = {});
/// Metric names emitted per condition, in CSV order.
std::vector<std::string> metric_names();

enum class SweepAxis { SigmaLidar, SigmaGoal, SigmaAction, Density, Threshold, Pedestrians };
SweepAxis parse_sweep_axis(const std::string& name);
const char* to_string(SweepAxis axis);
/// True for axes that change roadmap construction.
bool axis_rebuilds(SweepAxis axis);

/// A condition template from which sweeps derive per-value conditions.
struct Experiment {
  std::string name = "prm";
  Environment env;           // noise applies to execution
  NoiseConfig build_noise;   // noise used while validating edges
  BuildParams build;
  PolicySpec build_policy;
  PolicySpec exec_policy;
  NavParams nav;
  std::uint64_t seed = 0;
  int workers = 1;
};

struct SweepResult {
  std::vector<double> values;
  std::vector<MetricsTable> tables;
  std::vector<std::shared_ptr<const Roadmap>> roadmaps;  // per value
};

/// Builds the experiment's roadmap with the given params and policy.
std::shared_ptr<const Roadmap> build_for(const Experiment& exp, const BuildParams& params);

/// One table per value. Roadmaps are rebuilt only for construction axes.
/// `base_roadmap`, when given, is reused for the other axes.
SweepResult sweep(SweepAxis axis, const std::vector<double>& values, const Experiment& exp,
                  const std::vector<Query>& queries, int repetitions,
                  std::shared_ptr<const Roadmap> base_roadmap = nullptr);

/// Map raster, roadmap edges and waypoint segments in blue, and exactly one
/// black trajectory polyline.
std::string render_svg(const OccupancyGrid& grid, const Roadmap* roadmap, const std::vector<Point2>& waypoints,
                       const std::vector<TrajectorySample>& trajectory);

}  // namespace prmrl
