#include <zlib.h>

#include <cmath>
#include <cstdio>
#include <iomanip>
#include <ostream>

#include "prmrl/errors.hpp"
#include "prmrl/navigation.hpp"
#include "prmrl/parallel.hpp"

namespace prmrl {

double ci99_halfwidth(double p, int n) {
  if (n <= 0) return 0.0;
  return 2.576 * std::sqrt(p * (1.0 - p) / n);
}

std::string roadmap_id(const Roadmap& roadmap) {
  // CRC of the body only: a CRC taken over data plus its own CRC trailer is a constant.
  const std::string bytes = serialize_roadmap(roadmap);
  const auto crc = crc32(crc32(0L, Z_NULL, 0), reinterpret_cast<const Bytef*>(bytes.data()),
                         static_cast<uInt>(bytes.size() - 4));
  char buf[16];
  std::snprintf(buf, sizeof buf, "%08lx", static_cast<unsigned long>(crc));
  return buf;
}

namespace {

struct Moments {
  double sum = 0.0, sum_sq = 0.0;
  int n = 0;
  void add(double x) {
    sum += x;
    sum_sq += x * x;
    ++n;
  }
  double mean() const { return n > 0 ? sum / n : 0.0; }
  // Sample standard deviation; 0 for fewer than two values.
  double stddev() const {
    if (n < 2) return 0.0;
    const double m = mean();
    return std::sqrt(std::max(0.0, (sum_sq - n * m * m) / (n - 1)));
  }
};

}  // namespace

MetricsTable evaluate(const Condition& c, const std::vector<Query>& queries, int repetitions, std::uint64_t seed,
                      int workers) {
  if (repetitions < 1) throw PreconditionError("repetitions must be >= 1");
  if (!c.roadmap || !c.attach_policy || !c.exec_policy) throw PreconditionError("condition is incomplete");
  const std::size_t total = queries.size() * static_cast<std::size_t>(repetitions);
  std::vector<NavResult> results(total);
  NavParams nav = c.nav;
  nav.record_trajectory = false;
  parallel_for(total, resolve_workers(workers), [&](std::size_t k) {
    const std::size_t q = k / repetitions, rep = k % repetitions;
    results[k] = navigate(*c.roadmap, *c.attach_policy, *c.exec_policy, c.env, queries[q].start, queries[q].goal,
                          nav, derive_seed(seed, {stream::kQueries, q, rep}));
  });

  MetricsTable t;
  t.condition = c.name;
  t.roadmap_id = roadmap_id(*c.roadmap);
  t.roadmap_nodes = c.roadmap->node_count();
  t.roadmap_edges = c.roadmap->edge_count();
  t.collision_checks = c.roadmap->meta.collision_checks;
  Moments path, ratio, clearance, plan, exec_ok, exec_all;
  for (std::size_t k = 0; k < total; ++k) {
    const NavResult& r = results[k];
    const Query& q = queries[k / repetitions];
    t.outcomes.push_back(r.outcome);
    ++t.episodes;
    plan.add(r.planning_time_s);
    exec_all.add(r.execution_time_s);
    switch (r.outcome) {
      case Outcome::Success:
        ++t.successes;
        path.add(r.executed_length);
        if (q.shortest_feasible > 0.0) ratio.add(r.executed_length / q.shortest_feasible);
        clearance.add(r.min_clearance);
        exec_ok.add(r.execution_time_s);
        break;
      case Outcome::Collision: ++t.collisions; break;
      case Outcome::Timeout: ++t.timeouts; break;
    }
  }
  const double p = t.episodes > 0 ? static_cast<double>(t.successes) / t.episodes : 0.0;
  t.success_pct = 100.0 * p;
  t.ci99_pct = 100.0 * ci99_halfwidth(p, t.episodes);
  t.path_mean = path.mean();
  t.path_std = path.stddev();
  t.ratio_mean = ratio.mean();
  t.ratio_std = ratio.stddev();
  t.clearance_mean = clearance.mean();
  t.clearance_std = clearance.stddev();
  t.plan_time_mean = plan.mean();
  t.exec_time_success_mean = exec_ok.mean();
  t.exec_time_all_mean = exec_all.mean();
  return t;
}

std::vector<std::string> metric_names() {
  return {"roadmap_id",       "episodes",        "successes",       "collisions",     "timeouts",
          "success_pct",      "ci99_pct",        "path_dist_mean_m", "path_dist_std_m", "path_ratio_mean",
          "path_ratio_std",   "clearance_mean_m", "clearance_std_m", "time_plan_s",    "time_exec_s",
          "time_exec_all_s",  "roadmap_nodes",   "roadmap_edges",   "collision_checks"};
}

namespace {

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::vector<std::string> metric_values(const MetricsTable& t, const CsvOptions& opts) {
  return {t.roadmap_id,
          std::to_string(t.episodes),
          std::to_string(t.successes),
          std::to_string(t.collisions),
          std::to_string(t.timeouts),
          num(t.success_pct),
          num(t.ci99_pct),
          num(t.path_mean),
          num(t.path_std),
          num(t.ratio_mean),
          num(t.ratio_std),
          num(t.clearance_mean),
          num(t.clearance_std),
          opts.wall_time ? num(t.plan_time_mean) : "NA",
          num(t.exec_time_success_mean),
          num(t.exec_time_all_mean),
          std::to_string(t.roadmap_nodes),
          std::to_string(t.roadmap_edges),
          std::to_string(t.collision_checks)};
}

}  // namespace

void write_metrics_csv(std::ostream& out, const std::vector<MetricsTable>& tables, const CsvOptions& opts) {
  const auto names = metric_names();
  out << "condition,metric,value\n";
  for (const auto& t : tables) {
    const auto values = metric_values(t, opts);
    for (std::size_t i = 0; i < names.size(); ++i) out << t.condition << ',' << names[i] << ',' << values[i] << '\n';
  }
}

void write_metrics_text(std::ostream& out, const std::vector<MetricsTable>& tables, const CsvOptions& opts) {
  const auto fixed = [](double v, int prec) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.*f", prec, v);
    return std::string(buf);
  };
  std::size_t wname = 9;
  for (const auto& t : tables) wname = std::max(wname, t.condition.size());
  out << std::left << std::setw(static_cast<int>(wname)) << "condition" << std::right << std::setw(8) << "succ%"
      << std::setw(8) << "ci99%" << std::setw(10) << "path_m" << std::setw(8) << "sd" << std::setw(8) << "ratio"
      << std::setw(7) << "sd" << std::setw(8) << "clr_m" << std::setw(7) << "sd" << std::setw(10) << "plan_s"
      << std::setw(9) << "exec_s" << std::setw(8) << "nodes" << std::setw(8) << "edges" << std::setw(14)
      << "coll_checks" << '\n';
  for (const auto& t : tables) {
    out << std::left << std::setw(static_cast<int>(wname)) << t.condition << std::right << std::setw(8)
        << fixed(t.success_pct, 2) << std::setw(8) << fixed(t.ci99_pct, 2) << std::setw(10) << fixed(t.path_mean, 2)
        << std::setw(7) << fixed(t.path_std, 2) << std::setw(8) << fixed(t.ratio_mean, 3) << std::setw(7)
        << fixed(t.ratio_std, 3) << std::setw(8) << fixed(t.clearance_mean, 3) << std::setw(7)
        << fixed(t.clearance_std, 3) << std::setw(10) << (opts.wall_time ? fixed(t.plan_time_mean, 4) : "NA")
        << std::setw(9) << fixed(t.exec_time_success_mean, 1) << std::setw(8) << t.roadmap_nodes << std::setw(8)
        << t.roadmap_edges << std::setw(14) << t.collision_checks << '\n';
  }
}

SweepAxis parse_sweep_axis(const std::string& name) {
  if (name == "sigma_lidar") return SweepAxis::SigmaLidar;
  if (name == "sigma_goal") return SweepAxis::SigmaGoal;
  if (name == "sigma_action") return SweepAxis::SigmaAction;
  if (name == "density") return SweepAxis::Density;
  if (name == "threshold") return SweepAxis::Threshold;
  if (name == "pedestrians") return SweepAxis::Pedestrians;
  throw PreconditionError("invalid sweep axis '" + name +
                          "' (expected sigma_lidar, sigma_goal, sigma_action, density, threshold, pedestrians)");
}

const char* to_string(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::SigmaLidar: return "sigma_lidar";
    case SweepAxis::SigmaGoal: return "sigma_goal";
    case SweepAxis::SigmaAction: return "sigma_action";
    case SweepAxis::Density: return "density";
    case SweepAxis::Threshold: return "threshold";
    case SweepAxis::Pedestrians: return "pedestrians";
  }
  return "unknown";
}

bool axis_rebuilds(SweepAxis axis) { return axis == SweepAxis::Density || axis == SweepAxis::Threshold; }

std::shared_ptr<const Roadmap> build_for(const Experiment& exp, const BuildParams& params) {
  Environment env = exp.env;
  env.noise = exp.build_noise;
  env.crowd.count = 0;
  const auto policy = make_policy(exp.build_policy, env.robot.limits());
  BuildParams p = params;
  p.workers = exp.workers;
  return std::make_shared<const Roadmap>(build_roadmap(env, *policy, p).roadmap);
}

SweepResult sweep(SweepAxis axis, const std::vector<double>& values, const Experiment& exp,
                  const std::vector<Query>& queries, int repetitions, std::shared_ptr<const Roadmap> base_roadmap) {
  SweepResult out;
  out.values = values;
  const auto limits = exp.env.robot.limits();
  const auto attach_policy = make_policy(exp.build_policy, limits);
  const auto exec_policy = make_policy(exp.exec_policy, limits);
  if (!axis_rebuilds(axis) && !base_roadmap) base_roadmap = build_for(exp, exp.build);

  for (double v : values) {
    Condition c;
    c.env = exp.env;
    c.nav = exp.nav;
    c.attach_policy = attach_policy;
    c.exec_policy = exec_policy;
    c.roadmap = base_roadmap;
    BuildParams bp = exp.build;
    switch (axis) {
      case SweepAxis::SigmaLidar: c.env.noise.sigma_lidar = v; break;
      case SweepAxis::SigmaGoal: c.env.noise.sigma_goal = v; break;
      case SweepAxis::SigmaAction:
        c.env.noise.sigma_v = v;
        c.env.noise.sigma_w = v;
        break;
      case SweepAxis::Density: bp.density = v; break;
      case SweepAxis::Threshold: bp.edge.success_threshold = v; break;
      case SweepAxis::Pedestrians:
        if (v < 0.0 || v != std::floor(v)) throw PreconditionError("pedestrian counts must be whole numbers");
        c.env.crowd.count = static_cast<int>(v);
        break;
    }
    if (!c.env.noise.valid()) throw PreconditionError("noise values must be >= 0");
    if (axis_rebuilds(axis)) c.roadmap = build_for(exp, bp);
    c.name = exp.name + "/" + to_string(axis) + "=" + num(v);
    out.tables.push_back(evaluate(c, queries, repetitions, exp.seed, exp.workers));
    out.roadmaps.push_back(c.roadmap);
  }
  return out;
}

}  // namespace prmrl
