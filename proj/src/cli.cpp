#include "prmrl/cli.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#include <CLI11.hpp>

#include "prmrl/analysis.hpp"
#include "prmrl/errors.hpp"
#include "prmrl/worlds.hpp"

namespace prmrl::cli {

using nlohmann::json;
namespace fs = std::filesystem;

json default_config() {
  const StraightLineParams sl;
  const ApfParams apf;
  const DwaParams dwa;
  const ScriptedP2PParams sp;
  const SocialForceParams sf;
  const CarLimits car;
  const DiffDriveLimits dd;
  const LidarConfig lidar;
  const json noise = {{"sigma_lidar", 0.0}, {"sigma_goal", 0.0},           {"sigma_v", 0.0},
                      {"sigma_w", 0.0},     {"persistent_goal_bias", false}};
  return {
      {"name", "prm"},
      {"seed", nullptr},
      {"workers", 1},
      {"output_dir", "out"},
      {"roadmap", ""},
      {"map", {{"world", "office"}, {"resolution", 0.1}, {"image", ""}, {"meta", ""}}},
      {"robot",
       {{"model", "diff_drive"},
        {"radius", 0.3},
        {"dt", 0.2},
        {"diff_drive", {{"v_min", dd.v_min}, {"v_max", dd.v_max}, {"w_max", dd.w_max}}},
        {"car",
         {{"v_min", car.v_min},
          {"v_max", car.v_max},
          {"a_max", car.a_max},
          {"wheelbase", car.wheelbase},
          {"steer_max", car.steer_max},
          {"steer_rate_max", car.steer_rate_max}}}}},
      {"lidar", {{"fov_deg", lidar.fov * 180.0 / std::numbers::pi}, {"n_rays", lidar.n_rays}, {"max_range", lidar.max_range}}},
      {"noise", noise},
      {"build_noise", noise},
      {"pedestrians",
       {{"count", 0},
        {"tau", sf.relaxation_time},
        {"A", sf.strength},
        {"B", sf.range},
        {"desired_speed", sf.desired_speed},
        {"radius", sf.radius}}},
      {"policy",
       {{"build", "scripted_p2p"},
        {"exec", ""},
        {"straight_line",
         {{"k_v", sl.k_v}, {"k_theta", sl.k_theta}, {"rotate_threshold", sl.rotate_threshold}, {"range", sl.range}}},
        {"apf", {{"k_att", apf.k_att}, {"k_rep", apf.k_rep}, {"influence", apf.influence}}},
        {"dwa",
         {{"alpha", dwa.alpha},
          {"beta", dwa.beta},
          {"gamma", dwa.gamma},
          {"horizon", dwa.horizon},
          {"n_v", dwa.n_v},
          {"n_w", dwa.n_w},
          {"margin", dwa.margin},
          {"k_goal", dwa.k_goal},
          {"goal_tolerance", dwa.goal_tolerance},
          {"range", dwa.range}}},
        {"scripted_p2p",
         {{"range", sp.range},
          {"margin", sp.margin},
          {"lookahead", sp.lookahead},
          {"stall_steps", sp.stall_steps},
          {"escape_steps", sp.escape_steps},
          {"dither", sp.dither}}}}},
      {"build",
       {{"preset", "sparse"},
        {"density", nullptr},
        {"success_threshold", nullptr},
        {"attempts", 20},
        {"connection_distance", 10.0},
        {"goal_radius", 0.25},
        {"max_steps", 0},
        {"early_termination", true},
        {"validate_reverse", true},
        {"heading", "uniform"}}},
      {"queries", {{"count", 250}, {"d_min", 1.5}, {"d_max", 100.0}, {"repetitions", 1}}},
      {"eval", {{"wall_time", false}, {"optimistic_attach", false}}},
  };
}

namespace {

void check_known(const json& user, const json& defaults, const std::string& prefix) {
  for (auto it = user.begin(); it != user.end(); ++it) {
    const std::string key = prefix.empty() ? it.key() : prefix + "." + it.key();
    if (!defaults.contains(it.key())) throw ConfigError("unknown config key '" + key + "'");
    if (it->is_object() && defaults[it.key()].is_object()) check_known(*it, defaults[it.key()], key);
  }
}

}  // namespace

json merge_config(const json& user) {
  json cfg = default_config();
  if (user.is_null()) return cfg;
  if (!user.is_object()) throw ConfigError("config root must be an object");
  check_known(user, cfg, "");
  cfg.merge_patch(user);
  return cfg;
}

void apply_override(json& cfg, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) throw ConfigError("override must look like key.path=value: " + assignment);
  const std::string key = assignment.substr(0, eq), raw = assignment.substr(eq + 1);
  json* node = &cfg;
  std::stringstream path(key);
  std::string part;
  while (std::getline(path, part, '.')) {
    if (!node->is_object() || !node->contains(part)) throw ConfigError("unknown config key '" + key + "'");
    node = &(*node)[part];
  }
  json value = json::parse(raw, nullptr, false);
  if (value.is_discarded()) value = raw;
  *node = value;
}

namespace {

template <typename T>
T get(const json& cfg, const std::string& dotted) {
  const json* node = &cfg;
  std::stringstream path(dotted);
  std::string part;
  while (std::getline(path, part, '.')) node = &node->at(part);
  try {
    return node->get<T>();
  } catch (const json::exception&) {
    throw ConfigError("config key '" + dotted + "' has the wrong type: " + node->dump());
  }
}

double positive(const json& cfg, const std::string& key) {
  const double v = get<double>(cfg, key);
  if (!(v > 0.0)) throw ConfigError("config key '" + key + "' must be positive");
  return v;
}

double non_negative(const json& cfg, const std::string& key) {
  const double v = get<double>(cfg, key);
  if (!(v >= 0.0)) throw ConfigError("config key '" + key + "' must be >= 0");
  return v;
}

NoiseConfig noise_from(const json& cfg, const std::string& key) {
  NoiseConfig n;
  n.sigma_lidar = non_negative(cfg, key + ".sigma_lidar");
  n.sigma_goal = non_negative(cfg, key + ".sigma_goal");
  n.sigma_v = non_negative(cfg, key + ".sigma_v");
  n.sigma_w = non_negative(cfg, key + ".sigma_w");
  n.persistent_goal_bias = get<bool>(cfg, key + ".persistent_goal_bias");
  return n;
}

PolicySpec policy_from(const json& cfg, const std::string& name, double robot_radius) {
  PolicySpec s;
  s.name = name;
  s.straight_line.k_v = positive(cfg, "policy.straight_line.k_v");
  s.straight_line.k_theta = positive(cfg, "policy.straight_line.k_theta");
  s.straight_line.rotate_threshold = positive(cfg, "policy.straight_line.rotate_threshold");
  s.straight_line.range = positive(cfg, "policy.straight_line.range");
  s.apf.k_att = positive(cfg, "policy.apf.k_att");
  s.apf.k_rep = non_negative(cfg, "policy.apf.k_rep");
  s.apf.influence = positive(cfg, "policy.apf.influence");
  s.apf.drive = s.straight_line;
  s.dwa.alpha = non_negative(cfg, "policy.dwa.alpha");
  s.dwa.beta = non_negative(cfg, "policy.dwa.beta");
  s.dwa.gamma = non_negative(cfg, "policy.dwa.gamma");
  s.dwa.horizon = positive(cfg, "policy.dwa.horizon");
  s.dwa.n_v = get<int>(cfg, "policy.dwa.n_v");
  s.dwa.n_w = get<int>(cfg, "policy.dwa.n_w");
  if (s.dwa.n_v < 1 || s.dwa.n_w < 1) throw ConfigError("dwa window needs n_v, n_w >= 1");
  s.dwa.margin = non_negative(cfg, "policy.dwa.margin");
  s.dwa.k_goal = positive(cfg, "policy.dwa.k_goal");
  s.dwa.goal_tolerance = non_negative(cfg, "policy.dwa.goal_tolerance");
  s.dwa.range = positive(cfg, "policy.dwa.range");
  s.dwa.robot_radius = robot_radius;
  s.scripted.range = positive(cfg, "policy.scripted_p2p.range");
  s.scripted.margin = non_negative(cfg, "policy.scripted_p2p.margin");
  s.scripted.lookahead = positive(cfg, "policy.scripted_p2p.lookahead");
  s.scripted.stall_steps = get<int>(cfg, "policy.scripted_p2p.stall_steps");
  s.scripted.escape_steps = get<int>(cfg, "policy.scripted_p2p.escape_steps");
  s.scripted.dither = non_negative(cfg, "policy.scripted_p2p.dither");
  s.scripted.robot_radius = robot_radius;
  return s;
}

}  // namespace

OccupancyGrid map_from_config(const json& cfg) {
  const auto image = get<std::string>(cfg, "map.image");
  if (!image.empty()) {
    const auto meta = get<std::string>(cfg, "map.meta");
    if (meta.empty()) throw ConfigError("map.image requires map.meta");
    for (const auto& p : {image, meta})
      if (!fs::exists(p)) throw ConfigError("map file not found: " + p);
    return load_map(image, meta);
  }
  try {
    return worlds::by_name(get<std::string>(cfg, "map.world"), positive(cfg, "map.resolution"));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

Experiment experiment_from_config(const json& cfg) {
  Experiment exp;
  exp.name = get<std::string>(cfg, "name");
  RobotModel robot;
  const auto model = get<std::string>(cfg, "robot.model");
  if (model == "diff_drive") robot.drive = DriveModel::DiffDrive;
  else if (model == "car") robot.drive = DriveModel::Car;
  else throw ConfigError("robot.model must be diff_drive or car");
  robot.radius = non_negative(cfg, "robot.radius");
  robot.dt = positive(cfg, "robot.dt");
  robot.diff.v_min = get<double>(cfg, "robot.diff_drive.v_min");
  robot.diff.v_max = positive(cfg, "robot.diff_drive.v_max");
  robot.diff.w_max = positive(cfg, "robot.diff_drive.w_max");
  robot.car.v_min = get<double>(cfg, "robot.car.v_min");
  robot.car.v_max = positive(cfg, "robot.car.v_max");
  robot.car.a_max = positive(cfg, "robot.car.a_max");
  robot.car.wheelbase = positive(cfg, "robot.car.wheelbase");
  robot.car.steer_max = positive(cfg, "robot.car.steer_max");
  robot.car.steer_rate_max = positive(cfg, "robot.car.steer_rate_max");

  const auto name = cfg.at("map").at("image").get<std::string>().empty() ? get<std::string>(cfg, "map.world")
                                                                           : get<std::string>(cfg, "map.image");
  exp.env = Environment::make(map_from_config(cfg), robot, noise_from(cfg, "noise"), name);
  exp.env.lidar.fov = positive(cfg, "lidar.fov_deg") * std::numbers::pi / 180.0;
  exp.env.lidar.n_rays = get<int>(cfg, "lidar.n_rays");
  if (exp.env.lidar.n_rays < 2) throw ConfigError("lidar.n_rays must be >= 2");
  exp.env.lidar.max_range = positive(cfg, "lidar.max_range");
  exp.build_noise = noise_from(cfg, "build_noise");

  CrowdConfig& crowd = exp.env.crowd;
  crowd.count = get<int>(cfg, "pedestrians.count");
  if (crowd.count < 0) throw ConfigError("pedestrians.count must be >= 0");
  crowd.params.relaxation_time = positive(cfg, "pedestrians.tau");
  crowd.params.strength = non_negative(cfg, "pedestrians.A");
  crowd.params.range = positive(cfg, "pedestrians.B");
  crowd.params.desired_speed = non_negative(cfg, "pedestrians.desired_speed");
  crowd.params.radius = positive(cfg, "pedestrians.radius");

  const auto build_name = get<std::string>(cfg, "policy.build");
  auto exec_name = get<std::string>(cfg, "policy.exec");
  if (exec_name.empty()) exec_name = build_name;
  exp.build_policy = policy_from(cfg, build_name, robot.radius);
  exp.exec_policy = policy_from(cfg, exec_name, robot.radius);
  try {
    make_policy(exp.build_policy, robot.limits());
    make_policy(exp.exec_policy, robot.limits());
  } catch (const PreconditionError& e) {
    throw ConfigError(e.what());
  }

  const auto preset = get<std::string>(cfg, "build.preset");
  if (preset == "sparse") exp.build = BuildParams::sparse();
  else if (preset == "dense") exp.build = BuildParams::dense();
  else throw ConfigError("build.preset must be sparse or dense");
  if (!cfg["build"]["density"].is_null()) exp.build.density = positive(cfg, "build.density");
  if (!cfg["build"]["success_threshold"].is_null()) {
    exp.build.edge.success_threshold = non_negative(cfg, "build.success_threshold");
    if (exp.build.edge.success_threshold > 1.0) throw ConfigError("build.success_threshold must be <= 1");
  }
  exp.build.edge.attempts = get<int>(cfg, "build.attempts");
  if (exp.build.edge.attempts < 1) throw ConfigError("build.attempts must be >= 1");
  exp.build.connection_distance = positive(cfg, "build.connection_distance");
  exp.build.edge.goal_radius = positive(cfg, "build.goal_radius");
  exp.build.edge.max_steps = get<int>(cfg, "build.max_steps");
  exp.build.edge.early_termination = get<bool>(cfg, "build.early_termination");
  exp.build.validate_reverse = get<bool>(cfg, "build.validate_reverse");
  const auto heading = get<std::string>(cfg, "build.heading");
  if (heading == "uniform") exp.build.edge.heading = HeadingMode::Uniform;
  else if (heading == "toward_goal") exp.build.edge.heading = HeadingMode::TowardGoal;
  else throw ConfigError("build.heading must be uniform or toward_goal");

  exp.workers = get<int>(cfg, "workers");
  if (exp.workers < 0) throw ConfigError("workers must be >= 0");
  exp.build.workers = exp.workers;
  exp.seed = cfg["seed"].is_null() ? 0 : get<std::uint64_t>(cfg, "seed");
  exp.build.master_seed = derive_seed(exp.seed, {stream::kEdges});

  exp.nav.goal_radius = exp.build.edge.goal_radius;
  exp.nav.max_steps = exp.build.edge.max_steps;
  exp.nav.attach.edge = exp.build.edge;
  exp.nav.attach.connection_distance = exp.build.connection_distance;
  exp.nav.attach.optimistic = get<bool>(cfg, "eval.optimistic_attach");
  return exp;
}

void write_file_atomic(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot write " + tmp.string());
    f << content;
    if (!f.flush()) throw std::runtime_error("write failed for " + tmp.string());
  }
  fs::rename(tmp, path);
}

namespace {

struct Common {
  std::string config_path;
  std::vector<std::string> overrides;
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;
  std::string output_dir;
  std::string roadmap;
};

void add_common(CLI::App* app, Common& c) {
  app->add_option("-c,--config", c.config_path, "JSON config file")->check(CLI::ExistingFile);
  app->add_option("-s,--set", c.overrides, "Override a config key: key.path=value (repeatable)");
  app->add_option("--seed", c.seed, "Master seed");
  app->add_option("-j,--workers", c.workers, "Worker threads (0 = all cores)");
  app->add_option("-o,--output-dir", c.output_dir, "Output directory");
  app->add_option("-r,--roadmap", c.roadmap, "Roadmap file");
}

struct Context {
  json cfg;
  Experiment exp;
  fs::path out_dir;
  fs::path roadmap_path;
};

Context load_context(const Common& c, std::ostream& err) {
  json user;
  if (!c.config_path.empty()) {
    std::ifstream f(c.config_path);
    try {
      user = json::parse(f);
    } catch (const json::parse_error& e) {
      throw ConfigError("cannot parse " + c.config_path + ": " + e.what());
    }
  }
  Context ctx;
  ctx.cfg = merge_config(user);
  for (const auto& o : c.overrides) apply_override(ctx.cfg, o);
  if (c.seed) ctx.cfg["seed"] = *c.seed;
  if (c.workers) ctx.cfg["workers"] = *c.workers;
  if (ctx.cfg["seed"].is_null()) {
    const std::uint64_t s = (static_cast<std::uint64_t>(std::random_device{}()) << 32) ^ std::random_device{}();
    ctx.cfg["seed"] = s;
    err << "note: no seed given; using seed " << s << '\n';
  }
  ctx.exp = experiment_from_config(ctx.cfg);

  if (!c.output_dir.empty()) ctx.out_dir = c.output_dir;
  else if (const char* env = std::getenv("PRMRL_OUTPUT_DIR"); env && *env) ctx.out_dir = env;
  else ctx.out_dir = get<std::string>(ctx.cfg, "output_dir");
  const std::string rm = !c.roadmap.empty() ? c.roadmap : get<std::string>(ctx.cfg, "roadmap");
  ctx.roadmap_path = rm.empty() ? ctx.out_dir / "roadmap.bin" : fs::path(rm);
  return ctx;
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

Point2 parse_point(const std::string& s) {
  const auto comma = s.find(',');
  try {
    if (comma == std::string::npos) throw std::invalid_argument(s);
    std::size_t used = 0;
    const double x = std::stod(s.substr(0, comma), &used);
    const double y = std::stod(s.substr(comma + 1), &used);
    return {x, y};
  } catch (const std::logic_error&) {
    throw ConfigError("expected a point as x,y but got '" + s + "'");
  }
}

std::vector<double> parse_values(const std::string& s) {
  std::vector<double> v;
  std::stringstream ss(s);
  std::string part;
  while (std::getline(ss, part, ',')) {
    try {
      v.push_back(std::stod(part));
    } catch (const std::logic_error&) {
      throw ConfigError("bad sweep value '" + part + "'");
    }
  }
  if (v.empty()) throw ConfigError("sweep needs at least one value");
  return v;
}

std::string build_report_text(const BuildReport& r) {
  const RoadmapMetadata& m = r.roadmap.meta;
  std::ostringstream s;
  s << "roadmap_id " << roadmap_id(r.roadmap) << '\n'
    << "map " << m.map_id << '\n'
    << "policy " << m.policy << '\n'
    << "density " << m.density << '\n'
    << "connection_distance " << m.connection_distance << '\n'
    << "success_threshold " << m.success_threshold << '\n'
    << "attempts " << m.attempts << '\n'
    << "sampled_nodes " << m.sampled_nodes << '\n'
    << "nodes " << r.roadmap.node_count() << '\n'
    << "candidate_edges " << m.candidate_edges << '\n'
    << "edges " << r.roadmap.edge_count() << '\n'
    << "rollouts " << m.rollouts << '\n'
    << "collision_checks " << m.collision_checks << '\n'
    << "wall_time_s " << fmt("%.3f", r.wall_time_s) << '\n';
  for (const auto& w : r.warnings) s << "warning " << w << '\n';
  return s.str();
}

std::shared_ptr<const Roadmap> roadmap_for(const Context& ctx, std::ostream& out, std::ostream& err) {
  if (fs::exists(ctx.roadmap_path)) {
    out << "using roadmap " << ctx.roadmap_path.string() << '\n';
    return std::make_shared<const Roadmap>(load_roadmap(ctx.roadmap_path));
  }
  Environment env = ctx.exp.env;
  env.noise = ctx.exp.build_noise;
  env.crowd.count = 0;
  const auto policy = make_policy(ctx.exp.build_policy, env.robot.limits());
  BuildReport r = build_roadmap(env, *policy, ctx.exp.build);
  for (const auto& w : r.warnings) err << "warning: " << w << '\n';
  return std::make_shared<const Roadmap>(std::move(r.roadmap));
}

std::vector<Query> queries_for(const Context& ctx) {
  Rng rng = make_rng(ctx.exp.seed, {stream::kQueries});
  return generate_queries(ctx.exp.env.inflated(), get<int>(ctx.cfg, "queries.count"),
                          non_negative(ctx.cfg, "queries.d_min"), positive(ctx.cfg, "queries.d_max"), rng);
}

int cmd_build(const Context& ctx, std::ostream& out, std::ostream& err) {
  Environment env = ctx.exp.env;
  env.noise = ctx.exp.build_noise;
  env.crowd.count = 0;
  const auto policy = make_policy(ctx.exp.build_policy, env.robot.limits());
  const BuildReport r = build_roadmap(env, *policy, ctx.exp.build);
  for (const auto& w : r.warnings) err << "warning: " << w << '\n';
  write_file_atomic(ctx.roadmap_path, serialize_roadmap(r.roadmap));
  const std::string report = build_report_text(r);
  write_file_atomic(ctx.out_dir / "build_report.txt", report);
  out << report << "wrote " << ctx.roadmap_path.string() << '\n';
  return kOk;
}

int cmd_navigate(const Context& ctx, const Point2& start, const Point2& goal, std::ostream& out) {
  if (!fs::exists(ctx.roadmap_path)) throw ConfigError("roadmap file not found: " + ctx.roadmap_path.string());
  const Roadmap rm = load_roadmap(ctx.roadmap_path);
  const auto limits = ctx.exp.env.robot.limits();
  const auto attach = make_policy(ctx.exp.build_policy, limits);
  const auto exec = make_policy(ctx.exp.exec_policy, limits);
  NavParams nav = ctx.exp.nav;
  nav.record_trajectory = true;
  const NavResult r = navigate(rm, *attach, *exec, ctx.exp.env, start, goal, nav, derive_seed(ctx.exp.seed, {stream::kNavigate}));

  std::ostringstream csv;
  write_trajectory_csv(csv, r.trajectory);
  write_file_atomic(ctx.out_dir / "trajectory.csv", csv.str());
  write_file_atomic(ctx.out_dir / "navigate.svg", render_svg(ctx.exp.env.inflated().base(), &rm, r.waypoints, r.trajectory));
  out << "outcome " << to_string(r.outcome) << '\n'
      << "steps " << r.execution_steps << '\n'
      << "executed_length_m " << fmt("%.4f", r.executed_length) << '\n'
      << "execution_time_s " << fmt("%.2f", r.execution_time_s) << '\n'
      << "waypoints " << r.waypoints_used << " reached " << r.waypoints_reached << '\n'
      << "fallback_path " << (r.fallback_path ? "yes" : "no") << '\n'
      << "min_clearance_m " << fmt("%.4f", r.min_clearance) << '\n'
      << "wrote " << (ctx.out_dir / "trajectory.csv").string() << ", " << (ctx.out_dir / "navigate.svg").string()
      << '\n';
  return r.outcome == Outcome::Success ? kOk : kNavFailed;
}

Condition condition_for(const Context& ctx, std::shared_ptr<const Roadmap> rm) {
  const auto limits = ctx.exp.env.robot.limits();
  Condition c;
  c.name = ctx.exp.name;
  c.env = ctx.exp.env;
  c.roadmap = std::move(rm);
  c.attach_policy = make_policy(ctx.exp.build_policy, limits);
  c.exec_policy = make_policy(ctx.exp.exec_policy, limits);
  c.nav = ctx.exp.nav;
  return c;
}

int cmd_eval(const Context& ctx, std::ostream& out, std::ostream& err) {
  const auto rm = roadmap_for(ctx, out, err);
  const auto queries = queries_for(ctx);
  const CsvOptions opts{get<bool>(ctx.cfg, "eval.wall_time")};
  const MetricsTable t = evaluate(condition_for(ctx, rm), queries, get<int>(ctx.cfg, "queries.repetitions"),
                                  ctx.exp.seed, ctx.exp.workers);
  std::ostringstream csv, text;
  write_metrics_csv(csv, {t}, opts);
  write_metrics_text(text, {t}, opts);
  write_file_atomic(ctx.out_dir / "metrics.csv", csv.str());
  write_file_atomic(ctx.out_dir / "metrics.txt", text.str());
  out << text.str() << "wrote " << (ctx.out_dir / "metrics.csv").string() << '\n';
  return kOk;
}

int cmd_sweep(const Context& ctx, const std::string& axis_name, const std::string& values_arg, std::ostream& out,
              std::ostream& err) {
  const SweepAxis axis = parse_sweep_axis(axis_name);
  const auto values = parse_values(values_arg);
  std::shared_ptr<const Roadmap> base;
  if (!axis_rebuilds(axis)) base = roadmap_for(ctx, out, err);
  const auto queries = queries_for(ctx);
  const SweepResult res = sweep(axis, values, ctx.exp, queries, get<int>(ctx.cfg, "queries.repetitions"), base);
  const CsvOptions opts{get<bool>(ctx.cfg, "eval.wall_time")};
  for (std::size_t i = 0; i < res.tables.size(); ++i) {
    std::ostringstream csv;
    write_metrics_csv(csv, {res.tables[i]}, opts);
    write_file_atomic(ctx.out_dir / ("sweep_" + axis_name + "_" + std::to_string(i) + ".csv"), csv.str());
  }
  std::ostringstream csv, text;
  write_metrics_csv(csv, res.tables, opts);
  write_metrics_text(text, res.tables, opts);
  write_file_atomic(ctx.out_dir / ("sweep_" + axis_name + ".csv"), csv.str());
  write_file_atomic(ctx.out_dir / ("sweep_" + axis_name + ".txt"), text.str());
  out << text.str();
  const double first = res.tables.front().success_pct, last = res.tables.back().success_pct;
  out << "trend: success " << fmt("%.2f", first) << "% at " << axis_name << "=" << fmt("%g", values.front())
      << " -> " << fmt("%.2f", last) << "% at " << axis_name << "=" << fmt("%g", values.back()) << " ("
      << (last < first ? "decreasing" : last > first ? "increasing" : "flat") << ")\n";
  return kOk;
}

double num_arg(const std::vector<std::string>& a, std::size_t i) {
  if (i >= a.size()) throw ConfigError("missing numeric argument " + std::to_string(i));
  try {
    std::size_t used = 0;
    const double v = std::stod(a[i], &used);
    if (used != a[i].size()) throw std::invalid_argument(a[i]);
    return v;
  } catch (const std::logic_error&) {
    throw ConfigError("malformed number '" + a[i] + "'");
  }
}

int int_arg(const std::vector<std::string>& a, std::size_t i) {
  const double v = num_arg(a, i);
  if (v != std::floor(v)) throw ConfigError("expected an integer but got '" + a[i] + "'");
  return static_cast<int>(v);
}

int cmd_analyze(const std::vector<std::string>& a, std::ostream& out) {
  if (a.empty())
    throw ConfigError("analyze needs a formula: expected-success | path-success | connectivity | survival | cost | roadmap");
  const std::string& what = a[0];
  const auto expect = [&](std::size_t n) {
    if (a.size() != n + 1) throw ConfigError("analyze " + what + " takes " + std::to_string(n) + " arguments");
  };
  const auto print = [&](double v) { out << fmt("%.10g", v) << '\n'; };
  if (what == "expected-success") {
    expect(2);
    print(expected_success(int_arg(a, 1), int_arg(a, 2)));
  } else if (what == "path-success") {
    expect(2);
    print(path_success(num_arg(a, 1), num_arg(a, 2)));
  } else if (what == "connectivity") {
    expect(2);
    print(connectivity_ratio(num_arg(a, 1), num_arg(a, 2)));
  } else if (what == "survival") {
    expect(5);
    print(survival_probability(num_arg(a, 1), num_arg(a, 2), int_arg(a, 3), num_arg(a, 4), num_arg(a, 5)));
  } else if (what == "cost") {
    expect(5);  // free_area density policy_range attempts step_length
    CostModelInputs in;
    in.free_area = num_arg(a, 1);
    in.density = num_arg(a, 2);
    in.policy_range = num_arg(a, 3);
    in.attempts = int_arg(a, 4);
    in.step_length = num_arg(a, 5);
    const CostPrediction p = predicted_cost(in);
    out << "nodes " << fmt("%.6g", p.nodes) << "\nneighbors " << fmt("%.6g", p.neighbors) << "\nchecks "
        << fmt("%.6g", p.checks) << '\n';
  } else if (what == "roadmap") {
    if (a.size() < 2) throw ConfigError("analyze roadmap takes one or more roadmap files");
    std::vector<double> dens, checks;
    for (std::size_t i = 1; i < a.size(); ++i) {
      if (!fs::exists(a[i])) throw ConfigError("roadmap file not found: " + a[i]);
      const Roadmap rm = load_roadmap(a[i]);
      const RoadmapMetadata& m = rm.meta;
      CostModelInputs in;
      in.density = m.density;
      in.free_area = m.density > 0.0 ? static_cast<double>(m.sampled_nodes) / m.density : 0.0;
      in.policy_range = m.connection_distance;
      in.attempts = static_cast<int>(m.attempts);
      const CostPrediction p = predicted_cost(in);
      out << a[i] << ": nodes " << m.sampled_nodes << " (predicted " << fmt("%.1f", p.nodes) << "), candidates "
          << m.candidate_edges << " (predicted " << fmt("%.1f", p.nodes * p.neighbors) << "), rollouts " << m.rollouts
          << ", collision_checks " << m.collision_checks << " (predicted " << fmt("%.4g", p.checks) << ", ratio "
          << fmt("%.3f", p.checks > 0 ? m.collision_checks / p.checks : 0.0) << ")\n";
      dens.push_back(m.density);
      checks.push_back(static_cast<double>(m.collision_checks));
    }
    bool varied = false;
    for (double d : dens) varied = varied || d != dens.front();
    if (varied) out << "log-log slope of collision checks vs density: " << fmt("%.3f", loglog_slope(dens, checks)) << '\n';
  } else {
    throw ConfigError("unknown analysis '" + what + "'");
  }
  return kOk;
}

int cmd_export(const std::string& in, const std::string& out_path, std::ostream& out) {
  if (!fs::exists(in)) throw ConfigError("roadmap file not found: " + in);
  std::ostringstream text;
  export_roadmap_text(load_roadmap(in), text);
  if (out_path.empty() || out_path == "-") out << text.str();
  else write_file_atomic(out_path, text.str());
  return kOk;
}

int cmd_make_map(const std::string& world, double resolution, const std::string& prefix, std::ostream& out) {
  const OccupancyGrid g = worlds::by_name(world, resolution);
  const fs::path pgm = prefix + ".pgm", meta = prefix + ".yaml";
  if (pgm.has_parent_path()) fs::create_directories(pgm.parent_path());
  save_map(g, pgm, meta);
  out << "wrote " << pgm.string() << ", " << meta.string() << '\n';
  return kOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"PRM-RL style roadmap building, navigation and evaluation"};
  app.require_subcommand(1);
  Common common;

  auto* build = app.add_subcommand("build", "Build a roadmap and write it with a build report");
  add_common(build, common);

  auto* nav = app.add_subcommand("navigate", "Plan and execute one query on a saved roadmap");
  add_common(nav, common);
  std::string start_s, goal_s;
  nav->add_option("--start", start_s, "Start point x,y (m)")->required();
  nav->add_option("--goal", goal_s, "Goal point x,y (m)")->required();

  auto* eval = app.add_subcommand("eval", "Evaluate random queries and write metrics");
  add_common(eval, common);

  auto* sw = app.add_subcommand("sweep", "Evaluate a parameter sweep");
  add_common(sw, common);
  std::string axis, values;
  sw->add_option("--axis", axis, "sigma_lidar|sigma_goal|sigma_action|density|threshold|pedestrians")->required();
  sw->add_option("--values", values, "Comma-separated values")->required();

  auto* an = app.add_subcommand("analyze", "Evaluate closed-form analysis formulas");
  std::vector<std::string> an_args;
  an->add_option("args", an_args, "formula name followed by its arguments");
  an->allow_extras(false);

  auto* ex = app.add_subcommand("export", "Write a roadmap as text");
  std::string ex_in, ex_out;
  ex->add_option("roadmap", ex_in, "Roadmap file")->required();
  ex->add_option("-o,--out", ex_out, "Output text file (default stdout)");

  auto* mk = app.add_subcommand("make-map", "Write a built-in world as PGM + metadata");
  std::string mk_world = "office", mk_prefix;
  double mk_res = 0.1;
  mk->add_option("--world", mk_world, "empty|split|corridor|office");
  mk->add_option("--resolution", mk_res, "Meters per cell");
  mk->add_option("--out", mk_prefix, "Output path prefix")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    std::ostringstream o, e2;
    const int code = app.exit(e, o, e2);
    out << o.str();
    err << e2.str();
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*an) return cmd_analyze(an_args, out);
    if (*ex) return cmd_export(ex_in, ex_out, out);
    if (*mk) return cmd_make_map(mk_world, mk_res, mk_prefix, out);
    const Context ctx = load_context(common, err);
    if (*build) return cmd_build(ctx, out, err);
    if (*nav) return cmd_navigate(ctx, parse_point(start_s), parse_point(goal_s), out);
    if (*eval) return cmd_eval(ctx, out, err);
    if (*sw) return cmd_sweep(ctx, axis, values, out, err);
  } catch (const CollisionError& e) {
    err << "error: " << e.what() << '\n';
    return kPrecondition;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const PreconditionError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const MapError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const FormatError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const SamplingExhausted& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return kInternal;
  }
  return kInternal;
}

}  // namespace prmrl::cli
