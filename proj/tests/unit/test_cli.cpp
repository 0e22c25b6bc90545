#include <doctest.h>

#include <atomic>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "prmrl/analysis.hpp"
#include "prmrl/cli.hpp"
#include "prmrl/errors.hpp"
#include "prmrl/parallel.hpp"

using namespace prmrl;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code = 0;
  std::string out, err;
};

Run run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "prmrl");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  Run r;
  r.code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(f), {}};
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("prmrl_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("derive_seed depends only on its inputs") {
  CHECK(derive_seed(1, {2, 3}) == derive_seed(1, {2, 3}));
  CHECK(derive_seed(1, {2, 3}) != derive_seed(1, {3, 2}));
  CHECK(derive_seed(1, {2}) != derive_seed(2, {2}));
  CHECK(derive_seed(1, {}) != derive_seed(1, {0}));
  std::set<std::uint64_t> seen;
  for (std::uint64_t k = 0; k < 10000; ++k) seen.insert(derive_seed(7, {stream::kEdges, k}));
  CHECK(seen.size() == 10000);
  Rng a = make_rng(5, {1}), b = make_rng(5, {1});
  CHECK(a() == b());
  Rng r(1);
  CHECK(gaussian(r, 0.0) == 0.0);
}

TEST_CASE("parallel_for covers every index once and rethrows") {
  for (int w : {0, 1, 3, 16}) {
    std::vector<int> hits(1000, 0);
    parallel_for(hits.size(), resolve_workers(w), [&](std::size_t i) { ++hits[i]; });
    for (int h : hits) CHECK(h == 1);
  }
  parallel_for(0, 4, [](std::size_t) { FAIL("no tasks expected"); });
  std::atomic<int> ran{0};
  CHECK_THROWS_AS(parallel_for(100, 4,
                               [&](std::size_t i) {
                                 ++ran;
                                 if (i == 10) throw CollisionError("boom");
                               }),
                  CollisionError);
  CHECK(resolve_workers(0) >= 1);
  CHECK_THROWS_AS(resolve_workers(-1), PreconditionError);
}

TEST_CASE("config merge rejects unknown keys and fills defaults") {
  const json cfg = cli::merge_config(json::parse(R"({"noise": {"sigma_lidar": 0.3}, "build": {"preset": "dense"}})"));
  CHECK(cfg["noise"]["sigma_lidar"] == 0.3);
  CHECK(cfg["noise"]["sigma_goal"] == 0.0);
  CHECK(cfg["build"]["attempts"] == 20);
  CHECK_THROWS_AS(cli::merge_config(json::parse(R"({"noise": {"sigma_laser": 0.3}})")), cli::ConfigError);
  CHECK_THROWS_AS(cli::merge_config(json::parse(R"({"colour": 1})")), cli::ConfigError);
  CHECK_THROWS_AS(cli::merge_config(json::parse("[1, 2]")), cli::ConfigError);
  CHECK(cli::merge_config(nullptr) == cli::default_config());
}

TEST_CASE("overrides parse JSON values and require existing keys") {
  json cfg = cli::default_config();
  cli::apply_override(cfg, "noise.sigma_lidar=0.5");
  CHECK(cfg["noise"]["sigma_lidar"] == 0.5);
  cli::apply_override(cfg, "map.world=corridor");
  CHECK(cfg["map"]["world"] == "corridor");
  cli::apply_override(cfg, "build.early_termination=false");
  CHECK(cfg["build"]["early_termination"] == false);
  CHECK_THROWS_AS(cli::apply_override(cfg, "noise.sigma_x=1"), cli::ConfigError);
  CHECK_THROWS_AS(cli::apply_override(cfg, "noise.sigma_lidar"), cli::ConfigError);
  CHECK_THROWS_AS(cli::apply_override(cfg, "=3"), cli::ConfigError);
}

TEST_CASE("experiment_from_config maps presets and validates ranges") {
  json cfg = cli::default_config();
  cfg["seed"] = 9;
  auto exp = cli::experiment_from_config(cfg);
  CHECK(exp.build.density == 0.4);
  CHECK(exp.build.edge.success_threshold == 0.9);
  CHECK(exp.build.edge.attempts == 20);
  CHECK(exp.build.connection_distance == 10.0);
  CHECK(exp.nav.goal_radius == 0.25);
  CHECK(exp.exec_policy.name == exp.build_policy.name);
  CHECK(exp.env.lidar.n_rays == 64);
  CHECK(exp.env.map_id == "office");

  cfg["build"]["preset"] = "dense";
  cfg["policy"]["exec"] = "dwa";
  cfg["policy"]["dwa"]["margin"] = 0.05;
  exp = cli::experiment_from_config(cfg);
  CHECK(exp.build.density == 1.0);
  CHECK(exp.build.edge.success_threshold == 1.0);
  CHECK(exp.exec_policy.name == "dwa");
  CHECK(exp.exec_policy.dwa.margin == 0.05);

  for (const char* bad : {"noise.sigma_lidar=-0.1", "build.attempts=0", "build.success_threshold=1.5",
                          "robot.model=tank", "policy.build=neural", "build.preset=medium", "workers=-2",
                          "lidar.n_rays=1", "map.world=moon"}) {
    json c = cli::default_config();
    cli::apply_override(c, bad);
    CHECK_THROWS(cli::experiment_from_config(c));
  }
}

TEST_CASE("write_file_atomic leaves no temporary behind") {
  const auto dir = scratch("atomic");
  cli::write_file_atomic(dir / "sub" / "a.txt", "hello");
  CHECK(slurp(dir / "sub" / "a.txt") == "hello");
  cli::write_file_atomic(dir / "sub" / "a.txt", "bye");
  CHECK(slurp(dir / "sub" / "a.txt") == "bye");
  CHECK_FALSE(fs::exists(dir / "sub" / "a.txt.tmp"));
  fs::remove_all(dir);
}

TEST_CASE("analyze prints formula values") {
  auto r = run_cli({"analyze", "expected-success", "18", "20"});
  CHECK(r.code == cli::kOk);
  CHECK(r.out == "0.8636363636\n");
  r = run_cli({"analyze", "path-success", "0.8636", "10.25"});
  CHECK(std::stod(r.out) == doctest::Approx(0.222).epsilon(0.01));
  r = run_cli({"analyze", "survival", "0.3", "0.15", "2", "20", "0.2"});
  CHECK(std::stod(r.out) == doctest::Approx(survival_probability(0.3, 0.15, 2, 20, 0.2)).epsilon(1e-9));
  r = run_cli({"analyze", "connectivity", "0.5", "0.5"});
  CHECK(r.out == "1.75\n");
  CHECK(run_cli({"analyze", "cost", "100", "1", "10", "20", "0.2"}).out.find("nodes 100") == 0);

  CHECK(run_cli({"analyze", "expected-success", "18", "x"}).code == cli::kUsage);
  CHECK(run_cli({"analyze", "expected-success", "21", "20"}).code == cli::kUsage);
  CHECK(run_cli({"analyze", "expected-success", "18"}).code == cli::kUsage);
  CHECK(run_cli({"analyze", "nonsense"}).code == cli::kUsage);
  CHECK(run_cli({"analyze"}).code == cli::kUsage);
}

TEST_CASE("usage errors exit 2") {
  CHECK(run_cli({}).code == cli::kUsage);
  CHECK(run_cli({"fly"}).code == cli::kUsage);
  const auto missing = run_cli({"build", "--config", "/nonexistent/cfg.json"});
  CHECK(missing.code == cli::kUsage);
  CHECK(run_cli({"navigate", "--start", "1,1"}).code == cli::kUsage);
  CHECK(run_cli({"--help"}).code == cli::kOk);

  const auto dir = scratch("usage");
  const auto img = run_cli({"build", "-o", dir.string(), "--seed", "1", "-s", "map.image=" + (dir / "x.pgm").string(),
                            "-s", "map.meta=" + (dir / "x.yaml").string()});
  CHECK(img.code == cli::kUsage);
  CHECK(img.err.find((dir / "x.pgm").string()) != std::string::npos);
  fs::remove_all(dir);
}

TEST_CASE("build, navigate, export and analyze a small roadmap") {
  const auto dir = scratch("pipeline");
  const std::vector<std::string> common{"-o", dir.string(), "--seed", "4", "-s", "map.world=split",
                                        "-s", "policy.build=straight_line", "-s", "build.density=0.1",
                                        "-s", "build.connection_distance=4"};
  auto args = common;
  args.insert(args.begin(), "build");
  const auto b = run_cli(args);
  REQUIRE(b.code == cli::kOk);
  CHECK(fs::exists(dir / "roadmap.bin"));
  CHECK(fs::exists(dir / "build_report.txt"));
  CHECK(b.out.find("collision_checks") != std::string::npos);
  const std::string first = slurp(dir / "roadmap.bin");
  REQUIRE(run_cli(args).code == cli::kOk);
  CHECK(slurp(dir / "roadmap.bin") == first);

  auto nav = [&](const std::string& s, const std::string& g) {
    auto a = common;
    a.insert(a.begin(), "navigate");
    a.insert(a.end(), {"--start", s, "--goal", g});
    return run_cli(a);
  };
  const auto same = nav("2,5", "2,5");
  CHECK(same.code == cli::kOk);
  CHECK(same.out.find("outcome success") != std::string::npos);
  CHECK(same.out.find("steps 0") != std::string::npos);

  const auto blocked = nav("2,5", "8,5");
  CHECK(blocked.code == cli::kNavFailed);
  CHECK(blocked.out.find("outcome collision") != std::string::npos);
  const std::string svg = slurp(dir / "navigate.svg");
  std::size_t polylines = 0;
  for (auto p = svg.find("<polyline"); p != std::string::npos; p = svg.find("<polyline", p + 1)) ++polylines;
  CHECK(polylines == 1);
  CHECK(slurp(dir / "trajectory.csv").rfind("t,x,y,theta,v,w,min_clearance\n", 0) == 0);

  CHECK(nav("5,5", "8,5").code == cli::kPrecondition);
  CHECK(nav("2;5", "8,5").code == cli::kUsage);

  const auto ex = run_cli({"export", (dir / "roadmap.bin").string()});
  CHECK(ex.code == cli::kOk);
  CHECK(ex.out.find("meta map_id split") != std::string::npos);
  const auto an = run_cli({"analyze", "roadmap", (dir / "roadmap.bin").string()});
  CHECK(an.code == cli::kOk);
  CHECK(an.out.find("predicted") != std::string::npos);
  CHECK(run_cli({"export", (dir / "none.bin").string()}).code == cli::kUsage);
  fs::remove_all(dir);
}

TEST_CASE("eval writes identical CSVs for the same seed") {
  const auto dir = scratch("eval");
  const std::vector<std::string> args{"eval", "-o", dir.string(), "--seed", "6", "-s", "map.world=empty",
                                      "-s", "policy.build=straight_line", "-s", "build.density=0.05",
                                      "-s", "queries.count=5", "-s", "queries.d_max=8"};
  const auto a = run_cli(args);
  REQUIRE(a.code == cli::kOk);
  const std::string csv = slurp(dir / "metrics.csv");
  CHECK(csv.find("prm,success_pct,") != std::string::npos);
  CHECK(csv.find("prm,time_plan_s,NA") != std::string::npos);
  for (const auto& name : metric_names()) CHECK(csv.find("prm," + name + ",") != std::string::npos);
  REQUIRE(run_cli(args).code == cli::kOk);
  CHECK(slurp(dir / "metrics.csv") == csv);
  fs::remove_all(dir);
}

TEST_CASE("sweep prints a trend line and per-value files") {
  const auto dir = scratch("sweep");
  const auto r = run_cli({"sweep", "-o", dir.string(), "--seed", "2", "-s", "map.world=empty", "-s",
                          "policy.build=straight_line", "-s", "build.density=0.05", "-s", "queries.count=3", "-s",
                          "queries.d_max=6", "--axis", "sigma_goal", "--values", "0,0.9"});
  REQUIRE(r.code == cli::kOk);
  CHECK(r.out.find("trend: success") != std::string::npos);
  CHECK(fs::exists(dir / "sweep_sigma_goal.csv"));
  CHECK(fs::exists(dir / "sweep_sigma_goal_0.csv"));
  CHECK(fs::exists(dir / "sweep_sigma_goal_1.csv"));
  CHECK(run_cli({"sweep", "-o", dir.string(), "--seed", "2", "--axis", "speed", "--values", "1"}).code ==
        cli::kUsage);
  fs::remove_all(dir);
}
