#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>

#include "prmrl/errors.hpp"
#include "prmrl/policies.hpp"
#include "prmrl/roadmap.hpp"
#include "prmrl/worlds.hpp"

using namespace prmrl;

namespace {

std::shared_ptr<const Policy> straight() { return make_policy(PolicySpec::named("straight_line"), ActuatorLimits{}); }

using PointPair = std::pair<std::pair<double, double>, std::pair<double, double>>;

// Edges keyed by endpoint coordinates so roadmaps with different numbering compare.
std::map<PointPair, RoadmapEdge> edges_by_points(const Roadmap& rm) {
  std::map<PointPair, RoadmapEdge> out;
  for (const auto& e : rm.edges) {
    const Point2 &a = rm.nodes[e.from], &b = rm.nodes[e.to];
    out[{{a.x(), a.y()}, {b.x(), b.y()}}] = e;
  }
  return out;
}

// P(X >= k) for X ~ Bin(n, p), summed term by term.
double binomial_tail(int n, int k, double p) {
  double total = 0.0;
  for (int x = k; x <= n; ++x) {
    double c = 1.0;
    for (int i = 1; i <= x; ++i) c = c * (n - x + i) / i;
    total += c * std::pow(p, x) * std::pow(1.0 - p, n - x);
  }
  return total;
}

// Smallest clearance along a segment sampled every centimetre; -1 if any sample is blocked.
double segment_clearance(const InflatedGrid& g, const Point2& a, const Point2& b) {
  const int n = static_cast<int>(std::ceil(distance(a, b) / 0.01));
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i <= n; ++i) {
    const Point2 p = a + (b - a) * (static_cast<double>(i) / n);
    if (!is_free(g, p)) return -1.0;
    best = std::min(best, g.clearance(p) - g.radius());
  }
  return best;
}

Roadmap sample_roadmap() {
  Roadmap rm;
  rm.nodes = {Point2(1.25, 2.5), Point2(3.0, -4.0), Point2(1e-300, 7.75)};
  rm.edges = {{0, 1, 0.95, 7.1, 20}, {1, 2, 1.0, 12.0, 20}, {2, 0, 0.9500000001, 5.5, 20}};
  rm.meta.map_id = "office";
  rm.meta.policy = "scripted_p2p";
  rm.meta.density = 0.4;
  rm.meta.connection_distance = 10.0;
  rm.meta.success_threshold = 0.9;
  rm.meta.attempts = 20;
  rm.meta.goal_radius = 0.25;
  rm.meta.max_steps = 0;
  rm.meta.master_seed = 0xdeadbeefcafeULL;
  rm.meta.sampled_nodes = 17;
  rm.meta.candidate_edges = 90;
  rm.meta.rollouts = 1234;
  rm.meta.collision_checks = 987654321;
  return rm;
}

}  // namespace

TEST_CASE("sample_nodes: count follows density times free area") {
  const auto inf = inflate(worlds::empty(10, 10), 0.0);
  REQUIRE(inf.free_area() == doctest::Approx(100.0));
  Rng rng(1);
  CHECK(sample_nodes(inf, 0.4, rng).size() == 40);
  CHECK(sample_nodes(inf, 1.0, rng).size() == 100);

  Rng a(5), b(5);
  const auto x = sample_nodes(inf, 0.4, a), y = sample_nodes(inf, 0.4, b);
  CHECK(x == y);

  // Distinct cells, all free.
  std::set<std::pair<int, int>> cells;
  for (const auto& p : x) {
    CHECK(is_free(inf, p));
    const CellIndex c = *inf.base().world_to_cell(p);
    cells.insert({c.col, c.row});
  }
  CHECK(cells.size() == x.size());
}

TEST_CASE("sample_nodes: preconditions") {
  Rng rng(1);
  const auto inf = inflate(worlds::empty(1, 1), 0.0);
  CHECK_THROWS_AS(sample_nodes(inf, 0.0, rng), PreconditionError);
  CHECK_THROWS_AS(sample_nodes(inf, 200.0, rng), PreconditionError);
  const auto full = inflate(OccupancyGrid::from_rows({"###", "###"}, 0.5), 0.0);
  CHECK_THROWS_AS(sample_nodes(full, 1.0, rng), SamplingExhausted);
}

TEST_CASE("candidate_edges: threshold and direction") {
  const std::vector<Point2> near{Point2(0, 0), Point2(5, 0)};
  const auto both = candidate_edges(near, 10.0);
  REQUIRE(both.size() == 2);
  CHECK(both[0] == std::pair<std::uint32_t, std::uint32_t>{0, 1});
  CHECK(both[1] == std::pair<std::uint32_t, std::uint32_t>{1, 0});
  CHECK(candidate_edges(near, 10.0, false).size() == 1);
  CHECK(candidate_edges({Point2(0, 0), Point2(10.01, 0)}, 10.0).empty());
  CHECK_THROWS_AS(candidate_edges(near, 0.0), PreconditionError);
}

TEST_CASE("candidate_edges matches brute force") {
  Rng rng(17);
  for (int trial = 0; trial < 40; ++trial) {
    const int n = 1 + static_cast<int>(uniform(rng, 0, 150));
    const double d = uniform(rng, 0.5, 12.0);
    std::vector<Point2> nodes;
    for (int i = 0; i < n; ++i) nodes.emplace_back(uniform(rng, -30, 30), uniform(rng, -30, 30));
    std::vector<std::pair<std::uint32_t, std::uint32_t>> brute;
    for (std::uint32_t i = 0; i < nodes.size(); ++i)
      for (std::uint32_t j = 0; j < nodes.size(); ++j)
        if (i != j && (nodes[i] - nodes[j]).squaredNorm() <= d * d) brute.emplace_back(i, j);
    CHECK(candidate_edges(nodes, d) == brute);
  }
}

TEST_CASE("validate_edge: p_s 0.9, n 20 rejects at the third failure") {
  EdgeValidationParams p;
  int calls = 0;
  const auto c = validate_edge(
      [&](int) {
        ++calls;
        return TrialOutcome{false, 0.0, 1};
      },
      p);
  CHECK_FALSE(c.accepted);
  CHECK(c.terminated_early);
  CHECK(c.rollouts_run == 3);
  CHECK(calls == 3);
  CHECK(c.success_rate == 0.0);

  // Two failures are tolerated: 18/20 is not strictly above 0.9.
  const auto two = validate_edge([](int k) { return TrialOutcome{k >= 2, 1.0, 1}; }, p);
  CHECK_FALSE(two.terminated_early);
  CHECK(two.rollouts_run == 20);
  CHECK(two.success_rate == doctest::Approx(0.9));
  CHECK_FALSE(two.accepted);

  const auto one = validate_edge([](int k) { return TrialOutcome{k != 7, 2.0 + k, 1}; }, p);
  CHECK(one.accepted);
  CHECK(one.success_rate == doctest::Approx(0.95));
  double mean = 0.0;
  for (int k = 0; k < 20; ++k)
    if (k != 7) mean += 2.0 + k;
  CHECK(one.mean_length == doctest::Approx(mean / 19));
}

TEST_CASE("validate_edge: p_s 1.0 rejects on the first failure") {
  EdgeValidationParams p;
  p.success_threshold = 1.0;
  const auto c = validate_edge([](int k) { return TrialOutcome{k != 4, 1.0, 1}; }, p);
  CHECK_FALSE(c.accepted);
  CHECK(c.rollouts_run == 5);
  CHECK(c.failures == 1);
  const auto all = validate_edge([](int) { return TrialOutcome{true, 1.0, 1}; }, p);
  CHECK(all.accepted);
  CHECK(all.success_rate == 1.0);
}

TEST_CASE("validate_edge: preconditions") {
  EdgeValidationParams p;
  p.attempts = 0;
  CHECK_THROWS_AS(validate_edge([](int) { return TrialOutcome{}; }, p), PreconditionError);
  p.attempts = 20;
  p.success_threshold = 1.5;
  CHECK_THROWS_AS(validate_edge([](int) { return TrialOutcome{}; }, p), PreconditionError);
}

TEST_CASE("validate_edge: Bernoulli(0.7) acceptance follows the binomial tail") {
  EdgeValidationParams p;
  const int edges = 10000;
  int accepted = 0;
  for (int e = 0; e < edges; ++e) {
    const auto c = validate_edge(
        [&](int k) {
          Rng rng(trial_seed(derive_seed(99, {static_cast<std::uint64_t>(e)}), k));
          return TrialOutcome{uniform(rng, 0.0, 1.0) < 0.7, 1.0, 1};
        },
        p);
    CHECK(c.rollouts_run <= p.attempts);
    if (c.accepted) {
      CHECK(c.success_rate > p.success_threshold);
      ++accepted;
    }
  }
  const double q = binomial_tail(20, 19, 0.7);
  CHECK(q == doctest::Approx(20 * std::pow(0.7, 19) * 0.3 + std::pow(0.7, 20)));
  const double sigma = std::sqrt(q * (1 - q) / edges);
  CHECK(std::abs(static_cast<double>(accepted) / edges - q) <= 3 * sigma);
}

TEST_CASE("validate_edge: early termination never changes the verdict") {
  Rng pick(3);
  for (int e = 0; e < 2000; ++e) {
    EdgeValidationParams p;
    p.success_threshold = e % 2 == 0 ? 0.9 : (e % 3 == 0 ? 1.0 : uniform(pick, 0.0, 1.0));
    p.attempts = 1 + e % 25;
    const double prob = uniform(pick, 0.5, 1.0);
    const auto trial = [&](int k) {
      Rng rng(trial_seed(static_cast<std::uint64_t>(e), k));
      return TrialOutcome{uniform(rng, 0.0, 1.0) < prob, 1.0, 1};
    };
    const auto on = validate_edge(trial, p);
    p.early_termination = false;
    const auto off = validate_edge(trial, p);
    CHECK(on.accepted == off.accepted);
    CHECK(on.rollouts_run <= off.rollouts_run);
    if (on.accepted) CHECK(on.success_rate == off.success_rate);
  }
}

TEST_CASE("add_edge: collision checks are bounded by K times n") {
  NoiseConfig nz;
  nz.sigma_v = 0.3;
  nz.sigma_w = 0.3;
  const auto env = Environment::make(worlds::office(), {}, nz);
  EdgeValidationParams p;
  p.max_steps = 40;
  p.early_termination = false;
  Rng pick(2);
  for (int i = 0; i < 10; ++i) {
    const Point2 a = sample_free(env.inflated(), pick), b = sample_free(env.inflated(), pick);
    const auto c = add_edge(a, b, *straight(), env, p, 100 + i);
    CHECK(c.rollouts_run == p.attempts);
    CHECK(c.collision_checks <= static_cast<std::uint64_t>(p.max_steps) * p.attempts);
    CHECK(c.collision_checks > 0);
  }
}

TEST_CASE("build_roadmap: empty map with a straight-line policy accepts every candidate") {
  const auto env = Environment::make(worlds::empty(10, 10), {}, {}, "empty");
  BuildParams bp = BuildParams::dense();
  bp.density = 0.2;
  bp.master_seed = 11;
  const auto rep = build_roadmap(env, *straight(), bp);
  const Roadmap& rm = rep.roadmap;
  CHECK(rm.meta.sampled_nodes == 20);
  CHECK(rm.edge_count() == rm.meta.candidate_edges);
  CHECK(rm.node_count() == rm.meta.sampled_nodes);
  for (const auto& e : rm.edges) {
    CHECK(e.success_rate == 1.0);
    CHECK(e.attempts == 20);
  }
  CHECK(rm.meta.rollouts == 20 * rm.meta.candidate_edges);
  CHECK(rm.meta.collision_checks >= rm.meta.rollouts);
  CHECK(rm.meta.map_id == "empty");
  CHECK(rm.meta.policy == "straight_line");
  CHECK(rep.warnings.empty());
}

TEST_CASE("build_roadmap: output is identical for any worker count") {
  NoiseConfig nz;
  nz.sigma_v = 0.2;
  nz.sigma_w = 0.2;
  const auto env = Environment::make(worlds::office(), {}, nz, "office");
  BuildParams bp;
  bp.density = 0.06;
  bp.connection_distance = 5.0;
  bp.master_seed = 21;
  std::string reference;
  for (int w : {1, 4, 16}) {
    bp.workers = w;
    const std::string bytes = serialize_roadmap(build_roadmap(env, *straight(), bp).roadmap);
    if (reference.empty()) reference = bytes;
    CHECK(bytes == reference);
  }
}

TEST_CASE("build_roadmap: no edge crosses a solid wall") {
  const auto env = Environment::make(worlds::split(10, 6), {}, {}, "split");
  BuildParams bp;
  bp.master_seed = 5;
  const auto rm = build_roadmap(env, *straight(), bp).roadmap;
  CHECK(rm.edge_count() > 0);
  for (const auto& e : rm.edges) CHECK((rm.nodes[e.from].x() < 5.0) == (rm.nodes[e.to].x() < 5.0));
}

TEST_CASE("build_roadmap: stored edges satisfy the roadmap invariants") {
  NoiseConfig nz;
  nz.sigma_v = 0.2;
  nz.sigma_w = 0.2;
  const auto env = Environment::make(worlds::office(), {}, nz, "office");
  BuildParams bp;
  bp.density = 0.08;
  bp.connection_distance = 6.0;
  bp.master_seed = 8;
  const auto rm = build_roadmap(env, *straight(), bp).roadmap;
  REQUIRE(rm.edge_count() > 0);
  CHECK(rm.edge_count() < rm.meta.candidate_edges);
  for (const auto& p : rm.nodes) CHECK(is_free(env.inflated(), p));
  std::vector<bool> used(rm.node_count(), false);
  for (std::size_t k = 0; k < rm.edges.size(); ++k) {
    const auto& e = rm.edges[k];
    const double d = distance(rm.nodes[e.from], rm.nodes[e.to]);
    CHECK(e.success_rate > bp.edge.success_threshold);
    CHECK(e.mean_length >= d - bp.edge.goal_radius);
    CHECK(d <= bp.connection_distance);
    CHECK(e.from != e.to);
    used[e.from] = used[e.to] = true;
    if (k > 0) CHECK(std::tie(rm.edges[k - 1].from, rm.edges[k - 1].to) < std::tie(e.from, e.to));
  }
  for (bool u : used) CHECK(u);
}

TEST_CASE("build_roadmap: stored edges replay from their recorded stream") {
  NoiseConfig nz;
  nz.sigma_v = 0.2;
  nz.sigma_w = 0.2;
  const auto env = Environment::make(worlds::office(), {}, nz, "office");
  BuildParams bp;
  bp.density = 0.06;
  bp.connection_distance = 5.0;
  bp.master_seed = 31;
  const auto rm = build_roadmap(env, *straight(), bp).roadmap;
  REQUIRE(rm.edge_count() > 0);

  Rng node_rng = make_rng(bp.master_seed, {stream::kNodes});
  const auto sampled = sample_nodes(env.inflated(), bp.density, node_rng);
  const auto cand = candidate_edges(sampled, bp.connection_distance);
  std::map<std::pair<double, double>, std::uint32_t> index;
  for (std::uint32_t i = 0; i < sampled.size(); ++i) index[{sampled[i].x(), sampled[i].y()}] = i;
  for (const auto& e : rm.edges) {
    const Point2 &a = rm.nodes[e.from], &b = rm.nodes[e.to];
    const std::pair<std::uint32_t, std::uint32_t> key{index.at({a.x(), a.y()}), index.at({b.x(), b.y()})};
    const auto it = std::lower_bound(cand.begin(), cand.end(), key);
    REQUIRE(it != cand.end());
    REQUIRE(*it == key);
    const auto ordinal = static_cast<std::uint64_t>(it - cand.begin());
    const auto c = add_edge(a, b, *straight(), env, bp.edge, edge_stream_seed(bp.master_seed, ordinal));
    CHECK(c.accepted);
    CHECK(c.success_rate == e.success_rate);
    CHECK(c.mean_length == e.mean_length);
  }
}

TEST_CASE("build_roadmap: a stricter threshold keeps a subset of edges") {
  NoiseConfig nz;
  nz.sigma_v = 0.25;
  nz.sigma_w = 0.25;
  const auto env = Environment::make(worlds::office(), {}, nz, "office");
  BuildParams bp;
  bp.density = 0.06;
  bp.connection_distance = 5.0;
  bp.master_seed = 41;
  const auto loose = edges_by_points(build_roadmap(env, *straight(), bp).roadmap);
  bp.edge.success_threshold = 1.0;
  const auto strict = edges_by_points(build_roadmap(env, *straight(), bp).roadmap);
  CHECK_FALSE(strict.empty());
  for (const auto& [k, e] : strict) {
    REQUIRE(loose.count(k) == 1);
    CHECK(loose.at(k) == e);
  }
  CHECK(strict.size() <= loose.size());
}

TEST_CASE("build_roadmap: early termination changes cost, not edges") {
  NoiseConfig nz;
  nz.sigma_v = 0.25;
  nz.sigma_w = 0.25;
  const auto env = Environment::make(worlds::office(), {}, nz, "office");
  BuildParams bp;
  bp.density = 0.06;
  bp.connection_distance = 5.0;
  bp.master_seed = 51;
  const auto on = build_roadmap(env, *straight(), bp).roadmap;
  bp.edge.early_termination = false;
  const auto off = build_roadmap(env, *straight(), bp).roadmap;
  CHECK(on.nodes == off.nodes);
  CHECK(on.edges == off.edges);
  CHECK(on.meta.rollouts < off.meta.rollouts);
  CHECK(off.meta.rollouts == off.meta.candidate_edges * 20);
}

TEST_CASE("build_roadmap: undirected validation stores both directions") {
  const auto env = Environment::make(worlds::empty(8, 8));
  BuildParams bp;
  bp.density = 0.1;
  bp.validate_reverse = false;
  const auto rm = build_roadmap(env, *straight(), bp).roadmap;
  REQUIRE(rm.edge_count() > 0);
  const auto by = edges_by_points(rm);
  for (const auto& [k, e] : by) {
    const auto rev = by.find({k.second, k.first});
    REQUIRE(rev != by.end());
    CHECK(rev->second.success_rate == e.success_rate);
    CHECK(rev->second.mean_length == e.mean_length);
  }
  CHECK(rm.meta.rollouts == rm.meta.candidate_edges * 20);
}

TEST_CASE("build_roadmap: short-range policy warns") {
  PolicySpec s = PolicySpec::named("straight_line");
  s.straight_line.range = 3.0;
  const auto pol = make_policy(s, ActuatorLimits{});
  BuildParams bp;
  bp.density = 0.05;
  const auto rep = build_roadmap(Environment::make(worlds::empty(6, 6)), *pol, bp);
  CHECK(rep.warnings.size() == 1);
}

TEST_CASE("roadmap binary format round-trips and detects damage") {
  const Roadmap rm = sample_roadmap();
  const auto path = std::filesystem::temp_directory_path() / "prmrl_test_roadmap.bin";
  save_roadmap(rm, path);
  CHECK(load_roadmap(path) == rm);

  const std::string bytes = serialize_roadmap(rm);
  CHECK(deserialize_roadmap(bytes) == rm);
  CHECK_THROWS_AS(deserialize_roadmap(bytes.substr(0, bytes.size() - 5)), ChecksumError);
  CHECK_THROWS_AS(deserialize_roadmap(bytes.substr(0, 10)), ChecksumError);
  std::string flipped = bytes;
  flipped[bytes.size() / 2] ^= 0x10;
  CHECK_THROWS_AS(deserialize_roadmap(flipped), ChecksumError);
  std::string version = bytes;
  version[8] = 2;
  CHECK_THROWS_AS(deserialize_roadmap(version), VersionError);
  CHECK_THROWS_AS(deserialize_roadmap("not a roadmap at all"), FormatError);

  {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size() - 1));
  }
  CHECK_THROWS_AS(load_roadmap(path), ChecksumError);
  std::filesystem::remove(path);
}

TEST_CASE("roadmap text export round-trips losslessly") {
  const Roadmap rm = sample_roadmap();
  std::stringstream text;
  export_roadmap_text(rm, text);
  CHECK(import_roadmap_text(text) == rm);
}

TEST_CASE("connect_query_point: a coincident point reuses the node") {
  const auto env = Environment::make(worlds::empty(10, 10));
  Roadmap rm;
  rm.nodes = {Point2(2, 2), Point2(5, 5)};
  AugmentedRoadmap g(rm);
  const auto a = connect_query_point(g, Point2(5, 5), *straight(), env, {}, 1);
  CHECK(a.reused);
  CHECK(a.id == 1);
  CHECK(a.edges_added == 0);
  CHECK(g.node_count() == 2);
  CHECK(g.extra_edges().empty());
}

TEST_CASE("connect_query_point: a point in collision throws") {
  const auto env = Environment::make(worlds::split(10, 6));
  Roadmap rm;
  AugmentedRoadmap g(rm);
  CHECK_THROWS_AS(connect_query_point(g, Point2(5, 3), *straight(), env, {}, 1), CollisionError);
}

TEST_CASE("connect_query_point: an isolated pocket gets no edges") {
  OccupancyGrid map = worlds::empty(10, 10);
  // Closed 2 m square ring, 0.2 m thick, around (8, 8).
  for (int r = 0; r < map.height(); ++r)
    for (int c = 0; c < map.width(); ++c) {
      const Point2 p = map.cell_center({c, r});
      const double m = std::max(std::abs(p.x() - 8.0), std::abs(p.y() - 8.0));
      if (m >= 0.8 && m <= 1.0) map.set({c, r}, Cell::Occupied);
    }
  const auto env = Environment::make(map);
  Roadmap rm;
  rm.nodes = {Point2(3, 3), Point2(5, 8), Point2(8, 4.5), Point2(3, 8)};
  AugmentedRoadmap g(rm);
  const auto a = connect_query_point(g, Point2(8, 8), *straight(), env, {}, 3);
  CHECK_FALSE(a.reused);
  CHECK(a.id == 4);
  CHECK(a.edges_added == 0);
  CHECK(a.collision_checks > 0);
  CHECK(g.node_count() == 5);
  CHECK(rm.nodes.size() == 4);
}

TEST_CASE("connect_query_point: connects exactly the line-of-sight nodes") {
  OccupancyGrid map = worlds::empty(20, 4);
  // A block across the lower corridor at x in [9, 10], y below 2.5.
  for (int r = 0; r < map.height(); ++r)
    for (int c = 0; c < map.width(); ++c) {
      const Point2 p = map.cell_center({c, r});
      if (p.x() >= 9.0 && p.x() <= 10.0 && p.y() <= 2.5) map.set({c, r}, Cell::Occupied);
    }
  const auto env = Environment::make(map);
  const Point2 query(5, 1);
  Roadmap rm;
  rm.nodes = {Point2(8, 1),   Point2(12, 1), Point2(3, 3),    Point2(14, 3.4), Point2(1, 1),
              Point2(14.5, 1), Point2(5, 3.4), Point2(16, 1), Point2(7, 3.4),  Point2(13, 3.4)};
  AugmentedRoadmap g(rm);
  AttachParams ap;
  const auto a = connect_query_point(g, query, *straight(), env, ap, 9);

  std::set<std::uint32_t> expected;
  for (std::uint32_t i = 0; i < rm.nodes.size(); ++i) {
    if (distance(query, rm.nodes[i]) > ap.connection_distance) continue;
    const double c = segment_clearance(env.inflated(), query, rm.nodes[i]);
    // Every test node is either blocked or clearly visible.
    REQUIRE((c < 0.0 || c > 0.15));
    if (c > 0.0) expected.insert(i);
  }
  REQUIRE(expected.size() >= 4);
  std::set<std::uint32_t> out, in;
  for (const auto& e : g.extra_edges()) {
    if (e.from == a.id) out.insert(e.to);
    if (e.to == a.id) in.insert(e.from);
  }
  CHECK(out == expected);
  CHECK(in == expected);
  CHECK(a.edges_added == static_cast<int>(2 * expected.size()));
  CHECK(rm.edges.empty());
}

TEST_CASE("query_path: adjacent nodes, cheaper route, fallback") {
  Roadmap rm;
  rm.nodes = {Point2(0, 0), Point2(1, 0), Point2(2, 0), Point2(3, 0), Point2(9, 9)};
  rm.edges = {{0, 1, 1, 5.0, 20}, {0, 2, 1, 6.0, 20}, {1, 3, 1, 5.0, 20}, {2, 3, 1, 6.0, 20}};
  AugmentedRoadmap g(rm);

  const auto adj = query_path(g, 0, 1);
  CHECK(adj.ids == std::vector<std::uint32_t>{0, 1});
  CHECK(adj.cost == 5.0);
  CHECK_FALSE(adj.fallback);

  const auto best = query_path(g, 0, 3);
  CHECK(best.ids == std::vector<std::uint32_t>{0, 1, 3});
  CHECK(best.cost == 10.0);
  REQUIRE(best.waypoints.size() == 3);
  CHECK(best.waypoints[2] == Point2(3, 0));

  // Directed: nothing leaves node 3.
  const auto back = query_path(g, 3, 0);
  CHECK(back.fallback);
  CHECK(back.ids == std::vector<std::uint32_t>{3, 0});
  CHECK(back.cost == doctest::Approx(3.0));

  const auto none = query_path(g, 0, 4);
  CHECK(none.fallback);
  CHECK(none.waypoints == std::vector<Point2>{Point2(0, 0), Point2(9, 9)});

  CHECK_THROWS_AS(query_path(g, 0, 5), PreconditionError);
}

TEST_CASE("query_path: equal-cost routes prefer the smaller predecessor id") {
  Roadmap rm;
  rm.nodes = {Point2(0, 0), Point2(1, 1), Point2(1, -1), Point2(2, 0)};
  rm.edges = {{0, 1, 1, 1.0, 20}, {0, 2, 1, 1.0, 20}, {1, 3, 1, 1.0, 20}, {2, 3, 1, 1.0, 20}};
  AugmentedRoadmap g(rm);
  CHECK(query_path(g, 0, 3).ids == std::vector<std::uint32_t>{0, 1, 3});
}

TEST_CASE("query_path matches a Bellman-Ford oracle on random graphs") {
  Rng rng(23);
  for (int trial = 0; trial < 50; ++trial) {
    Roadmap rm;
    const int n = 2 + static_cast<int>(uniform(rng, 0, 30));
    for (int i = 0; i < n; ++i) rm.nodes.emplace_back(uniform(rng, 0, 10), uniform(rng, 0, 10));
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        if (i != j && uniform(rng, 0, 1) < 0.15)
          rm.edges.push_back({static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j), 1.0,
                              uniform(rng, 0.5, 10.0), 20});
    AugmentedRoadmap g(rm);
    // Attach one extra node with a single incoming edge to exercise query-local edges.
    const auto extra = g.add_node(Point2(5, 5));
    g.add_edge({0, extra, 1.0, 2.5, 20});

    const std::size_t total = g.node_count();
    std::vector<RoadmapEdge> all = rm.edges;
    all.insert(all.end(), g.extra_edges().begin(), g.extra_edges().end());
    for (std::uint32_t s = 0; s < total; ++s) {
      std::vector<double> dist(total, std::numeric_limits<double>::infinity());
      dist[s] = 0.0;
      for (std::size_t round = 0; round + 1 < total; ++round)
        for (const auto& e : all) dist[e.to] = std::min(dist[e.to], dist[e.from] + e.mean_length);
      for (std::uint32_t t = 0; t < total; ++t) {
        if (s == t) continue;
        const auto q = query_path(g, s, t);
        CHECK(q.fallback == !std::isfinite(dist[t]));
        if (q.fallback) continue;
        CHECK(q.cost == doctest::Approx(dist[t]).epsilon(1e-12));
        CHECK(q.ids.front() == s);
        CHECK(q.ids.back() == t);
        double walked = 0.0;
        for (std::size_t k = 0; k + 1 < q.ids.size(); ++k) {
          double w = std::numeric_limits<double>::infinity();
          for (const auto& e : all)
            if (e.from == q.ids[k] && e.to == q.ids[k + 1]) w = std::min(w, e.mean_length);
          walked += w;
        }
        CHECK(walked == doctest::Approx(q.cost).epsilon(1e-12));
      }
    }
  }
}
